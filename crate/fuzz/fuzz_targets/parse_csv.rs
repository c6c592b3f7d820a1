#![no_main]

use libfuzzer_sys::fuzz_target;
use qsys::output::parse_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(rec) = parse_csv(src, "fuzz/1") {
        let text = rec.to_csv().expect("parsed record renders");
        let back = parse_csv(&text, "fuzz/1").expect("rendered record reparses");
        assert_eq!(back.to_csv().unwrap(), text);
    }
});
