#![no_main]

use libfuzzer_sys::fuzz_target;
use qsys::output::parse_json;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(rec) = parse_json(src) {
        let text = rec.to_json().expect("parsed record renders");
        let back = parse_json(&text).expect("rendered record reparses");
        assert_eq!(back.to_json().unwrap(), text);
    }
});
