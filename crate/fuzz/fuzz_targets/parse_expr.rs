#![no_main]

use libfuzzer_sys::fuzz_target;
use qsys::expr::parse_expr;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse_expr(src) {
        let printed = e.to_string();
        let again = parse_expr(&printed).expect("printed expression reparses");
        assert_eq!(again.to_string(), printed);
        let _ = e.eval(0.5);
    }
});
