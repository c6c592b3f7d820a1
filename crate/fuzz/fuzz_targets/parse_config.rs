#![no_main]

use libfuzzer_sys::fuzz_target;
use qsys::simulation::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_json(src) {
        let back = ExperimentConfig::from_json(&cfg.to_json()).expect("emitted config reparses");
        assert_eq!(back.to_json(), cfg.to_json());
    }
});
