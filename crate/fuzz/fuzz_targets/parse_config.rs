#![no_main]

use inflatelab::io::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text, None) {
        let echoed = RunConfig::from_json(&cfg.to_json_pretty(), None).unwrap();
        assert_eq!(echoed, cfg);
    }
});
