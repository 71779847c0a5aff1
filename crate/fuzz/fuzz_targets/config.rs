#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxlab_core::config::parse_config_str;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config_str(text) {
        // accepted configs must round-trip and hash
        let again = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_config_str(&again).unwrap(), cfg);
        cfg.hash().unwrap();
    }
});
