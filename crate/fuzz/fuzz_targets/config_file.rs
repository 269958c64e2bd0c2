#![no_main]
use libfuzzer_sys::fuzz_target;
use sthawkes::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = parse_config(text) {
        // rendering is parseable and stable
        let rendered = config.to_string();
        let again = parse_config(&rendered).expect("rendered config parses");
        assert_eq!(again.to_string(), rendered);
    }
});
