#![no_main]
use libfuzzer_sys::fuzz_target;
use sthawkes::catalog::io::{parse_latlon_csv, LoadConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(catalog) = parse_latlon_csv(data, &LoadConfig::default()) {
        assert!(catalog.is_sorted());
        assert!(catalog.calendar_anchor().is_some());
    }
});
