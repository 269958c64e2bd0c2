#![no_main]
use libfuzzer_sys::fuzz_target;
use sthawkes::catalog::io::{parse_planar_csv, LoadConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(catalog) = parse_planar_csv(data, &LoadConfig::default()) {
        assert!(catalog.is_sorted());
    }
});
