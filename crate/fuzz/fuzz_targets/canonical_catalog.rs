#![no_main]
use libfuzzer_sys::fuzz_target;
use sthawkes::catalog::io::{parse_canonical, parse_metadata};

// Input layout: metadata JSON, a NUL byte, then the planar CSV.
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == 0).unwrap_or(data.len());
    let Ok(metadata) = std::str::from_utf8(&data[..split]) else {
        return;
    };
    let _ = parse_metadata(metadata);
    let csv = data.get(split + 1..).unwrap_or(&[]);
    let _ = parse_canonical(csv, metadata);
});
