#![no_main]
use libfuzzer_sys::fuzz_target;
use sthawkes::catalog::HolidayWindow;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(window) = HolidayWindow::parse(text) {
            assert_eq!(HolidayWindow::parse(&window.to_string()).unwrap(), window);
        }
    }
});
