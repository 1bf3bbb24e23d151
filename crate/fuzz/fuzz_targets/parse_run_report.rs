#![no_main]
use hdsched::files::parse_run_report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = parse_run_report(text) {
        let written = report.to_json();
        let back = parse_run_report(&written).expect("re-parse of written report");
        assert_eq!(back.to_json(), written);
    }
});
