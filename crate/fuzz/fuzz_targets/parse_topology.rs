#![no_main]
use hdsched::generate::Topology;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(t) = data.parse::<Topology>() {
        assert_eq!(t.to_string(), data);
    }
});
