#![no_main]
use hdsched::files::{parse_network, NetworkFile};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok((net, label)) = parse_network(text) else {
        return;
    };
    // anything accepted must survive a write/read cycle bit for bit
    let written = NetworkFile::from_network(&net, label.clone()).to_json();
    let (back, back_label) = parse_network(&written).expect("re-parse of written file");
    assert_eq!(back_label, label);
    assert_eq!(
        NetworkFile::from_network(&back, back_label).to_json(),
        written
    );
});
