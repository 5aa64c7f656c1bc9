#![no_main]

use libfuzzer_sys::fuzz_target;
use tdd_core::harness::parse_trace;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cmds) = parse_trace(text) {
        let printed: String = cmds.iter().map(|c| format!("{c}\n")).collect();
        assert_eq!(parse_trace(&printed).unwrap(), cmds);
    }
});
