#![no_main]

use libfuzzer_sys::fuzz_target;
use tdd_core::harness::parse_graph;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(edges) = parse_graph(text) {
        assert!(edges.iter().all(|(u, v)| u != v));
        let printed: String = edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
        assert_eq!(parse_graph(&printed).unwrap(), edges);
    }
});
