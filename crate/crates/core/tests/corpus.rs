//! Replays the checked-in fuzz seeds through the fuzz targets' assertions.

use std::fs;
use std::path::PathBuf;

use tdd_core::harness::{parse_graph, parse_trace};
use tdd_core::minimal::CatalogCache;
use tdd_core::mso::parse;

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn mso_seeds_round_trip() {
    let mut accepted = 0;
    for (p, text) in seeds("mso_parse") {
        if let Ok(phi) = parse(&text) {
            accepted += 1;
            assert_eq!(parse(&phi.to_string()).unwrap(), phi, "{}", p.display());
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn trace_seeds_round_trip() {
    for (p, text) in seeds("trace_parse") {
        if let Ok(cmds) = parse_trace(&text) {
            let printed: String = cmds.iter().map(|c| format!("{c}\n")).collect();
            assert_eq!(parse_trace(&printed).unwrap(), cmds, "{}", p.display());
        }
    }
}

#[test]
fn graph_seeds_round_trip() {
    for (p, text) in seeds("graph_parse") {
        if let Ok(edges) = parse_graph(&text) {
            let printed: String = edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
            assert_eq!(parse_graph(&printed).unwrap(), edges, "{}", p.display());
        }
    }
}

#[test]
fn cache_seeds_load_and_resave() {
    for (p, text) in seeds("catalog_cache") {
        let cache = CatalogCache::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(CatalogCache::from_json(&cache.to_json()).unwrap(), cache);
    }
}
