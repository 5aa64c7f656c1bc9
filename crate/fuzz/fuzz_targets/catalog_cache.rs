#![no_main]

use libfuzzer_sys::fuzz_target;
use tdd_core::minimal::CatalogCache;

// Loads arbitrary bytes as a cache file; anything accepted must survive a
// save/load cycle unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cache) = CatalogCache::from_json(text) {
        let again = CatalogCache::from_json(&cache.to_json()).unwrap();
        assert_eq!(again, cache);
    }
});
