#![no_main]

use libfuzzer_sys::fuzz_target;
use tdd_core::mso::parse;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(phi) = parse(text) {
        let printed = phi.to_string();
        let again = parse(&printed).expect("printed formula must parse");
        assert_eq!(phi, again);
    }
});
