#![no_main]

use cipherbent_core::boolfun::{analyze, parse_anf};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = parse_anf(text, None) {
        if parsed.poly.n_vars() <= 10 {
            let _ = analyze(&parsed.poly);
        }
    }
});
