#![no_main]

use cipherbent_core::nlfsr::{format_register_file, parse_register_file};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(specs) = parse_register_file(text) {
        let again = parse_register_file(&format_register_file(&specs)).expect("formatted file reparses");
        assert_eq!(specs.len(), again.len());
        for (a, b) in specs.iter().zip(&again) {
            assert_eq!(a.name(), b.name());
            assert_eq!(a.feedback(), b.feedback());
        }
    }
});
