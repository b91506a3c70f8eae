#![no_main]

use cipherbent_cli::bundle::{format_bundle, parse_bundle};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(b) = parse_bundle(text) {
        let again = parse_bundle(&format_bundle(&b)).expect("formatted bundle reparses");
        assert_eq!(format_bundle(&again), format_bundle(&b));
    }
});
