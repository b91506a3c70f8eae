#![no_main]

use cipherbent_core::boolfun::AnfPolynomial;
use cipherbent_core::combiner::{decode_key, encode_key, CombinerSpec};
use cipherbent_core::nlfsr::parse_register_file;
use libfuzzer_sys::fuzz_target;

const REGISTERS: &str = "register A 3\nx0\nx1\nregister B 4\nx0\nx3\nregister C 5\nx0\nx2\n";

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let regs = parse_register_file(REGISTERS).unwrap();
    let f = AnfPolynomial::from_terms(3, &[&[0, 1], &[0, 2], &[1, 2]]).unwrap();
    let spec = CombinerSpec::new("maj3", regs, f).unwrap();
    if let Ok(key) = decode_key(text, &spec) {
        assert_eq!(encode_key(&key), text.trim().to_ascii_lowercase());
    }
});
