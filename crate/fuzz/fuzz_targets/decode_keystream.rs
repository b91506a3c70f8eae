#![no_main]

use cipherbent_core::combiner::{decode_keystream, decode_keystream_text, encode_keystream, encode_keystream_text};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Some((&n, rest)) = data.split_first() {
        if let Ok(z) = decode_keystream(rest, Some(usize::from(n))) {
            let again = decode_keystream(&encode_keystream(&z), Some(z.len())).unwrap();
            assert_eq!(again, z);
        }
    }
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(z) = decode_keystream_text(text) {
            assert_eq!(decode_keystream_text(&encode_keystream_text(&z)).unwrap(), z);
        }
    }
});
