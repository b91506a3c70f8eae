//! Support code for the `cipherbent` command: challenge bundles, keystream
//! file loading and the exit-code table.

pub mod bundle;
pub mod exit;

use cipherbent_core::bits::BitBuf;
use cipherbent_core::combiner::{decode_keystream, decode_keystream_text, Keystream};
use cipherbent_core::Result;

/// Decodes a keystream file, either the `01` text form or packed binary. A
/// binary file holds `declared` bits when given, otherwise eight per byte.
pub fn load_keystream_bytes(bytes: &[u8], declared: Option<usize>, text: bool) -> Result<Keystream> {
    if text {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| cipherbent_core::Error::Parse {
                line: None,
                message: "text keystream is not UTF-8".into(),
            })?;
        let z = decode_keystream_text(text)?;
        return match declared {
            Some(n) if n != z.len() => Err(cipherbent_core::Error::Validation(format!(
                "keystream file holds {} bits, {n} declared",
                z.len()
            ))),
            _ => Ok(z),
        };
    }
    match declared {
        Some(n) => decode_keystream(bytes, Some(n)),
        None => Ok(Keystream::new(BitBuf::from_bytes_msb(bytes, bytes.len() * 8)?)),
    }
}

/// Text keystreams are recognised by extension.
pub fn is_text_keystream_path(path: &std::path::Path) -> bool {
    path.extension().is_some_and(|e| e == "txt")
}
