//! Key interchange encoding: register states concatenated in spec order, each
//! state cell `x0` first, packed MSB-first into bytes with the last byte
//! zero-padded, rendered as lowercase hex. The full-scale 181-bit key is 23
//! bytes, 46 hex characters.

use crate::bits::BitBuf;
use crate::combiner::{CombinerSpec, Key};
use crate::error::{Error, Result};
use crate::nlfsr::RegisterState;

pub fn encode_key(key: &Key) -> String {
    hex::encode(key.to_bitbuf().to_bytes_msb())
}

/// Strict inverse of [`encode_key`]; accepts either hex case and surrounding
/// whitespace. Nonzero padding bits are rejected so every key has exactly one
/// encoding.
pub fn decode_key(text: &str, spec: &CombinerSpec) -> Result<Key> {
    let text = text.trim();
    let total = spec.key_bits();
    let want = total.div_ceil(8) * 2;
    if text.len() != want {
        return Err(Error::parse_nl(format!(
            "key for `{}` must be {want} hex characters ({total} bits), got {}",
            spec.name(),
            text.len()
        )));
    }
    let bytes = hex::decode(text).map_err(|e| Error::parse_nl(format!("bad key hex: {e}")))?;
    let bits = BitBuf::from_bytes_msb(&bytes, total)?;
    if bits.to_bytes_msb() != bytes {
        return Err(Error::parse_nl("key padding bits must be zero"));
    }
    let mut offset = 0;
    let mut states = Vec::with_capacity(spec.registers().len());
    for r in spec.registers() {
        let l = r.length();
        states.push(RegisterState::from_bitbuf(&bits.slice(offset, l))?);
        offset += l;
    }
    Key::new(spec, states)
}
