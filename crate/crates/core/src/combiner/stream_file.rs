//! Keystream files.
//!
//! Binary (`.bits`): bit `t` packed MSB-first into byte `t / 8`, final byte
//! zero-padded. The length is not stored; readers take it from the caller
//! (for example a challenge bundle) or assume a whole number of bytes.
//!
//! Text: a `# keystream n=<N>` header, then `0`/`1` characters, 64 per line.
//! Other `#` lines and whitespace are ignored.

use crate::bits::BitBuf;
use crate::combiner::Keystream;
use crate::error::{Error, Result};

pub fn encode_keystream(ks: &Keystream) -> Vec<u8> {
    ks.bits().to_bytes_msb()
}

/// With `n = None` every byte is payload (`8 * len` bits).
pub fn decode_keystream(bytes: &[u8], n: Option<usize>) -> Result<Keystream> {
    let n = n.unwrap_or(bytes.len() * 8);
    let bits = BitBuf::from_bytes_msb(bytes, n).map_err(|_| {
        Error::parse_nl(format!(
            "keystream file holds {} bytes, {n} bits need {}",
            bytes.len(),
            n.div_ceil(8)
        ))
    })?;
    Ok(Keystream::new(bits))
}

pub fn encode_keystream_text(ks: &Keystream) -> String {
    let mut s = format!("# keystream n={}\n", ks.len());
    let text = ks.bits().to_text();
    for chunk in text.as_bytes().chunks(64) {
        s.push_str(std::str::from_utf8(chunk).expect("ascii"));
        s.push('\n');
    }
    s
}

pub fn decode_keystream_text(text: &str) -> Result<Keystream> {
    let mut declared = None;
    let mut bits = BitBuf::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let t = line.trim();
        if let Some(comment) = t.strip_prefix('#') {
            if let Some(n) = comment.trim().strip_prefix("keystream n=") {
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad length `{n}`")))?;
                if declared.replace(n).is_some() {
                    return Err(Error::parse(lineno, "duplicate keystream header"));
                }
            }
            continue;
        }
        for c in t.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => return Err(Error::parse(lineno, format!("unexpected character {c:?}"))),
            }
        }
    }
    if let Some(n) = declared {
        if n != bits.len() {
            return Err(Error::parse_nl(format!(
                "header declares {n} bits, file holds {}",
                bits.len()
            )));
        }
    }
    Ok(Keystream::new(bits))
}
