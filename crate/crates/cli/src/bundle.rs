//! Challenge bundles: a combiner spec, a keystream file, its declared length
//! and a salted hash commitment to the key.
//!
//! ```text
//! format=cipherbent-challenge-1
//! name=toy6
//! spec=toy6.cbs
//! keystream=toy6.bits
//! n=12906
//! salt=7f3a…
//! commitment=sha256:2c1e…
//! ```
//!
//! Paths are relative to the bundle file. The commitment is
//! `SHA-256(salt || key_hex)` over the canonical lowercase key encoding.

use sha2::{Digest, Sha256};

use cipherbent_core::{Error, Result};

pub const FORMAT: &str = "cipherbent-challenge-1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChallengeBundle {
    pub name: String,
    pub spec: String,
    pub keystream: String,
    pub n: usize,
    pub salt: Vec<u8>,
    pub commitment: [u8; 32],
}

pub fn commit(salt: &[u8], key_hex: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(salt);
    h.update(key_hex.trim().to_ascii_lowercase().as_bytes());
    h.finalize().into()
}

impl ChallengeBundle {
    pub fn verify_commitment(&self, key_hex: &str) -> bool {
        commit(&self.salt, key_hex) == self.commitment
    }
}

pub fn format_bundle(b: &ChallengeBundle) -> String {
    format!(
        "format={FORMAT}\nname={}\nspec={}\nkeystream={}\nn={}\nsalt={}\ncommitment=sha256:{}\n",
        b.name,
        b.spec,
        b.keystream,
        b.n,
        hex::encode(&b.salt),
        hex::encode(b.commitment)
    )
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line: Some(line),
        message: message.into(),
    }
}

pub fn parse_bundle(text: &str) -> Result<ChallengeBundle> {
    let mut fields: Vec<(&str, &str, usize)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| perr(i + 1, "expected `key=value`"))?;
        if fields.iter().any(|(fk, _, _)| *fk == k) {
            return Err(perr(i + 1, format!("duplicate field `{k}`")));
        }
        fields.push((k, v, i + 1));
    }
    let get = |k: &str| -> Result<(&str, usize)> {
        fields
            .iter()
            .find(|(fk, _, _)| *fk == k)
            .map(|(_, v, l)| (*v, *l))
            .ok_or_else(|| Error::Parse {
                line: None,
                message: format!("bundle lacks `{k}`"),
            })
    };
    let (format, line) = get("format")?;
    if format != FORMAT {
        return Err(perr(line, format!("unsupported bundle format `{format}`")));
    }
    if let Some((k, _, line)) = fields
        .iter()
        .find(|(k, _, _)| !["format", "name", "spec", "keystream", "n", "salt", "commitment"].contains(k))
    {
        return Err(perr(*line, format!("unknown field `{k}`")));
    }
    let nonempty = |k: &str| -> Result<String> {
        let (v, line) = get(k)?;
        if v.is_empty() {
            return Err(perr(line, format!("empty `{k}`")));
        }
        Ok(v.to_string())
    };
    let (n, line) = get("n")?;
    let n = n.parse().map_err(|_| perr(line, format!("bad length `{n}`")))?;
    let (salt, line) = get("salt")?;
    let salt = hex::decode(salt).map_err(|e| perr(line, format!("bad salt: {e}")))?;
    let (c, line) = get("commitment")?;
    let digest = c
        .strip_prefix("sha256:")
        .ok_or_else(|| perr(line, "commitment must start with `sha256:`"))?;
    let commitment: [u8; 32] = hex::decode(digest)
        .ok()
        .and_then(|d| d.try_into().ok())
        .ok_or_else(|| perr(line, "commitment must be 64 hex characters"))?;
    Ok(ChallengeBundle {
        name: nonempty("name")?,
        spec: nonempty("spec")?,
        keystream: nonempty("keystream")?,
        n,
        salt,
        commitment,
    })
}
