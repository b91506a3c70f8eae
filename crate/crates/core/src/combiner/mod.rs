//! Combiner generators: registers clocked in lockstep, one output cell tapped
//! from each, and the tapped bits fed through a Boolean combining function.
//!
//! Register `i` in a [`CombinerSpec`] drives combiner variable `x_i`. The
//! packed combiner input therefore has the first register in its least
//! significant bit.

mod key_codec;
mod spec_file;
mod stream_file;

use std::collections::HashSet;

use rand::Rng;

pub use key_codec::{decode_key, encode_key};
pub use spec_file::{format_combiner_spec, load_combiner_spec, parse_combiner_spec};
pub use stream_file::{decode_keystream, decode_keystream_text, encode_keystream, encode_keystream_text};

use crate::bits::BitBuf;
use crate::boolfun::{anf_to_truth_table, walsh_transform, AnfPolynomial, TruthTable, WalshSpectrum, MAX_TABLE_VARS};
use crate::error::{Error, Result};
use crate::nlfsr::{run_unchecked, RegisterSpec, RegisterState};

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerSpec {
    name: String,
    registers: Vec<RegisterSpec>,
    combiner: AnfPolynomial,
    table: TruthTable,
}

impl CombinerSpec {
    pub fn new(name: impl Into<String>, registers: Vec<RegisterSpec>, combiner: AnfPolynomial) -> Result<Self> {
        let name = name.into();
        if registers.is_empty() {
            return Err(Error::Validation("a combiner needs at least one register".into()));
        }
        if combiner.n_vars() != registers.len() {
            return Err(Error::Validation(format!(
                "combiner has {} variables but {} registers are wired",
                combiner.n_vars(),
                registers.len()
            )));
        }
        if registers.len() > MAX_TABLE_VARS {
            return Err(Error::Capacity(format!(
                "{} registers exceeds the combiner limit of {MAX_TABLE_VARS}",
                registers.len()
            )));
        }
        let mut seen = HashSet::new();
        for r in &registers {
            if !seen.insert(r.name()) {
                return Err(Error::Validation(format!("duplicate register name `{}`", r.name())));
            }
        }
        let table = anf_to_truth_table(&combiner)?;
        Ok(Self {
            name,
            registers,
            combiner,
            table,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn registers(&self) -> &[RegisterSpec] {
        &self.registers
    }

    pub fn register_index(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.name() == name)
    }

    pub fn combiner(&self) -> &AnfPolynomial {
        &self.combiner
    }

    pub fn truth_table(&self) -> &TruthTable {
        &self.table
    }

    pub fn walsh(&self) -> WalshSpectrum {
        walsh_transform(&self.table)
    }

    /// Total key length: the sum of register lengths.
    pub fn key_bits(&self) -> usize {
        self.registers.iter().map(|r| r.length()).sum()
    }

    /// Applies the combining function to a packed input (register `i` at bit `i`).
    #[inline]
    pub fn combine(&self, packed: usize) -> bool {
        self.table.get(packed)
    }
}

/// Initial cell contents of every register, in spec order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    states: Vec<RegisterState>,
}

impl Key {
    /// Rejects width mismatches (domain error) and all-zero registers
    /// (validation error).
    pub fn new(spec: &CombinerSpec, states: Vec<RegisterState>) -> Result<Self> {
        if states.len() != spec.registers.len() {
            return Err(Error::Domain(format!(
                "key has {} register states, spec has {} registers",
                states.len(),
                spec.registers.len()
            )));
        }
        for (r, s) in spec.registers.iter().zip(&states) {
            if s.width() != r.length() {
                return Err(Error::Domain(format!(
                    "state for `{}` has width {}, expected {}",
                    r.name(),
                    s.width(),
                    r.length()
                )));
            }
            if s.is_zero() {
                return Err(Error::Validation(format!(
                    "register `{}` is all-zero and would never leave the zero state",
                    r.name()
                )));
            }
        }
        Ok(Self { states })
    }

    pub fn states(&self) -> &[RegisterState] {
        &self.states
    }

    pub fn bit_len(&self) -> usize {
        self.states.iter().map(|s| s.width()).sum()
    }

    /// Register states concatenated in spec order, cell `x0` first.
    pub fn to_bitbuf(&self) -> BitBuf {
        let parts: Vec<BitBuf> = self.states.iter().map(|s| s.to_bitbuf()).collect();
        BitBuf::concat(&parts)
    }
}

/// Keystream bits `z_0 … z_(N-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Keystream {
    bits: BitBuf,
}

impl Keystream {
    pub fn new(bits: BitBuf) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &BitBuf {
        &self.bits
    }

    pub fn into_bits(self) -> BitBuf {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn prefix(&self, n: usize) -> Keystream {
        Keystream::new(self.bits.slice(0, n.min(self.len())))
    }
}

/// The first `n` keystream bits under `key`.
pub fn keystream(spec: &CombinerSpec, key: &Key, n: usize) -> Result<Keystream> {
    keystream_continue(spec, key, n).map(|(k, _)| k)
}

/// Like [`keystream`], also returning the register states after `n` clocks
/// so generation can resume where it stopped.
pub fn keystream_continue(spec: &CombinerSpec, key: &Key, n: usize) -> Result<(Keystream, Vec<RegisterState>)> {
    let key = Key::new(spec, key.states.clone())?;
    let mut seqs = Vec::with_capacity(spec.registers.len());
    let mut ends = Vec::with_capacity(spec.registers.len());
    for (r, s) in spec.registers.iter().zip(&key.states) {
        let (bits, end) = run_unchecked(r.compiled(), s.bits(), n);
        seqs.push(bits);
        ends.push(RegisterState::new(r.length(), end)?);
    }
    Ok((Keystream::new(combine_sequences(spec, &seqs, n)), ends))
}

/// Applies the combiner word-by-word to per-register output sequences.
pub(crate) fn combine_sequences(spec: &CombinerSpec, seqs: &[BitBuf], n: usize) -> BitBuf {
    let mut inputs = vec![0u64; seqs.len()];
    let words = (0..n.div_ceil(64))
        .map(|w| {
            for (slot, s) in inputs.iter_mut().zip(seqs) {
                *slot = s.words()[w];
            }
            spec.combiner.eval_words(&inputs)
        })
        .collect();
    BitBuf::from_words(words, n)
}

/// Uniform random nonzero state per register.
pub fn keygen<R: Rng + ?Sized>(spec: &CombinerSpec, rng: &mut R) -> Key {
    let states = spec
        .registers
        .iter()
        .map(|r| random_nonzero_state(r.length(), rng))
        .collect();
    Key { states }
}

pub(crate) fn random_nonzero_state<R: Rng + ?Sized>(width: usize, rng: &mut R) -> RegisterState {
    let mask = crate::bits::low_mask(width);
    loop {
        let v = rng.gen::<u64>() & mask;
        if v != 0 {
            return RegisterState::new(width, v).expect("masked to width");
        }
    }
}
