//! Ciphers as function words: compositions of named atomic maps on bit
//! vectors, with evaluation, identity checks and commutation checks for
//! candidate equivalences `tau' . w_e = w_e' . tau`.
//!
//! Factors are stored left to right and applied right to left, so the word
//! `[f, g]` maps `x` to `f(g(x))`. Bit vectors are [`BitBuf`]s; when a vector
//! is read as an integer, bit 0 is least significant.

pub mod catalog;

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitBuf;
use crate::error::{Error, Result};

/// Widest domain checked exhaustively.
pub const MAX_EXHAUSTIVE_WIDTH: usize = 20;

type Evaluator = dyn Fn(&BitBuf) -> BitBuf + Send + Sync;

/// A named total map from `in_width`-bit vectors to `out_width`-bit vectors,
/// optionally carrying the key it was instantiated with.
#[derive(Clone)]
pub struct AtomicFunction {
    name: String,
    in_width: usize,
    out_width: usize,
    key: Option<BitBuf>,
    eval: Arc<Evaluator>,
}

impl AtomicFunction {
    pub fn new(
        name: impl Into<String>,
        in_width: usize,
        out_width: usize,
        eval: impl Fn(&BitBuf) -> BitBuf + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            in_width,
            out_width,
            key: None,
            eval: Arc::new(eval),
        }
    }

    /// Records the key parameter; the evaluator is expected to close over it.
    pub fn with_key(mut self, key: BitBuf) -> Self {
        self.key = Some(key);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn in_width(&self) -> usize {
        self.in_width
    }

    pub fn out_width(&self) -> usize {
        self.out_width
    }

    pub fn key(&self) -> Option<&BitBuf> {
        self.key.as_ref()
    }

    /// Applies the map. Domain error when the input width is wrong; panics if
    /// the evaluator breaks its declared output width.
    pub fn apply(&self, x: &BitBuf) -> Result<BitBuf> {
        if x.len() != self.in_width {
            return Err(Error::Domain(format!(
                "`{}` takes {} bits, got {}",
                self.name,
                self.in_width,
                x.len()
            )));
        }
        let y = (self.eval)(x);
        assert_eq!(y.len(), self.out_width, "`{}` produced the wrong width", self.name);
        Ok(y)
    }
}

impl fmt::Debug for AtomicFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.name, self.in_width, self.out_width)
    }
}

/// A composition of atomic functions, leftmost applied last.
#[derive(Clone, Debug, Default)]
pub struct FunctionWord {
    factors: Vec<AtomicFunction>,
}

impl FunctionWord {
    /// The empty word, a two-sided identity for [`compose`].
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(f: AtomicFunction) -> Self {
        Self { factors: vec![f] }
    }

    /// Checks width compatibility at every seam.
    pub fn new(factors: Vec<AtomicFunction>) -> Result<Self> {
        for pair in factors.windows(2) {
            check_seam(&pair[0], &pair[1])?;
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[AtomicFunction] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Domain width, `None` for the empty word (any width).
    pub fn in_width(&self) -> Option<usize> {
        self.factors.last().map(|f| f.in_width)
    }

    pub fn out_width(&self) -> Option<usize> {
        self.factors.first().map(|f| f.out_width)
    }
}

impl fmt::Display for FunctionWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "Id");
        }
        let names: Vec<&str> = self.factors.iter().map(|a| a.name()).collect();
        write!(f, "{}", names.join("."))
    }
}

fn check_seam(left: &AtomicFunction, right: &AtomicFunction) -> Result<()> {
    if left.in_width != right.out_width {
        return Err(Error::Composition(format!(
            "`{}` takes {} bits but `{}` produces {}",
            left.name, left.in_width, right.name, right.out_width
        )));
    }
    Ok(())
}

/// `left . right`: concatenates the factor lists.
pub fn compose(left: &FunctionWord, right: &FunctionWord) -> Result<FunctionWord> {
    if let (Some(l), Some(r)) = (left.factors.last(), right.factors.first()) {
        check_seam(l, r)?;
    }
    let mut factors = left.factors.clone();
    factors.extend(right.factors.iter().cloned());
    Ok(FunctionWord { factors })
}

/// Right-to-left fold of the factors over `input`.
pub fn evaluate_word(w: &FunctionWord, input: &BitBuf) -> Result<BitBuf> {
    let mut x = input.clone();
    for f in w.factors.iter().rev() {
        x = f.apply(&x)?;
    }
    Ok(x)
}

/// How a check chooses its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    /// `samples` uniform inputs drawn from a ChaCha stream seeded by `seed`.
    Sampled { samples: u64, seed: u64 },
    /// Every input of the domain; widths up to [`MAX_EXHAUSTIVE_WIDTH`].
    Exhaustive,
}

/// An input on which the two sides of a check differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub input: BitBuf,
    pub left: BitBuf,
    pub right: BitBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub pass: bool,
    pub width: usize,
    /// Size of the input set (the check stops at the first counterexample).
    pub inputs: u64,
    pub exhaustive: bool,
    /// First failing input in enumeration order.
    pub counterexample: Option<Counterexample>,
}

/// Checks `w(x) = x`. `w` must map a width to itself.
pub fn verify_identity(w: &FunctionWord, mode: CheckMode) -> Result<CheckReport> {
    let width = match (w.in_width(), w.out_width()) {
        (None, None) => {
            return Ok(CheckReport {
                pass: true,
                width: 0,
                inputs: 0,
                exhaustive: true,
                counterexample: None,
            })
        }
        (Some(i), Some(o)) if i == o => i,
        (i, o) => {
            return Err(Error::Domain(format!(
                "identity check needs equal widths, word maps {} to {} bits",
                i.unwrap_or(0),
                o.unwrap_or(0)
            )))
        }
    };
    run_check(width, mode, |x| Ok((evaluate_word(w, x)?, x.clone())))
}

/// A candidate equivalence: the square `tau' . w_e = w_e' . tau`.
#[derive(Clone, Debug)]
pub struct EquivalenceCandidate {
    pub tau: AtomicFunction,
    pub tau_prime: AtomicFunction,
    pub w_e: FunctionWord,
    pub w_e_prime: FunctionWord,
}

impl EquivalenceCandidate {
    /// The two paths around the square, `(tau' . w_e, w_e' . tau)`.
    pub fn paths(&self) -> Result<(FunctionWord, FunctionWord)> {
        let upper = compose(&FunctionWord::single(self.tau_prime.clone()), &self.w_e)?;
        let lower = compose(&self.w_e_prime, &FunctionWord::single(self.tau.clone()))?;
        let upper_in = upper.in_width().expect("nonempty");
        let lower_in = lower.in_width().expect("nonempty");
        if upper_in != lower_in || upper.out_width() != lower.out_width() {
            return Err(Error::Composition(format!(
                "paths disagree on shape: {upper} is {upper_in} -> {:?}, {lower} is {lower_in} -> {:?}",
                upper.out_width(),
                lower.out_width()
            )));
        }
        Ok((upper, lower))
    }
}

/// Compares `tau'(w_e(x))` with `w_e'(tau(x))` over the plaintext domain.
pub fn check_commutation(c: &EquivalenceCandidate, mode: CheckMode) -> Result<CheckReport> {
    let (upper, lower) = c.paths()?;
    let width = upper.in_width().expect("nonempty");
    run_check(width, mode, |x| Ok((evaluate_word(&upper, x)?, evaluate_word(&lower, x)?)))
}

fn run_check<F>(width: usize, mode: CheckMode, sides: F) -> Result<CheckReport>
where
    F: Fn(&BitBuf) -> Result<(BitBuf, BitBuf)> + Sync,
{
    let (count, exhaustive) = match mode {
        CheckMode::Exhaustive => {
            if width > MAX_EXHAUSTIVE_WIDTH {
                return Err(Error::Capacity(format!(
                    "exhaustive check over {width} bits exceeds the limit of {MAX_EXHAUSTIVE_WIDTH}"
                )));
            }
            (1u64 << width, true)
        }
        CheckMode::Sampled { samples, .. } => (samples, false),
    };
    let input = |i: u64| match mode {
        CheckMode::Exhaustive => BitBuf::from_u64(i, width),
        CheckMode::Sampled { seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            BitBuf::random(width, &mut rng)
        }
    };
    let found = (0..count)
        .into_par_iter()
        .map(|i| {
            let x = input(i);
            let (left, right) = sides(&x)?;
            Ok((left != right).then_some(Counterexample { input: x, left, right }))
        })
        .find_first(|r: &Result<Option<Counterexample>>| !matches!(r, Ok(None)));
    let counterexample = match found {
        Some(r) => r?,
        None => None,
    };
    Ok(CheckReport {
        pass: counterexample.is_none(),
        width,
        inputs: count,
        exhaustive,
        counterexample,
    })
}
