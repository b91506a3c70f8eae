//! Fibonacci nonlinear feedback shift registers.
//!
//! Cell `x0` is the output; every step shifts cells down by one and the
//! feedback value enters at `x(L-1)`. Consequently the state at time `t` is
//! exactly the next `L` output bits `s_t … s_(t+L-1)`, and the output sequence
//! obeys `s_(t+L) = feedback(s_t, …, s_(t+L-1))`.

mod bitsliced;
mod compiled;
mod file;
mod search;

use std::fmt;
use std::sync::Arc;

pub use bitsliced::BitslicedRegister;
pub(crate) use compiled::CompiledFeedback;
pub use file::{format_register_file, parse_register, parse_register_file};
pub use search::{find_toy_max_period_specs, is_max_period, DEFAULT_SEARCH_BUDGET};

use crate::bits::{low_mask, BitBuf};
use crate::boolfun::AnfPolynomial;
use crate::error::{Error, Result};

/// Registers are limited to one machine word of state.
pub const MAX_REGISTER_LEN: usize = 64;

/// Lengths above this need an explicit override for period measurement.
pub const PERIOD_GUARD_LEN: usize = 34;

#[derive(Clone)]
pub struct RegisterSpec {
    name: String,
    feedback: AnfPolynomial,
    compiled: Arc<CompiledFeedback>,
}

impl RegisterSpec {
    pub fn new(name: impl Into<String>, feedback: AnfPolynomial) -> Result<Self> {
        let name = name.into();
        let length = feedback.n_vars();
        if length == 0 || length > MAX_REGISTER_LEN {
            return Err(Error::Capacity(format!(
                "register `{name}`: length {length} outside 1..={MAX_REGISTER_LEN}"
            )));
        }
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Validation(format!("bad register name `{name}`")));
        }
        if feedback.has_constant() {
            return Err(Error::Validation(format!(
                "register `{name}`: feedback has a constant term, so the all-zero state is not a fixed point"
            )));
        }
        let compiled = Arc::new(CompiledFeedback::new(length, &feedback));
        Ok(Self {
            name,
            feedback,
            compiled,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn length(&self) -> usize {
        self.feedback.n_vars()
    }

    pub fn feedback(&self) -> &AnfPolynomial {
        &self.feedback
    }

    pub(crate) fn compiled(&self) -> &CompiledFeedback {
        &self.compiled
    }

    /// Number of nonzero states, `2^L - 1`.
    pub fn nonzero_states(&self) -> u64 {
        low_mask(self.length())
    }

    fn check(&self, state: &RegisterState) -> Result<()> {
        if state.width != self.length() {
            return Err(Error::Domain(format!(
                "state width {} does not match register `{}` of length {}",
                state.width,
                self.name,
                self.length()
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for RegisterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegisterSpec")
            .field("name", &self.name)
            .field("length", &self.length())
            .field("feedback", &self.feedback)
            .finish()
    }
}

impl PartialEq for RegisterSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.feedback == other.feedback
    }
}

impl Eq for RegisterSpec {}

/// Cell contents of one register; bit `i` of `bits` is cell `x_i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegisterState {
    width: usize,
    bits: u64,
}

impl RegisterState {
    pub fn new(width: usize, bits: u64) -> Result<Self> {
        if width == 0 || width > MAX_REGISTER_LEN {
            return Err(Error::Capacity(format!("state width {width} outside 1..=64")));
        }
        if bits & !low_mask(width) != 0 {
            return Err(Error::Domain(format!("value {bits:#x} wider than {width} bits")));
        }
        Ok(Self { width, bits })
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::new(width, 0)
    }

    pub fn from_bitbuf(b: &BitBuf) -> Result<Self> {
        Self::new(b.len(), b.to_u64())
    }

    pub fn to_bitbuf(self) -> BitBuf {
        BitBuf::from_u64(self.bits, self.width)
    }

    #[inline]
    pub fn width(self) -> usize {
        self.width
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn cell(self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }
}

impl fmt::Debug for RegisterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RegisterState[{}]({:#x})", self.width, self.bits)
    }
}

/// One clock: returns the output cell `x0` and the successor state.
pub fn step(spec: &RegisterSpec, state: RegisterState) -> Result<(bool, RegisterState)> {
    spec.check(&state)?;
    let mut next = state.bits;
    spec.compiled.advance(&mut next, 1);
    Ok((
        state.cell(0),
        RegisterState {
            width: state.width,
            bits: next,
        },
    ))
}

/// The first `n` outputs from `state`.
pub fn run(spec: &RegisterSpec, state: RegisterState, n: usize) -> Result<BitBuf> {
    spec.check(&state)?;
    Ok(run_unchecked(spec.compiled(), state.bits, n).0)
}

/// Like [`run`], also returning the state after `n` steps.
pub fn run_from(spec: &RegisterSpec, state: RegisterState, n: usize) -> Result<(BitBuf, RegisterState)> {
    spec.check(&state)?;
    let (bits, end) = run_unchecked(spec.compiled(), state.bits, n);
    Ok((
        bits,
        RegisterState {
            width: state.width,
            bits: end,
        },
    ))
}

pub(crate) fn run_unchecked(c: &CompiledFeedback, start: u64, n: usize) -> (BitBuf, u64) {
    c.generate(start, n)
}

/// Smallest `t > 0` with `state(t) = start`.
///
/// Lengths above [`PERIOD_GUARD_LEN`] are refused unless `allow_long` is set.
pub fn period(spec: &RegisterSpec, start: RegisterState, allow_long: bool) -> Result<u64> {
    spec.check(&start)?;
    if start.is_zero() {
        return Err(Error::Domain("period of the all-zero state is trivially 1; choose a nonzero start".into()));
    }
    if spec.length() > PERIOD_GUARD_LEN && !allow_long {
        return Err(Error::Capacity(format!(
            "period measurement for L = {} exceeds the guard of {PERIOD_GUARD_LEN}; pass the override to proceed",
            spec.length()
        )));
    }
    let limit = if spec.length() >= 64 { u64::MAX } else { 1u64 << spec.length() };
    cycle_length(spec.compiled(), start.bits, limit).ok_or_else(|| {
        Error::Domain(format!(
            "trajectory from {:#x} does not return to its start (state lies on a tail)",
            start.bits
        ))
    })
}

pub(crate) fn cycle_length(c: &CompiledFeedback, start: u64, limit: u64) -> Option<u64> {
    c.cycle_length(start, limit)
}
