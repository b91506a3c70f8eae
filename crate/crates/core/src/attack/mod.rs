//! Correlation attack on combiner generators.
//!
//! Each register (or small set of registers) whose output sum is correlated
//! with the keystream is attacked on its own: every candidate initial state
//! is scored by its agreement with the keystream, and candidates at or above
//! a threshold derived from the false-alarm probability are kept. Candidate
//! combinations are then checked by regenerating keystream.

mod full;
mod report;
mod scan;

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

pub use full::{brute_force_oracle, recover_full_key, FullKeyOptions, FullKeyResult, MAX_BRUTE_FORCE_BITS};
pub use report::{format_report_kv, format_report_text, parse_report_kv, AttackReport, ReportStatus};
pub use scan::{recover_register, Candidate, CandidateList, OpCounts, ScanMethod, ScanOptions, DEFAULT_WORK_BUDGET};

use crate::bits::BitBuf;
use crate::boolfun::correlation_probability;
use crate::combiner::{CombinerSpec, Keystream};
use crate::error::{Error, Result};

/// Default miss probability.
pub const DEFAULT_P_MISS: f64 = 1e-3;

/// `max(p, 1 - p)`; the attack uses the complemented keystream when `p < 1/2`.
pub fn normalize_bias(p: f64) -> f64 {
    p.max(1.0 - p)
}

/// Keystream bits needed to tell the right candidate from the `2^L - 1`
/// wrong ones at correlation probability `p`:
///
/// `N = ((sqrt(L) + 3 sqrt(2 p (1 - p))) / (sqrt(2) (p - 1/2)))^2`,
///
/// rounded up. `p` is normalized first.
pub fn required_keystream(p: f64, l: usize) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Domain(format!("correlation probability {p} outside [0, 1]")));
    }
    let p = normalize_bias(p);
    if p == 0.5 {
        return Err(Error::NoBias);
    }
    if l == 0 {
        return Err(Error::Domain("L must be at least 1".into()));
    }
    let num = (l as f64).sqrt() + 3.0 * (2.0 * p * (1.0 - p)).sqrt();
    let den = std::f64::consts::SQRT_2 * (p - 0.5);
    let n = (num / den).powi(2);
    // absorb floating-point noise just above an integer
    Ok((n - 1e-9).ceil().max(1.0) as u64)
}

/// Parameters of one decision: the bias `p` (normalized), the candidate bit
/// count `L`, false-alarm and miss probabilities, and the keystream length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackParams {
    pub p: f64,
    pub l: usize,
    pub p_f: f64,
    pub p_m: f64,
    pub n: usize,
}

impl AttackParams {
    /// `P_f = 2^-L`, `P_m` = [`DEFAULT_P_MISS`].
    pub fn new(p: f64, l: usize, n: usize) -> Result<Self> {
        let params = Self {
            p: normalize_bias(p),
            l,
            p_f: 2f64.powi(-(l as i32)),
            p_m: DEFAULT_P_MISS,
            n,
        };
        params.validate()?;
        Ok(params)
    }

    /// Takes `p` from the combiner's Walsh spectrum at the mask selecting
    /// `targets`, and `L` as the sum of their lengths.
    pub fn for_targets(spec: &CombinerSpec, targets: &[usize], n: usize) -> Result<Self> {
        let (p, _) = target_bias(spec, targets)?;
        let l = targets.iter().map(|&i| spec.registers()[i].length()).sum();
        Self::new(p, l, n)
    }

    pub fn with_p_f(mut self, p_f: f64) -> Result<Self> {
        self.p_f = p_f;
        self.validate()?;
        Ok(self)
    }

    pub fn with_p_m(mut self, p_m: f64) -> Result<Self> {
        self.p_m = p_m;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 0.5 && self.p <= 1.0) {
            return Err(if self.p == 0.5 {
                Error::NoBias
            } else {
                Error::Domain(format!("correlation probability {} outside (1/2, 1]", self.p))
            });
        }
        if !(self.p_f > 0.0 && self.p_f < 1.0) {
            return Err(Error::Domain(format!("P_f = {} outside (0, 1)", self.p_f)));
        }
        if !(self.p_m > 0.0 && self.p_m < 1.0) {
            return Err(Error::Domain(format!("P_m = {} outside (0, 1)", self.p_m)));
        }
        if self.n == 0 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        if self.l == 0 {
            return Err(Error::Domain("L must be at least 1".into()));
        }
        Ok(())
    }
}

/// Agreement probability between the keystream and the XOR of the target
/// registers' outputs, plus whether it is below one half.
pub fn target_bias(spec: &CombinerSpec, targets: &[usize]) -> Result<(f64, bool)> {
    if targets.is_empty() {
        return Err(Error::Domain("no target registers".into()));
    }
    let mut mask = 0usize;
    for &t in targets {
        if t >= spec.registers().len() {
            return Err(Error::Domain(format!("register index {t} out of range")));
        }
        if mask >> t & 1 == 1 {
            return Err(Error::Domain(format!("register index {t} repeated")));
        }
        mask |= 1 << t;
    }
    let p = correlation_probability(&spec.walsh(), mask);
    if p == 0.5 {
        return Err(Error::NoBias);
    }
    Ok((p, p < 0.5))
}

/// Upper standard-normal quantile: `z` with `P[Z >= z] = q`.
fn upper_quantile(q: f64) -> f64 {
    // inverse_cdf(q) is accurate for tiny q where inverse_cdf(1 - q) is not
    -Normal::standard().inverse_cdf(q)
}

/// Smallest match count `T` with `P[Bin(N, 1/2) >= T] <= P_f` under the
/// normal approximation `T = ceil(N/2 + z sqrt(N) / 2)`.
pub fn decision_threshold(params: &AttackParams) -> Result<usize> {
    params.validate()?;
    let n = params.n as f64;
    let z = upper_quantile(params.p_f);
    let t = (n / 2.0 + z * n.sqrt() / 2.0 - 1e-9).ceil().max(0.0);
    if t > n {
        return Err(Error::Infeasible(format!(
            "threshold {t} exceeds N = {}; more keystream is needed for P_f = {:e}",
            params.n, params.p_f
        )));
    }
    Ok(t as usize)
}

/// `P[Bin(n, p) >= t]`.
pub fn binomial_upper_tail(n: usize, t: usize, p: f64) -> f64 {
    if t == 0 {
        return 1.0;
    }
    let b = Binomial::new(p, n as u64).expect("p in [0, 1]");
    b.sf(t as u64 - 1)
}

/// `P[Bin(n, p) < t]`.
pub fn binomial_lower_tail(n: usize, t: usize, p: f64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let b = Binomial::new(p, n as u64).expect("p in [0, 1]");
    b.cdf(t as u64 - 1)
}

/// Exact false-alarm and miss probabilities at threshold `t`.
pub fn error_rates(params: &AttackParams, t: usize) -> (f64, f64) {
    (
        binomial_upper_tail(params.n, t, 0.5),
        binomial_lower_tail(params.n, t, params.p),
    )
}

/// Positions where the two sequences agree.
pub fn correlate(register_bits: &BitBuf, keystream: &Keystream) -> Result<usize> {
    if register_bits.len() != keystream.len() {
        return Err(Error::Domain(format!(
            "sequence lengths differ: {} and {}",
            register_bits.len(),
            keystream.len()
        )));
    }
    Ok(register_bits.agreement(keystream.bits()))
}
