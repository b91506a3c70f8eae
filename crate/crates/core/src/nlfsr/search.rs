use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boolfun::{AnfPolynomial, Monomial};
use crate::error::{Error, Result};
use crate::nlfsr::{cycle_length, RegisterSpec};

pub const DEFAULT_SEARCH_BUDGET: usize = 1 << 20;

const MIN_TOY_LEN: usize = 2;
const MAX_TOY_LEN: usize = 16;

/// True when the nonzero states form a single cycle of length `2^L - 1`.
///
/// Walks from the state `x0 = 1` (all other cells zero); a return after
/// exactly `2^L - 1` steps means every nonzero state was visited.
pub fn is_max_period(spec: &RegisterSpec) -> bool {
    let l = spec.length();
    if l >= 40 {
        return false;
    }
    let full = (1u64 << l) - 1;
    cycle_length(spec.compiled(), 1, 1u64 << l) == Some(full)
}

/// Random sparse feedback `x0 ⊕ linear taps ⊕ one or two products`, all over
/// `x1 … x(L-1)` apart from the `x0` term, which keeps the state map
/// invertible.
fn candidate(l: usize, rng: &mut ChaCha8Rng) -> AnfPolynomial {
    let mut terms = vec![Monomial::from_vars(&[0])];
    let taps = rng.gen_range(1..=3.min(l - 1));
    for v in sample(rng, l - 1, taps) {
        terms.push(Monomial::from_vars(&[v + 1]));
    }
    if l >= 3 {
        for _ in 0..rng.gen_range(1..=2) {
            let deg = rng.gen_range(2..=3.min(l - 1));
            let vars: Vec<usize> = sample(rng, l - 1, deg).into_iter().map(|v| v + 1).collect();
            terms.push(Monomial::from_vars(&vars));
        }
    }
    AnfPolynomial::from_monomials(l, terms).expect("indices below l")
}

/// Deterministic randomized search for one maximum-period register per length.
///
/// Each length draws from its own stream seeded by `(seed, L)`, so the result
/// for a length does not depend on which other lengths were requested.
pub fn find_toy_max_period_specs(lengths: &[usize], budget: usize, seed: u64) -> Result<Vec<RegisterSpec>> {
    if let Some(&l) = lengths.iter().find(|&&l| !(MIN_TOY_LEN..=MAX_TOY_LEN).contains(&l)) {
        return Err(Error::Capacity(format!(
            "toy register length {l} outside {MIN_TOY_LEN}..={MAX_TOY_LEN}"
        )));
    }
    lengths
        .iter()
        .map(|&l| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (l as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            for attempt in 0..budget {
                let spec = RegisterSpec::new(format!("T{l}"), candidate(l, &mut rng))?;
                if is_max_period(&spec) {
                    log::debug!("T{l}: found after {} attempts", attempt + 1);
                    return Ok(spec);
                }
            }
            Err(Error::SearchFailure(format!(
                "no maximum-period register of length {l} within {budget} attempts"
            )))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlfsr::{parse_register, run, RegisterState};

    #[test]
    fn or_feedback_is_not_max_period() {
        // x0 ⊕ x1 ⊕ x0x1 = x0 ∨ x1
        let s = parse_register("x0\nx1\nx0 x1\n", 3, "or3").unwrap();
        assert!(!is_max_period(&s));
        // x^3 + x + 1 is primitive
        assert!(is_max_period(&parse_register("x0\nx1\n", 3, "lin3").unwrap()));
    }

    #[test]
    fn finds_small_registers() {
        let specs = find_toy_max_period_specs(&[3, 6, 8], 100_000, 1).unwrap();
        for s in &specs {
            assert!(is_max_period(s));
            assert!(!s.feedback().has_constant());
        }
        // exhaustive check: every nonzero state of T8 has period 255
        let t8 = &specs[2];
        for v in 1..256u64 {
            let st = RegisterState::new(8, v).unwrap();
            assert_eq!(crate::nlfsr::period(t8, st, false).unwrap(), 255);
        }
    }

    #[test]
    fn deterministic_per_length() {
        let a = find_toy_max_period_specs(&[7, 9], 100_000, 42).unwrap();
        let b = find_toy_max_period_specs(&[9], 100_000, 42).unwrap();
        assert_eq!(a[1], b[0]);
    }

    #[test]
    fn max_period_sequence_is_balanced() {
        let spec = &find_toy_max_period_specs(&[10], 100_000, 5).unwrap()[0];
        let seq = run(spec, RegisterState::new(10, 1).unwrap(), 1023).unwrap();
        assert_eq!(seq.count_ones(), 512);
    }

    #[test]
    fn length_guard_and_budget() {
        assert!(matches!(find_toy_max_period_specs(&[20], 10, 0), Err(Error::Capacity(_))));
        assert!(matches!(find_toy_max_period_specs(&[12], 1, 0), Err(Error::SearchFailure(_)) | Ok(_)));
    }
}
