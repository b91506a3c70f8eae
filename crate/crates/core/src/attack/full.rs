//! Whole-key recovery: per-register scans, then exact cross-validation of
//! candidate combinations. Also the exhaustive oracle for small keys.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::attack::scan::{recover_register, CandidateList, OpCounts, ScanOptions};
use crate::attack::AttackParams;
use crate::bits::{low_mask, BitBuf};
use crate::combiner::{combine_sequences, keystream, CombinerSpec, Key, Keystream};
use crate::error::{Error, Result};
use crate::nlfsr::{run_unchecked, RegisterState};

/// Largest total key size [`brute_force_oracle`] accepts.
pub const MAX_BRUTE_FORCE_BITS: usize = 30;

#[derive(Debug, Clone)]
pub struct FullKeyOptions {
    /// Keystream bits used by every register scan and by the final check.
    pub n: usize,
    /// Per-register false-alarm probability; `None` means `2^-L` for each.
    pub p_f: Option<f64>,
    pub p_m: f64,
    pub scan: ScanOptions,
    /// Cap on the product of candidate-list sizes.
    pub max_combinations: u64,
}

impl FullKeyOptions {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            p_f: None,
            p_m: crate::attack::DEFAULT_P_MISS,
            scan: ScanOptions::default(),
            max_combinations: 1 << 24,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FullKeyResult {
    /// Keys regenerating the first `n` keystream bits exactly.
    pub keys: Vec<Key>,
    pub per_register: Vec<CandidateList>,
    pub combinations: u64,
    pub ops: OpCounts,
    pub elapsed: Duration,
}

/// Attacks each register on its own, then keeps the candidate combinations
/// whose regenerated keystream equals the observed one.
pub fn recover_full_key(spec: &CombinerSpec, z: &Keystream, opts: &FullKeyOptions) -> Result<FullKeyResult> {
    let start = Instant::now();
    let n = opts.n;
    if n > z.len() {
        return Err(Error::Domain(format!("keystream has {} bits but N = {n} was requested", z.len())));
    }
    let mut per_register = Vec::with_capacity(spec.registers().len());
    let mut ops = OpCounts::default();
    for (i, r) in spec.registers().iter().enumerate() {
        let mut params = AttackParams::for_targets(spec, &[i], n)?.with_p_m(opts.p_m)?;
        if let Some(p_f) = opts.p_f {
            params = params.with_p_f(p_f)?;
        }
        let list = recover_register(spec, &[i], z, &params, &opts.scan)?;
        ops.add(&list.ops);
        if list.entries.is_empty() {
            return Err(Error::Miss(format!(
                "register `{}` kept no candidate at N = {n} (threshold {}); supply more keystream",
                r.name(),
                list.threshold
            )));
        }
        log::info!("register `{}`: {} retained", r.name(), list.entries.len());
        per_register.push(list);
    }
    let sizes: Vec<u64> = per_register.iter().map(|l| l.entries.len() as u64).collect();
    let combinations = sizes
        .iter()
        .try_fold(1u64, |a, &s| a.checked_mul(s))
        .filter(|&c| c <= opts.max_combinations)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "{sizes:?} candidates per register exceed {} combinations; supply more keystream",
                opts.max_combinations
            ))
        })?;
    // one regeneration per candidate
    let seqs: Vec<Vec<BitBuf>> = spec
        .registers()
        .iter()
        .zip(&per_register)
        .map(|(r, l)| l.entries.iter().map(|c| run_unchecked(r.compiled(), c.states[0].bits(), n).0).collect())
        .collect();
    ops.register_clocks += sizes.iter().sum::<u64>() * n as u64;
    let target = z.bits().slice(0, n);
    let mut keys = Vec::new();
    for idx in 0..combinations {
        let mut rest = idx;
        let mut pick = vec![0usize; sizes.len()];
        for (slot, &s) in pick.iter_mut().zip(&sizes).rev() {
            *slot = (rest % s) as usize;
            rest /= s;
        }
        let chosen: Vec<BitBuf> = pick.iter().zip(&seqs).map(|(&j, s)| s[j].clone()).collect();
        if combine_sequences(spec, &chosen, n) == target {
            let states = pick.iter().zip(&per_register).map(|(&j, l)| l.entries[j].states[0]).collect();
            keys.push(Key::new(spec, states)?);
        }
    }
    ops.bit_comparisons += combinations * n as u64;
    if keys.is_empty() {
        return Err(Error::Miss(format!(
            "none of the {combinations} candidate combinations reproduces the keystream; supply more keystream"
        )));
    }
    keys.sort();
    Ok(FullKeyResult {
        keys,
        per_register,
        combinations,
        ops,
        elapsed: start.elapsed(),
    })
}

/// Every key whose keystream starts with `z`, by exhaustive search.
pub fn brute_force_oracle(spec: &CombinerSpec, z: &Keystream) -> Result<Vec<Key>> {
    brute_force_filtered(spec, z, |_| true)
}

/// [`brute_force_oracle`] restricted to keys (raw state values in spec order)
/// accepted by `keep`.
pub(crate) fn brute_force_filtered<F>(spec: &CombinerSpec, z: &Keystream, keep: F) -> Result<Vec<Key>>
where
    F: Fn(&[u64]) -> bool + Sync,
{
    let bits = spec.key_bits();
    if bits > MAX_BRUTE_FORCE_BITS {
        return Err(Error::Capacity(format!(
            "brute force over {bits} key bits exceeds the limit of {MAX_BRUTE_FORCE_BITS}"
        )));
    }
    let n = z.len();
    let w = n.min(64);
    let want = z.bits().window_word(0) & low_mask(w);
    // first 64 outputs of every state, indexed by state value
    let tables: Vec<Vec<u64>> = spec
        .registers()
        .iter()
        .map(|r| {
            (0..1u64 << r.length())
                .map(|s| run_unchecked(r.compiled(), s, w).0.to_u64())
                .collect()
        })
        .collect();
    let radices: Vec<u64> = spec.registers().iter().map(|r| (1u64 << r.length()) - 1).collect();
    let (last_radix, outer) = radices.split_last().expect("at least one register");
    let outer_total: u64 = outer.iter().product();
    let k = radices.len();
    let mut keys: Vec<Key> = (0..outer_total)
        .into_par_iter()
        .flat_map_iter(|idx| {
            let mut states = vec![0u64; k];
            let mut rest = idx;
            for (slot, &r) in states[..k - 1].iter_mut().zip(outer).rev() {
                *slot = rest % r + 1;
                rest /= r;
            }
            let inputs: Vec<u64> = states.iter().zip(&tables).map(|(&s, t)| t[s as usize]).collect();
            // f = g ⊕ x_last · h with g, h free of the last input
            let (mut g, mut h) = (0u64, 0u64);
            for m in spec.combiner().monomials() {
                let mut term = u64::MAX;
                let mut has_last = false;
                for v in m.vars() {
                    if v == k - 1 {
                        has_last = true;
                    } else {
                        term &= inputs[v];
                    }
                }
                if has_last {
                    h ^= term;
                } else {
                    g ^= term;
                }
            }
            let (g, h) = (g & low_mask(w), h & low_mask(w));
            let mut found = Vec::new();
            for s in 1..=*last_radix {
                if g ^ (h & tables[k - 1][s as usize]) != want {
                    continue;
                }
                states[k - 1] = s;
                if !keep(&states) {
                    continue;
                }
                let key = Key::new(
                    spec,
                    spec.registers()
                        .iter()
                        .zip(&states)
                        .map(|(r, &b)| RegisterState::new(r.length(), b).expect("below 2^L"))
                        .collect(),
                )
                .expect("nonzero states of matching widths");
                if n <= 64 || keystream(spec, &key, n).expect("valid key") == *z {
                    found.push(key);
                }
            }
            found
        })
        .collect();
    keys.sort();
    Ok(keys)
}
