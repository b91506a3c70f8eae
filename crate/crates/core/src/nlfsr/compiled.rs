//! Compiled feedback evaluation for the hot stepping loops.
//!
//! When the feedback depends on at most [`MAX_TABLE_SUPPORT`] cells it is
//! tabulated over its support; the table index is assembled from per-byte
//! gather tables so evaluation costs one lookup per state byte plus one table
//! probe. Otherwise monomials are evaluated as mask tests.

use crate::bits::{low_mask, BitBuf, BitWriter};
use crate::boolfun::AnfPolynomial;

pub(crate) const MAX_TABLE_SUPPORT: usize = 20;

#[derive(Clone)]
struct GatherTable {
    support: u64,
    gather: Vec<[u32; 256]>,
    table: Vec<u64>,
}

impl GatherTable {
    #[inline(always)]
    fn probe(&self, idx: u64) -> u64 {
        self.table[(idx >> 6) as usize] >> (idx & 63) & 1
    }
}

#[derive(Clone)]
pub(crate) struct CompiledFeedback {
    length: usize,
    masks: Vec<u64>,
    lookup: Option<GatherTable>,
    /// Steps whose feedback values depend only on the current state.
    lookahead: usize,
}

impl CompiledFeedback {
    pub(crate) fn new(length: usize, feedback: &AnfPolynomial) -> Self {
        let masks: Vec<u64> = feedback.monomials().map(|m| m.mask()).collect();
        let support = feedback.support();
        let max_var = if support == 0 {
            0
        } else {
            63 - support.leading_zeros() as usize
        };
        let lookahead = (length - max_var).max(1);
        let lookup = (support.count_ones() as usize <= MAX_TABLE_SUPPORT && support != 0)
            .then(|| build_table(support, max_var, &masks));
        Self {
            length,
            masks,
            lookup,
            lookahead,
        }
    }

    #[cfg(test)]
    #[inline]
    pub(crate) fn lookahead(&self) -> usize {
        self.lookahead
    }

    #[inline]
    fn eval_masks(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        for &m in &self.masks {
            acc ^= (x & m == m) as u64;
        }
        acc
    }

    /// Feedback bit (0 or 1) for state `x`.
    #[inline]
    pub(crate) fn eval(&self, x: u64) -> u64 {
        match &self.lookup {
            Some(t) => {
                let mut idx = 0u32;
                for (b, g) in t.gather.iter().enumerate() {
                    idx |= g[(x >> (8 * b)) as usize & 0xff];
                }
                t.probe(u64::from(idx))
            }
            None => self.eval_masks(x),
        }
    }

    /// Advances `state` by `k <= lookahead` steps. Returns the `k` new bits
    /// (feedback of step `j` at bit `j`), which are also the register outputs
    /// `L` steps later.
    #[inline]
    pub(crate) fn advance(&self, state: &mut u64, k: usize) -> u64 {
        self.advance_with(&|x| self.eval(x), state, k)
    }

    #[inline(always)]
    fn advance_with<E: Fn(u64) -> u64>(&self, eval: &E, state: &mut u64, k: usize) -> u64 {
        debug_assert!(k >= 1 && k <= self.lookahead);
        let mut fbs = 0u64;
        for j in 0..k {
            fbs |= eval(*state >> j) << j;
        }
        let l = self.length;
        *state = if k >= l {
            fbs & low_mask(l)
        } else {
            (*state >> k) | (fbs << (l - k))
        } & low_mask(l);
        fbs
    }

    /// Walks from `start` until it returns, giving up after about `limit` steps.
    pub(crate) fn cycle_length(&self, start: u64, limit: u64) -> Option<u64> {
        #[cfg(target_arch = "x86_64")]
        if let Some(t) = &self.lookup {
            if std::arch::is_x86_feature_detected!("bmi2") {
                // SAFETY: bmi2 availability checked at runtime.
                return unsafe { self.cycle_length_bmi2(t, start, limit) };
            }
        }
        self.cycle_length_with(&|x| self.eval(x), start, limit)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "bmi2")]
    fn cycle_length_bmi2(&self, t: &GatherTable, start: u64, limit: u64) -> Option<u64> {
        let eval = |x: u64| t.probe(std::arch::x86_64::_pext_u64(x, t.support));
        self.cycle_length_with(&eval, start, limit)
    }

    #[inline(always)]
    fn cycle_length_with<E: Fn(u64) -> u64>(&self, eval: &E, start: u64, limit: u64) -> Option<u64> {
        let k = self.lookahead;
        // targets[d]: start advanced d steps. A block that passes through
        // `start` after j steps ends on targets[k - j].
        let mut targets = Vec::with_capacity(k);
        let mut s = start;
        for _ in 0..k {
            targets.push(s);
            self.advance_with(eval, &mut s, 1);
        }
        let mut state = start;
        let mut t = 0u64;
        while t < limit {
            let before = state;
            let fbs = self.advance_with(eval, &mut state, k);
            if targets.contains(&state) {
                for j in 1..=k {
                    if self.intermediate(before, fbs, j) == start {
                        return Some(t + j as u64);
                    }
                }
            }
            t += k as u64;
        }
        None
    }

    /// First `n` outputs from `start` and the state after `n` steps.
    pub(crate) fn generate(&self, start: u64, n: usize) -> (BitBuf, u64) {
        #[cfg(target_arch = "x86_64")]
        if let Some(t) = &self.lookup {
            if n > 4096 && std::arch::is_x86_feature_detected!("bmi2") {
                // SAFETY: bmi2 availability checked at runtime.
                return unsafe { self.generate_bmi2(t, start, n) };
            }
        }
        self.generate_with(&|x| self.eval(x), start, n)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "bmi2")]
    fn generate_bmi2(&self, t: &GatherTable, start: u64, n: usize) -> (BitBuf, u64) {
        let eval = |x: u64| t.probe(std::arch::x86_64::_pext_u64(x, t.support));
        self.generate_with(&eval, start, n)
    }

    /// The first `L` outputs are the initial cells; each later output is the
    /// feedback value produced `L` steps earlier.
    #[inline(always)]
    fn generate_with<E: Fn(u64) -> u64>(&self, eval: &E, start: u64, n: usize) -> (BitBuf, u64) {
        let l = self.length;
        let k = self.lookahead;
        let mut w = BitWriter::with_capacity(n);
        let mut state = start;
        let head = l.min(n);
        w.push_bits(start, head);
        let mut steps = 0usize;
        while head + steps < n {
            let kk = k.min(n - head - steps);
            let fbs = self.advance_with(eval, &mut state, kk);
            w.push_bits(fbs, kk);
            steps += kk;
        }
        while steps < n {
            let kk = k.min(n - steps);
            self.advance_with(eval, &mut state, kk);
            steps += kk;
        }
        (w.finish(), state)
    }

    /// State after `j` of the steps taken by [`advance`](Self::advance), given
    /// the pre-advance state and the returned feedback bits.
    #[inline]
    pub(crate) fn intermediate(&self, before: u64, fbs: u64, j: usize) -> u64 {
        let l = self.length;
        if j == 0 {
            before
        } else if j >= l {
            (fbs >> (j - l)) & low_mask(l)
        } else {
            ((before >> j) | ((fbs & low_mask(j)) << (l - j))) & low_mask(l)
        }
    }
}

fn build_table(support: u64, max_var: usize, masks: &[u64]) -> GatherTable {
    let vars: Vec<usize> = (0..64).filter(|i| support >> i & 1 == 1).collect();
    let bytes = max_var / 8 + 1;
    let mut gather = vec![[0u32; 256]; bytes];
    for (b, g) in gather.iter_mut().enumerate() {
        for (val, slot) in g.iter_mut().enumerate() {
            let mut idx = 0u32;
            for (rank, &v) in vars.iter().enumerate() {
                if v / 8 == b && val >> (v % 8) & 1 == 1 {
                    idx |= 1 << rank;
                }
            }
            *slot = idx;
        }
    }
    let size = 1usize << vars.len();
    let mut table = vec![0u64; size.div_ceil(64)];
    for idx in 0..size {
        let x = vars
            .iter()
            .enumerate()
            .fold(0u64, |x, (rank, &v)| x | ((idx >> rank & 1) as u64) << v);
        let bit = masks.iter().fold(0u64, |acc, &m| acc ^ (x & m == m) as u64);
        table[idx / 64] |= bit << (idx % 64);
    }
    GatherTable {
        support,
        gather,
        table,
    }
}
