//! Candidate scans for one register or a small set of registers.
//!
//! [`ScanMethod::Phase`] exploits maximum period: the nonzero states of an
//! `L`-cell register are the `2^L - 1` phases of one cycle, so the scan is a
//! sliding correlation of the keystream against a precomputed period buffer.
//! [`ScanMethod::Naive`] regenerates every candidate from scratch and serves
//! as the reference. [`ScanMethod::Bitsliced`] clocks 64 candidates per word.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::attack::{decision_threshold, target_bias, AttackParams};
use crate::bits::{low_mask, BitBuf, BitWriter};
use crate::combiner::{CombinerSpec, Keystream};
use crate::error::{Error, Result};
use crate::nlfsr::{run_unchecked, BitslicedRegister, RegisterSpec, RegisterState};

/// Default cap on candidate states per scan.
pub const DEFAULT_WORK_BUDGET: u64 = 1 << 36;

/// Longest register the phase scan will buffer (one bit per phase).
const MAX_PHASE_LEN: usize = 34;

const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMethod {
    Phase,
    Naive,
    Bitsliced,
}

impl fmt::Display for ScanMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanMethod::Phase => "phase",
            ScanMethod::Naive => "naive",
            ScanMethod::Bitsliced => "bitsliced",
        })
    }
}

impl FromStr for ScanMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(ScanMethod::Phase),
            "naive" => Ok(ScanMethod::Naive),
            "bitsliced" => Ok(ScanMethod::Bitsliced),
            other => Err(Error::parse_nl(format!("unknown scan method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub method: ScanMethod,
    /// Maximum number of candidate states to score.
    pub budget: u64,
    /// More retained candidates than this is reported as a capacity error.
    pub max_retained: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            method: ScanMethod::Phase,
            budget: DEFAULT_WORK_BUDGET,
            max_retained: 1 << 20,
        }
    }
}

/// A retained candidate: one state per target register.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub states: Vec<RegisterState>,
    pub matches: usize,
    /// `(2 matches - N) / N`, measured against the (possibly complemented)
    /// keystream.
    pub score: f64,
}

/// Work done by a scan, in three units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub register_clocks: u64,
    pub candidates: u64,
    pub bit_comparisons: u64,
}

impl OpCounts {
    pub fn add(&mut self, other: &OpCounts) {
        self.register_clocks += other.register_clocks;
        self.candidates += other.candidates;
        self.bit_comparisons += other.bit_comparisons;
    }
}

#[derive(Debug, Clone)]
pub struct CandidateList {
    pub targets: Vec<usize>,
    pub params: AttackParams,
    pub threshold: usize,
    /// The bias was negative and the complemented keystream was scanned.
    pub complemented: bool,
    pub method: ScanMethod,
    /// Sorted by match count, best first; ties by state.
    pub entries: Vec<Candidate>,
    pub ops: OpCounts,
    pub elapsed: Duration,
}

impl CandidateList {
    pub fn contains(&self, states: &[RegisterState]) -> bool {
        self.entries.iter().any(|c| c.states == states)
    }
}

/// Scores every joint nonzero initial state of the `targets` registers
/// against the first `params.n` keystream bits and keeps those reaching the
/// decision threshold.
pub fn recover_register(
    spec: &CombinerSpec,
    targets: &[usize],
    keystream: &Keystream,
    params: &AttackParams,
    opts: &ScanOptions,
) -> Result<CandidateList> {
    let start = Instant::now();
    let (_, negative) = target_bias(spec, targets)?;
    let n = params.n;
    if n > keystream.len() {
        return Err(Error::Domain(format!(
            "keystream has {} bits but N = {n} was requested",
            keystream.len()
        )));
    }
    let threshold = decision_threshold(params)?;
    let regs: Vec<&RegisterSpec> = targets.iter().map(|&i| &spec.registers()[i]).collect();
    let total = regs
        .iter()
        .try_fold(1u128, |acc, r| acc.checked_mul((1u128 << r.length()) - 1))
        .unwrap_or(u128::MAX);
    if total > u128::from(opts.budget) {
        return Err(Error::Capacity(format!(
            "scan needs {total} candidate states, budget is {}",
            opts.budget
        )));
    }
    let total = total as u64;
    let z = {
        let bits = keystream.bits().slice(0, n);
        if negative {
            bits.complemented()
        } else {
            bits
        }
    };
    log::info!(
        "scanning {total} states of {} with N = {n}, threshold {threshold} ({})",
        regs.iter().map(|r| r.name()).collect::<Vec<_>>().join("+"),
        opts.method
    );
    let progress = Progress::new(total);
    let (mut hits, mut ops) = match opts.method {
        ScanMethod::Phase => phase_scan(&regs, &z, threshold, &progress)?,
        ScanMethod::Naive => naive_scan(&regs, &z, threshold, &progress),
        ScanMethod::Bitsliced => bitsliced_scan(&regs, &z, threshold, &progress)?,
    };
    ops.candidates = total;
    ops.bit_comparisons = total.saturating_mul(n as u64);
    if hits.len() > opts.max_retained {
        return Err(Error::Capacity(format!(
            "{} candidates reached the threshold (limit {}); N is too small to discriminate",
            hits.len(),
            opts.max_retained
        )));
    }
    hits.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let entries = hits
        .into_iter()
        .map(|(states, matches)| Candidate {
            states,
            matches,
            score: (2.0 * matches as f64 - n as f64) / n as f64,
        })
        .collect();
    Ok(CandidateList {
        targets: targets.to_vec(),
        params: *params,
        threshold,
        complemented: negative,
        method: opts.method,
        entries,
        ops,
        elapsed: start.elapsed(),
    })
}

type Hits = Vec<(Vec<RegisterState>, usize)>;

/// Rate-limited progress lines on the diagnostic log.
struct Progress {
    total: u64,
    done: AtomicU64,
    start: Instant,
    next_ms: AtomicU64,
}

impl Progress {
    fn new(total: u64) -> Self {
        Self {
            total,
            done: AtomicU64::new(0),
            start: Instant::now(),
            next_ms: AtomicU64::new(2000),
        }
    }

    fn add(&self, k: u64) {
        let done = self.done.fetch_add(k, Ordering::Relaxed) + k;
        let ms = self.start.elapsed().as_millis() as u64;
        let next = self.next_ms.load(Ordering::Relaxed);
        if ms >= next
            && self
                .next_ms
                .compare_exchange(next, ms + 2000, Ordering::Relaxed, Ordering::Relaxed)
                .is_ok()
        {
            let frac = done as f64 / self.total.max(1) as f64;
            let eta = ms as f64 / 1000.0 * (1.0 - frac) / frac.max(1e-12);
            log::info!(
                "scanned {done}/{} states ({:.1}%), ETA {eta:.0} s",
                self.total,
                100.0 * frac
            );
        }
    }
}

/// Mixed-radix decoding of a joint index into one nonzero state per register.
fn decode_states(regs: &[&RegisterSpec], mut index: u64) -> Vec<u64> {
    let mut out = vec![0; regs.len()];
    for (slot, r) in out.iter_mut().zip(regs).rev() {
        let radix = (1u64 << r.length()) - 1;
        *slot = index % radix + 1;
        index /= radix;
    }
    out
}

fn naive_scan(regs: &[&RegisterSpec], z: &BitBuf, threshold: usize, progress: &Progress) -> (Hits, OpCounts) {
    let n = z.len();
    let total: u64 = regs.iter().map(|r| (1u64 << r.length()) - 1).product();
    let hits = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut local = Vec::new();
            for idx in lo..hi {
                let states = decode_states(regs, idx);
                let mut acc = z.clone();
                for (r, &s) in regs.iter().zip(&states) {
                    acc.xor_assign(&run_unchecked(r.compiled(), s, n).0);
                }
                let matches = n - acc.count_ones();
                if matches >= threshold {
                    local.push((to_states(regs, &states), matches));
                }
            }
            progress.add(hi - lo);
            local
        })
        .collect();
    let ops = OpCounts {
        register_clocks: total * regs.len() as u64 * n as u64,
        ..OpCounts::default()
    };
    (hits, ops)
}

fn to_states(regs: &[&RegisterSpec], bits: &[u64]) -> Vec<RegisterState> {
    regs.iter()
        .zip(bits)
        .map(|(r, &b)| RegisterState::new(r.length(), b).expect("masked to width"))
        .collect()
}

/// Iterates every joint state of `outer`, handing the keystream XORed with
/// their outputs to `scan_last`.
fn for_each_outer<F>(outer: &[&RegisterSpec], z: &BitBuf, mut scan_last: F) -> Result<u64>
where
    F: FnMut(&[u64], &BitBuf) -> Result<()>,
{
    let n = z.len();
    let combos: u64 = outer.iter().map(|r| (1u64 << r.length()) - 1).product();
    for idx in 0..combos {
        let states = decode_states(outer, idx);
        let mut zz = z.clone();
        for (r, &s) in outer.iter().zip(&states) {
            zz.xor_assign(&run_unchecked(r.compiled(), s, n).0);
        }
        scan_last(&states, &zz)?;
    }
    Ok(combos * outer.len() as u64 * n as u64)
}

/// One period of a maximum-period register from the state `x0 = 1`, extended
/// so that every phase has `n` bits after it.
struct CycleBuffer {
    bits: BitBuf,
    period: u64,
    length: usize,
}

impl CycleBuffer {
    fn build(reg: &RegisterSpec, n: usize) -> Result<Self> {
        let l = reg.length();
        if l > MAX_PHASE_LEN {
            return Err(Error::Capacity(format!(
                "phase buffer for L = {l} exceeds the limit of L = {MAX_PHASE_LEN}"
            )));
        }
        let period = (1u64 << l) - 1;
        let len = period as usize + n.max(l) + 128;
        let (bits, _) = run_unchecked(reg.compiled(), 1, len);
        let buf = Self { bits, period, length: l };
        // the state returns at exactly 2^L - 1 and at no proper divisor
        let full = buf.state_bits(period) == 1
            && prime_factors(period).into_iter().all(|q| buf.state_bits(period / q) != 1);
        if !full {
            return Err(Error::Validation(format!(
                "register `{}` is not maximum-period; the phase scan needs a single cycle of length 2^{l} - 1",
                reg.name()
            )));
        }
        Ok(buf)
    }

    #[inline]
    fn state_bits(&self, phase: u64) -> u64 {
        self.bits.window_word(phase as usize) & low_mask(self.length)
    }
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// The keystream placed at each bit offset `0..64`, with validity masks, so
/// a phase `64 q + r` compares aligned buffer words from `q` on.
struct ShiftedStream {
    words: Vec<Vec<u64>>,
    masks: Vec<Vec<u64>>,
}

impl ShiftedStream {
    fn new(z: &BitBuf) -> Self {
        let n = z.len();
        let mut words = Vec::with_capacity(64);
        let mut masks = Vec::with_capacity(64);
        for r in 0..64 {
            let mut w = BitWriter::with_capacity(n + r);
            let mut m = BitWriter::with_capacity(n + r);
            w.push_bits(0, r);
            m.push_bits(0, r);
            for (i, &word) in z.words().iter().enumerate() {
                let k = (n - 64 * i).min(64);
                w.push_bits(word, k);
                m.push_bits(u64::MAX, k);
            }
            words.push(w.finish().words().to_vec());
            masks.push(m.finish().words().to_vec());
        }
        Self { words, masks }
    }
}

#[inline(always)]
fn disagreements(buf: &[u64], z: &[u64], m: &[u64]) -> u32 {
    buf.iter().zip(z).zip(m).map(|((b, z), m)| ((b ^ z) & m).count_ones()).sum()
}

#[inline(always)]
fn scan_phases_impl(buf: &[u64], s: &ShiftedStream, n: usize, threshold: usize, lo: u64, hi: u64) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    for phase in lo..hi {
        let q = (phase / 64) as usize;
        let r = (phase % 64) as usize;
        let zr = &s.words[r];
        let d = disagreements(&buf[q..q + zr.len()], zr, &s.masks[r]) as usize;
        if n - d >= threshold {
            out.push((phase, n - d));
        }
    }
    out
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "popcnt,avx2")]
fn scan_phases_avx2(buf: &[u64], s: &ShiftedStream, n: usize, threshold: usize, lo: u64, hi: u64) -> Vec<(u64, usize)> {
    scan_phases_impl(buf, s, n, threshold, lo, hi)
}

fn scan_phases(buf: &[u64], s: &ShiftedStream, n: usize, threshold: usize, lo: u64, hi: u64) -> Vec<(u64, usize)> {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("popcnt") {
        // SAFETY: both features checked at runtime.
        return unsafe { scan_phases_avx2(buf, s, n, threshold, lo, hi) };
    }
    scan_phases_impl(buf, s, n, threshold, lo, hi)
}

fn phase_scan(regs: &[&RegisterSpec], z: &BitBuf, threshold: usize, progress: &Progress) -> Result<(Hits, OpCounts)> {
    let n = z.len();
    let bufs = regs.iter().map(|r| CycleBuffer::build(r, n)).collect::<Result<Vec<_>>>()?;
    let ops = OpCounts {
        register_clocks: bufs.iter().map(|b| b.bits.len() as u64).sum(),
        ..OpCounts::default()
    };
    let (last, outer) = bufs.split_last().expect("at least one target");
    let outer_combos: u64 = outer.iter().map(|b| b.period).product();
    let mut hits = Vec::new();
    for idx in 0..outer_combos {
        // mixed-radix phases of the outer registers
        let mut phases = vec![0u64; outer.len()];
        let mut rest = idx;
        for (slot, b) in phases.iter_mut().zip(outer).rev() {
            *slot = rest % b.period;
            rest /= b.period;
        }
        let mut zz = z.clone();
        for (b, &ph) in outer.iter().zip(&phases) {
            zz.xor_assign(&b.bits.slice(ph as usize, n));
        }
        let shifted = ShiftedStream::new(&zz);
        let words = last.bits.words();
        let found: Vec<(u64, usize)> = (0..last.period.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(last.period);
                let v = scan_phases(words, &shifted, n, threshold, lo, hi);
                progress.add(hi - lo);
                v
            })
            .collect();
        let outer_states: Vec<RegisterState> = outer
            .iter()
            .zip(&phases)
            .map(|(b, &ph)| RegisterState::new(b.length, b.state_bits(ph)).expect("masked"))
            .collect();
        for (ph, m) in found {
            let mut states = outer_states.clone();
            states.push(RegisterState::new(last.length, last.state_bits(ph)).expect("masked"));
            hits.push((states, m));
        }
    }
    Ok((hits, ops))
}

fn bitsliced_scan(regs: &[&RegisterSpec], z: &BitBuf, threshold: usize, progress: &Progress) -> Result<(Hits, OpCounts)> {
    let n = z.len();
    let (last, outer) = regs.split_last().expect("at least one target");
    let states_last = (1u64 << last.length()) - 1;
    let planes = (usize::BITS - n.leading_zeros()) as usize;
    let zmask: Vec<u64> = (0..n).map(|t| if z.get(t) { u64::MAX } else { 0 }).collect();
    let mut hits = Vec::new();
    let mut clocks = 0u64;
    let outer_clocks = for_each_outer(outer, z, |outer_states, zz| {
        let zmask_local: Vec<u64>;
        let zm = if outer.is_empty() {
            &zmask
        } else {
            zmask_local = (0..n).map(|t| if zz.get(t) { u64::MAX } else { 0 }).collect();
            &zmask_local
        };
        let found: Vec<(u64, usize)> = (0..states_last.div_ceil(64))
            .into_par_iter()
            .flat_map_iter(|batch| {
                let lo = 1 + batch * 64;
                let hi = (lo + 64).min(states_last + 1);
                let states: Vec<RegisterState> = (lo..hi)
                    .map(|s| RegisterState::new(last.length(), s).expect("below 2^L"))
                    .collect();
                let lanes = low_mask(states.len());
                let mut reg = BitslicedRegister::new(last, &states).expect("at most 64 lanes");
                let mut counter = vec![0u64; planes];
                for &zt in zm {
                    let mut carry = !(reg.step() ^ zt) & lanes;
                    for p in counter.iter_mut() {
                        if carry == 0 {
                            break;
                        }
                        let c = *p & carry;
                        *p ^= carry;
                        carry = c;
                    }
                }
                progress.add(hi - lo);
                (0..states.len())
                    .filter_map(|j| {
                        let m = counter
                            .iter()
                            .enumerate()
                            .fold(0usize, |acc, (b, w)| acc | ((w >> j & 1) as usize) << b);
                        (m >= threshold).then_some((lo + j as u64, m))
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        for (s, m) in found {
            let mut bits = outer_states.to_vec();
            bits.push(s);
            let mut all: Vec<&RegisterSpec> = outer.to_vec();
            all.push(last);
            hits.push((to_states(&all, &bits), m));
        }
        clocks += states_last * n as u64;
        Ok(())
    })?;
    Ok((
        hits,
        OpCounts {
            register_clocks: clocks + outer_clocks,
            ..OpCounts::default()
        },
    ))
}
