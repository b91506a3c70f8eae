use crate::error::{Error, Result};
use crate::nlfsr::{RegisterSpec, RegisterState};

/// Steps up to 64 copies of one register in parallel.
///
/// Cell `i` of every lane lives in one word, bit `j` of which belongs to lane
/// `j`; feedback is evaluated with word-wide AND/XOR so one call advances all
/// lanes at once.
pub struct BitslicedRegister {
    monomials: Vec<Vec<usize>>,
    length: usize,
    cells: Vec<u64>,
    pos: usize,
    lanes: usize,
}

impl BitslicedRegister {
    pub fn new(spec: &RegisterSpec, states: &[RegisterState]) -> Result<Self> {
        if states.len() > 64 {
            return Err(Error::Capacity(format!("{} lanes requested, at most 64", states.len())));
        }
        let length = spec.length();
        if let Some(s) = states.iter().find(|s| s.width() != length) {
            return Err(Error::Domain(format!(
                "state width {} does not match register length {length}",
                s.width()
            )));
        }
        let mut cells = vec![0u64; length];
        for (j, s) in states.iter().enumerate() {
            for (i, c) in cells.iter_mut().enumerate() {
                *c |= (s.bits() >> i & 1) << j;
            }
        }
        cells.reserve(4 * length + 1024);
        Ok(Self {
            monomials: spec.feedback().monomials().map(|m| m.vars().collect()).collect(),
            length,
            cells,
            pos: 0,
            lanes: states.len(),
        })
    }

    pub fn lanes(&self) -> usize {
        self.lanes
    }

    /// Output word of the current step, then advances every lane.
    #[inline]
    pub fn step(&mut self) -> u64 {
        let window = &self.cells[self.pos..self.pos + self.length];
        let mut fb = 0u64;
        for m in &self.monomials {
            fb ^= m.iter().fold(u64::MAX, |acc, &v| acc & window[v]);
        }
        let out = window[0];
        self.cells.push(fb);
        self.pos += 1;
        if self.pos >= 1024 {
            self.cells.drain(..self.pos);
            self.pos = 0;
        }
        out
    }

    pub fn lane_state(&self, lane: usize) -> RegisterState {
        assert!(lane < self.lanes);
        let bits = self.cells[self.pos..self.pos + self.length]
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, w)| acc | (w >> lane & 1) << i);
        RegisterState::new(self.length, bits).expect("width fixed at construction")
    }
}
