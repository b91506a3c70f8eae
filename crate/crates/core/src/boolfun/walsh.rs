use crate::boolfun::truth::TruthTable;
use crate::error::{Error, Result};

/// `values[u] = Σ_x (-1)^(f(x) ⊕ <u,x>)`.
///
/// A positive entry means `f` agrees with the linear function `<u,x>` more
/// often than not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalshSpectrum {
    n_vars: usize,
    values: Vec<i32>,
}

impl WalshSpectrum {
    #[inline]
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    #[inline]
    pub fn at(&self, u: usize) -> i32 {
        self.values[u]
    }

    pub fn max_abs(&self) -> u32 {
        self.values.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    /// `Σ_u W(u)^2`; equals `4^n` for every Boolean function.
    pub fn energy(&self) -> u64 {
        self.values.iter().map(|&v| (v as i64 * v as i64) as u64).sum()
    }
}

/// Fast in-place butterfly over the `±1` sign vector, `O(n 2^n)`.
pub fn walsh_transform(t: &TruthTable) -> WalshSpectrum {
    let n = t.n_vars();
    let mut v: Vec<i32> = (0..1usize << n)
        .map(|x| if t.get(x) { -1 } else { 1 })
        .collect();
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    WalshSpectrum { n_vars: n, values: v }
}

/// Distance to the nearest affine function: `2^(n-1) - max|W| / 2`.
pub fn nonlinearity(w: &WalshSpectrum) -> u64 {
    (1u64 << w.n_vars) / 2 - u64::from(w.max_abs()) / 2
}

pub fn is_bent(w: &WalshSpectrum) -> Result<bool> {
    if w.n_vars % 2 == 1 {
        return Err(Error::Domain(format!(
            "bentness is defined for an even number of variables, got {}",
            w.n_vars
        )));
    }
    let flat = 1i32 << (w.n_vars / 2);
    Ok(w.values.iter().all(|v| v.abs() == flat))
}

/// `P[f(x) = <u,x>] = (2^n + W(u)) / 2^(n+1)`. Exact in `f64` for `n <= 24`.
pub fn correlation_probability(w: &WalshSpectrum, u: usize) -> f64 {
    let total = (1u64 << w.n_vars) as f64;
    (total + f64::from(w.values[u])) / (2.0 * total)
}

/// Mask with a single variable `i` set.
pub fn single_var_mask(i: usize) -> usize {
    1 << i
}
