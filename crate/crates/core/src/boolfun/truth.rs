use crate::bits::BitBuf;
use crate::boolfun::anf::{AnfPolynomial, Monomial};
use crate::error::{Error, Result};

/// Largest variable count for which truth tables and spectra are built.
pub const MAX_TABLE_VARS: usize = 24;

/// Output bits of a Boolean function; bit `x` is `f(x)` where bit `i` of the
/// integer `x` is variable `x_i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n_vars: usize,
    bits: BitBuf,
}

impl std::fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruthTable[{}]({:?})", self.n_vars, self.bits)
    }
}

fn check_vars(n_vars: usize) -> Result<()> {
    if n_vars > MAX_TABLE_VARS {
        Err(Error::Capacity(format!(
            "{n_vars} variables exceeds the truth table limit of {MAX_TABLE_VARS}"
        )))
    } else {
        Ok(())
    }
}

impl TruthTable {
    pub fn from_bits(n_vars: usize, bits: BitBuf) -> Result<Self> {
        check_vars(n_vars)?;
        if bits.len() != 1 << n_vars {
            return Err(Error::Domain(format!(
                "truth table of {n_vars} variables needs {} bits, got {}",
                1usize << n_vars,
                bits.len()
            )));
        }
        Ok(Self { n_vars, bits })
    }

    pub fn from_fn(n_vars: usize, f: impl FnMut(usize) -> bool) -> Result<Self> {
        check_vars(n_vars)?;
        Ok(Self {
            n_vars,
            bits: BitBuf::from_fn(1 << n_vars, f),
        })
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    #[inline]
    pub fn get(&self, x: usize) -> bool {
        self.bits.get(x)
    }

    pub fn bits(&self) -> &BitBuf {
        &self.bits
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_balanced(&self) -> bool {
        2 * self.weight() == self.bits.len()
    }

    pub fn complement(&self) -> Self {
        Self {
            n_vars: self.n_vars,
            bits: self.bits.complemented(),
        }
    }
}

/// Binary Möbius transform over the words of a `2^n`-bit table. It is an
/// involution, so the same routine maps ANF coefficients to values and back.
fn moebius_in_place(words: &mut [u64], n_vars: usize) {
    const LANE: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0f0f_0f0f_0f0f_0f0f,
        0x00ff_00ff_00ff_00ff,
        0x0000_ffff_0000_ffff,
        0x0000_0000_ffff_ffff,
    ];
    for i in 0..n_vars.min(6) {
        for w in words.iter_mut() {
            *w ^= (*w & LANE[i]) << (1 << i);
        }
    }
    for i in 6..n_vars {
        let step = 1usize << (i - 6);
        for block in words.chunks_mut(2 * step) {
            let (lo, hi) = block.split_at_mut(step);
            for (h, l) in hi.iter_mut().zip(lo.iter()) {
                *h ^= *l;
            }
        }
    }
}

pub fn anf_to_truth_table(f: &AnfPolynomial) -> Result<TruthTable> {
    let n = f.n_vars();
    check_vars(n)?;
    let mut coeffs = BitBuf::zeros(1 << n);
    for m in f.monomials() {
        coeffs.set(m.mask() as usize, true);
    }
    let mut words = coeffs.words().to_vec();
    moebius_in_place(&mut words, n);
    TruthTable::from_bits(n, BitBuf::from_words(words, 1 << n))
}

pub fn truth_table_to_anf(t: &TruthTable) -> AnfPolynomial {
    let n = t.n_vars();
    let mut words = t.bits().words().to_vec();
    moebius_in_place(&mut words, n);
    let coeffs = BitBuf::from_words(words, 1 << n);
    AnfPolynomial::from_monomials(
        n,
        (0..coeffs.len())
            .filter(|&m| coeffs.get(m))
            .map(|m| Monomial::from_mask(m as u64)),
    )
    .expect("variable count already checked")
}
