//! Boolean function analysis: ANF, truth tables, Walsh spectra, nonlinearity,
//! bentness, algebraic immunity and best-affine correlation.
//!
//! Variables are 0-indexed throughout (`x0 … x(n-1)`).

mod anf;
mod immunity;
mod truth;
mod walsh;

pub use anf::{parse_anf, AnfPolynomial, Monomial, ParsedAnf, MAX_ANF_VARS};
pub(crate) use anf::parse_anf_lines;
pub use immunity::{algebraic_immunity, MAX_AI_VARS};
pub use truth::{anf_to_truth_table, truth_table_to_anf, TruthTable, MAX_TABLE_VARS};
pub use walsh::{
    correlation_probability, is_bent, nonlinearity, single_var_mask, walsh_transform, WalshSpectrum,
};

/// `x0x3 ⊕ x1x4 ⊕ x2x5`: the six-variable quadratic bent combiner.
pub fn bent6() -> AnfPolynomial {
    AnfPolynomial::from_terms(6, &[&[0, 3], &[1, 4], &[2, 5]]).expect("static ANF")
}

/// Summary of the properties reported by the `analyze` command.
#[derive(Debug, Clone)]
pub struct FunctionReport {
    pub n_vars: usize,
    pub degree: usize,
    pub weight: usize,
    pub nonlinearity: u64,
    /// `None` for odd variable counts.
    pub bent: Option<bool>,
    /// `None` above [`MAX_AI_VARS`].
    pub algebraic_immunity: Option<usize>,
    pub walsh_min: i32,
    pub walsh_max: i32,
    /// `P[f(x) = x_i]` for each variable.
    pub single_var_p: Vec<f64>,
}

pub fn analyze(f: &AnfPolynomial) -> crate::Result<FunctionReport> {
    let t = anf_to_truth_table(f)?;
    let w = walsh_transform(&t);
    let n = f.n_vars();
    Ok(FunctionReport {
        n_vars: n,
        degree: f.degree(),
        weight: t.weight(),
        nonlinearity: nonlinearity(&w),
        bent: is_bent(&w).ok(),
        algebraic_immunity: if n <= MAX_AI_VARS {
            Some(algebraic_immunity(f)?)
        } else {
            None
        },
        walsh_min: *w.values().iter().min().expect("nonempty"),
        walsh_max: *w.values().iter().max().expect("nonempty"),
        single_var_p: (0..n)
            .map(|i| correlation_probability(&w, single_var_mask(i)))
            .collect(),
    })
}
