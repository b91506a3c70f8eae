use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::bits::BitBuf;
use crate::error::{Error, Result};

/// Largest variable count an ANF can carry (monomials are `u64` masks).
pub const MAX_ANF_VARS: usize = 64;

/// A product of distinct variables, stored as a bit mask over variable indices.
/// The empty monomial is the constant 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_mask(mask: u64) -> Self {
        Monomial(mask)
    }

    /// Panics if an index is 64 or more.
    pub fn from_vars(vars: &[usize]) -> Self {
        Monomial(vars.iter().fold(0u64, |m, &v| {
            assert!(v < MAX_ANF_VARS, "variable index {v} too large");
            m | 1 << v
        }))
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_constant(self) -> bool {
        self.0 == 0
    }

    /// Variable indices, ascending.
    pub fn vars(self) -> impl Iterator<Item = usize> {
        let m = self.0;
        (0..64).filter(move |i| m >> i & 1 == 1)
    }

    /// Highest variable index, `None` for the constant.
    pub fn max_var(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    #[inline]
    pub fn eval(self, x: u64) -> bool {
        x & self.0 == self.0
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.vars().cmp(other.vars()))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return f.write_str("1");
        }
        for v in self.vars() {
            write!(f, "x{v}")?;
        }
        Ok(())
    }
}

/// A Boolean function as an XOR of monomials, kept in reduced form
/// (no monomial appears twice).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AnfPolynomial {
    n_vars: usize,
    monomials: BTreeSet<Monomial>,
}

impl AnfPolynomial {
    pub fn zero(n_vars: usize) -> Self {
        assert!(n_vars <= MAX_ANF_VARS);
        Self {
            n_vars,
            monomials: BTreeSet::new(),
        }
    }

    /// XOR of the given monomials; repeated monomials cancel in pairs.
    pub fn from_monomials(n_vars: usize, monomials: impl IntoIterator<Item = Monomial>) -> Result<Self> {
        if n_vars > MAX_ANF_VARS {
            return Err(Error::Capacity(format!(
                "{n_vars} variables exceeds the ANF limit of {MAX_ANF_VARS}"
            )));
        }
        let mut f = Self::zero(n_vars);
        for m in monomials {
            if let Some(v) = m.max_var() {
                if v >= n_vars {
                    return Err(Error::Domain(format!(
                        "variable x{v} out of range for {n_vars} variables"
                    )));
                }
            }
            f.toggle(m);
        }
        Ok(f)
    }

    /// Convenience constructor from index lists, e.g. `&[&[0, 3], &[1, 4]]`.
    pub fn from_terms(n_vars: usize, terms: &[&[usize]]) -> Result<Self> {
        Self::from_monomials(n_vars, terms.iter().map(|t| Monomial::from_vars(t)))
    }

    pub(crate) fn toggle(&mut self, m: Monomial) {
        if !self.monomials.remove(&m) {
            self.monomials.insert(m);
        }
    }

    #[inline]
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.monomials.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn has_constant(&self) -> bool {
        self.monomials.contains(&Monomial::ONE)
    }

    /// Mask of every variable that occurs in some monomial.
    pub fn support(&self) -> u64 {
        self.monomials.iter().fold(0, |s, m| s | m.mask())
    }

    /// Evaluates on the point whose bit `i` is `x_i`.
    #[inline]
    pub fn eval(&self, x: u64) -> bool {
        self.monomials.iter().fold(false, |acc, m| acc ^ m.eval(x))
    }

    /// Evaluates on a bit vector of width `n_vars`, one bit lookup per literal.
    pub fn eval_bits(&self, x: &BitBuf) -> bool {
        assert_eq!(x.len(), self.n_vars);
        self.monomials
            .iter()
            .fold(false, |acc, m| acc ^ m.vars().all(|v| x.get(v)))
    }

    /// Evaluates bitwise over 64 independent points held in `inputs[var]`.
    #[inline]
    pub fn eval_words(&self, inputs: &[u64]) -> u64 {
        let mut acc = 0u64;
        for m in &self.monomials {
            acc ^= m.vars().fold(u64::MAX, |w, v| w & inputs[v]);
        }
        acc
    }

    /// `f ⊕ 1`.
    pub fn complement(&self) -> Self {
        let mut g = self.clone();
        g.toggle(Monomial::ONE);
        g
    }

    /// Renames variable `i` to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_vars {
            return Err(Error::Domain("permutation length must equal variable count".into()));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Domain("not a permutation".into()));
            }
        }
        Self::from_monomials(
            self.n_vars,
            self.monomials
                .iter()
                .map(|m| Monomial(m.vars().fold(0, |acc, v| acc | 1 << perm[v]))),
        )
    }

    /// Renders in the line-oriented ANF text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for m in &self.monomials {
            if m.is_constant() {
                s.push('1');
            } else {
                let vars: Vec<String> = m.vars().map(|v| format!("x{v}")).collect();
                s.push_str(&vars.join(" "));
            }
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for AnfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AnfPolynomial[{}]({self})", self.n_vars)
    }
}

impl fmt::Display for AnfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.monomials.iter().map(|m| m.to_string()).collect();
        f.write_str(&parts.join(" ⊕ "))
    }
}

/// Result of parsing ANF text.
#[derive(Debug, Clone)]
pub struct ParsedAnf {
    pub poly: AnfPolynomial,
    /// Monomials written an even number of times, which cancel out.
    pub cancelled: Vec<Monomial>,
}

/// Parses one ANF line. Returns `None` for blank and comment-only lines.
///
/// Tokens are decimal indices, optionally written `x7` or `x_7`. A line that
/// is exactly `1` is the constant term.
pub(crate) fn parse_monomial_line(raw: &str, line: usize, n_vars: Option<usize>) -> Result<Option<Monomial>> {
    let body = raw.split('#').next().unwrap_or("").trim();
    if body.is_empty() {
        return Ok(None);
    }
    if body == "1" {
        return Ok(Some(Monomial::ONE));
    }
    let limit = n_vars.unwrap_or(MAX_ANF_VARS);
    let mut mask = 0u64;
    for tok in body.split_whitespace() {
        let digits = tok
            .strip_prefix("x_")
            .or_else(|| tok.strip_prefix('x'))
            .unwrap_or(tok);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::parse(line, format!("bad variable token `{tok}`")));
        }
        let idx: usize = digits
            .parse()
            .map_err(|_| Error::parse(line, format!("bad variable token `{tok}`")))?;
        if idx >= limit {
            return Err(Error::parse(
                line,
                format!("variable x{idx} out of range for {limit} variables"),
            ));
        }
        mask |= 1 << idx;
    }
    Ok(Some(Monomial(mask)))
}

/// Parses ANF text. With `n_vars = None` the variable count is one more than
/// the highest index used (at least 1).
pub fn parse_anf(text: &str, n_vars: Option<usize>) -> Result<ParsedAnf> {
    parse_anf_lines(text.lines().enumerate().map(|(i, l)| (i + 1, l)), n_vars)
}

pub(crate) fn parse_anf_lines<'a>(
    lines: impl Iterator<Item = (usize, &'a str)>,
    n_vars: Option<usize>,
) -> Result<ParsedAnf> {
    if let Some(n) = n_vars {
        if n > MAX_ANF_VARS {
            return Err(Error::Capacity(format!(
                "{n} variables exceeds the ANF limit of {MAX_ANF_VARS}"
            )));
        }
    }
    let mut terms = Vec::new();
    for (lineno, raw) in lines {
        if let Some(m) = parse_monomial_line(raw, lineno, n_vars)? {
            terms.push(m);
        }
    }
    let n = n_vars.unwrap_or_else(|| {
        terms
            .iter()
            .filter_map(|m| m.max_var())
            .max()
            .map_or(1, |v| v + 1)
    });
    let mut counts = std::collections::BTreeMap::new();
    for m in &terms {
        *counts.entry(*m).or_insert(0usize) += 1;
    }
    let cancelled = counts
        .iter()
        .filter(|(_, &c)| c % 2 == 0)
        .map(|(m, _)| *m)
        .collect();
    let poly = AnfPolynomial::from_monomials(n, terms)?;
    Ok(ParsedAnf { poly, cancelled })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_token_styles() {
        let p = parse_anf("0 3\nx1 x_4\n# comment\n\n x2 x5 # trailing\n", Some(6)).unwrap();
        assert_eq!(p.poly, AnfPolynomial::from_terms(6, &[&[0, 3], &[1, 4], &[2, 5]]).unwrap());
        assert!(p.cancelled.is_empty());
    }

    #[test]
    fn literal_one_is_constant() {
        let p = parse_anf("1\nx1\n", Some(2)).unwrap();
        assert!(p.poly.has_constant());
        assert_eq!(p.poly.len(), 2);
    }

    #[test]
    fn repeated_monomials_cancel_and_are_reported() {
        let p = parse_anf("0 3\n1 5\n0 3\n", None).unwrap();
        assert_eq!(p.poly.n_vars(), 6);
        assert_eq!(p.poly, AnfPolynomial::from_terms(6, &[&[1, 5]]).unwrap());
        assert_eq!(p.cancelled, vec![Monomial::from_vars(&[0, 3])]);
    }

    #[test]
    fn out_of_range_index_reports_line() {
        let err = parse_anf("x0\nx_5\n", Some(4)).unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: Some(2),
                message: "variable x5 out of range for 4 variables".into()
            }
        );
    }

    #[test]
    fn garbage_tokens_rejected() {
        assert!(parse_anf("x\n", None).is_err());
        assert!(parse_anf("3 y\n", None).is_err());
        assert!(parse_anf("-1\n", None).is_err());
        assert!(parse_anf("99999999999999999999999\n", None).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = AnfPolynomial::from_terms(7, &[&[], &[0], &[2, 6], &[1, 3, 5]]).unwrap();
        let back = parse_anf(&f.to_text(), Some(7)).unwrap().poly;
        assert_eq!(back, f);
    }

    #[test]
    fn relabel_permutes_variables() {
        let f = AnfPolynomial::from_terms(3, &[&[0, 1], &[2]]).unwrap();
        let g = f.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(g, AnfPolynomial::from_terms(3, &[&[2, 0], &[1]]).unwrap());
        assert!(f.relabel(&[0, 0, 1]).is_err());
    }
}
