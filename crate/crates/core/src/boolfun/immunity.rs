use crate::boolfun::anf::AnfPolynomial;
use crate::boolfun::truth::anf_to_truth_table;
use crate::error::{Error, Result};

/// Variable limit for the annihilator rank computation.
pub const MAX_AI_VARS: usize = 12;

/// Rank over GF(2) of rows packed into `u64` words.
pub(crate) fn gf2_rank(mut rows: Vec<Vec<u64>>, cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let (w, b) = (col / 64, col % 64);
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] >> b & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] >> b & 1 == 1 {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// True when some nonzero function of degree `<= degree` vanishes on every point.
fn has_annihilator(points: &[usize], n_vars: usize, degree: usize) -> bool {
    let monomials: Vec<usize> = (0..1usize << n_vars)
        .filter(|m| m.count_ones() as usize <= degree)
        .collect();
    let cols = monomials.len();
    let rows: Vec<Vec<u64>> = points
        .iter()
        .map(|&x| {
            let mut row = vec![0u64; cols.div_ceil(64)];
            for (j, &m) in monomials.iter().enumerate() {
                if x & m == m {
                    row[j / 64] |= 1 << (j % 64);
                }
            }
            row
        })
        .collect();
    gf2_rank(rows, cols) < cols
}

/// Smallest degree of a nonzero annihilator of `f` or `f ⊕ 1`.
///
/// The search starts at degree 0, so constant functions report 0 (a constant
/// is annihilated by the function 1, or its complement is).
pub fn algebraic_immunity(f: &AnfPolynomial) -> Result<usize> {
    let n = f.n_vars();
    if n > MAX_AI_VARS {
        return Err(Error::Capacity(format!(
            "algebraic immunity limited to {MAX_AI_VARS} variables, got {n}"
        )));
    }
    let t = anf_to_truth_table(f)?;
    let size = 1usize << n;
    let ones: Vec<usize> = (0..size).filter(|&x| t.get(x)).collect();
    let zeros: Vec<usize> = (0..size).filter(|&x| !t.get(x)).collect();
    for d in 0..=n {
        if has_annihilator(&ones, n, d) || has_annihilator(&zeros, n, d) {
            return Ok(d);
        }
    }
    unreachable!("the function x ↦ f(x) ⊕ 1 annihilates f at degree n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfun::truth::TruthTable;

    /// Enumerates every function of degree <= d and tests annihilation directly.
    fn brute_force_ai(t: &TruthTable) -> usize {
        let n = t.n_vars();
        let size = 1usize << n;
        let f: u64 = (0..size).fold(0, |acc, x| acc | (t.get(x) as u64) << x);
        let all = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
        for d in 0..=n {
            let tables: Vec<u64> = (0..size)
                .filter(|m| m.count_ones() as usize <= d)
                .map(|m| (0..size).fold(0u64, |acc, x| acc | ((x & m == m) as u64) << x))
                .collect();
            // Gray-code walk over all nonzero combinations
            let mut g = 0u64;
            for i in 1u64..(1 << tables.len()) {
                g ^= tables[i.trailing_zeros() as usize];
                if g & f == 0 || g & !f & all == 0 {
                    return d;
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn bent_combiner_has_immunity_two() {
        let f = AnfPolynomial::from_terms(6, &[&[0, 3], &[1, 4], &[2, 5]]).unwrap();
        assert_eq!(algebraic_immunity(&f).unwrap(), 2);
        assert_eq!(brute_force_ai(&anf_to_truth_table(&f).unwrap()), 2);
    }

    #[test]
    fn majority_of_three() {
        let maj = AnfPolynomial::from_terms(3, &[&[0, 1], &[0, 2], &[1, 2]]).unwrap();
        assert_eq!(brute_force_ai(&anf_to_truth_table(&maj).unwrap()), 2);
        assert_eq!(algebraic_immunity(&maj).unwrap(), 2);
    }

    #[test]
    fn constants_are_zero_by_convention() {
        assert_eq!(algebraic_immunity(&AnfPolynomial::zero(4)).unwrap(), 0);
        assert_eq!(algebraic_immunity(&AnfPolynomial::zero(4).complement()).unwrap(), 0);
    }

    #[test]
    fn linear_function_has_immunity_one() {
        let f = AnfPolynomial::from_terms(5, &[&[0], &[4]]).unwrap();
        assert_eq!(algebraic_immunity(&f).unwrap(), 1);
    }

    #[test]
    fn agrees_with_enumeration_on_small_functions() {
        for code in 0u64..256 {
            let t = TruthTable::from_fn(3, |x| code >> x & 1 == 1).unwrap();
            let f = crate::boolfun::truth_table_to_anf(&t);
            assert_eq!(algebraic_immunity(&f).unwrap(), brute_force_ai(&t), "code {code:#x}");
        }
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(
            algebraic_immunity(&AnfPolynomial::zero(13)),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn rank_of_identity_and_dependent_rows() {
        assert_eq!(gf2_rank(vec![vec![1], vec![2], vec![3]], 2), 2);
        assert_eq!(gf2_rank(vec![vec![0]], 5), 0);
    }
}
