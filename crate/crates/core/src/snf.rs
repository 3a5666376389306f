//! Smith normal form over arbitrary-precision integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Invariants of a finitely generated abelian group
/// `Z^free_rank ⊕ Z/t_1 ⊕ ... ⊕ Z/t_r` with `t_1 | t_2 | ... | t_r`, `t_1 > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianInvariants {
    pub torsion: Vec<BigInt>,
    pub free_rank: usize,
}

impl AbelianInvariants {
    pub fn trivial() -> Self {
        AbelianInvariants { torsion: Vec::new(), free_rank: 0 }
    }

    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }

    pub fn torsion_u64(&self) -> Vec<u64> {
        self.torsion.iter().map(|t| u64::try_from(t).unwrap_or(u64::MAX)).collect()
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ts: Vec<String> = self.torsion.iter().map(|t| t.to_string()).collect();
        write!(f, "torsion [{}], free rank {}", ts.join(", "), self.free_rank)
    }
}

/// Diagonal entries `d_1 | d_2 | ... | d_r` (all positive) of the Smith
/// normal form of `m`, where `r` is the rank.
#[allow(clippy::needless_range_loop)]
pub fn invariant_factors(m: &[Vec<BigInt>], cols: usize) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    for row in &a {
        assert_eq!(row.len(), cols, "ragged matrix");
    }
    let rows = a.len();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let Some((pr, pc)) = min_entry(&a, t, cols) else { break };
        a.swap(t, pr);
        for row in a.iter_mut() {
            row.swap(t, pc);
        }
        loop {
            let mut dirty = false;
            for r in t + 1..rows {
                if !a[r][t].is_zero() {
                    let q = a[r][t].div_floor(&a[t][t]);
                    for c in t..cols {
                        let v = &a[t][c] * &q;
                        a[r][c] -= v;
                    }
                    if !a[r][t].is_zero() {
                        dirty = true;
                    }
                }
            }
            for c in t + 1..cols {
                if !a[t][c].is_zero() {
                    let q = a[t][c].div_floor(&a[t][t]);
                    for r in t..rows {
                        let v = &a[r][t] * &q;
                        a[r][c] -= v;
                    }
                    if !a[t][c].is_zero() {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                // Enforce divisibility: fold in a row whose entries the pivot does not divide.
                let bad = (t + 1..rows)
                    .find(|&r| (t + 1..cols).any(|c| !a[r][c].is_multiple_of(&a[t][t])));
                match bad {
                    Some(r) => {
                        for c in t..cols {
                            let v = a[r][c].clone();
                            a[t][c] += v;
                        }
                    }
                    None => break,
                }
            }
            let (pr, pc) = min_entry_rowcol(&a, t, cols);
            a.swap(t, pr);
            for row in a.iter_mut() {
                row.swap(t, pc);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

fn min_entry(a: &[Vec<BigInt>], t: usize, cols: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (r, row) in a.iter().enumerate().skip(t) {
        for (c, v) in row.iter().enumerate().take(cols).skip(t) {
            if !v.is_zero() && best.is_none_or(|(br, bc)| v.abs() < a[br][bc].abs()) {
                best = Some((r, c));
            }
        }
    }
    best
}

/// Smallest nonzero entry in row `t` or column `t` (from position `t` on).
fn min_entry_rowcol(a: &[Vec<BigInt>], t: usize, cols: usize) -> (usize, usize) {
    let mut best = (t, t);
    let better = |v: &BigInt, b: &BigInt| !v.is_zero() && (b.is_zero() || v.abs() < b.abs());
    for r in t..a.len() {
        if better(&a[r][t], &a[best.0][best.1]) {
            best = (r, t);
        }
    }
    for c in t..cols {
        if better(&a[t][c], &a[best.0][best.1]) {
            best = (t, c);
        }
    }
    best
}

/// Abelian invariants of the cokernel of the relation matrix `m`
/// (rows are relators, `cols` generators).
pub fn abelian_invariants(m: &[Vec<i64>], cols: usize) -> AbelianInvariants {
    let big: Vec<Vec<BigInt>> =
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let d = invariant_factors(&big, cols);
    AbelianInvariants {
        free_rank: cols - d.len(),
        torsion: d.into_iter().filter(|x| !x.is_one()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn det(m: &[Vec<BigInt>]) -> BigInt {
        let n = m.len();
        if n == 0 {
            return BigInt::one();
        }
        let mut s = BigInt::zero();
        for c in 0..n {
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = &m[0][c] * det(&minor);
            if c % 2 == 0 {
                s += term;
            } else {
                s -= term;
            }
        }
        s
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    /// Invariant factors from determinantal divisors: `d_k / d_{k-1}` where
    /// `d_k` is the gcd of all `k x k` minors.
    fn oracle(m: &[Vec<i64>], cols: usize) -> Vec<BigInt> {
        let big: Vec<Vec<BigInt>> =
            m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let mut out = Vec::new();
        let mut prev = BigInt::one();
        for k in 1..=m.len().min(cols) {
            let mut g = BigInt::zero();
            for rs in subsets(m.len(), k) {
                for cs in subsets(cols, k) {
                    let sub: Vec<Vec<BigInt>> =
                        rs.iter().map(|&r| cs.iter().map(|&c| big[r][c].clone()).collect()).collect();
                    g = g.gcd(&det(&sub));
                }
            }
            if g.is_zero() {
                break;
            }
            out.push(&g / &prev);
            prev = g;
        }
        out
    }

    #[test]
    fn klein_bottle_mapping_class_group() {
        let inv = abelian_invariants(&[vec![2, 0]], 2);
        assert_eq!(inv.torsion_u64(), vec![2]);
        assert_eq!(inv.free_rank, 1);
    }

    #[test]
    fn empty_and_free() {
        assert!(abelian_invariants(&[], 0).is_trivial());
        let inv = abelian_invariants(&[], 3);
        assert_eq!(inv.free_rank, 3);
        assert!(inv.torsion.is_empty());
    }

    #[test]
    fn divisibility_is_enforced() {
        let inv = abelian_invariants(&[vec![2, 0], vec![0, 3]], 2);
        assert_eq!(inv.torsion_u64(), vec![6]);
        let inv = abelian_invariants(&[vec![4, 0], vec![0, 6]], 2);
        assert_eq!(inv.torsion_u64(), vec![2, 12]);
    }

    #[test]
    fn large_entries_do_not_overflow() {
        let big = i64::MAX / 3;
        let inv = abelian_invariants(&[vec![big, big - 1], vec![big - 1, big]], 2);
        let prod: BigInt = inv.torsion.iter().product();
        let det = BigInt::from(big) * BigInt::from(big) - BigInt::from(big - 1) * BigInt::from(big - 1);
        assert_eq!(prod, det);
    }

    proptest! {
        #[test]
        fn matches_determinantal_divisors(
            rows in 0usize..4, cols in 1usize..5,
            entries in prop::collection::vec(-6i64..=6, 16),
        ) {
            let m: Vec<Vec<i64>> = (0..rows).map(|r| (0..cols).map(|c| entries[r * 4 + c]).collect()).collect();
            let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
            prop_assert_eq!(invariant_factors(&big, cols), oracle(&m, cols));
        }
    }
}
