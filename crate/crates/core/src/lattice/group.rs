use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::snf::{column_basis, kernel, snf, solve};

/// Finitely generated abelian group in invariant-factor form.
///
/// `factors` satisfies `n_1 | n_2 | ... | n_k`, no factor equals 1, and a
/// factor 0 stands for a free summand ℤ (zeros therefore come last).
/// Two groups are isomorphic iff their factor lists are equal.
#[derive(Clone, Serialize, Deserialize)]
pub struct FinAbGroup {
    #[serde(with = "crate::json::bigint_vec")]
    factors: Vec<BigInt>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    presentation: Option<IntMatrix>,
}

impl FinAbGroup {
    pub fn trivial() -> Self {
        FinAbGroup { factors: Vec::new(), presentation: None }
    }

    pub fn free(rank: usize) -> Self {
        FinAbGroup { factors: vec![BigInt::zero(); rank], presentation: None }
    }

    /// Canonicalises an arbitrary list of cyclic orders (0 = ℤ).
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Self {
        let n = orders.len();
        let d = IntMatrix::diagonal(n, n, orders.iter().cloned());
        cokernel(&d)
    }

    pub fn factors(&self) -> &[BigInt] {
        &self.factors
    }

    pub fn presentation(&self) -> Option<&IntMatrix> {
        self.presentation.as_ref()
    }

    pub fn free_rank(&self) -> usize {
        self.factors.iter().filter(|x| x.is_zero()).count()
    }

    pub fn torsion(&self) -> Vec<BigInt> {
        self.factors.iter().filter(|x| !x.is_zero()).cloned().collect()
    }

    pub fn is_free(&self) -> bool {
        self.factors.iter().all(Zero::is_zero)
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank() == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    /// Order when finite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.factors.iter().product())
    }
}

// Equality ignores the presentation.
impl PartialEq for FinAbGroup {
    fn eq(&self, other: &Self) -> bool {
        self.factors == other.factors
    }
}

impl Eq for FinAbGroup {}

impl std::hash::Hash for FinAbGroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.factors.hash(state);
    }
}

impl fmt::Debug for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.factors.iter().map(|n| if n.is_zero() { "Z".to_string() } else { format!("Z/{n}") }).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `ℤ^rows / image(a)`.
pub fn cokernel(a: &IntMatrix) -> FinAbGroup {
    let s = snf(a);
    let diag = s.diagonal();
    let mut factors: Vec<BigInt> = diag.into_iter().filter(|d| !d.is_one()).collect();
    factors.extend(std::iter::repeat_n(BigInt::zero(), a.rows().saturating_sub(a.cols())));
    FinAbGroup { factors, presentation: Some(a.clone()) }
}

/// Column basis of the sum of two column-generated lattices in ℤⁿ.
pub fn lattice_sum(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    column_basis(&a.hstack(b))
}

/// Column basis of the intersection of two column-generated lattices in ℤⁿ.
pub fn lattice_intersection(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let a = column_basis(a);
    let b = column_basis(b);
    let mut neg_b = b.clone();
    for j in 0..neg_b.cols() {
        neg_b.negate_col(j);
    }
    let k = kernel(&a.hstack(&neg_b));
    let rows: Vec<usize> = (0..a.cols()).collect();
    column_basis(&(&a * &k.select_rows(&rows)))
}

/// Whether every column of `a` lies in the column span of `b` over ℤ.
pub fn lattice_contains(b: &IntMatrix, a: &IntMatrix) -> bool {
    (0..a.cols()).all(|j| solve(b, &a.col(j)).is_some())
}

/// `[ℤⁿ : L]` for a column-generated lattice; `None` when `L` has lower rank.
pub fn lattice_index(l: &IntMatrix) -> Option<BigInt> {
    let s = snf(l);
    (s.rank() == l.rows()).then(|| s.elementary_divisors().iter().product())
}

/// `[M : L]` for lattices `L ⊆ M` of equal rank; `None` if not contained or ranks differ.
pub fn relative_index(outer: &IntMatrix, inner: &IntMatrix) -> Option<BigInt> {
    let outer = column_basis(outer);
    let mut coords = Vec::with_capacity(inner.cols());
    for j in 0..inner.cols() {
        coords.push(solve(&outer, &inner.col(j))?);
    }
    let c = IntMatrix::from_cols(outer.cols(), &coords);
    let s = snf(&c);
    (s.rank() == outer.cols()).then(|| s.elementary_divisors().iter().product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::matrix::ivec;

    #[test]
    fn cokernel_examples() {
        assert!(cokernel(&IntMatrix::identity(4)).is_trivial());
        assert_eq!(cokernel(&IntMatrix::from_i64(&[&[3]])).factors(), ivec(&[3]).as_slice());
        let g = cokernel(&IntMatrix::from_i64(&[&[2, 4], &[6, 8]]));
        assert_eq!(g.factors(), ivec(&[2, 4]).as_slice());
        assert_eq!(g.order(), Some(BigInt::from(8)));
    }

    #[test]
    fn free_part_counts_missing_rank() {
        let g = cokernel(&IntMatrix::from_i64(&[&[2], &[0], &[0]]));
        assert_eq!(g.factors(), ivec(&[2, 0, 0]).as_slice());
        assert_eq!(g.free_rank(), 2);
        assert_eq!(g.to_string(), "Z/2 + Z + Z");
    }

    #[test]
    fn canonical_form_merges_coprime_factors() {
        let g = FinAbGroup::from_cyclic_orders(&ivec(&[2, 3]));
        assert_eq!(g.factors(), ivec(&[6]).as_slice());
        let h = FinAbGroup::from_cyclic_orders(&ivec(&[4, 0, 2]));
        assert_eq!(h.factors(), ivec(&[2, 4, 0]).as_slice());
    }

    #[test]
    fn lattice_meet_and_join() {
        let a = IntMatrix::from_i64(&[&[2, 0], &[0, 1]]);
        let b = IntMatrix::from_i64(&[&[1, 0], &[0, 3]]);
        assert_eq!(lattice_index(&lattice_sum(&a, &b)), Some(BigInt::one()));
        assert_eq!(lattice_index(&lattice_intersection(&a, &b)), Some(BigInt::from(6)));
        assert!(lattice_contains(&a, &IntMatrix::from_i64(&[&[4], &[7]])));
        assert!(!lattice_contains(&a, &IntMatrix::from_i64(&[&[1], &[0]])));
        assert_eq!(relative_index(&a, &lattice_intersection(&a, &b)), Some(BigInt::from(3)));
    }
}
