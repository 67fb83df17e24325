//! Smith normal form over ℤ and the lattice operations built on it.
//!
//! The elimination always pivots on an entry of minimal nonzero absolute
//! value, which keeps coefficient growth in check on the small dense
//! matrices used throughout the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::matrix::IntMatrix;

/// `u * source * v == d`, `u` and `v` unimodular, `d` diagonal with
/// `d[0] | d[1] | ...` and all entries non-negative.
#[derive(Clone, Debug, Serialize)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    #[serde(skip)]
    pub u_inv: IntMatrix,
    #[serde(skip)]
    pub v_inv: IntMatrix,
    pub source: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().take_while(|x| !x.is_zero()).count()
    }

    /// Nonzero diagonal entries (elementary divisors).
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        self.diagonal().into_iter().filter(|x| !x.is_zero()).collect()
    }
}

struct Elimination {
    a: IntMatrix,
    u: IntMatrix,
    u_inv: IntMatrix,
    v: IntMatrix,
    v_inv: IntMatrix,
}

impl Elimination {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        self.u.swap_rows(i, j);
        self.u_inv.swap_cols(i, j);
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        self.v.swap_cols(i, j);
        self.v_inv.swap_rows(i, j);
    }

    /// row[t] += f * row[s]
    fn add_row(&mut self, t: usize, s: usize, f: &BigInt) {
        self.a.add_row_multiple(t, s, f);
        self.u.add_row_multiple(t, s, f);
        self.u_inv.add_col_multiple(s, t, &-f);
    }

    /// col[t] += f * col[s]
    fn add_col(&mut self, t: usize, s: usize, f: &BigInt) {
        self.a.add_col_multiple(t, s, f);
        self.v.add_col_multiple(t, s, f);
        self.v_inv.add_row_multiple(s, t, &-f);
    }

    fn negate_row(&mut self, i: usize) {
        self.a.negate_row(i);
        self.u.negate_row(i);
        self.u_inv.negate_col(i);
    }

    fn min_abs_in(&self, t: usize) -> Option<(usize, usize)> {
        let (m, n) = self.a.shape();
        let mut best: Option<(usize, usize, BigInt)> = None;
        for i in t..m {
            for j in t..n {
                let x = self.a[(i, j)].abs();
                if x.is_zero() {
                    continue;
                }
                if best.as_ref().is_none_or(|b| x < b.2) {
                    let one = x.is_one();
                    best = Some((i, j, x));
                    if one {
                        return best.map(|b| (b.0, b.1));
                    }
                }
            }
        }
        best.map(|b| (b.0, b.1))
    }

    fn run(&mut self) {
        let (m, n) = self.a.shape();
        for t in 0..m.min(n) {
            let Some((i, j)) = self.min_abs_in(t) else { break };
            self.swap_rows(t, i);
            self.swap_cols(t, j);
            loop {
                let pivot = self.a[(t, t)].clone();
                let mut dirty = false;
                for i in t + 1..m {
                    if self.a[(i, t)].is_zero() {
                        continue;
                    }
                    let q = self.a[(i, t)].div_floor(&pivot);
                    self.add_row(i, t, &-q);
                    dirty |= !self.a[(i, t)].is_zero();
                }
                for j in t + 1..n {
                    if self.a[(t, j)].is_zero() {
                        continue;
                    }
                    let q = self.a[(t, j)].div_floor(&pivot);
                    self.add_col(j, t, &-q);
                    dirty |= !self.a[(t, j)].is_zero();
                }
                if dirty {
                    self.pull_min_to_pivot(t);
                    continue;
                }
                // Row and column are clear; enforce divisibility of the rest.
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !self.a[(i, j)].is_multiple_of(&pivot));
                match bad {
                    Some((i, _)) => self.add_row(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if self.a[(t, t)].is_negative() {
                self.negate_row(t);
            }
        }
    }

    /// Moves the smallest nonzero entry of row t / column t to (t, t).
    fn pull_min_to_pivot(&mut self, t: usize) {
        let (m, n) = self.a.shape();
        let mut best = (t, t, self.a[(t, t)].abs());
        for i in t + 1..m {
            let x = self.a[(i, t)].abs();
            if !x.is_zero() && (best.2.is_zero() || x < best.2) {
                best = (i, t, x);
            }
        }
        for j in t + 1..n {
            let x = self.a[(t, j)].abs();
            if !x.is_zero() && (best.2.is_zero() || x < best.2) {
                best = (t, j, x);
            }
        }
        self.swap_rows(t, best.0);
        self.swap_cols(t, best.1);
    }
}

pub fn snf(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = a.shape();
    let mut e = Elimination {
        a: a.clone(),
        u: IntMatrix::identity(m),
        u_inv: IntMatrix::identity(m),
        v: IntMatrix::identity(n),
        v_inv: IntMatrix::identity(n),
    };
    e.run();
    SmithDecomposition { u: e.u, d: e.a, v: e.v, u_inv: e.u_inv, v_inv: e.v_inv, source: a.clone() }
}

/// Columns form a ℤ-basis of `{x ∈ ℤⁿ : a·x = 0}` (automatically saturated).
pub fn kernel(a: &IntMatrix) -> IntMatrix {
    let s = snf(a);
    let r = s.rank();
    let idx: Vec<usize> = (r..a.cols()).collect();
    s.v.select_cols(&idx)
}

pub fn rank(a: &IntMatrix) -> usize {
    snf(a).rank()
}

/// Some integer solution of `a·x = b`, if one exists.
pub fn solve(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(a.rows(), b.len(), "right-hand side length mismatch");
    let s = snf(a);
    let ub = s.u.mul_vec(b);
    let diag = s.diagonal();
    let mut y = vec![BigInt::zero(); a.cols()];
    for (i, c) in ub.iter().enumerate() {
        match diag.get(i) {
            Some(d) if !d.is_zero() => {
                if !c.is_multiple_of(d) {
                    return None;
                }
                y[i] = c / d;
            }
            _ => {
                if !c.is_zero() {
                    return None;
                }
            }
        }
    }
    Some(s.v.mul_vec(&y))
}

/// Columns form a ℤ-basis of the lattice spanned by the columns of `gens`.
pub fn column_basis(gens: &IntMatrix) -> IntMatrix {
    let s = snf(gens);
    let r = s.rank();
    let mut basis = IntMatrix::zeros(gens.rows(), r);
    for j in 0..r {
        for i in 0..gens.rows() {
            basis[(i, j)] = &s.u_inv[(i, j)] * &s.d[(j, j)];
        }
    }
    basis
}

/// Saturation of a row-generated sublattice of ℤⁿ.
#[derive(Clone, Debug, Serialize)]
pub struct Saturation {
    /// Rows form a basis of `(ℚ·L) ∩ ℤⁿ`.
    pub basis: IntMatrix,
    /// Index of `L` in its saturation.
    #[serde(with = "crate::json::bigint")]
    pub index: BigInt,
}

pub fn saturate(gens: &IntMatrix) -> Saturation {
    let s = snf(gens);
    let r = s.rank();
    let idx: Vec<usize> = (0..r).collect();
    let basis = s.v_inv.select_rows(&idx);
    let index = s.elementary_divisors().iter().product();
    Saturation { basis, index }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::matrix::ivec;
    use proptest::prelude::*;

    fn check(a: &IntMatrix) -> SmithDecomposition {
        let s = snf(a);
        assert_eq!(&(&s.u * a) * &s.v, s.d);
        assert!(s.u.det().abs().is_one());
        assert!(s.v.det().abs().is_one());
        assert_eq!(&s.u * &s.u_inv, IntMatrix::identity(a.rows()));
        assert_eq!(&s.v * &s.v_inv, IntMatrix::identity(a.cols()));
        let diag = s.diagonal();
        for w in diag.windows(2) {
            assert!(!w[0].is_negative() && (w[1].is_zero() || w[1].is_multiple_of(&w[0])));
        }
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if i != j {
                    assert!(s.d[(i, j)].is_zero());
                }
            }
        }
        s
    }

    #[test]
    fn identity_and_zero() {
        let s = check(&IntMatrix::identity(3));
        assert_eq!(s.u, IntMatrix::identity(3));
        assert_eq!(s.v, IntMatrix::identity(3));
        assert_eq!(s.d, IntMatrix::identity(3));
        let z = check(&IntMatrix::zeros(2, 3));
        assert!(z.d.is_zero());
    }

    #[test]
    fn two_by_two_example() {
        let s = check(&IntMatrix::from_i64(&[&[2, 4], &[6, 8]]));
        assert_eq!(s.diagonal(), ivec(&[2, 4]));
    }

    #[test]
    fn kernel_examples() {
        let k = kernel(&IntMatrix::from_i64(&[&[1, 1]]));
        assert_eq!(k.cols(), 1);
        let v = k.col(0);
        assert!(v == ivec(&[1, -1]) || v == ivec(&[-1, 1]));
        assert_eq!(kernel(&IntMatrix::from_i64(&[&[2]])).cols(), 0);

        let a = IntMatrix::from_i64(&[&[1, 2, 3]]);
        let k = kernel(&a);
        assert_eq!(k.cols(), 2);
        assert!((&a * &k).is_zero());
        // saturated: the kernel basis has trivial elementary divisors
        assert_eq!(saturate(&k.transpose()).index, BigInt::one());
    }

    #[test]
    fn saturation_examples() {
        let s = saturate(&IntMatrix::from_i64(&[&[2, 0]]));
        assert_eq!(s.index, BigInt::from(2));
        assert_eq!(crate::lattice::matrix::primitive(&s.basis.row(0)), ivec(&[1, 0]));
        let s = saturate(&IntMatrix::from_i64(&[&[1, 1]]));
        assert_eq!(s.index, BigInt::one());
        let s = saturate(&IntMatrix::from_i64(&[&[2, 2], &[0, 4]]));
        assert_eq!(s.index, BigInt::from(8));
        assert_eq!(s.basis.det().abs(), BigInt::one());
    }

    #[test]
    fn solve_respects_integrality() {
        let a = IntMatrix::from_i64(&[&[2, 0], &[0, 3]]);
        assert_eq!(solve(&a, &ivec(&[4, 9])), Some(ivec(&[2, 3])));
        assert_eq!(solve(&a, &ivec(&[1, 0])), None);
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(m, n)| {
            proptest::collection::vec(-20i64..=20, m * n)
                .prop_map(move |v| IntMatrix::from_vec(m, n, v.into_iter().map(BigInt::from).collect()).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn smith_invariants_hold(a in small_matrix()) {
            check(&a);
        }

        #[test]
        fn kernel_is_annihilated(a in small_matrix()) {
            let k = kernel(&a);
            prop_assert!((&a * &k).is_zero());
            prop_assert_eq!(k.cols() + rank(&a), a.cols());
        }
    }
}
