//! Hilbert bases of saturated affine monoids `C ∩ ℤⁿ`.
//!
//! Candidates are the generators together with the lattice points of the
//! half-open fundamental parallelepipeds of every basis of extreme rays; a
//! candidate is kept when no other candidate can be subtracted from it inside
//! the cone.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::cone::{IntegralStructure, RationalCone};
use super::dd::cone_from_inequalities;
use crate::error::{Error, Result};
use crate::lattice::{dot, kernel, rank, saturate, snf, solve, IntMatrix};

#[derive(Clone, Debug, Serialize)]
pub struct HilbertBasis {
    pub ambient: usize,
    /// Irreducible elements of the pointed part, lifted to the ambient lattice.
    #[serde(with = "crate::json::bigint_vecs")]
    pub elements: Vec<Vec<BigInt>>,
    /// ℤ-basis of the unit group (lineality lattice).
    #[serde(with = "crate::json::bigint_vecs")]
    pub group: Vec<Vec<BigInt>>,
}

/// Lattice points `Σ λ_i g_i` with `λ ∈ [0,1)ⁿ` for `n` independent `g_i` in ℤⁿ.
pub fn parallelepiped_points(gens: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = gens.len();
    let a = IntMatrix::from_cols(n, gens);
    let det = a.det();
    assert!(!det.is_zero(), "parallelepiped of dependent vectors");
    let s = snf(&a);
    let d = s.diagonal();
    let mut out = Vec::new();
    let mut y = vec![BigInt::zero(); n];
    loop {
        let x0 = s.u_inv.mul_vec(&y);
        // λ·det = adj(A)·x0; reduce λ into [0,1).
        let num = solve(&a, &x0.iter().map(|v| v * &det).collect::<Vec<_>>()).expect("adjugate solve");
        let dabs = det.abs();
        let frac: Vec<BigInt> = num.iter().map(|v| v.mod_floor(&dabs)).collect();
        let x: Vec<BigInt> = a.mul_vec(&frac).iter().map(|v| v / &dabs).collect();
        out.push(x);
        let mut i = 0;
        loop {
            if i == n {
                out.sort();
                return out;
            }
            y[i] += 1;
            if y[i] < d[i] {
                break;
            }
            y[i] = BigInt::zero();
            i += 1;
        }
    }
}

fn in_cone(ineqs: &[Vec<BigInt>], x: &[BigInt]) -> bool {
    ineqs.iter().all(|a| !dot(a, x).is_negative())
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..n {
        if n - i < k - cur.len() {
            break;
        }
        cur.push(i);
        subsets(n, k, i + 1, cur, f);
        cur.pop();
    }
}

/// Hilbert basis of a full-dimensional pointed cone in ℤᵐ given by generators.
fn pointed_full_dim(m: usize, gens: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if m == 0 {
        return Vec::new();
    }
    let dual = cone_from_inequalities(m, gens);
    let ineqs = dual.rays;
    let rays = cone_from_inequalities(m, &ineqs).rays;
    let mut cand: Vec<Vec<BigInt>> = rays.clone();
    subsets(rays.len(), m, 0, &mut Vec::new(), &mut |idx| {
        let sub: Vec<Vec<BigInt>> = idx.iter().map(|&i| rays[i].clone()).collect();
        if rank(&IntMatrix::from_rows(m, &sub)) == m {
            cand.extend(parallelepiped_points(&sub).into_iter().filter(|x| x.iter().any(|v| !v.is_zero())));
        }
    });
    cand.sort();
    cand.dedup();
    let diff = |x: &[BigInt], h: &[BigInt]| -> Vec<BigInt> { x.iter().zip(h).map(|(a, b)| a - b).collect() };
    cand.iter().filter(|x| !cand.iter().any(|h| h != *x && in_cone(&ineqs, &diff(x, h)))).cloned().collect()
}

/// Hilbert basis of the pointed cone generated by `gens` (any dimension).
pub fn hilbert_basis_of_generated(n: usize, gens: &[Vec<BigInt>]) -> Result<Vec<Vec<BigInt>>> {
    let gens: Vec<Vec<BigInt>> = gens.iter().filter(|g| g.iter().any(|x| !x.is_zero())).cloned().collect();
    if gens.is_empty() {
        return Ok(Vec::new());
    }
    if !super::dd::extreme_rays(n, &gens).is_pointed() {
        return Err(Error::Invalid("cone is not pointed".into()));
    }
    let sat = saturate(&IntMatrix::from_rows(n, &gens)).basis;
    let k = sat.rows();
    let bt = sat.transpose();
    let coords: Vec<Vec<BigInt>> = gens.iter().map(|g| solve(&bt, g).expect("generator in its span")).collect();
    let mut out: Vec<Vec<BigInt>> = pointed_full_dim(k, &coords).iter().map(|c| bt.mul_vec(c)).collect();
    out.sort();
    Ok(out)
}

/// Splitting `ℤⁿ = L ⊕ Q` adapted to the lineality `L` of `{a·x ≥ 0}`.
struct Splitting {
    l: usize,
    u: IntMatrix,
    u_inv: IntMatrix,
    quotient_ineqs: Vec<Vec<BigInt>>,
}

impl Splitting {
    fn new(n: usize, ineqs: &[Vec<BigInt>]) -> Self {
        let lin = if ineqs.is_empty() { IntMatrix::identity(n) } else { kernel(&IntMatrix::from_rows(n, ineqs)) };
        let l = lin.cols();
        let (u, u_inv) = if l == 0 {
            (IntMatrix::identity(n), IntMatrix::identity(n))
        } else {
            let s = snf(&lin);
            (s.u, s.u_inv)
        };
        let quotient_ineqs = ineqs.iter().map(|a| u_inv.transpose().mul_vec(a)[l..].to_vec()).collect();
        Splitting { l, u, u_inv, quotient_ineqs }
    }

    fn project(&self, x: &[BigInt]) -> Vec<BigInt> {
        self.u.mul_vec(x)[self.l..].to_vec()
    }

    fn lift(&self, y: &[BigInt]) -> Vec<BigInt> {
        let mut z = vec![BigInt::zero(); self.l];
        z.extend_from_slice(y);
        self.u_inv.mul_vec(&z)
    }

    fn group(&self) -> Vec<Vec<BigInt>> {
        (0..self.l).map(|j| self.u_inv.col(j)).collect()
    }
}

/// Hilbert basis of `{x ∈ ℤⁿ : a·x ≥ 0}`, with its unit group.
pub fn hilbert_basis_of_inequalities(n: usize, ineqs: &[Vec<BigInt>]) -> HilbertBasis {
    let sp = Splitting::new(n, ineqs);
    let m = n - sp.l;
    let qgens = cone_from_inequalities(m, &sp.quotient_ineqs).rays;
    let mut elements: Vec<Vec<BigInt>> = pointed_full_dim(m, &qgens).iter().map(|y| sp.lift(y)).collect();
    elements.sort();
    HilbertBasis { ambient: n, elements, group: sp.group() }
}

/// Minimal generating set of `S ∩ σ∨`, in `S`-coordinates.
pub fn hilbert_basis(sigma: &RationalCone, s: &IntegralStructure) -> HilbertBasis {
    let dual_rays = s.cone_in_dual(sigma).rays;
    hilbert_basis_of_inequalities(sigma.ambient, &dual_rays)
}

#[derive(Clone, Debug, Serialize)]
pub struct HilbertCheck {
    pub bound: u32,
    pub points_checked: usize,
    pub complete: bool,
    pub minimal: bool,
    #[serde(with = "crate::json::bigint_vecs")]
    pub witnesses: Vec<Vec<BigInt>>,
}

/// Exhaustive check on the box `[-L, L]ⁿ`: every monoid point is an
/// ℕ-combination of the elements plus a unit, and no element is the sum of
/// two nonzero monoid elements.
pub fn verify_hilbert_basis(ineqs: &[Vec<BigInt>], hb: &HilbertBasis, bound: u32) -> HilbertCheck {
    let n = hb.ambient;
    let sp = Splitting::new(n, ineqs);
    let qi = &sp.quotient_ineqs;
    let proj: Vec<Vec<BigInt>> = hb.elements.iter().map(|h| sp.project(h)).collect();
    let lb = BigInt::from(bound);
    let mut memo: HashMap<Vec<BigInt>, bool> = HashMap::new();
    let mut witnesses = Vec::new();
    let mut points = 0;
    let mut x = vec![-lb.clone(); n];
    'outer: loop {
        if in_cone(ineqs, &x) {
            points += 1;
            if !representable(&sp.project(&x), &proj, qi, &mut memo) {
                witnesses.push(x.clone());
            }
        }
        for i in 0..n {
            if x[i] < lb {
                x[i] += 1;
                continue 'outer;
            }
            x[i] = -lb.clone();
        }
        break;
    }
    let complete = witnesses.is_empty();
    let mut minimal = true;
    for (i, h) in proj.iter().enumerate() {
        if h.iter().all(Zero::is_zero) || !in_cone(qi, h) {
            minimal = false;
            witnesses.push(hb.elements[i].clone());
            continue;
        }
        for (j, k) in proj.iter().enumerate() {
            let d: Vec<BigInt> = h.iter().zip(k).map(|(a, b)| a - b).collect();
            if i != j && in_cone(qi, &d) {
                minimal = false;
                witnesses.push(hb.elements[i].clone());
                break;
            }
        }
    }
    HilbertCheck { bound, points_checked: points, complete, minimal, witnesses }
}

fn representable(
    y: &[BigInt],
    basis: &[Vec<BigInt>],
    ineqs: &[Vec<BigInt>],
    memo: &mut HashMap<Vec<BigInt>, bool>,
) -> bool {
    if y.iter().all(Zero::is_zero) {
        return true;
    }
    if let Some(&v) = memo.get(y) {
        return v;
    }
    let mut ok = false;
    for h in basis {
        let d: Vec<BigInt> = y.iter().zip(h).map(|(a, b)| a - b).collect();
        if in_cone(ineqs, &d) && representable(&d, basis, ineqs, memo) {
            ok = true;
            break;
        }
    }
    memo.insert(y.to_vec(), ok);
    ok
}

/// Number of lattice points in the half-open parallelepiped, `|det|`.
pub fn parallelepiped_volume(gens: &[Vec<BigInt>]) -> BigInt {
    let n = gens.len();
    IntMatrix::from_rows(n, gens).det().abs().max(BigInt::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ivec;

    #[test]
    fn a1_singularity() {
        // σ∨ = ⟨(1,0),(1,2)⟩
        let ineqs = cone_from_inequalities(2, &[ivec(&[1, 0]), ivec(&[1, 2])]).rays;
        let sigma = RationalCone::new(2, ineqs).unwrap();
        let hb = hilbert_basis(&sigma, &IntegralStructure::standard(2));
        assert_eq!(hb.elements, vec![ivec(&[1, 0]), ivec(&[1, 1]), ivec(&[1, 2])]);
        let chk = verify_hilbert_basis(&sigma.rays, &hb, 8);
        assert!(chk.complete && chk.minimal, "{chk:?}");
    }

    #[test]
    fn parallelepiped_counts() {
        let g = vec![ivec(&[1, 0]), ivec(&[1, 3])];
        let pts = parallelepiped_points(&g);
        assert_eq!(pts, vec![ivec(&[0, 0]), ivec(&[1, 1]), ivec(&[1, 2])]);
        assert_eq!(parallelepiped_volume(&g), BigInt::from(3));
    }

    #[test]
    fn smooth_cone_gives_dual_basis() {
        let sigma = RationalCone::new(3, vec![ivec(&[1, 0, 0]), ivec(&[0, 0, 1]), ivec(&[1, 1, 1])]).unwrap();
        let hb = hilbert_basis(&sigma, &IntegralStructure::standard(3));
        assert_eq!(hb.elements.len(), 3);
        assert!(hb.group.is_empty());
        let g1 = RationalCone::new(1, vec![ivec(&[1])]).unwrap();
        assert_eq!(hilbert_basis(&g1, &IntegralStructure::standard(1)).elements, vec![ivec(&[1])]);
    }

    #[test]
    fn lower_dimensional_cone_has_units() {
        let ray = RationalCone::new(3, vec![ivec(&[1, 0, 0])]).unwrap();
        let hb = hilbert_basis(&ray, &IntegralStructure::standard(3));
        assert_eq!(hb.group.len(), 2);
        assert_eq!(hb.elements.len(), 1);
        let chk = verify_hilbert_basis(&ray.rays, &hb, 4);
        assert!(chk.complete && chk.minimal);
        let zero = hilbert_basis(&RationalCone::zero(2), &IntegralStructure::standard(2));
        assert!(zero.elements.is_empty());
        assert_eq!(zero.group.len(), 2);
    }

    #[test]
    fn generated_hilbert_basis() {
        let hb = hilbert_basis_of_generated(3, &[ivec(&[1, 0, 0]), ivec(&[1, 2, 0])]).unwrap();
        assert_eq!(hb, vec![ivec(&[1, 0, 0]), ivec(&[1, 1, 0]), ivec(&[1, 2, 0])]);
        let hb = hilbert_basis_of_generated(2, &[ivec(&[1, 0]), ivec(&[1, 4])]).unwrap();
        assert_eq!(hb.len(), 5);
    }

    #[test]
    fn broken_basis_is_caught() {
        let sigma = RationalCone::new(2, vec![ivec(&[0, 1]), ivec(&[2, -1])]).unwrap();
        let mut hb = hilbert_basis(&sigma, &IntegralStructure::standard(2));
        hb.elements.retain(|h| h != &ivec(&[1, 1]));
        assert!(!verify_hilbert_basis(&sigma.rays, &hb, 8).complete);
        hb.elements.push(ivec(&[2, 2]));
        hb.elements.push(ivec(&[1, 1]));
        assert!(!verify_hilbert_basis(&sigma.rays, &hb, 8).minimal);
    }
}
