//! Cones in the space `B(X)` of symmetric bilinear forms and integral
//! structures on the dual space `Sym²(X) ⊗ ℚ`.
//!
//! A form `b` has coordinates `b_kl` (`k ≤ l`, lexicographic); a character
//! has coordinates on the monomials `x_k x_l`. The pairing is the plain dot
//! product, so `⟨b, x_k x_l⟩ = b(x_k, x_l)` and `⟨b, x⊗x⟩ = b(x, x)` once
//! `x⊗x` is written as `Σ x_k² · x_k² + Σ_{k<l} 2x_k x_l · x_k x_l`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::dd::{cone_from_inequalities, extreme_rays, DoubleDescription};
use crate::error::{Error, Result};
use crate::lattice::{dot, primitive_ray, saturate, snf, solve, IntMatrix};

pub fn sym_dim(g: usize) -> usize {
    g * (g + 1) / 2
}

/// Inverse of `sym_dim`.
pub fn genus_of(n: usize) -> Option<usize> {
    (0..=n).find(|&g| sym_dim(g) == n)
}

pub fn sym_index(g: usize, k: usize, l: usize) -> usize {
    let (k, l) = if k <= l { (k, l) } else { (l, k) };
    k * g - k * (k + 1) / 2 + l
}

pub fn form_to_vec(b: &IntMatrix) -> Vec<BigInt> {
    let g = b.rows();
    (0..g).flat_map(|k| (k..g).map(move |l| (k, l))).map(|(k, l)| b[(k, l)].clone()).collect()
}

pub fn vec_to_form(g: usize, v: &[BigInt]) -> IntMatrix {
    let mut b = IntMatrix::zeros(g, g);
    for k in 0..g {
        for l in 0..g {
            b[(k, l)] = v[sym_index(g, k, l)].clone();
        }
    }
    b
}

/// The rank-one form `x xᵀ` in form coordinates.
pub fn rank_one_form(x: &[BigInt]) -> Vec<BigInt> {
    let g = x.len();
    (0..g).flat_map(|k| (k..g).map(move |l| (k, l))).map(|(k, l)| &x[k] * &x[l]).collect()
}

/// `x ⊗ x` in monomial coordinates of `Sym²(X)`.
pub fn character_square(x: &[BigInt]) -> Vec<BigInt> {
    let g = x.len();
    (0..g)
        .flat_map(|k| (k..g).map(move |l| (k, l)))
        .map(|(k, l)| if k == l { &x[k] * &x[k] } else { BigInt::from(2) * &x[k] * &x[l] })
        .collect()
}

/// Positive semi-definiteness via principal minors.
pub fn is_psd(b: &IntMatrix) -> bool {
    let g = b.rows();
    (1u32..1 << g).all(|mask| {
        let idx: Vec<usize> = (0..g).filter(|&i| mask >> i & 1 == 1).collect();
        !b.select_rows(&idx).select_cols(&idx).det().is_negative()
    })
}

/// Cone generated by primitive integer rays; pointed unless flagged.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalCone {
    pub ambient: usize,
    #[serde(with = "crate::json::bigint_vecs")]
    pub rays: Vec<Vec<BigInt>>,
}

impl RationalCone {
    /// Primitivizes the generators and keeps only extreme rays.
    pub fn new(ambient: usize, gens: Vec<Vec<BigInt>>) -> Result<Self> {
        if gens.iter().any(|g| g.len() != ambient) {
            return Err(Error::Shape(format!("cone generators must have length {ambient}")));
        }
        let gens: Vec<Vec<BigInt>> =
            gens.into_iter().filter(|g| g.iter().any(|x| !x.is_zero())).map(|g| primitive_ray(&g)).collect();
        if gens.is_empty() {
            return Ok(RationalCone::zero(ambient));
        }
        let d = extreme_rays(ambient, &gens);
        if !d.is_pointed() {
            return Err(Error::Invalid("cone is not strongly convex".into()));
        }
        Ok(RationalCone { ambient, rays: d.rays })
    }

    /// Trusts that `rays` are primitive extreme rays; keeps the given order.
    pub fn from_rays_unchecked(ambient: usize, rays: Vec<Vec<BigInt>>) -> Self {
        RationalCone { ambient, rays }
    }

    pub fn zero(ambient: usize) -> Self {
        RationalCone { ambient, rays: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        if self.rays.is_empty() {
            0
        } else {
            crate::lattice::rank(&IntMatrix::from_rows(self.ambient, &self.rays))
        }
    }

    pub fn is_simplicial(&self) -> bool {
        self.dim() == self.rays.len()
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.dual().generators().iter().all(|u| !dot(u, x).is_negative()) && self.in_span(x)
    }

    fn in_span(&self, x: &[BigInt]) -> bool {
        if self.rays.is_empty() {
            return x.iter().all(Zero::is_zero);
        }
        let m = IntMatrix::from_rows(self.ambient, &self.rays);
        let mut rows = self.rays.clone();
        rows.push(x.to_vec());
        crate::lattice::rank(&IntMatrix::from_rows(self.ambient, &rows)) == crate::lattice::rank(&m)
    }

    /// Relative interior membership.
    pub fn relint_contains(&self, x: &[BigInt]) -> bool {
        if !self.contains(x) {
            return false;
        }
        self.dual().rays.iter().all(|u| {
            let on_face = self.rays.iter().all(|r| dot(u, r).is_zero());
            on_face || dot(u, x).is_positive()
        })
    }

    /// `σ∨` in the same coordinates, with the standard pairing.
    pub fn dual(&self) -> DoubleDescription {
        cone_from_inequalities(self.ambient, &self.rays)
    }

    /// Sorted copy of the rays, for set comparisons.
    pub fn sorted_rays(&self) -> Vec<Vec<BigInt>> {
        let mut r = self.rays.clone();
        r.sort();
        r
    }

    pub fn same_as(&self, other: &RationalCone) -> bool {
        self.sorted_rays() == other.sorted_rays()
    }

    /// Image under a linear map on coordinates.
    pub fn image(&self, m: &IntMatrix) -> RationalCone {
        RationalCone { ambient: self.ambient, rays: self.rays.iter().map(|r| primitive_ray(&m.mul_vec(r))).collect() }
    }
}

/// A full-rank lattice `S ⊂ Sym²(X) ⊗ ℚ`, basis rows `basis / denominator`
/// in monomial coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegralStructure {
    pub basis: IntMatrix,
    #[serde(with = "crate::json::bigint")]
    pub denominator: BigInt,
}

impl IntegralStructure {
    pub fn standard(n: usize) -> Self {
        IntegralStructure { basis: IntMatrix::identity(n), denominator: BigInt::one() }
    }

    pub fn new(basis: IntMatrix, denominator: BigInt) -> Result<Self> {
        if basis.rows() != basis.cols() || basis.det().is_zero() || denominator.is_zero() {
            return Err(Error::Invalid("integral structure must be a full-rank square basis".into()));
        }
        Ok(IntegralStructure { basis, denominator })
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    /// Coordinates `⟨b, s_j⟩ · denominator` of a form against the basis of `S`;
    /// proportional to coordinates in the dual lattice `S*`.
    pub fn dual_coords(&self, b: &[BigInt]) -> Vec<BigInt> {
        self.basis.mul_vec(b)
    }

    /// Primitive vector of `S*` on the ray through `b`, in `S*` coordinates.
    pub fn dual_ray(&self, b: &[BigInt]) -> Vec<BigInt> {
        primitive_ray(&self.dual_coords(b))
    }

    /// Primitive form-coordinate ray through the point with `S*` coordinates `c`.
    pub fn form_ray(&self, c: &[BigInt]) -> Vec<BigInt> {
        let det = self.basis.det().abs();
        let rhs: Vec<BigInt> = c.iter().map(|x| x * &det).collect();
        let b = solve(&self.basis, &rhs).expect("adjugate solution is integral");
        primitive_ray(&b)
    }

    /// Coordinates of a character (monomial coordinates) in the basis of `S`,
    /// when it lies in `S`.
    pub fn char_coords(&self, u: &[BigInt]) -> Option<Vec<BigInt>> {
        let rhs: Vec<BigInt> = u.iter().map(|x| x * &self.denominator).collect();
        solve(&self.basis.transpose(), &rhs)
    }

    /// `σ` re-expressed as a cone of `S*`.
    pub fn cone_in_dual(&self, sigma: &RationalCone) -> RationalCone {
        RationalCone::from_rays_unchecked(sigma.ambient, sigma.rays.iter().map(|r| self.dual_ray(r)).collect())
    }

    /// Unimodular change of basis `U·S`.
    pub fn transformed(&self, u: &IntMatrix) -> IntegralStructure {
        IntegralStructure { basis: u * &self.basis, denominator: self.denominator.clone() }
    }

    /// `([S : S ∩ Sym²], [Sym² : S ∩ Sym²])`, via the lattice `den·S` and `den·Sym²`.
    pub fn indices_against_standard(&self) -> (BigInt, BigInt) {
        let n = self.rank();
        let s = self.basis.transpose();
        let sym = IntMatrix::diagonal(n, n, std::iter::repeat_n(self.denominator.clone(), n));
        let meet = crate::lattice::lattice_intersection(&s, &sym);
        let a = crate::lattice::relative_index(&s, &meet).expect("finite index");
        let b = crate::lattice::relative_index(&sym, &meet).expect("finite index");
        (a, b)
    }
}

/// `σ∨ ∩ (S ⊗ ℝ)` in `S`-coordinates.
pub fn dual_cone(sigma: &RationalCone, s: &IntegralStructure) -> DoubleDescription {
    s.cone_in_dual(sigma).dual()
}

/// Smooth iff the `S*`-primitive generators extend to a basis of `S*`.
pub fn is_smooth(sigma: &RationalCone, s: &IntegralStructure) -> bool {
    multiplicity(sigma, s).is_some_and(|m| m.is_one())
}

/// Product of the elementary divisors of the `S*`-primitive generators, or
/// `None` for a non-simplicial cone.
pub fn multiplicity(sigma: &RationalCone, s: &IntegralStructure) -> Option<BigInt> {
    if sigma.rays.is_empty() {
        return Some(BigInt::one());
    }
    let c = s.cone_in_dual(sigma);
    let m = IntMatrix::from_rows(sigma.ambient, &c.rays);
    let d = snf(&m);
    (d.rank() == c.rays.len()).then(|| d.elementary_divisors().iter().product())
}

/// `X_σ = X / (saturated common radical)`.
#[derive(Clone, Debug, Serialize)]
pub struct QuotientLattice {
    pub rank: usize,
    /// `rank × g` surjection `X → X_σ`.
    pub projection: IntMatrix,
    /// Columns: ℤ-basis of the common radical.
    pub radical: IntMatrix,
}

pub fn quotient_lattice(sigma: &RationalCone, g: usize) -> Result<QuotientLattice> {
    if sigma.ambient != sym_dim(g) {
        return Err(Error::Shape(format!("cone does not live in B(X) for g = {g}")));
    }
    let mut rows = Vec::new();
    for r in &sigma.rays {
        let b = vec_to_form(g, r);
        if !is_psd(&b) {
            return Err(Error::Invalid(format!("generator {r:?} is not positive semi-definite")));
        }
        rows.extend(b.row_vecs());
    }
    if rows.is_empty() {
        return Ok(QuotientLattice { rank: 0, projection: IntMatrix::zeros(0, g), radical: IntMatrix::identity(g) });
    }
    let stacked = IntMatrix::from_rows(g, &rows);
    let sat = saturate(&stacked);
    let radical = crate::lattice::kernel(&stacked);
    Ok(QuotientLattice { rank: sat.basis.rows(), projection: sat.basis, radical })
}

/// `b = Pᵀ b′ P` for the quotient projection `P`; returns `b′`.
pub fn push_forward_form(q: &QuotientLattice, b: &IntMatrix) -> Option<IntMatrix> {
    let r = q.rank;
    let p = &q.projection;
    // Solve column by column: Pᵀ y = b e_j gives y = b′ P e_j.
    let pt = p.transpose();
    let mut c = Vec::new();
    for j in 0..b.cols() {
        c.push(solve(&pt, &b.col(j))?);
    }
    let bp = IntMatrix::from_cols(r, &c); // b′ P
    let mut rows = Vec::new();
    for i in 0..r {
        rows.push(solve(&pt, &bp.row(i))?);
    }
    Some(IntMatrix::from_rows(r, &rows))
}

/// For each face `τ`, the lattice `S ∩ τ⊥` (columns, `S`-coordinates).
#[derive(Clone, Debug, Serialize)]
pub struct StratumMonoid {
    pub face: RationalCone,
    pub rank: usize,
    pub lattice: IntMatrix,
    pub label: String,
}

pub fn strata_monoids(sigma: &RationalCone, s: &IntegralStructure) -> Vec<StratumMonoid> {
    let n = sigma.ambient;
    super::faces(sigma)
        .into_iter()
        .map(|tau| {
            let lattice = if tau.rays.is_empty() {
                IntMatrix::identity(n)
            } else {
                crate::lattice::kernel(&IntMatrix::from_rows(n, &s.cone_in_dual(&tau).rays))
            };
            let label = if tau.rays.is_empty() {
                "open".to_string()
            } else if tau.same_as(sigma) {
                "closed".to_string()
            } else {
                format!("dim {}", tau.dim())
            };
            StratumMonoid { rank: lattice.cols(), face: tau, lattice, label }
        })
        .collect()
}

/// `ord_ρ(u) = ⟨n_ρ, u⟩` for each ray of `σ`, `n_ρ` primitive in `S*`.
pub fn divisor_of_character(sigma: &RationalCone, s: &IntegralStructure, u: &[BigInt]) -> Result<Vec<BigInt>> {
    let coords = s.char_coords(u).ok_or_else(|| Error::Invalid("character does not lie in S".into()))?;
    Ok(sigma.rays.iter().map(|r| dot(&s.dual_ray(r), &coords)).collect())
}

/// The divisor of `x ⊗ x` for the standard structure, asserting effectivity
/// and that its support is the set of rays with `b_ρ(x, x) ≠ 0`.
pub fn divisor_of_square(sigma: &RationalCone, x: &[BigInt]) -> Result<Vec<BigInt>> {
    let g = x.len();
    let s = IntegralStructure::standard(sym_dim(g));
    let div = divisor_of_character(sigma, &s, &character_square(x))?;
    for (r, d) in sigma.rays.iter().zip(&div) {
        let b = vec_to_form(g, r);
        let bxx = dot(&b.mul_vec(x), x);
        if d.is_negative() || (d.is_zero() != bxx.is_zero()) {
            return Err(Error::Mismatch(format!("divisor component {d} at ray {r:?} against b(x,x) = {bxx}")));
        }
    }
    Ok(div)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ivec;

    fn principal() -> RationalCone {
        RationalCone::new(3, vec![ivec(&[1, 0, 0]), ivec(&[0, 0, 1]), ivec(&[1, 1, 1])]).unwrap()
    }

    #[test]
    fn coordinates_roundtrip() {
        let b = IntMatrix::from_i64(&[&[2, 1, 0], &[1, 3, -1], &[0, -1, 4]]);
        assert_eq!(vec_to_form(3, &form_to_vec(&b)), b);
        assert_eq!(genus_of(6), Some(3));
        let x = ivec(&[1, -1]);
        assert_eq!(rank_one_form(&x), ivec(&[1, -1, 1]));
        assert_eq!(character_square(&x), ivec(&[1, -2, 1]));
    }

    #[test]
    fn psd_detection() {
        assert!(is_psd(&IntMatrix::from_i64(&[&[1, 1], &[1, 1]])));
        assert!(!is_psd(&IntMatrix::from_i64(&[&[1, 2], &[2, 1]])));
        assert!(!is_psd(&IntMatrix::from_i64(&[&[0, 0], &[0, -1]])));
    }

    #[test]
    fn smoothness_examples() {
        let std2 = IntegralStructure::standard(2);
        let bad = RationalCone::new(2, vec![ivec(&[1, 0]), ivec(&[1, 2])]).unwrap();
        assert!(!is_smooth(&bad, &std2));
        assert_eq!(multiplicity(&bad, &std2), Some(BigInt::from(2)));
        assert!(is_smooth(&RationalCone::new(2, vec![ivec(&[3, 5])]).unwrap(), &std2));
        assert!(is_smooth(&principal(), &IntegralStructure::standard(3)));
    }

    #[test]
    fn dual_examples() {
        let s1 = IntegralStructure::standard(1);
        let ray = RationalCone::new(1, vec![ivec(&[1])]).unwrap();
        assert_eq!(dual_cone(&ray, &s1).rays, vec![ivec(&[1])]);
        let zero = RationalCone::zero(3);
        let d = dual_cone(&zero, &IntegralStructure::standard(3));
        assert_eq!(d.lineality.len(), 3);
        // double dual of the principal cone
        let d = dual_cone(&principal(), &IntegralStructure::standard(3));
        assert_eq!(d.rays.len(), 3);
        let back = RationalCone::new(3, crate::polyhedral::dd::cone_from_inequalities(3, &d.rays).rays).unwrap();
        assert!(back.same_as(&principal()));
    }

    #[test]
    fn quotient_lattice_examples() {
        let q = quotient_lattice(&RationalCone::zero(3), 2).unwrap();
        assert_eq!(q.rank, 0);
        let q = quotient_lattice(&RationalCone::new(3, vec![ivec(&[1, 0, 1])]).unwrap(), 2).unwrap();
        assert_eq!(q.rank, 2);
        let q = quotient_lattice(&RationalCone::new(3, vec![ivec(&[1, 0, 0])]).unwrap(), 2).unwrap();
        assert_eq!(q.rank, 1);
        assert_eq!(q.radical.col(0), ivec(&[0, 1]));
        let b = push_forward_form(&q, &vec_to_form(2, &ivec(&[1, 0, 0]))).unwrap();
        assert_eq!(b, IntMatrix::from_i64(&[&[1]]));
        assert!(quotient_lattice(&RationalCone::new(3, vec![ivec(&[1, 1, 1]), ivec(&[0, 0, 1])]).unwrap(), 2).is_ok());
        assert!(quotient_lattice(&RationalCone::new(3, vec![ivec(&[1, 2, 1])]).unwrap(), 2).is_err());
    }

    #[test]
    fn divisor_examples() {
        let sigma = principal();
        assert_eq!(divisor_of_square(&sigma, &ivec(&[1, -1])).unwrap().iter().filter(|d| d.is_zero()).count(), 1);
        let rays_order: Vec<Vec<BigInt>> = sigma.rays.clone();
        let div = divisor_of_square(&sigma, &ivec(&[1, -1])).unwrap();
        for (r, d) in rays_order.iter().zip(&div) {
            let expect = if r == &ivec(&[1, 1, 1]) { 0 } else { 1 };
            assert_eq!(*d, BigInt::from(expect));
        }
        let one = RationalCone::new(1, vec![ivec(&[1])]).unwrap();
        assert_eq!(divisor_of_square(&one, &ivec(&[1])).unwrap(), ivec(&[1]));
        let zero_div = divisor_of_character(&sigma, &IntegralStructure::standard(3), &ivec(&[0, 0, 0])).unwrap();
        assert!(zero_div.iter().all(Zero::is_zero));
    }

    #[test]
    fn strata_examples() {
        let st = strata_monoids(&principal(), &IntegralStructure::standard(3));
        assert_eq!(st.len(), 8);
        assert_eq!(st.iter().find(|m| m.label == "open").unwrap().rank, 3);
        assert_eq!(st.iter().find(|m| m.label == "closed").unwrap().rank, 0);
        let ray = st.iter().find(|m| m.face.rays == vec![ivec(&[1, 0, 0])]).unwrap();
        assert_eq!(ray.rank, 2);
    }
}
