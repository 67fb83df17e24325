//! Level diagrams of lattices attached to a relative position `w`, the
//! character lattice `S^w` as a colimit, and finite models of the limits of
//! Hom-groups into abelian varieties.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flags::PositionInvariant;
use crate::lattice::{
    colimit, lattice_contains, lattice_intersection, lattice_sum, limit, relative_index, solve, FinAbGroup, IntMatrix,
    LatticeDiagram, QuotientDiagram,
};

/// Diagonal maps between the lattices `Y_i`, `X_i ≅ ⊕_{k ≤ r} ℤε_k`.
#[derive(Clone, Debug, Serialize)]
pub struct LevelDiagram {
    pub r: usize,
    pub s: usize,
    pub p: u32,
    /// `y_maps[i-1]`: `Y_{i-1} → Y_i`.
    pub y_maps: Vec<IntMatrix>,
    /// `x_maps[i-1]`: `X_i → X_{i-1}`.
    pub x_maps: Vec<IntMatrix>,
    /// `Y_i → X_i`, `0 ≤ i ≤ s`.
    pub phi: Vec<IntMatrix>,
    /// `X_i → Y_i`, `0 ≤ i ≤ s`.
    pub psi: Vec<IntMatrix>,
}

/// `[e_i + 1, r − m_i]` as a 0-based half-open range.
pub fn middle_range(w: &PositionInvariant, i: usize) -> std::ops::Range<usize> {
    if i == 0 {
        0..w.r
    } else {
        w.e[i - 1]..w.r - w.m[i - 1]
    }
}

fn diag(r: usize, p: u32, scaled: impl Fn(usize) -> bool) -> IntMatrix {
    IntMatrix::diagonal(r, r, (0..r).map(|k| if scaled(k) { BigInt::from(p) } else { BigInt::one() }))
}

fn validate(w: &PositionInvariant) -> Result<()> {
    let s = w.s();
    let mono = |v: &[usize]| v.windows(2).all(|x| x[0] <= x[1]);
    if w.a.len() != s || w.e.len() != s || !mono(&w.m) || !mono(&w.a) || !mono(&w.e) {
        return Err(Error::Invalid(format!("{} is not a monotone position invariant", w.label())));
    }
    if (0..s).any(|i| w.m[i] + w.e[i] > w.r) {
        return Err(Error::Invalid(format!("{} violates m_i + e_i ≤ r", w.label())));
    }
    Ok(())
}

pub fn build_level_diagram(w: &PositionInvariant, p: u32) -> Result<LevelDiagram> {
    validate(w)?;
    let (r, s) = (w.r, w.s());
    let e = |i: usize| if i == 0 { 0 } else { w.e[i - 1] };
    let m = |i: usize| if i == 0 { 0 } else { w.m[i - 1] };
    let y_maps = (1..=s).map(|i| diag(r, p, |k| e(i - 1) <= k && k < e(i))).collect();
    let x_maps = (1..=s).map(|i| diag(r, p, |k| r - m(i) <= k && k < r - m(i - 1))).collect();
    let phi = (0..=s).map(|i| diag(r, p, |k| middle_range(w, i).contains(&k))).collect();
    let psi = (0..=s).map(|i| diag(r, p, |k| !middle_range(w, i).contains(&k))).collect();
    let d = LevelDiagram { r, s, p, y_maps, x_maps, phi, psi };
    d.check()?;
    Ok(d)
}

impl LevelDiagram {
    /// `ψφ = φψ = p` at every level and both squares of every step commute.
    pub fn check(&self) -> Result<()> {
        let p_id = IntMatrix::diagonal(self.r, self.r, std::iter::repeat_n(BigInt::from(self.p), self.r));
        for i in 0..=self.s {
            if &self.psi[i] * &self.phi[i] != p_id || &self.phi[i] * &self.psi[i] != p_id {
                return Err(Error::Internal(format!("Y_{i} → X_{i} → Y_{i} is not multiplication by p")));
            }
        }
        for i in 1..=self.s {
            let (y, x) = (&self.y_maps[i - 1], &self.x_maps[i - 1]);
            if &(x * &self.phi[i]) * y != self.phi[i - 1] || &(y * &self.psi[i - 1]) * x != self.psi[i] {
                return Err(Error::Internal(format!("level diagram does not commute at step {i}")));
            }
        }
        Ok(())
    }

    fn entry(m: &IntMatrix, k: usize) -> BigInt {
        m[(k, k)].clone()
    }
}

/// The colimit `S^w` with the images of its nodes and of `Sym²(X)`.
#[derive(Clone, Debug, Serialize)]
pub struct CharacterLattice {
    pub w: PositionInvariant,
    pub p: u32,
    pub rank: usize,
    pub free: bool,
    pub node_labels: Vec<String>,
    /// Image in `S^w` of each node generator `ε_k ⊗ ε_l` (column `k·r + l`).
    pub node_maps: Vec<IntMatrix>,
    /// Node index of `Y_i ⊗ X_i`.
    pub yx_nodes: Vec<usize>,
    /// Columns: images of the monomials `x_k x_l`, `k ≤ l`, in lexicographic order.
    pub embedding: IntMatrix,
    #[serde(with = "crate::json::bigint")]
    pub index: BigInt,
}

/// Monomials `(k, l)`, `k ≤ l < r`, in lexicographic order.
pub fn monomials(r: usize) -> Vec<(usize, usize)> {
    (0..r).flat_map(|k| (k..r).map(move |l| (k, l))).collect()
}

fn tensor_map(r: usize, f: impl Fn(usize, usize) -> (BigInt, usize, usize)) -> IntMatrix {
    let mut m = IntMatrix::zeros(r * r, r * r);
    for k in 0..r {
        for l in 0..r {
            let (c, k2, l2) = f(k, l);
            m[(k2 * r + l2, k * r + l)] += c;
        }
    }
    m
}

pub fn character_lattice(w: &PositionInvariant, p: u32) -> Result<CharacterLattice> {
    let ld = build_level_diagram(w, p)?;
    let (r, s) = (ld.r, ld.s);
    let n = r * r;
    let mut d = LatticeDiagram::new();
    let mut labels = Vec::new();
    let mut node = |d: &mut LatticeDiagram, label: String| {
        labels.push(label);
        d.add_node(n)
    };
    let mut yx_nodes = Vec::new();
    let mut prev_yx = None;
    for i in 0..=s {
        let xx = node(&mut d, format!("X{i}⊗X{i}"));
        let yx = node(&mut d, format!("Y{i}⊗X{i}"));
        let yy = node(&mut d, format!("Y{i}⊗Y{i}"));
        let psi = |k| LevelDiagram::entry(&ld.psi[i], k);
        let phi = |k| LevelDiagram::entry(&ld.phi[i], k);
        d.add_edge(xx, yx, tensor_map(r, |k, l| (psi(k), k, l)))?;
        d.add_edge(xx, yx, tensor_map(r, |k, l| (psi(l), l, k)))?;
        d.add_edge(yy, yx, tensor_map(r, |k, l| (phi(l), k, l)))?;
        d.add_edge(yy, yx, tensor_map(r, |k, l| (phi(k), l, k)))?;
        if let Some(prev) = prev_yx {
            let mid = node(&mut d, format!("Y{}⊗X{i}", i - 1));
            let x = |l| LevelDiagram::entry(&ld.x_maps[i - 1], l);
            let y = |k| LevelDiagram::entry(&ld.y_maps[i - 1], k);
            d.add_edge(mid, prev, tensor_map(r, |k, l| (x(l), k, l)))?;
            d.add_edge(mid, yx, tensor_map(r, |k, l| (y(k), k, l)))?;
        }
        yx_nodes.push(yx);
        prev_yx = Some(yx);
    }
    let c = colimit(&d);
    if !c.is_free {
        return Err(Error::Mismatch(format!("character lattice of {} has torsion {}", w.label(), c.group)));
    }
    let rank = c.group.free_rank();
    let mons = monomials(r);
    let yx0 = &c.node_maps[yx_nodes[0]];
    let cols: Vec<Vec<BigInt>> = mons.iter().map(|&(k, l)| yx0.col(k * r + l)).collect();
    let embedding = IntMatrix::from_cols(rank, &cols);
    let index = if rank == 0 {
        BigInt::one()
    } else {
        relative_index(&IntMatrix::identity(rank), &embedding)
            .ok_or_else(|| Error::Mismatch(format!("Sym²(X) does not have finite index in S^w for {}", w.label())))?
    };
    Ok(CharacterLattice {
        w: w.clone(),
        p,
        rank,
        free: true,
        node_labels: labels,
        node_maps: c.node_maps,
        yx_nodes,
        embedding,
        index,
    })
}

impl CharacterLattice {
    /// `log_p` of the index when it is a power of `p`.
    pub fn index_exponent(&self) -> Option<u32> {
        let p = BigInt::from(self.p);
        let mut x = self.index.clone();
        let mut k = 0;
        while x > BigInt::one() {
            let (q, rem) = x.div_rem(&p);
            if !rem.is_zero() {
                return None;
            }
            x = q;
            k += 1;
        }
        Some(k)
    }

    /// Basis of `S^w` in monomial coordinates of `Sym²(X) ⊗ ℚ`, as rows of an
    /// integer matrix over a common denominator.
    pub fn dual_basis(&self) -> Result<(IntMatrix, BigInt)> {
        let n = self.rank;
        if n == 0 {
            return Ok((IntMatrix::zeros(0, 0), BigInt::one()));
        }
        let det = self.embedding.det().abs();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut b = vec![BigInt::zero(); n];
            b[j] = det.clone();
            cols.push(solve(&self.embedding, &b).ok_or_else(|| Error::Internal("adjugate solve failed".into()))?);
        }
        // column j of E⁻¹ is the j-th basis vector of S^w
        Ok((IntMatrix::from_cols(n, &cols).transpose(), det))
    }
}

/// Whether `ε_k⊗ε_l` and `ε_l⊗ε_k ∈ Y_i⊗X_i` have the same image in `S^w`
/// for every level `i` and all `k, l ∈ [e_i + 1, r − m_i]`.
pub fn verify_symmetry_identification(cl: &CharacterLattice) -> bool {
    let r = cl.w.r;
    cl.yx_nodes.iter().enumerate().all(|(i, &node)| {
        let mid = middle_range(&cl.w, i);
        let m = &cl.node_maps[node];
        mid.clone().all(|k| mid.clone().all(|l| m.col(k * r + l) == m.col(l * r + k)))
    })
}

/// One square of the finite model, with the data of the order identity.
#[derive(Clone, Debug, Serialize)]
pub struct SquareReport {
    pub level: usize,
    pub lemma: &'static str,
    pub limit: FinAbGroup,
    #[serde(with = "crate::json::bigint")]
    pub formula_order: BigInt,
    /// `H ∩ H′ ⊆ H₁ + H₂` (plus `R_i` for the inductive squares).
    pub surjective: bool,
    /// `H₁ ∩ H₂` matches the explicit description.
    pub kernel_matches: bool,
    #[serde(with = "crate::json::bigint")]
    pub kernel_order: BigInt,
}

#[derive(Clone, Debug, Serialize)]
pub struct AbelianLimitReport {
    pub w: PositionInvariant,
    pub p: u32,
    pub modulus: u64,
    pub abelian_rank: usize,
    pub squares: Vec<SquareReport>,
    pub surjective: bool,
}

/// Subgroups of `(ℤ/N)^{2k}` of the form `⊕ c_j ℤ/N`, stored by the `c_j`.
type CoordSubgroup = Vec<u64>;

struct Model {
    n: u64,
    p: u64,
    k2: usize,
    r: usize,
}

impl Model {
    fn torsion(&self) -> CoordSubgroup {
        vec![self.n / self.p; self.k2]
    }

    fn prefix(&self, len: usize) -> CoordSubgroup {
        (0..self.k2).map(|j| if j < len { self.n / self.p } else { self.n }).collect()
    }

    fn band(&self, lo: usize, hi: usize) -> CoordSubgroup {
        (0..self.k2).map(|j| if lo <= j && j < hi { self.n / self.p } else { self.n }).collect()
    }

    /// `{x : c·x ∈ S}`.
    fn preimage(&self, s: &CoordSubgroup, c: u64) -> CoordSubgroup {
        s.iter().map(|&d| d / d.gcd(&c)).collect()
    }

    /// Subgroup of `B = M^r` given by one condition per `ε_k`, as a lattice in ℤ^{2kr}.
    fn lattice(&self, conds: &[CoordSubgroup]) -> IntMatrix {
        let entries = conds.iter().flat_map(|c| c.iter().map(|&d| BigInt::from(d)));
        let dim = self.k2 * self.r;
        IntMatrix::diagonal(dim, dim, entries)
    }

    fn order_of_quotient(&self, big: &IntMatrix, small: &IntMatrix) -> BigInt {
        relative_index(big, small).expect("nested full-rank lattices")
    }
}

fn square(
    model: &Model,
    level: usize,
    lemma: &'static str,
    subgroups: [IntMatrix; 4],
    extra: Option<&IntMatrix>,
    expected_kernel: &IntMatrix,
) -> Result<SquareReport> {
    let dim = model.k2 * model.r;
    let b_rel = IntMatrix::diagonal(dim, dim, std::iter::repeat_n(BigInt::from(model.n), dim));
    let [h1, h2, h, hp] = subgroups;
    let sum12 = lattice_sum(&h1, &h2);
    let meet = lattice_intersection(&h, &hp);
    if !lattice_contains(&meet, &sum12) {
        return Err(Error::Invalid(format!("model square at level {level} violates H₁ + H₂ ⊆ H ∩ H′")));
    }
    let qd = QuotientDiagram {
        ambient: dim,
        relations: b_rel.clone(),
        subgroups: vec![h1.clone(), h2.clone(), h.clone(), hp.clone()],
        edges: vec![(0, 2), (0, 3), (1, 2), (1, 3)],
    };
    let lim = limit(&qd)?;
    let k12 = lattice_intersection(&h1, &h2);
    let formula_order =
        model.order_of_quotient(&IntMatrix::identity(dim), &k12) * model.order_of_quotient(&meet, &sum12);
    if lim.group.order().as_ref() != Some(&formula_order) {
        return Err(Error::Mismatch(format!(
            "limit order {} differs from the order identity {formula_order} at level {level}",
            lim.group
        )));
    }
    let target = match extra {
        Some(rr) => lattice_sum(&sum12, rr),
        None => sum12,
    };
    let kernel_matches = lattice_contains(expected_kernel, &k12) && lattice_contains(&k12, expected_kernel);
    Ok(SquareReport {
        level,
        lemma,
        limit: lim.group,
        formula_order,
        surjective: lattice_contains(&target, &meet),
        kernel_matches,
        kernel_order: model.order_of_quotient(&k12, &b_rel),
    })
}

/// Finite model of the limits `P'_i` and `P_i`, with `A_i ≅ (ℤ/N)^{2(g−r)}`,
/// `Ker(A_0 → A_i)` the first `a_i` coordinates of `A_0[p]` and
/// `Ker(A_0 → A_iᵗ)` its orthogonal.
pub fn abelian_limit_model(w: &PositionInvariant, g: usize, p: u32, modulus: u64) -> Result<AbelianLimitReport> {
    validate(w)?;
    let ld = build_level_diagram(w, p)?;
    if w.r > g {
        return Err(Error::Invalid("torus rank exceeds genus".into()));
    }
    let k = g - w.r;
    if w.a.iter().any(|&a| a > k) {
        return Err(Error::Invalid(format!("a_i exceeds g − r = {k}")));
    }
    if modulus == 0 || (modulus != 1 && !modulus.is_multiple_of(p as u64)) {
        return Err(Error::Invalid(format!("modulus {modulus} must be 1 or a multiple of p")));
    }
    let model = Model { n: modulus, p: if modulus == 1 { 1 } else { p as u64 }, k2: 2 * k, r: w.r };
    let pp = p as u64;
    let a = |i: usize| if i == 0 { 0 } else { w.a[i - 1] };
    let entry = |m: &IntMatrix, kk: usize| -> u64 { u64::try_from(&m[(kk, kk)]).unwrap() };
    let tors = model.torsion();
    let mut squares = Vec::new();
    for i in 0..=w.s() {
        let ker = model.band(a(i), 2 * k - a(i));
        let mid = middle_range(w, i);
        let per = |f: &dyn Fn(usize) -> CoordSubgroup| model.lattice(&(0..w.r).map(f).collect::<Vec<_>>());
        let h1 = per(&|_| tors.clone());
        let h2 = per(&|kk| model.preimage(&ker, entry(&ld.psi[i], kk)));
        let h = per(&|_| model.preimage(&ker, pp));
        let hp = per(&|kk| model.preimage(&tors, entry(&ld.psi[i], kk)));
        let expected = per(&|kk| if mid.contains(&kk) { ker.clone() } else { tors.clone() });
        squares.push(square(&model, i, "P'_i", [h1, h2, h, hp], None, &expected)?);
    }
    for i in 1..=w.s() {
        let y = |kk: usize| entry(&ld.y_maps[i - 1], kk);
        let f_i = model.prefix(a(i));
        let f_prev_perp = model.prefix(2 * k - a(i - 1));
        let mid_prev = middle_range(w, i - 1);
        let zero = vec![model.n; 2 * k];
        let per = |f: &dyn Fn(usize) -> CoordSubgroup| model.lattice(&(0..w.r).map(f).collect::<Vec<_>>());
        let h1 = per(&|kk| model.preimage(&zero, y(kk)));
        let h2 = per(&|_| f_i.clone());
        let h = per(&|kk| model.preimage(&f_i, y(kk)));
        let hp = per(&|kk| model.preimage(&f_prev_perp, entry(&ld.psi[i], kk)));
        let r_i = per(&|kk| {
            if mid_prev.contains(&kk) {
                model.preimage(&f_prev_perp, y(kk))
            } else {
                vec![1; 2 * k]
            }
        });
        let expected = lattice_intersection(&h1, &h2);
        squares.push(square(&model, i, "P_i", [h1, h2, h, hp], Some(&r_i), &expected)?);
    }
    let surjective = squares.iter().all(|s| s.surjective);
    Ok(AbelianLimitReport { w: w.clone(), p, modulus, abelian_rank: k, squares, surjective })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w1(r: usize, m: usize, a: usize, e: usize) -> PositionInvariant {
        PositionInvariant { r, m: vec![m], a: vec![a], e: vec![e] }
    }

    #[test]
    fn level_diagram_examples() {
        let d = build_level_diagram(&w1(1, 1, 0, 0), 3).unwrap();
        assert_eq!(d.y_maps[0], IntMatrix::from_i64(&[&[1]]));
        assert_eq!(d.x_maps[0], IntMatrix::from_i64(&[&[3]]));
        let d = build_level_diagram(&w1(1, 0, 0, 1), 3).unwrap();
        assert_eq!(d.y_maps[0], IntMatrix::from_i64(&[&[3]]));
        assert_eq!(d.x_maps[0], IntMatrix::from_i64(&[&[1]]));
        assert!(build_level_diagram(&w1(1, 1, 0, 1), 3).is_err());
        let bad = PositionInvariant { r: 2, m: vec![1, 0], a: vec![0, 1], e: vec![0, 1] };
        assert!(build_level_diagram(&bad, 2).is_err());
    }

    #[test]
    fn rank_zero_is_trivial() {
        let cl = character_lattice(&w1(0, 0, 1, 0), 2).unwrap();
        assert_eq!(cl.rank, 0);
        assert_eq!(cl.index, BigInt::one());
    }

    #[test]
    fn genus_one_indices() {
        for p in [2, 3, 5] {
            let mult = character_lattice(&w1(1, 1, 0, 0), p).unwrap();
            let etale = character_lattice(&w1(1, 0, 0, 1), p).unwrap();
            assert_eq!((mult.rank, etale.rank), (1, 1));
            assert_eq!(mult.index, BigInt::one());
            assert_eq!(etale.index, BigInt::from(p));
            assert!(verify_symmetry_identification(&mult) && verify_symmetry_identification(&etale));
        }
    }

    #[test]
    fn rank_two_example() {
        let cl = character_lattice(&w1(2, 1, 0, 0), 2).unwrap();
        assert_eq!(cl.rank, 3);
        assert!(verify_symmetry_identification(&cl));
    }

    #[test]
    fn dual_basis_inverts_embedding() {
        let cl = character_lattice(&w1(2, 0, 0, 1), 3).unwrap();
        let (b, den) = cl.dual_basis().unwrap();
        let prod = &b.transpose() * &cl.embedding;
        let scaled = IntMatrix::diagonal(3, 3, std::iter::repeat_n(den, 3));
        assert_eq!(prod, scaled);
    }

    #[test]
    fn trivial_modulus_gives_trivial_limits() {
        let rep = abelian_limit_model(&w1(1, 0, 1, 0), 2, 2, 1).unwrap();
        assert!(rep.squares.iter().all(|s| s.limit.is_trivial()));
        assert!(abelian_limit_model(&w1(1, 0, 1, 0), 2, 2, 3).is_err());
    }
}
