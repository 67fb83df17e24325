//! The conical complex: isotropic summands up to `Γ₀`, their cells
//! `C(V/V′⊥)` with the integral structures `S^w`, the induced decomposition,
//! and the poset of boundary strata.
//!
//! A rank-`r` summand `V′` with basis `v_1..v_r` identifies `V/V′⊥` with `ℤ^r`
//! through `x ↦ (⟨v_k, x⟩)_k`, so a linear form on the cell is an element of
//! `V′` and a rank-one form `x xᵀ` is recorded by `Σ x_k v_k`. Orbits under
//! `Γ₀` are computed on reductions mod `p`: a cone is tracked by the image of
//! its summand and the `±`-classes of its rank-one rays.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::charlattice::character_lattice;
use crate::error::{Error, Result};
use crate::flags::{
    admissible_triples, in_gamma0, orbit, orbit_partition, reduce_matrix, ParahoricType, PositionInvariant,
    SymplecticSpace,
};
use crate::fp::{FpMatrix, Subspace};
use crate::lattice::{kernel, lattice_intersection, relative_index, snf, IntMatrix};
use crate::polyhedral::fan::RefinementCheck;
use crate::polyhedral::fan::{
    act_on_cone, check_admissible, gl_generators, minimal_containing_cone, AdmissibilityReport,
};
use crate::polyhedral::{
    faces, is_smooth, multiplicity, quotient_lattice, refine_to_smooth, sym_dim, vec_to_form, verify_refinement,
    Decomposition, IntegralStructure, RationalCone, Refinement,
};

pub fn check_limits(g: usize, p: u32) -> Result<()> {
    if !(1..=2).contains(&g) {
        return Err(Error::Invalid(format!("desk-scale limit: the conical complex supports g ≤ 2, got {g}")));
    }
    if ![2, 3, 5].contains(&p) {
        return Err(Error::Invalid(format!("desk-scale limit: the conical complex supports p ∈ {{2,3,5}}, got {p}")));
    }
    Ok(())
}

/// Row Hermite normal form (positive pivots, entries above pivots reduced).
pub fn hermite_rows(m: &IntMatrix) -> IntMatrix {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut lead = 0;
    for c in 0..cols {
        if lead == rows {
            break;
        }
        loop {
            let piv = (lead..rows).filter(|&i| !a[(i, c)].is_zero()).min_by_key(|&i| a[(i, c)].abs());
            let Some(piv) = piv else { break };
            a.swap_rows(lead, piv);
            let mut done = true;
            for i in lead + 1..rows {
                if !a[(i, c)].is_zero() {
                    let q = num_integer::Integer::div_floor(&a[(i, c)], &a[(lead, c)]);
                    a.add_row_multiple(i, lead, &-q);
                    if !a[(i, c)].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[(lead, c)].is_zero() {
            continue;
        }
        if a[(lead, c)].is_negative() {
            a.negate_row(lead);
        }
        for i in 0..lead {
            let q = num_integer::Integer::div_floor(&a[(i, c)], &a[(lead, c)]);
            a.add_row_multiple(i, lead, &-q);
        }
        lead += 1;
    }
    a
}

/// A totally isotropic direct summand `V′ ⊂ ℤ^{2g}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IsotropicSummand {
    pub g: usize,
    pub r: usize,
    /// Columns: a ℤ-basis of `V′`, in cell order.
    pub basis: IntMatrix,
    /// Hermite form of the rows of `basisᵀ`.
    pub canonical: IntMatrix,
}

impl IsotropicSummand {
    pub fn new(g: usize, basis: IntMatrix) -> Result<Self> {
        let n = 2 * g;
        if basis.rows() != n {
            return Err(Error::Shape(format!("summand basis must have {n} rows")));
        }
        let r = basis.cols();
        let j = SymplecticSpace { g, p: 2 }.form();
        if !(&(&basis.transpose() * &j) * &basis).is_zero() {
            return Err(Error::Invalid("summand is not totally isotropic".into()));
        }
        let d = snf(&basis);
        if d.rank() != r || d.elementary_divisors().iter().any(|x| !x.is_one()) {
            return Err(Error::Invalid("basis does not span a direct summand".into()));
        }
        let canonical = hermite_rows(&basis.transpose());
        Ok(IsotropicSummand { g, r, basis, canonical })
    }

    /// `span(x_j : j ∈ idx)` (0-based), basis in the given order.
    pub fn coordinate(g: usize, idx: &[usize]) -> Result<Self> {
        let n = 2 * g;
        let cols: Vec<Vec<BigInt>> =
            idx.iter().map(|&j| (0..n).map(|k| BigInt::from(u8::from(k == j))).collect()).collect();
        IsotropicSummand::new(g, IntMatrix::from_cols(n, &cols))
    }

    pub fn zero(g: usize) -> Self {
        IsotropicSummand { g, r: 0, basis: IntMatrix::zeros(2 * g, 0), canonical: IntMatrix::zeros(0, 2 * g) }
    }

    /// `x ↦ (⟨v_k, x⟩)_k`, an `r × 2g` surjection onto `ℤ^r` with kernel `V′⊥`.
    pub fn quotient_map(&self) -> IntMatrix {
        let j = SymplecticSpace { g: self.g, p: 2 }.form();
        &self.basis.transpose() * &j
    }

    /// Columns: a ℤ-basis of `V′⊥`.
    pub fn perp(&self) -> IntMatrix {
        if self.r == 0 {
            return IntMatrix::identity(2 * self.g);
        }
        kernel(&self.quotient_map())
    }

    pub fn reduce(&self, p: u32) -> Subspace {
        let vs = (0..self.r).map(|k| reduce_vec(&self.basis.col(k), p)).collect();
        Subspace::span(2 * self.g, p, vs)
    }

    pub fn image(&self, gamma: &IntMatrix) -> Result<Self> {
        IsotropicSummand::new(self.g, gamma * &self.basis)
    }

    pub fn same_as(&self, other: &IsotropicSummand) -> bool {
        self.canonical == other.canonical
    }
}

fn reduce_vec(v: &[BigInt], p: u32) -> Vec<u32> {
    let pb = BigInt::from(p);
    v.iter().map(|x| u32::try_from(num_integer::Integer::mod_floor(x, &pb)).expect("residue fits")).collect()
}

fn log_p(x: &BigInt, p: u32) -> Result<usize> {
    let pb = BigInt::from(p);
    let mut x = x.clone();
    let mut k = 0;
    while x > BigInt::one() {
        let (q, r) = num_integer::Integer::div_rem(&x, &pb);
        if !r.is_zero() {
            return Err(Error::Mismatch(format!("index is not a power of {p}")));
        }
        x = q;
        k += 1;
    }
    Ok(k)
}

/// `m_i = r − log_p [ℤ^r : image of 𝕍^i]` and `e_i = log_p [V′ ∩ 𝕍^i : pV′]`.
pub fn position_of(v: &IsotropicSummand, t: &ParahoricType, p: u32) -> Result<PositionInvariant> {
    if t.g != v.g {
        return Err(Error::Invalid("summand and parahoric type have different genus".into()));
    }
    let chain = crate::flags::parahoric_chain(t, p)?;
    let r = v.r;
    let s = t.s();
    if r == 0 {
        return Ok(PositionInvariant { r, m: vec![0; s], a: t.d.clone(), e: vec![0; s] });
    }
    let q = v.quotient_map();
    let pv = IntMatrix::from_cols(
        2 * v.g,
        &(0..r).map(|k| v.basis.col(k).iter().map(|x| x * p).collect()).collect::<Vec<_>>(),
    );
    let (mut m, mut a, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for i in 1..=s {
        let l = chain.member(i);
        let img = &q * l;
        let idx = relative_index(&IntMatrix::identity(r), &img)
            .ok_or_else(|| Error::Internal("image of a chain member has infinite index".into()))?;
        let mi = r - log_p(&idx, p)?;
        let meet = lattice_intersection(&v.basis, l);
        let ei = log_p(&relative_index(&meet, &pv).ok_or_else(|| Error::Internal("pV′ ⊄ V′ ∩ 𝕍".into()))?, p)?;
        let d = t.d[i - 1];
        if mi + ei > d {
            return Err(Error::Mismatch(format!("m + e exceeds d at level {i}")));
        }
        m.push(mi);
        e.push(ei);
        a.push(d - mi - ei);
    }
    Ok(PositionInvariant { r, m, a, e })
}

/// The same invariant from the reduction: `m_i = d_i − dim(V_i ∩ V̄′⊥)` and
/// `e_i = dim(V_i ∩ V̄′)`, with `V_i` the standard flag.
pub fn position_mod_p(vbar: &Subspace, t: &ParahoricType, space: &SymplecticSpace) -> PositionInvariant {
    let p = space.p;
    let n = space.dim();
    let perp = perp_mod_p(vbar, space);
    let (mut m, mut a, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for &d in &t.d {
        let mi = d - perp.dim_meet_prefix(d, p);
        let ei = vbar.dim_meet_prefix(d, p);
        m.push(mi);
        e.push(ei);
        a.push(d - mi - ei);
    }
    let _ = n;
    PositionInvariant { r: vbar.dim(), m, a, e }
}

fn perp_mod_p(vbar: &Subspace, space: &SymplecticSpace) -> Subspace {
    let n = space.dim();
    let p = space.p;
    let mut rows = Vec::new();
    for v in crate::fp::all_vectors(n, p) {
        if vbar.basis.iter().all(|b| space.pair(b, &v) == 0) {
            rows.push(v);
        }
    }
    Subspace::span(n, p, rows)
}

/// `𝕍⁰` and `𝕍¹` have the same image in `V/V′⊥`.
pub fn ord_mult(v: &IsotropicSummand, t: &ParahoricType, p: u32) -> Result<bool> {
    if v.r == 0 {
        return Ok(false);
    }
    let chain = crate::flags::parahoric_chain(t, p)?;
    let img = &v.quotient_map() * chain.member(1);
    Ok(relative_index(&IntMatrix::identity(v.r), &img).is_some_and(|i| i.is_one()))
}

fn multiplier(space: &SymplecticSpace, g: &FpMatrix) -> u32 {
    let n = space.dim();
    let j = FpMatrix::from_fn(n, space.p, |a, b| if b == space.partner(a) { space.sign(a) } else { 0 });
    g.transpose().mul(&j).mul(g).get(0, n - 1)
}

/// Generators of the reduction of `Γ₀`: the parahoric parabolic with
/// multipliers `±1`.
pub fn level_generators(space: &SymplecticSpace, t: &ParahoricType) -> Vec<FpMatrix> {
    space
        .parabolic_generators(&t.d)
        .into_iter()
        .filter(|g| {
            let nu = multiplier(space, g);
            nu == 1 || nu == space.p - 1
        })
        .collect()
}

/// Integral elements of `Γ₀`: transvections `x ↦ x + c⟨v, x⟩v` with
/// `v = x_a` or `x_a + x_b`, `c ∈ {±1, ±p}`, that preserve the chain, and
/// the similitude of multiplier `−1`.
pub fn gamma0_generators(t: &ParahoricType, p: u32) -> Result<Vec<IntMatrix>> {
    let g = t.g;
    let n = 2 * g;
    let space = SymplecticSpace { g, p };
    let j = space.form();
    let mut vs: Vec<Vec<BigInt>> = Vec::new();
    for a in 0..n {
        let mut v = vec![BigInt::zero(); n];
        v[a] = BigInt::one();
        vs.push(v.clone());
        for b in a + 1..n {
            let mut w = v.clone();
            w[b] = BigInt::one();
            vs.push(w);
        }
    }
    let mut out = Vec::new();
    for v in &vs {
        let col = IntMatrix::from_cols(n, std::slice::from_ref(v));
        let vvt = &(&col * &col.transpose()) * &j;
        for c in [1i64, -1, p as i64, -(p as i64)] {
            let mut t_ = IntMatrix::identity(n);
            for a in 0..n {
                for b in 0..n {
                    t_[(a, b)] += &vvt[(a, b)] * c;
                }
            }
            if in_gamma0(&t_, t, p)? && !out.contains(&t_) {
                out.push(t_);
            }
        }
    }
    let sim = IntMatrix::diagonal(n, n, (0..n).map(|k| BigInt::from(if k < g { 1 } else { -1 })));
    if in_gamma0(&sim, t, p)? {
        out.push(sim);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SummandOrbit {
    pub rep: IsotropicSummand,
    /// Basis indices of the coordinate representative (0-based), in cell order.
    pub coords: Vec<usize>,
    pub w: PositionInvariant,
    /// Number of isotropic subspaces of `𝔽_p^{2g}` in the orbit.
    pub size: usize,
    pub ord_mult: bool,
}

/// Cell order of the coordinates of `V′ = span(x_j : j ∈ idx)`: étale-type
/// indices by increasing level, then the middle, then multiplicative-type
/// indices by decreasing level, matching the level diagram of `S^w`.
fn cell_order(g: usize, t: &ParahoricType, idx: &[usize]) -> Vec<usize> {
    let level = |x: usize| t.d.iter().position(|&d| x < d);
    let mut keyed: Vec<((usize, usize), usize)> = idx
        .iter()
        .map(|&j| {
            let partner = 2 * g - 1 - j;
            let key = match (level(j), level(partner)) {
                (Some(l), _) => (0, l),
                (None, Some(l)) => (2, t.s() - l),
                (None, None) => (1, 0),
            };
            (key, j)
        })
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, j)| j).collect()
}

fn coordinate_subsets(g: usize, r: usize) -> Vec<Vec<usize>> {
    let n = 2 * g;
    let mut out = Vec::new();
    for mask in 0u32..1 << n {
        let idx: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
        if idx.len() == r && idx.iter().all(|&j| !idx.contains(&(n - 1 - j))) {
            out.push(idx);
        }
    }
    out.sort();
    out
}

/// Orbits of rank-`r` isotropic summands under `Γ₀`, computed on reductions
/// mod `p` and represented by coordinate summands.
pub fn enumerate_isotropic_orbits(g: usize, p: u32, t: &ParahoricType, r: usize) -> Result<Vec<SummandOrbit>> {
    check_limits(g, p)?;
    if t.g != g || r > g {
        return Err(Error::Invalid("rank or type does not match the genus".into()));
    }
    let space = SymplecticSpace::new(g, p)?;
    let gens = level_generators(&space, t);
    let subsets = coordinate_subsets(g, r);
    let points: Vec<Subspace> = subsets.iter().map(|j| Subspace::coordinate(2 * g, j.iter().copied())).collect();
    let mut out = Vec::new();
    for o in orbit_partition(&points, &gens, |m, s| s.image(m)) {
        let k = points.iter().position(|x| x == &o[0]).expect("orbits start at a coordinate summand");
        let coords = cell_order(g, t, &subsets[k]);
        let rep = IsotropicSummand::coordinate(g, &coords)?;
        let w = position_of(&rep, t, p)?;
        for h in &o {
            let wb = position_mod_p(h, t, &space);
            if wb != w {
                return Err(Error::Mismatch(format!("position {} and reduction {} disagree", w.label(), wb.label())));
            }
        }
        let om = ord_mult(&rep, t, p)?;
        out.push(SummandOrbit { rep, coords, w, size: o.len(), ord_mult: om });
    }
    out.sort_by(|a, b| a.w.cmp(&b.w));
    let ws: Vec<&PositionInvariant> = out.iter().map(|o| &o.w).collect();
    let expected = admissible_triples(g, r, t);
    if ws.windows(2).any(|x| x[0] == x[1]) || ws.len() != expected.len() || ws.iter().any(|w| !expected.contains(w)) {
        return Err(Error::Mismatch(format!("summand orbits of rank {r} do not match 𝒲_{r}")));
    }
    Ok(out)
}

/// `x` with `x xᵀ = b` for a primitive rank-one PSD form, first nonzero entry positive.
pub fn rank_one_vector(r: usize, ray: &[BigInt]) -> Option<Vec<BigInt>> {
    let b = vec_to_form(r, ray);
    let k = (0..r).find(|&k| !b[(k, k)].is_zero())?;
    let s = b[(k, k)].sqrt();
    if &s * &s != b[(k, k)] {
        return None;
    }
    let x: Vec<BigInt> = (0..r).map(|l| &b[(k, l)] / &s).collect();
    (crate::polyhedral::rank_one_form(&x) == ray).then_some(x)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct ConeKey {
    summand: Subspace,
    rays: Vec<Vec<u32>>,
}

fn sign_class(v: Vec<u32>, p: u32) -> Vec<u32> {
    let neg: Vec<u32> = v.iter().map(|&x| (p - x) % p).collect();
    v.min(neg)
}

impl ConeKey {
    fn act(&self, m: &FpMatrix) -> ConeKey {
        let p = m.p;
        let mut rays: Vec<Vec<u32>> = self.rays.iter().map(|v| sign_class(m.apply(v), p)).collect();
        rays.sort();
        ConeKey { summand: self.summand.image(m), rays }
    }
}

/// Key of a cone of the cell of `v`, given in cell coordinates.
fn cone_key(v: &IsotropicSummand, cone: &RationalCone, p: u32) -> Result<ConeKey> {
    let n = 2 * v.g;
    let r = v.r;
    let q = quotient_lattice(cone, r)?;
    // forms of the cone factor through X/R; their linear forms lie in V″ = R^⊥ ∩ V′
    let sub = if q.rank == r {
        v.basis.clone()
    } else if q.rank == 0 {
        IntMatrix::zeros(n, 0)
    } else {
        &v.basis * &kernel(&q.radical.transpose())
    };
    let summand = Subspace::span(n, p, (0..sub.cols()).map(|k| reduce_vec(&sub.col(k), p)).collect());
    let mut rays = Vec::new();
    for ray in &cone.rays {
        let x = rank_one_vector(r, ray).ok_or_else(|| Error::Invalid(format!("ray {ray:?} is not a rank-one form")))?;
        rays.push(sign_class(reduce_vec(&v.basis.mul_vec(&x), p), p));
    }
    rays.sort();
    Ok(ConeKey { summand, rays })
}

/// Integer lifts of the image of `GL_r(ℤ)` in `GL_r(𝔽_p)`, one per element.
fn gl_lifts(r: usize, p: u32) -> Vec<IntMatrix> {
    let gens = gl_generators(r);
    let mut seen: HashSet<FpMatrix> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([IntMatrix::identity(r)]);
    seen.insert(reduce_matrix(&IntMatrix::identity(r), p));
    while let Some(m) = queue.pop_front() {
        out.push(m.clone());
        for a in &gens {
            let x = &m * a;
            if seen.insert(reduce_matrix(&x, p)) {
                queue.push_back(x);
            }
        }
    }
    out
}

/// Per-cell data of the induced decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub orbit: SummandOrbit,
    pub decomposition: Decomposition,
    /// `S^w` in monomial coordinates of `Sym²(ℤ^r)`.
    pub structure: IntegralStructure,
    #[serde(with = "crate::json::bigint")]
    pub index: BigInt,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexDecomposition {
    pub g: usize,
    pub p: u32,
    pub t: ParahoricType,
    /// The decompositions of `C(ℤ^r)` for `r = 0..=g`.
    pub sigma: Vec<Decomposition>,
    pub cells: Vec<Cell>,
}

/// Cones of `Σ` whose forms only involve the first `r` coordinates, as a
/// decomposition of `C(ℤ^r)`.
pub fn restrict_decomposition(sigma: &Decomposition, r: usize) -> Result<Decomposition> {
    let g = sigma.g;
    if r > g {
        return Err(Error::Invalid("cannot restrict to a larger rank".into()));
    }
    let inner: Vec<usize> = (0..g)
        .flat_map(|k| (k..g).map(move |l| (k, l)))
        .enumerate()
        .filter(|(_, (k, l))| *k < r && *l < r)
        .map(|(i, _)| i)
        .collect();
    let mut cones = Vec::new();
    for c in &sigma.cones {
        if c.rays.iter().all(|x| x.iter().enumerate().all(|(i, v)| v.is_zero() || inner.contains(&i))) {
            let rays: Vec<Vec<BigInt>> = c.rays.iter().map(|x| inner.iter().map(|&i| x[i].clone()).collect()).collect();
            cones.push(RationalCone::from_rays_unchecked(sym_dim(r), rays));
        }
    }
    let d = Decomposition::new(r, cones, gl_generators(r))?;
    if r > 0 && d.cones.iter().all(|c| c.rays.is_empty()) {
        return Err(Error::Invalid(format!("decomposition is empty on the rank {r} cells")));
    }
    Ok(d)
}

/// `𝔖_Σ`: every orbit representative carries the restriction of `Σ`.
pub fn induce_decomposition(sigma: &Decomposition, p: u32, t: &ParahoricType) -> Result<ComplexDecomposition> {
    let g = sigma.g;
    check_limits(g, p)?;
    let restricted: Vec<Decomposition> = (0..=g).map(|r| restrict_decomposition(sigma, r)).collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for r in 1..=g {
        for orbit in enumerate_isotropic_orbits(g, p, t, r)? {
            let cl = character_lattice(&orbit.w, p)?;
            let (basis, den) = cl.dual_basis()?;
            let structure = IntegralStructure::new(basis, den)?;
            cells.push(Cell { orbit, decomposition: restricted[r].clone(), structure, index: cl.index });
        }
    }
    Ok(ComplexDecomposition { g, p, t: t.clone(), sigma: restricted, cells })
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionCertificate {
    pub summand: Vec<usize>,
    pub sub_summand: Vec<usize>,
    pub cones_checked: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexAdmissibility {
    pub depth: usize,
    pub cells: Vec<AdmissibilityReport>,
    pub restrictions: Vec<RestrictionCertificate>,
    pub gamma0_generators: usize,
    pub equivariance_ok: bool,
    pub admissible: bool,
    pub violations: Vec<String>,
    pub marker: String,
}

/// Bounded admissibility of `𝔖`: each cell decomposition is checked with the
/// polyhedral check, restrictions to coordinate sub-summands are matched
/// against the cell decomposition up to `GL`-translates, and the sampled
/// `Γ₀` generators preserve the position invariant of every representative.
pub fn check_admissible_complex(
    sf: &ComplexDecomposition,
    depth: usize,
    coverage: i64,
) -> Result<ComplexAdmissibility> {
    let mut violations = Vec::new();
    let mut cells = Vec::new();
    for r in 1..=sf.g {
        let rep = check_admissible(&sf.sigma[r], depth, coverage);
        for v in &rep.violations {
            violations.push(format!("rank {r}: {}: {}", v.kind, v.detail));
        }
        cells.push(rep);
    }
    let mut restrictions = Vec::new();
    for cell in &sf.cells {
        let r = cell.orbit.rep.r;
        for mask in 1u32..(1 << r) - 1 {
            let pos: Vec<usize> = (0..r).filter(|&k| mask >> k & 1 == 1).collect();
            let sub = &sf.sigma[pos.len()];
            // X′ → X″ keeps the coordinates in `pos`
            let pi = IntMatrix::identity(r).select_rows(&pos);
            let mut ok = true;
            let mut n = 0;
            for c in &sub.cones {
                n += 1;
                let rays: Vec<Vec<BigInt>> = c
                    .rays
                    .iter()
                    .map(|x| crate::polyhedral::form_to_vec(&(&(&pi.transpose() * &vec_to_form(pos.len(), x)) * &pi)))
                    .collect();
                let pulled = RationalCone::from_rays_unchecked(sym_dim(r), rays);
                let interior: Vec<BigInt> = (0..sym_dim(r)).map(|i| pulled.rays.iter().map(|x| &x[i]).sum()).collect();
                let found = minimal_containing_cone(&vec_to_form(r, &interior), &cell.decomposition, depth).ok();
                let matches = found.is_some_and(|f| {
                    act_on_cone(&f.transform, &pulled).rays == cell.decomposition.cones[f.index].sorted_rays()
                });
                if !matches {
                    ok = false;
                    violations.push(format!("restriction of cone {:?} to {:?} is not a cone of the cell", c.rays, pos));
                }
            }
            restrictions.push(RestrictionCertificate {
                summand: cell.orbit.coords.clone(),
                sub_summand: pos.iter().map(|&k| cell.orbit.coords[k]).collect(),
                cones_checked: n,
                ok,
            });
        }
    }
    let gens = gamma0_generators(&sf.t, sf.p)?;
    let mut equivariance_ok = true;
    for cell in &sf.cells {
        for gamma in &gens {
            let moved = cell.orbit.rep.image(gamma)?;
            if position_of(&moved, &sf.t, sf.p)? != cell.orbit.w
                || ord_mult(&moved, &sf.t, sf.p)? != cell.orbit.ord_mult
            {
                equivariance_ok = false;
                violations.push(format!("a Γ₀ generator changes the invariant of {:?}", cell.orbit.coords));
            }
        }
    }
    Ok(ComplexAdmissibility {
        depth,
        cells,
        restrictions,
        gamma0_generators: gens.len(),
        equivariance_ok,
        admissible: violations.is_empty(),
        violations,
        marker: crate::polyhedral::fan::UNVERIFIED_BEYOND_BOUND.into(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StrataNode {
    pub id: usize,
    pub r: usize,
    pub w: PositionInvariant,
    pub dim: usize,
    /// Coordinate summand of the representative (0-based, cell order).
    pub summand: Vec<usize>,
    /// Representative cone in cell coordinates.
    pub cone: RationalCone,
    pub smooth_sym2: bool,
    pub smooth_sw: bool,
    pub ord_mult: bool,
    /// Number of mod-`p` cone keys in the orbit.
    pub orbit_size: usize,
}

impl StrataNode {
    pub fn label(&self) -> String {
        if self.r == 0 {
            "A_{g,0}".to_string()
        } else {
            format!("r={} w={} dim={}", self.r, self.w.label(), self.dim)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrataPoset {
    pub g: usize,
    pub p: u32,
    pub t: ParahoricType,
    pub nodes: Vec<StrataNode>,
    /// `(i, j)`: node `i` is the orbit of a proper face of a cone in node `j`.
    pub edges: Vec<(usize, usize)>,
    pub root: usize,
}

/// The strata poset `𝔖/Γ₀` of `𝔖_Σ`.
pub fn strata_poset(sf: &ComplexDecomposition) -> Result<StrataPoset> {
    let (g, p) = (sf.g, sf.p);
    let space = SymplecticSpace::new(g, p)?;
    let sp_gens = space.group_generators();
    let lvl = level_generators(&space, &sf.t);
    let root_key = ConeKey { summand: Subspace::span(2 * g, p, Vec::new()), rays: Vec::new() };
    let mut node_of: HashMap<ConeKey, usize> = HashMap::from([(root_key, 0)]);
    let mut nodes = vec![StrataNode {
        id: 0,
        r: 0,
        w: position_of(&IsotropicSummand::zero(g), &sf.t, p)?,
        dim: 0,
        summand: Vec::new(),
        cone: RationalCone::zero(0),
        smooth_sym2: true,
        smooth_sw: true,
        ord_mult: false,
        orbit_size: 1,
    }];
    let mut pending: Vec<(usize, usize, RationalCone, Vec<ConeKey>)> = Vec::new();
    for r in 1..=g {
        let seed_cell = sf.cells.iter().find(|c| c.orbit.rep.r == r).expect("every rank has a cell");
        let decomposition = &sf.sigma[r];
        for c in &decomposition.cones {
            if c.rays.is_empty() || quotient_lattice(c, r)?.rank != r {
                continue;
            }
            let key = cone_key(&seed_cell.orbit.rep, c, p)?;
            if node_of.contains_key(&key) {
                continue;
            }
            let all = orbit(key, &sp_gens, |m, k| k.act(m));
            for o in orbit_partition(&all, &lvl, |m, k| k.act(m)) {
                let id = nodes.len() + pending.len();
                for k in &o {
                    node_of.insert(k.clone(), id);
                }
                pending.push((id, r, c.clone(), o));
            }
        }
    }
    let lifts: BTreeMap<usize, Vec<IntMatrix>> = (1..=g).map(|r| (r, gl_lifts(r, p))).collect();
    for (id, r, seed, o) in pending {
        let members: HashSet<&ConeKey> = o.iter().collect();
        let mut found = None;
        'cells: for cell in sf.cells.iter().filter(|c| c.orbit.rep.r == r) {
            let vbar = cell.orbit.rep.reduce(p);
            if !o.iter().any(|k| k.summand == vbar) {
                continue;
            }
            for gamma in &lifts[&r] {
                let cone = act_on_cone(gamma, &seed);
                if members.contains(&cone_key(&cell.orbit.rep, &cone, p)?) {
                    found = Some((cell, cone));
                    break 'cells;
                }
            }
        }
        let (cell, cone) = found.ok_or_else(|| Error::Internal(format!("no representative cone for stratum {id}")))?;
        nodes.push(StrataNode {
            id,
            r,
            w: cell.orbit.w.clone(),
            dim: cone.dim(),
            summand: cell.orbit.coords.clone(),
            smooth_sym2: is_smooth(&cone, &IntegralStructure::standard(sym_dim(r))),
            smooth_sw: is_smooth(&cone, &cell.structure),
            cone,
            ord_mult: cell.orbit.ord_mult,
            orbit_size: o.len(),
        });
    }
    let mut edges = Vec::new();
    for node in nodes.iter().skip(1) {
        let cell = sf.cells.iter().find(|c| c.orbit.coords == node.summand).expect("node cell");
        for f in faces(&node.cone) {
            if f.rays.len() == node.cone.rays.len() {
                continue;
            }
            let key = cone_key(&cell.orbit.rep, &f, p)?;
            let i = *node_of.get(&key).ok_or_else(|| Error::Internal(format!("face {:?} has no stratum", f.rays)))?;
            if !edges.contains(&(i, node.id)) {
                edges.push((i, node.id));
            }
        }
    }
    edges.sort();
    for &(i, j) in &edges {
        let (a, b) = (&nodes[i], &nodes[j]);
        if (a.r, a.dim) >= (b.r, b.dim) && a.dim >= b.dim {
            return Err(Error::Internal(format!("closure edge {i} → {j} does not increase dimension")));
        }
    }
    Ok(StrataPoset { g, p, t: sf.t.clone(), nodes, edges, root: 0 })
}

pub fn ord_mult_strata(poset: &StrataPoset) -> Vec<usize> {
    poset.nodes.iter().filter(|n| n.ord_mult).map(|n| n.id).collect()
}

impl StrataPoset {
    pub fn to_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|n| {
                json!({
                    "id": n.id,
                    "label": n.label(),
                    "r": n.r,
                    "w": { "m": n.w.m, "a": n.w.a, "e": n.w.e, "label": n.w.label() },
                    "dim": n.dim,
                    "summand": n.summand.iter().map(|j| j + 1).collect::<Vec<_>>(),
                    "cone": serde_json::to_value(&n.cone).expect("cone serializes"),
                    "smooth": { "Sym2": n.smooth_sym2, "S^w": n.smooth_sw },
                    "ord_mult": n.ord_mult,
                    "orbit_size": n.orbit_size,
                })
            })
            .collect();
        let edges: Vec<Value> = self.edges.iter().map(|(i, j)| json!([i, j])).collect();
        json!({ "g": self.g, "p": self.p, "D": self.t.d, "root": self.root, "nodes": nodes, "edges": edges })
    }

    /// Graphviz digraph; nodes and edges in id order.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph strata {\n  rankdir=TB;\n");
        for n in &self.nodes {
            let label = if n.id == self.root {
                "A_{g,0}".to_string()
            } else {
                format!(
                    "{}\\nsmooth Sym2={} S^w={}{}",
                    n.label(),
                    n.smooth_sym2,
                    n.smooth_sw,
                    if n.ord_mult { "\\nord-mult" } else { "" }
                )
            };
            let shape = if n.ord_mult { ", shape=box" } else { "" };
            s.push_str(&format!("  n{} [label=\"{}\"{}];\n", n.id, label, shape));
        }
        for (i, j) in &self.edges {
            s.push_str(&format!("  n{i} -> n{j};\n"));
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothRow {
    pub node: usize,
    pub w: PositionInvariant,
    pub summand: Vec<usize>,
    pub cone: RationalCone,
    pub dim: usize,
    pub smooth_sym2: bool,
    pub smooth_sw: bool,
    #[serde(with = "crate::json::bigint")]
    pub multiplicity_sw: BigInt,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothTable {
    pub rows: Vec<SmoothRow>,
    /// Rows smooth for `Sym²` but not for `S^w`.
    pub findings: Vec<usize>,
}

/// Smoothness of every boundary stratum cone for `Sym²` and for its `S^w`.
pub fn check_smooth_complex(sf: &ComplexDecomposition, poset: &StrataPoset) -> SmoothTable {
    let mut rows = Vec::new();
    for n in poset.nodes.iter().filter(|n| n.r > 0) {
        let cell = sf.cells.iter().find(|c| c.orbit.coords == n.summand).expect("node cell");
        rows.push(SmoothRow {
            node: n.id,
            w: n.w.clone(),
            summand: n.summand.clone(),
            cone: n.cone.clone(),
            dim: n.dim,
            smooth_sym2: n.smooth_sym2,
            smooth_sw: n.smooth_sw,
            multiplicity_sw: multiplicity(&n.cone, &cell.structure).unwrap_or_else(BigInt::zero),
        });
    }
    let findings = rows.iter().enumerate().filter(|(_, r)| r.smooth_sym2 && !r.smooth_sw).map(|(i, _)| i).collect();
    SmoothTable { rows, findings }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellRefinement {
    pub summand: Vec<usize>,
    pub w: PositionInvariant,
    pub input: Decomposition,
    pub refinement: Refinement,
    pub check: RefinementCheck,
}

/// Refines, in each cell, the fan spanned by the stratum representatives so
/// that every cone is smooth for that cell's `S^w`.
pub fn refine_complex(sf: &ComplexDecomposition, poset: &StrataPoset, budget: usize) -> Result<Vec<CellRefinement>> {
    let mut out = Vec::new();
    for cell in &sf.cells {
        let r = cell.orbit.rep.r;
        let cones: Vec<RationalCone> =
            poset.nodes.iter().filter(|n| n.r == r && n.summand == cell.orbit.coords).map(|n| n.cone.clone()).collect();
        let input = Decomposition::new(r, cones, gl_generators(r))?;
        let refinement = refine_to_smooth(&input, &cell.structure, budget)?;
        let check = verify_refinement(&input, &refinement.output, &cell.structure);
        out.push(CellRefinement {
            summand: cell.orbit.coords.clone(),
            w: cell.orbit.w.clone(),
            input,
            refinement,
            check,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ivec;

    fn ty(g: usize, d: &[usize]) -> ParahoricType {
        ParahoricType::new(g, d.to_vec()).unwrap()
    }

    #[test]
    fn hermite_form() {
        let m = IntMatrix::from_i64(&[&[2, 4, 1], &[1, 2, 0]]);
        let h = hermite_rows(&m);
        assert_eq!(h, IntMatrix::from_i64(&[&[1, 2, 0], &[0, 0, 1]]));
    }

    #[test]
    fn summand_validation() {
        assert!(IsotropicSummand::coordinate(1, &[0]).is_ok());
        assert!(IsotropicSummand::coordinate(1, &[0, 1]).is_err());
        let doubled = IntMatrix::from_i64(&[&[2], &[0]]);
        assert!(IsotropicSummand::new(1, doubled).is_err());
        let v = IsotropicSummand::coordinate(2, &[0, 1]).unwrap();
        assert_eq!(v.perp().cols(), 2);
    }

    #[test]
    fn genus_one_positions() {
        let t = ty(1, &[1]);
        for p in [2, 3, 5] {
            let x1 = IsotropicSummand::coordinate(1, &[0]).unwrap();
            let x2 = IsotropicSummand::coordinate(1, &[1]).unwrap();
            assert_eq!(position_of(&x1, &t, p).unwrap().label(), "(0,0,1)");
            assert_eq!(position_of(&x2, &t, p).unwrap().label(), "(1,0,0)");
            assert!(ord_mult(&x2, &t, p).unwrap());
            assert!(!ord_mult(&x1, &t, p).unwrap());
            let orbits = enumerate_isotropic_orbits(1, p, &t, 1).unwrap();
            assert_eq!(orbits.len(), 2);
            assert_eq!(orbits.iter().map(|o| o.size).sum::<usize>(), p as usize + 1);
            assert_eq!(enumerate_isotropic_orbits(1, p, &t, 0).unwrap().len(), 1);
        }
        let zero = position_of(&IsotropicSummand::zero(1), &t, 3).unwrap();
        assert_eq!(zero.a, vec![1]);
    }

    #[test]
    fn lines_in_genus_two() {
        let t = ty(2, &[2]);
        let orbits = enumerate_isotropic_orbits(2, 2, &t, 1).unwrap();
        assert_eq!(orbits.iter().map(|o| o.size).sum::<usize>(), 15);
        assert!(enumerate_isotropic_orbits(3, 2, &ty(3, &[1]), 1).is_err());
    }

    #[test]
    fn rank_one_vectors() {
        assert_eq!(rank_one_vector(2, &ivec(&[1, -1, 1])), Some(ivec(&[1, -1])));
        assert_eq!(rank_one_vector(2, &ivec(&[0, 0, 1])), Some(ivec(&[0, 1])));
        assert_eq!(rank_one_vector(2, &ivec(&[1, 0, 1])), None);
    }

    #[test]
    fn genus_one_poset() {
        let t = ty(1, &[1]);
        for p in [2, 3, 5] {
            let sf = induce_decomposition(&Decomposition::principal(1).unwrap(), p, &t).unwrap();
            let poset = strata_poset(&sf).unwrap();
            assert_eq!(poset.nodes.len(), 3);
            assert_eq!(poset.edges, vec![(0, 1), (0, 2)]);
            let labels: Vec<String> = poset.nodes[1..].iter().map(|n| n.w.label()).collect();
            assert!(labels.contains(&"(1,0,0)".to_string()) && labels.contains(&"(0,0,1)".to_string()));
            let flagged = ord_mult_strata(&poset);
            assert_eq!(flagged.len(), 1);
            assert_eq!(poset.nodes[flagged[0]].w.label(), "(1,0,0)");
            assert!(poset.to_dot().contains("A_{g,0}"));
            let adm = check_admissible_complex(&sf, 2, 2).unwrap();
            assert!(adm.admissible, "{:?}", adm.violations);
        }
    }
}
