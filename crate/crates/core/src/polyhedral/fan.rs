//! `GL(X)`-admissible decompositions stored by orbit representatives,
//! bounded admissibility checks, and smooth refinement by stellar subdivision.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cone::{form_to_vec, is_psd, rank_one_form, sym_dim, vec_to_form, IntegralStructure, RationalCone};
use super::dd::cone_from_inequalities;
use super::hilbert::hilbert_basis_of_generated;
use super::{face_index_sets, faces};
use crate::error::{Error, Result};
use crate::lattice::{ivec, primitive_ray, snf, IntMatrix};

pub const UNVERIFIED_BEYOND_BOUND: &str = "UNVERIFIED-BEYOND-BOUND";

/// `b ↦ Aᵀ b A` on form coordinates.
pub fn act_on_form(a: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
    let g = a.rows();
    let b = vec_to_form(g, v);
    form_to_vec(&(&(&a.transpose() * &b) * a))
}

pub fn act_on_cone(a: &IntMatrix, c: &RationalCone) -> RationalCone {
    let mut rays: Vec<Vec<BigInt>> = c.rays.iter().map(|r| primitive_ray(&act_on_form(a, r))).collect();
    rays.sort();
    RationalCone::from_rays_unchecked(c.ambient, rays)
}

/// Generators of `GL_g(ℤ)` closed under inverses: signs, adjacent swaps and
/// the elementary matrix `1 + E_01` with its inverse.
pub fn gl_generators(g: usize) -> Vec<IntMatrix> {
    let mut out = Vec::new();
    for i in 0..g {
        let mut d = IntMatrix::identity(g);
        d[(i, i)] = BigInt::from(-1);
        out.push(d);
    }
    for i in 0..g.saturating_sub(1) {
        let idx: Vec<usize> = (0..g)
            .map(|k| {
                if k == i {
                    i + 1
                } else if k == i + 1 {
                    i
                } else {
                    k
                }
            })
            .collect();
        out.push(IntMatrix::identity(g).select_cols(&idx));
    }
    if g >= 2 {
        for s in [1, -1] {
            let mut t = IntMatrix::identity(g);
            t[(0, 1)] = BigInt::from(s);
            out.push(t);
        }
    }
    out
}

/// Orbit representatives of a decomposition of `C(X)`, closed under faces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub g: usize,
    pub cones: Vec<RationalCone>,
    pub generators: Vec<IntMatrix>,
}

fn canonical(c: &RationalCone) -> RationalCone {
    RationalCone::from_rays_unchecked(c.ambient, c.sorted_rays())
}

impl Decomposition {
    /// Closes `cones` under faces; cones are sorted by dimension then rays.
    pub fn new(g: usize, cones: Vec<RationalCone>, generators: Vec<IntMatrix>) -> Result<Self> {
        let n = sym_dim(g);
        let mut set: BTreeSet<(usize, Vec<Vec<BigInt>>)> = BTreeSet::new();
        for c in &cones {
            if c.ambient != n {
                return Err(Error::Shape(format!("cone of ambient {} in a genus {g} decomposition", c.ambient)));
            }
            for f in faces(c) {
                set.insert((f.dim(), f.sorted_rays()));
            }
        }
        if set.is_empty() {
            set.insert((0, Vec::new()));
        }
        let cones = set.into_iter().map(|(_, r)| RationalCone::from_rays_unchecked(n, r)).collect();
        Ok(Decomposition { g, cones, generators })
    }

    /// The decomposition from the orbit of the cone spanned by `x_i²` and
    /// `(x_1 + x_2)²` (g = 2), or of `C(X)` itself (g = 1).
    pub fn principal(g: usize) -> Result<Self> {
        let rays: Vec<Vec<BigInt>> = match g {
            1 => vec![ivec(&[1])],
            2 => vec![rank_one_form(&ivec(&[1, 0])), rank_one_form(&ivec(&[0, 1])), rank_one_form(&ivec(&[1, 1]))],
            _ => return Err(Error::Invalid(format!("no built-in principal decomposition for g = {g}"))),
        };
        let sigma = RationalCone::new(sym_dim(g), rays)?;
        Decomposition::new(g, vec![sigma], gl_generators(g))
    }

    pub fn ambient(&self) -> usize {
        sym_dim(self.g)
    }

    pub fn index_of(&self, c: &RationalCone) -> Option<usize> {
        let key = c.sorted_rays();
        self.cones.iter().position(|d| d.rays == key)
    }

    /// Indices of cones that are not proper faces of stored cones.
    pub fn maximal(&self) -> Vec<usize> {
        (0..self.cones.len())
            .filter(|&i| {
                !self.cones.iter().enumerate().any(|(j, d)| {
                    j != i
                        && d.rays.len() > self.cones[i].rays.len()
                        && self.cones[i].rays.iter().all(|r| d.rays.contains(r))
                })
            })
            .collect()
    }

    /// Facet relations `(i, j)`: cone `i` is a codimension-one face of cone `j`.
    pub fn face_edges(&self) -> Vec<(usize, usize)> {
        let dims: Vec<usize> = self.cones.iter().map(RationalCone::dim).collect();
        let mut edges = Vec::new();
        for (i, a) in self.cones.iter().enumerate() {
            for (j, b) in self.cones.iter().enumerate() {
                if dims[j] == dims[i] + 1 && a.rays.iter().all(|r| b.rays.contains(r)) {
                    edges.push((i, j));
                }
            }
        }
        edges
    }

    pub fn to_json(&self) -> Value {
        let cones: Vec<Value> = self.cones.iter().map(|c| serde_json::to_value(c).expect("cone serializes")).collect();
        let edges: Vec<Value> = self.face_edges().into_iter().map(|(i, j)| json!([i, j])).collect();
        let gens: Vec<Value> =
            self.generators.iter().map(|m| serde_json::to_value(m).expect("matrix serializes")).collect();
        json!({ "g": self.g, "ambient": self.ambient(), "cones": cones, "face_edges": edges, "generators": gens })
    }

    /// Translates of the stored cones by words of length at most `depth`.
    pub fn orbit_cones(&self, depth: usize) -> Vec<RationalCone> {
        let mut seen: HashSet<Vec<Vec<BigInt>>> = HashSet::new();
        let mut out = Vec::new();
        let mut queue: VecDeque<(RationalCone, usize)> = VecDeque::new();
        for c in &self.cones {
            let c = canonical(c);
            if seen.insert(c.rays.clone()) {
                out.push(c.clone());
                queue.push_back((c, 0));
            }
        }
        while let Some((c, d)) = queue.pop_front() {
            if d == depth {
                continue;
            }
            for a in &self.generators {
                let img = act_on_cone(a, &c);
                if seen.insert(img.rays.clone()) {
                    out.push(img.clone());
                    queue.push_back((img, d + 1));
                }
            }
        }
        out
    }
}

/// `σ ∩ τ` as a pointed cone.
pub fn intersect(a: &RationalCone, b: &RationalCone) -> RationalCone {
    let n = a.ambient;
    let mut ineqs = a.dual().generators();
    ineqs.extend(b.dual().generators());
    let d = cone_from_inequalities(n, &ineqs);
    RationalCone::from_rays_unchecked(n, d.rays)
}

fn is_face_of(tau: &RationalCone, sigma: &RationalCone) -> bool {
    let idx: Vec<usize> = tau.rays.iter().filter_map(|r| sigma.rays.iter().position(|s| s == r)).collect();
    if idx.len() != tau.rays.len() {
        return false;
    }
    let mut idx = idx;
    idx.sort();
    face_index_sets(sigma).contains(&idx)
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityReport {
    pub depth: usize,
    pub orbit_cones: usize,
    pub intersections_checked: usize,
    pub coverage_points: usize,
    pub admissible: bool,
    pub violations: Vec<Violation>,
    pub marker: String,
}

/// Bounded check: face closure and pairwise intersections among translates up
/// to word length `depth`, and that every PSD form with entries in
/// `[-coverage, coverage]` reduces into a stored cone within `depth`.
pub fn check_admissible(f: &Decomposition, depth: usize, coverage: i64) -> AdmissibilityReport {
    let orbit = f.orbit_cones(depth);
    let keys: HashSet<Vec<Vec<BigInt>>> = orbit.iter().map(|c| c.rays.clone()).collect();
    let mut violations = Vec::new();
    for c in &f.cones {
        for t in faces(c) {
            if !keys.contains(&t.sorted_rays()) {
                violations.push(Violation {
                    kind: "face-closure".into(),
                    detail: format!("face {:?} of {:?} is not in the decomposition", t.rays, c.rays),
                });
            }
        }
    }
    let mut checked = 0;
    for s in &f.cones {
        for t in &orbit {
            checked += 1;
            let m = intersect(s, t);
            if !is_face_of(&canonical(&m), &canonical(s)) || !is_face_of(&canonical(&m), t) {
                violations.push(Violation {
                    kind: "intersection".into(),
                    detail: format!("{:?} ∩ {:?} = {:?} is not a common face", s.rays, t.rays, m.rays),
                });
            }
        }
    }
    let g = f.g;
    let mut points = 0;
    for v in small_forms(g, coverage) {
        points += 1;
        if let Err(e) = minimal_containing_cone(&vec_to_form(g, &v), f, depth) {
            violations.push(Violation { kind: "coverage".into(), detail: format!("form {v:?}: {e}") });
        }
    }
    AdmissibilityReport {
        depth,
        orbit_cones: orbit.len(),
        intersections_checked: checked,
        coverage_points: points,
        admissible: violations.is_empty(),
        violations,
        marker: UNVERIFIED_BEYOND_BOUND.into(),
    }
}

/// PSD integer forms with entries in `[-c, c]`, in form coordinates.
pub fn small_forms(g: usize, c: i64) -> Vec<Vec<BigInt>> {
    let n = sym_dim(g);
    let width = (2 * c + 1) as usize;
    let mut out = Vec::new();
    for k in 0..width.pow(n as u32) {
        let mut k = k;
        let v: Vec<i64> = (0..n)
            .map(|_| {
                let x = (k % width) as i64 - c;
                k /= width;
                x
            })
            .collect();
        let v = ivec(&v);
        if is_psd(&vec_to_form(g, &v)) {
            out.push(v);
        }
    }
    out
}

/// Stored cone containing some translate `γ·b` in its relative interior.
#[derive(Clone, Debug, Serialize)]
pub struct ConeReference {
    pub index: usize,
    /// `γ` with `γᵀ b γ` in the relative interior of the cone.
    pub transform: IntMatrix,
    pub depth: usize,
}

pub fn minimal_containing_cone(b: &IntMatrix, f: &Decomposition, depth: usize) -> Result<ConeReference> {
    if b.rows() != f.g || b.cols() != f.g || b.transpose() != *b {
        return Err(Error::Shape(format!("expected a symmetric {0}x{0} form", f.g)));
    }
    if !is_psd(b) {
        return Err(Error::Invalid("form is not positive semi-definite".into()));
    }
    let start = form_to_vec(b);
    let mut seen: HashSet<Vec<BigInt>> = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, IntMatrix::identity(f.g), 0usize)]);
    while let Some((v, gamma, d)) = queue.pop_front() {
        let hits: Vec<usize> = (0..f.cones.len()).filter(|&i| f.cones[i].relint_contains(&v)).collect();
        match hits.len() {
            0 => {}
            1 => return Ok(ConeReference { index: hits[0], transform: gamma, depth: d }),
            _ => return Err(Error::Internal(format!("cones {hits:?} overlap at {v:?}"))),
        }
        if d == depth {
            continue;
        }
        for a in &f.generators {
            let w = act_on_form(a, &v);
            if seen.insert(w.clone()) {
                queue.push_back((w, &gamma * a, d + 1));
            }
        }
    }
    Err(Error::Invalid(format!("form lies outside the support within depth {depth}")))
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementStep {
    /// Face subdivided, in form coordinates.
    #[serde(with = "crate::json::bigint_vecs")]
    pub face: Vec<Vec<BigInt>>,
    #[serde(with = "crate::json::bigint")]
    pub multiplicity: BigInt,
    /// New ray, in form coordinates.
    #[serde(with = "crate::json::bigint_vec")]
    pub point: Vec<BigInt>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Refinement {
    pub output: Decomposition,
    pub steps: Vec<RefinementStep>,
    /// For each maximal output cone, the index of an input cone containing it.
    pub parents: Vec<(usize, usize)>,
}

fn multiplicity_of(rays: &[Vec<BigInt>], idx: &[usize]) -> Option<BigInt> {
    let n = rays[0].len();
    let m = IntMatrix::from_rows(n, &idx.iter().map(|&i| rays[i].clone()).collect::<Vec<_>>());
    let d = snf(&m);
    (d.rank() == idx.len()).then(|| d.elementary_divisors().iter().product())
}

fn all_faces(maxcones: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut set: BTreeSet<(usize, Vec<usize>)> = BTreeSet::new();
    for c in maxcones {
        for mask in 1u32..1 << c.len() {
            let f: Vec<usize> = (0..c.len()).filter(|i| mask >> i & 1 == 1).map(|i| c[i]).collect();
            set.insert((f.len(), f));
        }
    }
    set.into_iter().map(|(_, f)| f).collect()
}

/// Iterated stellar subdivision until every cone is smooth for `s`. At each
/// step the lowest-dimensional non-smooth face `τ` is subdivided at the
/// non-ray Hilbert basis element of `τ` (in `S*`) with the smallest
/// coordinate sum; every non-ray Hilbert basis element lies in the open
/// parallelepiped, so multiplicities strictly drop.
pub fn refine_to_smooth(f: &Decomposition, s: &IntegralStructure, budget: usize) -> Result<Refinement> {
    let n = f.ambient();
    let inputs = f.maximal();
    let mut rays: Vec<Vec<BigInt>> = Vec::new();
    let mut maxcones: Vec<Vec<usize>> = Vec::new();
    for &i in &inputs {
        let c = &f.cones[i];
        if !c.is_simplicial() {
            return Err(Error::Invalid(format!("refinement needs simplicial cones, got {:?}", c.rays)));
        }
        let mut idx = Vec::new();
        for r in &c.rays {
            let d = s.dual_ray(r);
            let k = rays.iter().position(|x| x == &d).unwrap_or_else(|| {
                rays.push(d);
                rays.len() - 1
            });
            idx.push(k);
        }
        idx.sort();
        if !idx.is_empty() {
            maxcones.push(idx);
        }
    }
    let mut steps = Vec::new();
    loop {
        let bad = all_faces(&maxcones).into_iter().find_map(|t| {
            let m = multiplicity_of(&rays, &t).expect("simplicial");
            (!m.is_one()).then_some((t, m))
        });
        let Some((tau, mult)) = bad else { break };
        if steps.len() >= budget {
            return Err(Error::Budget(format!("refinement exceeded {budget} subdivisions")));
        }
        let gens: Vec<Vec<BigInt>> = tau.iter().map(|&i| rays[i].clone()).collect();
        let hb = hilbert_basis_of_generated(n, &gens)?;
        let v = hb
            .into_iter()
            .filter(|h| !gens.contains(h))
            .min_by_key(|h| (h.iter().sum::<BigInt>(), h.clone()))
            .ok_or_else(|| Error::Internal("non-smooth face without interior Hilbert basis element".into()))?;
        steps.push(RefinementStep {
            face: gens.iter().map(|r| s.form_ray(r)).collect(),
            multiplicity: mult,
            point: s.form_ray(&v),
        });
        rays.push(v);
        let new = rays.len() - 1;
        let mut next = Vec::new();
        for c in maxcones {
            if tau.iter().all(|i| c.contains(i)) {
                for i in &tau {
                    let mut d: Vec<usize> = c.iter().copied().filter(|j| j != i).collect();
                    d.push(new);
                    d.sort();
                    next.push(d);
                }
            } else {
                next.push(c);
            }
        }
        maxcones = next;
    }
    let cones: Vec<RationalCone> = maxcones
        .iter()
        .map(|c| RationalCone::new(n, c.iter().map(|&i| s.form_ray(&rays[i])).collect()))
        .collect::<Result<_>>()?;
    let output = if steps.is_empty() { f.clone() } else { Decomposition::new(f.g, cones, f.generators.clone())? };
    let parents = output
        .maximal()
        .into_iter()
        .map(|j| {
            let p = inputs.iter().copied().find(|&i| output.cones[j].rays.iter().all(|r| f.cones[i].contains(r)));
            (j, p.expect("output cone lies in an input cone"))
        })
        .collect();
    Ok(Refinement { output, steps, parents })
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementCheck {
    pub refines: bool,
    pub smooth: bool,
    pub support_samples: usize,
    pub support_preserved: bool,
    pub witnesses: Vec<String>,
}

/// Lattice points `Σ λ_i ρ_i`, `λ ∈ {0..3}^k` nonzero, of a cone.
fn sample_points(c: &RationalCone) -> Vec<Vec<BigInt>> {
    let k = c.rays.len();
    let n = c.ambient;
    let mut out = Vec::new();
    for code in 1..4usize.pow(k as u32) {
        let mut code = code;
        let mut x = vec![BigInt::zero(); n];
        for r in &c.rays {
            let l = BigInt::from(code % 4);
            code /= 4;
            for (xi, ri) in x.iter_mut().zip(r) {
                *xi += &l * ri;
            }
        }
        out.push(x);
    }
    out
}

/// Each output cone lies in an input cone and is smooth for `s`; sampled
/// points of each input maximal cone lie in the relative interior of exactly
/// one output cone inside it; inside each input cone the output maximal cones
/// are full-dimensional and glue along interior walls in pairs.
pub fn verify_refinement(input: &Decomposition, output: &Decomposition, s: &IntegralStructure) -> RefinementCheck {
    let mut witnesses = Vec::new();
    let in_max = input.maximal();
    let refines = output.cones.iter().all(|c| {
        let ok = in_max.iter().any(|&i| c.rays.iter().all(|r| input.cones[i].contains(r)));
        if !ok {
            witnesses.push(format!("output cone {:?} is in no input cone", c.rays));
        }
        ok
    });
    let smooth = output.cones.iter().all(|c| {
        let ok = super::cone::is_smooth(c, s);
        if !ok {
            witnesses.push(format!("output cone {:?} is not smooth", c.rays));
        }
        ok
    });
    let mut samples = 0;
    let mut support = true;
    for &i in &in_max {
        let sigma = &input.cones[i];
        let inside: Vec<&RationalCone> =
            output.cones.iter().filter(|c| c.rays.iter().all(|r| sigma.contains(r))).collect();
        for x in sample_points(sigma) {
            samples += 1;
            let hits = inside.iter().filter(|c| c.relint_contains(&x)).count();
            if hits != 1 {
                support = false;
                witnesses.push(format!("point {x:?} of {:?} lies in {hits} output cones", sigma.rays));
            }
        }
        let k = sigma.dim();
        let tops: Vec<&&RationalCone> = inside.iter().filter(|c| c.rays.len() == k).collect();
        let boundary: Vec<RationalCone> =
            faces(sigma).into_iter().filter(|t| t.rays.len() + 1 == sigma.rays.len()).collect();
        for w in inside.iter().filter(|c| c.rays.len() + 1 == k && c.dim() + 1 == k) {
            let count = tops.iter().filter(|c| w.rays.iter().all(|r| c.rays.contains(r))).count();
            let on_boundary = boundary.iter().any(|b| w.rays.iter().all(|r| b.contains(r)));
            let expected = if on_boundary { 1 } else { 2 };
            if count != expected {
                support = false;
                witnesses.push(format!("wall {:?} bounds {count} maximal cones", w.rays));
            }
        }
        if inside.iter().any(|c| c.dim() > k) {
            support = false;
        }
    }
    RefinementCheck { refines, smooth, support_samples: samples, support_preserved: support, witnesses }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std(n: usize) -> IntegralStructure {
        IntegralStructure::standard(n)
    }

    #[test]
    fn principal_shapes() {
        let p1 = Decomposition::principal(1).unwrap();
        assert_eq!(p1.cones.len(), 2);
        let p2 = Decomposition::principal(2).unwrap();
        assert_eq!(p2.cones.len(), 8);
        assert_eq!(p2.maximal().len(), 1);
        assert_eq!(p2.face_edges().len(), 12);
        assert!(Decomposition::principal(3).is_err());
    }

    #[test]
    fn minimal_cones() {
        let p2 = Decomposition::principal(2).unwrap();
        let zero = minimal_containing_cone(&IntMatrix::zeros(2, 2), &p2, 0).unwrap();
        assert!(p2.cones[zero.index].rays.is_empty());
        let r = minimal_containing_cone(&IntMatrix::from_i64(&[&[1, 0], &[0, 1]]), &p2, 0).unwrap();
        assert_eq!(p2.cones[r.index].rays, vec![ivec(&[0, 0, 1]), ivec(&[1, 0, 0])]);
        let r = minimal_containing_cone(&IntMatrix::from_i64(&[&[2, 1], &[1, 2]]), &p2, 0).unwrap();
        assert_eq!(p2.cones[r.index].rays.len(), 3);
        // (x1 - x2)² reduces by a sign change
        let b = IntMatrix::from_i64(&[&[1, -1], &[-1, 1]]);
        let r = minimal_containing_cone(&b, &p2, 2).unwrap();
        let img = act_on_form(&r.transform, &form_to_vec(&b));
        assert!(p2.cones[r.index].relint_contains(&img));
        let p1 = Decomposition::principal(1).unwrap();
        let r = minimal_containing_cone(&IntMatrix::from_i64(&[&[5]]), &p1, 0).unwrap();
        assert_eq!(p1.cones[r.index].rays, vec![ivec(&[1])]);
        assert!(minimal_containing_cone(&IntMatrix::from_i64(&[&[1, 2], &[2, 1]]), &p2, 1).is_err());
    }

    #[test]
    fn principal_is_admissible_within_bound() {
        let rep = check_admissible(&Decomposition::principal(1).unwrap(), 2, 3);
        assert!(rep.admissible, "{:?}", rep.violations);
        let rep = check_admissible(&Decomposition::principal(2).unwrap(), 3, 2);
        assert!(rep.admissible, "{:?}", rep.violations);
        assert_eq!(rep.marker, UNVERIFIED_BEYOND_BOUND);
    }

    #[test]
    fn broken_decompositions_are_caught() {
        // a maximal cone with one ray deleted leaves forms uncovered
        let thin = RationalCone::new(3, vec![ivec(&[1, 0, 0]), ivec(&[0, 0, 1])]).unwrap();
        let rep = check_admissible(&Decomposition::new(2, vec![thin], gl_generators(2)).unwrap(), 2, 2);
        assert!(!rep.admissible);
        assert!(rep.violations.iter().any(|v| v.kind == "coverage"));
        // a stored cone missing one of its faces
        let mut p2 = Decomposition::principal(2).unwrap();
        p2.cones.retain(|c| c.rays.len() != 1);
        p2.generators.clear();
        assert!(check_admissible(&p2, 1, 0).violations.iter().any(|v| v.kind == "face-closure"));
        // a cone overlapping its own translates
        let big = RationalCone::new(3, vec![ivec(&[1, 0, 0]), ivec(&[0, 0, 1]), ivec(&[1, 1, 1]), ivec(&[1, -1, 1])])
            .unwrap();
        let bad = Decomposition::new(2, vec![big], gl_generators(2)).unwrap();
        assert!(check_admissible(&bad, 1, 1).violations.iter().any(|v| v.kind == "intersection"));
    }

    #[test]
    fn a1_resolution() {
        let sigma = RationalCone::new(3, vec![ivec(&[1, 0, 0]), ivec(&[1, 2, 4])]).unwrap();
        // not a decomposition of C(X); exercised as a plain fan in ambient 3
        let f = Decomposition { g: 2, cones: faces(&sigma), generators: vec![] };
        let r = refine_to_smooth(&f, &std(3), 10).unwrap();
        assert_eq!(r.steps.len(), 1);
        assert_eq!(r.steps[0].point, ivec(&[1, 1, 2]));
        assert_eq!(r.output.maximal().len(), 2);
        let chk = verify_refinement(&f, &r.output, &std(3));
        assert!(chk.refines && chk.smooth && chk.support_preserved, "{chk:?}");
    }

    #[test]
    fn smooth_input_is_unchanged() {
        let p2 = Decomposition::principal(2).unwrap();
        let r = refine_to_smooth(&p2, &std(3), 0).unwrap();
        assert!(r.steps.is_empty());
        assert_eq!(r.output, p2);
    }

    #[test]
    fn refinement_for_a_coarser_structure() {
        // S* coordinates (b11, 2b12, b22) make the principal cone singular
        let s =
            IntegralStructure::new(IntMatrix::from_i64(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 1]]), BigInt::one()).unwrap();
        let p2 = Decomposition::principal(2).unwrap();
        let sigma = &p2.cones[p2.maximal()[0]];
        assert!(!super::super::cone::is_smooth(sigma, &s));
        let r = refine_to_smooth(&p2, &s, 50).unwrap();
        assert!(!r.steps.is_empty());
        let chk = verify_refinement(&p2, &r.output, &s);
        assert!(chk.refines && chk.smooth && chk.support_preserved, "{chk:?}");
        assert!(matches!(refine_to_smooth(&p2, &s, 0), Err(Error::Budget(_))));
    }
}
