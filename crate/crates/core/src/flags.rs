//! The symplectic space `V = ⊕ x_j` with its anti-diagonal form, parahoric
//! types, isotropic flags over 𝔽_p and their relative position with respect
//! to a weight filtration.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fp::{check_prime, FpMatrix, Subspace};
use crate::lattice::IntMatrix;

/// `V = 𝔽_p^{2g}` (or `ℤ^{2g}`) with `⟨x_i, x_{2g+1-i}⟩ = 1` for `i ≤ g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymplecticSpace {
    pub g: usize,
    pub p: u32,
}

impl SymplecticSpace {
    pub fn new(g: usize, p: u32) -> Result<Self> {
        if g == 0 {
            return Err(Error::Invalid("genus must be positive".into()));
        }
        check_prime(p as u64)?;
        Ok(SymplecticSpace { g, p })
    }

    pub fn dim(&self) -> usize {
        2 * self.g
    }

    /// Index (0-based) of the basis vector paired with `x_j`.
    pub fn partner(&self, j: usize) -> usize {
        2 * self.g - 1 - j
    }

    /// `J_{j, partner(j)}`.
    pub fn sign(&self, j: usize) -> i64 {
        if j < self.g {
            1
        } else {
            -1
        }
    }

    pub fn form(&self) -> IntMatrix {
        let n = self.dim();
        let mut j = IntMatrix::zeros(n, n);
        for i in 0..n {
            j[(i, self.partner(i))] = BigInt::from(self.sign(i));
        }
        j
    }

    pub fn pair(&self, u: &[u32], v: &[u32]) -> u32 {
        let p = self.p as i64;
        let s: i64 = (0..self.dim()).map(|i| self.sign(i) * u[i] as i64 * v[self.partner(i)] as i64 % p).sum();
        s.rem_euclid(p) as u32
    }

    pub fn is_isotropic(&self, h: &Subspace) -> bool {
        h.basis.iter().all(|u| h.basis.iter().all(|v| self.pair(u, v) == 0))
    }

    /// Symplectic transvection `x ↦ x + c⟨v, x⟩v`.
    pub fn transvection(&self, v: &[u32], c: u32) -> FpMatrix {
        let n = self.dim();
        let p = self.p as i64;
        FpMatrix::from_fn(n, self.p, |i, k| {
            let jv = self.sign(self.partner(k)) * v[self.partner(k)] as i64;
            i64::from(i == k) + c as i64 * v[i] as i64 % p * jv
        })
    }

    /// Element acting by `a` on `x_1..x_g` and by its contragredient on the
    /// dual vectors `x_{2g+1-k}`.
    pub fn levi(&self, a: &FpMatrix) -> FpMatrix {
        let g = self.g;
        let b = a.inverse().expect("Levi component must be invertible").transpose();
        let mut m = FpMatrix::identity(2 * g, self.p);
        for i in 0..g {
            for j in 0..g {
                m.set(i, j, a.get(i, j));
                m.set(self.partner(i), self.partner(j), b.get(i, j));
            }
        }
        m
    }

    /// Similitude with multiplier `ν`.
    pub fn similitude(&self, nu: u32) -> FpMatrix {
        let g = self.g;
        FpMatrix::from_fn(2 * g, self.p, |i, j| {
            if i != j {
                0
            } else if i < g {
                nu as i64
            } else {
                1
            }
        })
    }

    fn basis_vector(&self, j: usize) -> Vec<u32> {
        (0..self.dim()).map(|k| u32::from(k == j)).collect()
    }

    /// Generators of the parabolic subgroup of `GSp_{2g}(𝔽_p)` stabilizing
    /// the coordinate flag `span(x_1..x_{d_1}) ⊂ … ⊂ span(x_1..x_{d_s})`.
    /// An empty `blocks` gives the whole group.
    pub fn parabolic_generators(&self, blocks: &[usize]) -> Vec<FpMatrix> {
        let g = self.g;
        let p = self.p;
        let top = blocks.last().copied().unwrap_or(0);
        let block_of = |a: usize| blocks.iter().filter(|&&d| d <= a).count();
        let mut gens = Vec::new();
        for a in 0..g {
            for b in 0..g {
                if a == b || !(a < b || block_of(a) == block_of(b)) {
                    continue;
                }
                for c in 1..p {
                    let mut e = FpMatrix::identity(g, p);
                    e.set(a, b, c);
                    gens.push(self.levi(&e));
                }
            }
            for c in 2..p {
                let mut e = FpMatrix::identity(g, p);
                e.set(a, a, c);
                gens.push(self.levi(&e));
            }
        }
        let mut vectors = Vec::new();
        for a in 0..g {
            vectors.push(self.basis_vector(a));
            for b in a + 1..g {
                let mut v = self.basis_vector(a);
                v[b] = 1;
                vectors.push(v);
            }
        }
        let middle: Vec<usize> = (top..2 * g - top).collect();
        for (k, &a) in middle.iter().enumerate() {
            vectors.push(self.basis_vector(a));
            for &b in &middle[k + 1..] {
                let mut v = self.basis_vector(a);
                v[b] = 1;
                vectors.push(v);
            }
        }
        vectors.sort();
        vectors.dedup();
        for v in &vectors {
            for c in 1..p {
                gens.push(self.transvection(v, c));
            }
        }
        for nu in 2..p {
            gens.push(self.similitude(nu));
        }
        gens
    }

    pub fn group_generators(&self) -> Vec<FpMatrix> {
        self.parabolic_generators(&[])
    }
}

/// `D = {d_1 < … < d_s} ⊆ {1..g}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParahoricType {
    pub g: usize,
    pub d: Vec<usize>,
}

impl ParahoricType {
    pub fn new(g: usize, d: Vec<usize>) -> Result<Self> {
        if d.is_empty() || d[0] == 0 || d.windows(2).any(|w| w[0] >= w[1]) || *d.last().unwrap() > g {
            return Err(Error::Invalid(format!("{d:?} is not a strictly increasing subset of 1..={g}")));
        }
        Ok(ParahoricType { g, d })
    }

    pub fn s(&self) -> usize {
        self.d.len()
    }

    /// All types of genus `g`.
    pub fn all(g: usize) -> Vec<ParahoricType> {
        (1u32..1 << g)
            .map(|mask| ParahoricType { g, d: (1..=g).filter(|&i| mask >> (i - 1) & 1 == 1).collect() })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IsotropicFlag {
    pub parts: Vec<Subspace>,
}

impl IsotropicFlag {
    pub fn image(&self, g: &FpMatrix) -> IsotropicFlag {
        IsotropicFlag { parts: self.parts.iter().map(|h| h.image(g)).collect() }
    }

    pub fn validate(&self, space: &SymplecticSpace, t: &ParahoricType) -> Result<()> {
        if self.parts.len() != t.s() || self.parts.iter().zip(&t.d).any(|(h, &d)| h.dim() != d) {
            return Err(Error::Invalid("flag dimensions do not match the parahoric type".into()));
        }
        if self.parts.windows(2).any(|w| !w[0].is_subspace_of(&w[1], space.p)) {
            return Err(Error::Invalid("flag is not nested".into()));
        }
        if !space.is_isotropic(self.parts.last().unwrap()) {
            return Err(Error::Invalid("flag is not totally isotropic".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightFlag {
    pub g: usize,
    pub r: usize,
}

impl WeightFlag {
    pub fn new(g: usize, r: usize) -> Result<Self> {
        if r > g {
            return Err(Error::Invalid(format!("torus rank {r} exceeds genus {g}")));
        }
        Ok(WeightFlag { g, r })
    }

    /// `W_1 = span(x_1..x_r)`.
    pub fn w1(&self) -> Subspace {
        Subspace::coordinate(2 * self.g, 0..self.r)
    }

    /// `W_2 = W_1⊥ = span(x_1..x_{2g-r})`.
    pub fn w2(&self) -> Subspace {
        Subspace::coordinate(2 * self.g, 0..2 * self.g - self.r)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PositionInvariant {
    pub r: usize,
    pub m: Vec<usize>,
    pub a: Vec<usize>,
    pub e: Vec<usize>,
}

impl PositionInvariant {
    pub fn s(&self) -> usize {
        self.m.len()
    }

    /// Checks the sum rule, monotonicity and range bounds.
    pub fn is_consistent(&self, g: usize, t: &ParahoricType) -> bool {
        let r = self.r;
        let mono = |v: &[usize]| v.windows(2).all(|w| w[0] <= w[1]);
        self.m.len() == t.s()
            && self.a.len() == t.s()
            && self.e.len() == t.s()
            && (0..t.s()).all(|i| self.m[i] + self.a[i] + self.e[i] == t.d[i])
            && mono(&self.m)
            && mono(&self.a)
            && mono(&self.e)
            && self.m.iter().chain(&self.e).all(|&x| x <= r)
            && self.a.iter().all(|&x| x <= 2 * (g - r))
    }

    pub fn label(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        if self.s() == 1 {
            format!("({},{},{})", self.m[0], self.a[0], self.e[0])
        } else {
            format!("m=({}) a=({}) e=({})", join(&self.m), join(&self.a), join(&self.e))
        }
    }
}

/// `V_i^Std = span(x_1..x_{d_i})`.
pub fn std_flag(t: &ParahoricType, space: &SymplecticSpace) -> IsotropicFlag {
    IsotropicFlag { parts: t.d.iter().map(|&d| Subspace::coordinate(space.dim(), 0..d)).collect() }
}

pub fn invariants(h: &IsotropicFlag, w: &WeightFlag, space: &SymplecticSpace) -> Result<PositionInvariant> {
    if w.g != space.g {
        return Err(Error::Invalid("weight flag and space have different genus".into()));
    }
    let top = h.parts.last().ok_or_else(|| Error::Invalid("empty flag".into()))?;
    if !space.is_isotropic(top) || h.parts.iter().any(|x| !x.is_subspace_of(top, space.p)) {
        return Err(Error::Invalid("flag is not totally isotropic".into()));
    }
    let (mut m, mut a, mut e) = (Vec::new(), Vec::new(), Vec::new());
    for part in &h.parts {
        let in_w1 = part.dim_meet_prefix(w.r, space.p);
        let in_w2 = part.dim_meet_prefix(space.dim() - w.r, space.p);
        m.push(in_w1);
        a.push(in_w2 - in_w1);
        e.push(part.dim() - in_w2);
    }
    Ok(PositionInvariant { r: w.r, m, a, e })
}

/// Breadth-first closure of `start` under `gens`, in discovery order.
pub fn orbit<T, G>(start: T, gens: &[G], act: impl Fn(&G, &T) -> T) -> Vec<T>
where
    T: Clone + Eq + Hash,
{
    let mut seen: HashSet<T> = HashSet::from([start.clone()]);
    let mut out = vec![start.clone()];
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = act(g, &x);
            if seen.insert(y.clone()) {
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    out
}

/// Orbits of `gens` on a finite invariant set, each listed in discovery order;
/// orbits appear in the order of their first element in `points`.
pub fn orbit_partition<T, G>(points: &[T], gens: &[G], act: impl Fn(&G, &T) -> T) -> Vec<Vec<T>>
where
    T: Clone + Eq + Hash,
{
    let mut done: HashSet<T> = HashSet::new();
    let mut out = Vec::new();
    for x in points {
        if done.contains(x) {
            continue;
        }
        let o = orbit(x.clone(), gens, &act);
        done.extend(o.iter().cloned());
        out.push(o);
    }
    out
}

/// The `GSp_{2g}(𝔽_p)`-orbit of the standard flag, i.e. all isotropic flags of type `t`.
pub fn flag_orbit(space: &SymplecticSpace, t: &ParahoricType) -> Vec<IsotropicFlag> {
    orbit(std_flag(t, space), &space.group_generators(), |g, h| h.image(g))
}

/// Position invariants of every flag in the orbit of the standard flag.
pub fn positions_by_orbit(space: &SymplecticSpace, r: usize, t: &ParahoricType) -> Result<BTreeSet<PositionInvariant>> {
    let w = WeightFlag::new(space.g, r)?;
    flag_orbit(space, t).iter().map(|h| invariants(h, &w, space)).collect()
}

/// Orbits of the weight parabolic on isotropic flags of type `t`, each with
/// its invariant; errors if an orbit carries two different invariants.
pub fn weight_orbits(space: &SymplecticSpace, r: usize, t: &ParahoricType) -> Result<Vec<(PositionInvariant, usize)>> {
    let w = WeightFlag::new(space.g, r)?;
    let blocks: Vec<usize> = if r == 0 { vec![] } else { vec![r] };
    let gens = space.parabolic_generators(&blocks);
    let flags = flag_orbit(space, t);
    let mut out = Vec::new();
    for o in orbit_partition(&flags, &gens, |g, h| h.image(g)) {
        let inv = invariants(&o[0], &w, space)?;
        for h in &o[1..] {
            if invariants(h, &w, space)? != inv {
                return Err(Error::Mismatch("invariants are not constant on a parabolic orbit".into()));
            }
        }
        out.push((inv, o.len()));
    }
    Ok(out)
}

/// Triples satisfying the conjectured constraint set: sum rule, monotone
/// sequences, `m_i, e_i ≤ r`, `a_s ≤ g − r` and `m_s + e_s ≤ r`.
pub fn admissible_triples(g: usize, r: usize, t: &ParahoricType) -> BTreeSet<PositionInvariant> {
    fn go(g: usize, r: usize, t: &ParahoricType, cur: &mut PositionInvariant, out: &mut BTreeSet<PositionInvariant>) {
        let i = cur.m.len();
        if i == t.s() {
            out.insert(cur.clone());
            return;
        }
        let (m0, a0, e0) = if i == 0 { (0, 0, 0) } else { (cur.m[i - 1], cur.a[i - 1], cur.e[i - 1]) };
        let last = i + 1 == t.s();
        for m in m0..=r {
            for e in e0..=r {
                let Some(a) = t.d[i].checked_sub(m + e) else { continue };
                if a < a0 || a > g - r || (last && m + e > r) {
                    continue;
                }
                cur.m.push(m);
                cur.a.push(a);
                cur.e.push(e);
                go(g, r, t, cur, out);
                cur.m.pop();
                cur.a.pop();
                cur.e.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    if r <= g {
        go(g, r, t, &mut PositionInvariant { r, m: vec![], a: vec![], e: vec![] }, &mut out);
    }
    out
}

/// `𝒲` for torus rank `r`, computed by orbit enumeration and by the direct
/// constraint set; the two must coincide.
pub fn enumerate_positions(g: usize, p: u32, r: usize, t: &ParahoricType) -> Result<BTreeSet<PositionInvariant>> {
    let space = SymplecticSpace::new(g, p)?;
    if t.g != g {
        return Err(Error::Invalid("parahoric type has a different genus".into()));
    }
    WeightFlag::new(g, r)?;
    let brute = positions_by_orbit(&space, r, t)?;
    cross_check(g, p, r, t, brute)
}

/// `enumerate_positions` for every `r ≤ g`, sharing one orbit enumeration.
pub fn enumerate_all_ranks(g: usize, p: u32, t: &ParahoricType) -> Result<Vec<BTreeSet<PositionInvariant>>> {
    let space = SymplecticSpace::new(g, p)?;
    if t.g != g {
        return Err(Error::Invalid("parahoric type has a different genus".into()));
    }
    let flags = flag_orbit(&space, t);
    (0..=g)
        .map(|r| {
            let w = WeightFlag::new(g, r)?;
            let brute = flags.iter().map(|h| invariants(h, &w, &space)).collect::<Result<BTreeSet<_>>>()?;
            cross_check(g, p, r, t, brute)
        })
        .collect()
}

fn cross_check(
    g: usize,
    p: u32,
    r: usize,
    t: &ParahoricType,
    brute: BTreeSet<PositionInvariant>,
) -> Result<BTreeSet<PositionInvariant>> {
    let direct = admissible_triples(g, r, t);
    if brute != direct {
        let only_brute: Vec<String> = brute.difference(&direct).map(PositionInvariant::label).collect();
        let only_direct: Vec<String> = direct.difference(&brute).map(PositionInvariant::label).collect();
        return Err(Error::Mismatch(format!(
            "orbit enumeration and constraint set disagree (g={g}, p={p}, r={r}, D={:?}): orbit-only {only_brute:?}, constraint-only {only_direct:?}",
            t.d
        )));
    }
    Ok(brute)
}

/// `𝕍^0 = V`, `𝕍^i = span(x_1..x_{d_i}) + pV` and
/// `𝕍^{s+i} = span(x_1..x_{2g-d_{s+1-i}}) + pV` for `1 ≤ i ≤ s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParahoricChain {
    pub g: usize,
    pub p: u32,
    pub d: Vec<usize>,
    /// Number of leading basis vectors kept integrally in each member.
    pub spans: Vec<usize>,
    /// Basis matrices (columns) of each member.
    pub lattices: Vec<IntMatrix>,
}

impl ParahoricChain {
    pub fn len(&self) -> usize {
        self.lattices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattices.is_empty()
    }

    pub fn member(&self, i: usize) -> &IntMatrix {
        &self.lattices[i]
    }
}

pub fn parahoric_chain(t: &ParahoricType, p: u32) -> Result<ParahoricChain> {
    check_prime(p as u64)?;
    let g = t.g;
    let s = t.s();
    let mut spans = vec![2 * g];
    spans.extend(t.d.iter().copied());
    spans.extend((1..=s).map(|i| 2 * g - t.d[s - i]));
    let lattices = spans
        .iter()
        .map(|&k| {
            IntMatrix::diagonal(2 * g, 2 * g, (0..2 * g).map(|j| if j < k { BigInt::one() } else { BigInt::from(p) }))
        })
        .collect();
    Ok(ParahoricChain { g, p, d: t.d.clone(), spans, lattices })
}

/// Whether `γ ∈ GSp_{2g}(ℤ)` with multiplier `±1` stabilizes every member of the chain.
pub fn in_gamma0(gamma: &IntMatrix, t: &ParahoricType, p: u32) -> Result<bool> {
    let space = SymplecticSpace { g: t.g, p };
    let n = space.dim();
    if gamma.shape() != (n, n) {
        return Err(Error::Shape(format!("expected a {n}×{n} matrix")));
    }
    let j = space.form();
    let lhs = &(&gamma.transpose() * &j) * gamma;
    let mut neg = j.clone();
    for c in 0..n {
        neg.negate_col(c);
    }
    if lhs != j && lhs != neg {
        return Ok(false);
    }
    let chain = parahoric_chain(t, p)?;
    let pb = BigInt::from(p);
    // γ has determinant ±1, so γ·𝕍 ⊆ 𝕍 forces equality.
    Ok(chain.spans.iter().all(|&k| (0..k).all(|col| (k..n).all(|row| gamma[(row, col)].mod_floor(&pb).is_zero()))))
}

/// Reduction of an integer matrix modulo `p`.
pub fn reduce_matrix(m: &IntMatrix, p: u32) -> FpMatrix {
    let pb = BigInt::from(p);
    FpMatrix::from_fn(m.rows(), p, |i, j| i64::try_from(m[(i, j)].mod_floor(&pb)).expect("reduced entry fits"))
}

/// Scalar `ν` acting on the whole space (a similitude with multiplier `ν²`).
pub fn scalar(space: &SymplecticSpace, nu: u32) -> FpMatrix {
    let mut m = FpMatrix::identity(space.dim(), space.p);
    for i in 0..space.dim() {
        m.set(i, i, nu);
    }
    m
}

/// Number of flags of each invariant in the orbit of the standard flag.
pub fn invariant_histogram(
    space: &SymplecticSpace,
    r: usize,
    t: &ParahoricType,
) -> Result<HashMap<PositionInvariant, usize>> {
    let w = WeightFlag::new(space.g, r)?;
    let mut hist = HashMap::new();
    for h in flag_orbit(space, t) {
        *hist.entry(invariants(&h, &w, space)?).or_insert(0) += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fp::all_subspaces;

    fn ty(g: usize, d: &[usize]) -> ParahoricType {
        ParahoricType::new(g, d.to_vec()).unwrap()
    }

    #[test]
    fn form_is_skew_and_unimodular() {
        for g in 1..=3 {
            let j = SymplecticSpace { g, p: 2 }.form();
            assert_eq!(j.transpose(), {
                let mut m = j.clone();
                for c in 0..2 * g {
                    m.negate_col(c);
                }
                m
            });
            assert!(j.det() == BigInt::one() || j.det() == -BigInt::one());
        }
    }

    #[test]
    fn parahoric_type_validation() {
        assert!(ParahoricType::new(2, vec![]).is_err());
        assert!(ParahoricType::new(2, vec![2, 1]).is_err());
        assert!(ParahoricType::new(2, vec![3]).is_err());
        assert_eq!(ParahoricType::all(2).len(), 3);
    }

    #[test]
    fn std_flag_examples() {
        let sp = SymplecticSpace::new(2, 3).unwrap();
        let f = std_flag(&ty(2, &[1, 2]), &sp);
        assert_eq!(f.parts[0], Subspace::coordinate(4, [0]));
        assert_eq!(f.parts[1], Subspace::coordinate(4, [0, 1]));
        f.validate(&sp, &ty(2, &[1, 2])).unwrap();
    }

    #[test]
    fn invariant_examples() {
        let sp = SymplecticSpace::new(1, 3).unwrap();
        let w = WeightFlag::new(1, 1).unwrap();
        let h1 = IsotropicFlag { parts: vec![Subspace::coordinate(2, [0])] };
        let h2 = IsotropicFlag { parts: vec![Subspace::coordinate(2, [1])] };
        let inv1 = invariants(&h1, &w, &sp).unwrap();
        assert_eq!((inv1.m[0], inv1.a[0], inv1.e[0]), (1, 0, 0));
        let inv2 = invariants(&h2, &w, &sp).unwrap();
        assert_eq!((inv2.m[0], inv2.a[0], inv2.e[0]), (0, 0, 1));
        let w0 = WeightFlag::new(1, 0).unwrap();
        assert_eq!(invariants(&h2, &w0, &sp).unwrap().a, vec![1]);
        let sp2 = SymplecticSpace::new(2, 3).unwrap();
        let bad = IsotropicFlag { parts: vec![Subspace::coordinate(4, [0, 3])] };
        assert!(invariants(&bad, &WeightFlag::new(2, 1).unwrap(), &sp2).is_err());
    }

    #[test]
    fn generators_are_symplectic_similitudes_fixing_the_flag() {
        for (g, p) in [(1, 3), (2, 2), (2, 3), (3, 2)] {
            let sp = SymplecticSpace::new(g, p).unwrap();
            let j = reduce_matrix(&sp.form(), p);
            for t in ParahoricType::all(g) {
                let std = std_flag(&t, &sp);
                for gen in sp.parabolic_generators(&t.d) {
                    let lhs = gen.transpose().mul(&j).mul(&gen);
                    let nu = (0..p).find(|&nu| lhs == scalar(&sp, nu).mul(&j)).expect("similitude");
                    assert_ne!(nu, 0);
                    assert_eq!(std.image(&gen), std);
                }
            }
        }
    }

    /// Independent oracle: all nested isotropic flags, from all subspaces.
    fn all_isotropic_flags(sp: &SymplecticSpace, t: &ParahoricType) -> HashSet<IsotropicFlag> {
        let mut flags: Vec<Vec<Subspace>> = vec![vec![]];
        for &d in &t.d {
            let subs: Vec<Subspace> =
                all_subspaces(sp.dim(), d, sp.p).into_iter().filter(|h| sp.is_isotropic(h)).collect();
            flags = flags
                .into_iter()
                .flat_map(|f| {
                    subs.iter()
                        .filter(|h| f.last().is_none_or(|prev: &Subspace| prev.is_subspace_of(h, sp.p)))
                        .map(|h| {
                            let mut f2 = f.clone();
                            f2.push(h.clone());
                            f2
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        flags.into_iter().map(|parts| IsotropicFlag { parts }).collect()
    }

    #[test]
    fn group_orbit_is_every_isotropic_flag() {
        for (g, p) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
            let sp = SymplecticSpace::new(g, p).unwrap();
            for t in ParahoricType::all(g) {
                let orbit: HashSet<_> = flag_orbit(&sp, &t).into_iter().collect();
                assert_eq!(orbit, all_isotropic_flags(&sp, &t), "g={g} p={p} D={:?}", t.d);
            }
        }
        // isotropic lines and Lagrangians of Sp_4(F_3)
        let sp = SymplecticSpace::new(2, 3).unwrap();
        assert_eq!(flag_orbit(&sp, &ty(2, &[1])).len(), 40);
        assert_eq!(flag_orbit(&sp, &ty(2, &[2])).len(), 40);
    }

    #[test]
    fn enumerate_examples() {
        let t = ty(1, &[1]);
        let w1 = enumerate_positions(1, 2, 1, &t).unwrap();
        let labels: Vec<String> = w1.iter().map(PositionInvariant::label).collect();
        assert_eq!(labels, vec!["(0,0,1)", "(1,0,0)"]);
        let w0 = enumerate_positions(1, 2, 0, &t).unwrap();
        assert_eq!(w0.iter().map(PositionInvariant::label).collect::<Vec<_>>(), vec!["(0,1,0)"]);
    }

    #[test]
    fn orbit_and_constraint_sets_agree_and_are_p_independent() {
        for g in 1..=2 {
            for t in ParahoricType::all(g) {
                for r in 0..=g {
                    let a = enumerate_positions(g, 2, r, &t).unwrap();
                    let b = enumerate_positions(g, 3, r, &t).unwrap();
                    assert_eq!(a, b);
                    assert!(a.iter().all(|w| w.is_consistent(g, &t)));
                }
            }
        }
    }

    #[test]
    fn invariants_separate_parabolic_orbits() {
        for (g, p) in [(1, 2), (1, 3), (2, 2), (2, 3)] {
            let sp = SymplecticSpace::new(g, p).unwrap();
            for t in ParahoricType::all(g) {
                for r in 0..=g {
                    let orbits = weight_orbits(&sp, r, &t).unwrap();
                    let distinct: HashSet<_> = orbits.iter().map(|(w, _)| w.clone()).collect();
                    assert_eq!(distinct.len(), orbits.len(), "g={g} p={p} r={r} D={:?}", t.d);
                }
            }
        }
    }

    #[test]
    fn similitudes_and_scalars_preserve_invariants() {
        let sp = SymplecticSpace::new(2, 5).unwrap();
        let t = ty(2, &[1, 2]);
        let w = WeightFlag::new(2, 1).unwrap();
        for h in flag_orbit(&sp, &t).iter().step_by(37) {
            let inv = invariants(h, &w, &sp).unwrap();
            for nu in 1..5 {
                assert_eq!(invariants(&h.image(&sp.similitude(nu)), &w, &sp).unwrap(), inv);
                assert_eq!(invariants(&h.image(&scalar(&sp, nu)), &w, &sp).unwrap(), inv);
            }
            for gen in sp.parabolic_generators(&[1]) {
                assert_eq!(invariants(&h.image(&gen), &w, &sp).unwrap(), inv);
            }
        }
    }

    #[test]
    fn chain_examples() {
        let c = parahoric_chain(&ty(1, &[1]), 3).unwrap();
        assert_eq!(c.member(1), &IntMatrix::from_i64(&[&[1, 0], &[0, 3]]));
        let c = parahoric_chain(&ty(2, &[2]), 2).unwrap();
        assert_eq!(c.member(1), &IntMatrix::from_i64(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 2, 0], &[0, 0, 0, 2]]));
        let c = parahoric_chain(&ty(3, &[1, 2]), 5).unwrap();
        assert_eq!(c.spans, vec![6, 1, 2, 4, 5]);
    }

    #[test]
    fn gamma0_examples() {
        let t = ty(1, &[1]);
        assert!(in_gamma0(&IntMatrix::identity(2), &t, 3).unwrap());
        assert!(in_gamma0(&IntMatrix::from_i64(&[&[1, 1], &[0, 1]]), &t, 3).unwrap());
        assert!(!in_gamma0(&IntMatrix::from_i64(&[&[0, -1], &[1, 0]]), &t, 3).unwrap());
        assert!(in_gamma0(&IntMatrix::from_i64(&[&[1, 0], &[3, 1]]), &t, 3).unwrap());
        assert!(!in_gamma0(&IntMatrix::from_i64(&[&[2, 0], &[0, 1]]), &t, 3).unwrap());
    }
}
