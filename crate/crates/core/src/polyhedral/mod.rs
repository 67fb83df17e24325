//! Rational polyhedral cones in `B(X)`, integral structures, Hilbert bases
//! and smooth refinement.

pub mod cone;
pub mod dd;
pub mod fan;
pub mod hilbert;

pub use cone::{
    character_square, divisor_of_character, divisor_of_square, dual_cone, form_to_vec, is_psd, is_smooth, multiplicity,
    quotient_lattice, rank_one_form, strata_monoids, sym_dim, vec_to_form, IntegralStructure, QuotientLattice,
    RationalCone, StratumMonoid,
};
pub use fan::{
    check_admissible, minimal_containing_cone, refine_to_smooth, verify_refinement, Decomposition, Refinement,
};
pub use hilbert::{hilbert_basis, verify_hilbert_basis, HilbertBasis, HilbertCheck};

use crate::lattice::dot;
use num_traits::Zero;

/// Ray index sets of all faces of a pointed cone, sorted by size then
/// lexicographically; `{0}` first, `σ` last.
pub fn face_index_sets(sigma: &RationalCone) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..sigma.rays.len()).collect();
    let mut sets: Vec<Vec<usize>> = vec![all.clone(), Vec::new()];
    for u in sigma.dual().generators() {
        let z: Vec<usize> = all.iter().copied().filter(|&i| dot(&u, &sigma.rays[i]).is_zero()).collect();
        sets.push(z);
    }
    sets.sort();
    sets.dedup();
    // close under intersection
    loop {
        let mut added = false;
        let cur = sets.clone();
        for a in &cur {
            for b in &cur {
                let c: Vec<usize> = a.iter().copied().filter(|i| b.contains(i)).collect();
                if !sets.contains(&c) {
                    sets.push(c);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
    }
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    sets
}

pub fn faces(sigma: &RationalCone) -> Vec<RationalCone> {
    face_index_sets(sigma)
        .into_iter()
        .map(|idx| {
            RationalCone::from_rays_unchecked(sigma.ambient, idx.iter().map(|&i| sigma.rays[i].clone()).collect())
        })
        .collect()
}

/// Inclusion relations `(i, j)` with face `i` a facet of face `j`, indices
/// into `faces(σ)`.
pub fn face_poset(sigma: &RationalCone) -> Vec<(usize, usize)> {
    let sets = face_index_sets(sigma);
    let dims: Vec<usize> = faces(sigma).iter().map(RationalCone::dim).collect();
    let mut edges = Vec::new();
    for (i, a) in sets.iter().enumerate() {
        for (j, b) in sets.iter().enumerate() {
            if i != j && dims[j] == dims[i] + 1 && a.iter().all(|x| b.contains(x)) {
                edges.push((i, j));
            }
        }
    }
    edges
}
