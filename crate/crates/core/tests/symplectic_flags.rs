use std::collections::BTreeSet;

use parahoric::flags::{
    admissible_triples, enumerate_positions, flag_orbit, invariants, weight_orbits, ParahoricType, PositionInvariant,
    SymplecticSpace, WeightFlag,
};
use parahoric::fp::all_subspaces;
use parahoric::weyl::bruhat_count;
use proptest::prelude::*;

#[test]
fn invariants_separate_weight_orbits() {
    for g in 1..=2 {
        for p in [2, 3] {
            let space = SymplecticSpace::new(g, p).unwrap();
            for t in ParahoricType::all(g) {
                for r in 0..=g {
                    let orbits = weight_orbits(&space, r, &t).unwrap();
                    let distinct: BTreeSet<&PositionInvariant> = orbits.iter().map(|(w, _)| w).collect();
                    assert_eq!(distinct.len(), orbits.len(), "g={g} p={p} D={:?} r={r}", t.d);
                    let total: usize = orbits.iter().map(|(_, n)| n).sum();
                    assert_eq!(total, flag_orbit(&space, &t).len());
                }
            }
        }
    }
}

#[test]
fn positions_are_independent_of_p_and_match_bruhat() {
    for g in 1..=2 {
        for t in ParahoricType::all(g) {
            for r in 0..=g {
                let a = enumerate_positions(g, 2, r, &t).unwrap();
                let b = enumerate_positions(g, 3, r, &t).unwrap();
                assert_eq!(a, b);
                assert_eq!(a.len(), bruhat_count(g, r, &t));
                for w in &a {
                    assert!(w.is_consistent(g, &t), "{}", w.label());
                    for i in 0..t.s() {
                        assert_eq!(w.m[i] + w.a[i] + w.e[i], t.d[i]);
                        if i > 0 {
                            assert!(w.m[i] >= w.m[i - 1] && w.a[i] >= w.a[i - 1] && w.e[i] >= w.e[i - 1]);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn genus_one_level_one() {
    let t = ParahoricType::new(1, vec![1]).unwrap();
    assert_eq!(enumerate_positions(1, 2, 1, &t).unwrap().len(), 2);
    assert_eq!(enumerate_positions(1, 2, 0, &t).unwrap().len(), 1);
}

/// Maximal isotropic subspaces of 𝔽_p^{2g}, counted independently: there are
/// ∏_{i=1}^{g} (p^i + 1) of them.
#[test]
fn lagrangian_count_matches_the_product_formula() {
    for (g, p) in [(1u32, 2u32), (1, 3), (2, 2), (2, 3)] {
        let space = SymplecticSpace::new(g as usize, p).unwrap();
        let n = all_subspaces(2 * g as usize, g as usize, p).into_iter().filter(|h| space.is_isotropic(h)).count();
        let expected: u64 = (1..=g).map(|i| u64::from(p).pow(i) + 1).product();
        assert_eq!(n as u64, expected);
        let t = ParahoricType::new(g as usize, vec![g as usize]).unwrap();
        assert_eq!(flag_orbit(&space, &t).len() as u64, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_are_stable_under_the_weight_parabolic(
        g in 1usize..=2, p in prop::sample::select(vec![2u32, 3]), seed in any::<u64>(), r_raw in 0usize..=2
    ) {
        let r = r_raw.min(g);
        let space = SymplecticSpace::new(g, p).unwrap();
        let types = ParahoricType::all(g);
        let t = &types[seed as usize % types.len()];
        let flags = flag_orbit(&space, t);
        let h = &flags[(seed / 7) as usize % flags.len()];
        let w = WeightFlag::new(g, r).unwrap();
        let blocks: Vec<usize> = if r == 0 { vec![] } else { vec![r] };
        let gens = space.parabolic_generators(&blocks);
        let gamma = &gens[(seed / 131) as usize % gens.len()];
        prop_assert_eq!(invariants(h, &w, &space).unwrap(), invariants(&h.image(gamma), &w, &space).unwrap());
        prop_assert!(admissible_triples(g, r, t).contains(&invariants(h, &w, &space).unwrap()));
    }
}
