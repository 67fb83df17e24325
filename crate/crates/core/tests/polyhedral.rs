use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use parahoric::lattice::{dot, ivec, IntMatrix};
use parahoric::polyhedral::dd::cone_from_inequalities;
use parahoric::polyhedral::fan::gl_generators;
use parahoric::polyhedral::{
    cone::push_forward_form, divisor_of_square, form_to_vec, hilbert_basis, is_smooth, quotient_lattice, rank_one_form,
    refine_to_smooth, sym_dim, vec_to_form, verify_hilbert_basis, verify_refinement, Decomposition, IntegralStructure,
    RationalCone,
};
use proptest::prelude::*;

fn big(v: &[i64]) -> Vec<BigInt> {
    ivec(v)
}

/// Generators with positive coordinate sum, so the cone is pointed.
fn pointed_gens(n: usize) -> impl Strategy<Value = Vec<Vec<BigInt>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, n), 1..=5)
        .prop_map(|gs| gs.into_iter().filter(|g| g.iter().sum::<i64>() > 0).map(|g| big(&g)).collect())
}

/// Irreducible lattice points of `{y : ⟨u, y⟩ ≥ 0}` inside the box `[-b, b]^n`,
/// by brute force over pairs.
fn irreducibles(n: usize, ineqs: &[Vec<BigInt>], b: i64) -> Vec<Vec<BigInt>> {
    let side = (2 * b + 1) as usize;
    let mut pts = Vec::new();
    for k in 0..side.pow(n as u32) {
        let mut k = k;
        let y: Vec<BigInt> = (0..n)
            .map(|_| {
                let c = (k % side) as i64 - b;
                k /= side;
                BigInt::from(c)
            })
            .collect();
        if y.iter().any(|c| !c.is_zero()) && ineqs.iter().all(|u| !dot(u, &y).is_negative()) {
            pts.push(y);
        }
    }
    let set: std::collections::HashSet<&Vec<BigInt>> = pts.iter().collect();
    let mut out: Vec<Vec<BigInt>> = pts
        .iter()
        .filter(|y| {
            !pts.iter().any(|h| {
                let rest: Vec<BigInt> = y.iter().zip(h.iter()).map(|(a, b)| a - b).collect();
                rest.iter().any(|c| !c.is_zero()) && set.contains(&rest)
            })
        })
        .cloned()
        .collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn double_dual_is_the_cone(gens in pointed_gens(3)) {
        prop_assume!(!gens.is_empty());
        let sigma = RationalCone::new(3, gens).unwrap();
        let dual = sigma.dual();
        let back = cone_from_inequalities(3, &dual.generators());
        prop_assert!(back.lineality.is_empty());
        let mut rays = back.rays.clone();
        rays.sort();
        prop_assert_eq!(rays, sigma.sorted_rays());
    }

    #[test]
    fn smoothness_is_a_lattice_property(ops in prop::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..6), which in 0usize..3) {
        let mut u = IntMatrix::identity(3);
        for (a, b, c) in ops {
            if a != b {
                u.add_row_multiple(a, b, &BigInt::from(c));
            }
        }
        let structures = [
            IntegralStructure::standard(3),
            IntegralStructure::new(IntMatrix::from_i64(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 1]]), BigInt::from(2)).unwrap(),
            IntegralStructure::new(IntMatrix::from_i64(&[&[0, 0, 2], &[0, 2, 0], &[1, 0, 0]]), BigInt::from(2)).unwrap(),
        ];
        let s = &structures[which];
        let principal = Decomposition::principal(2).unwrap();
        for c in &principal.cones {
            prop_assert_eq!(is_smooth(c, s), is_smooth(c, &s.transformed(&u)));
        }
    }

    #[test]
    fn refinement_is_sound(ys in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 3)) {
        let rays: Vec<Vec<BigInt>> = ys.iter().map(|y| rank_one_form(&big(y))).collect();
        let m = IntMatrix::from_cols(3, &rays);
        prop_assume!(!m.det().is_zero());
        let sigma = RationalCone::new(3, rays).unwrap();
        let input = Decomposition::new(2, vec![sigma.clone()], gl_generators(2)).unwrap();
        let s = IntegralStructure::standard(3);
        let r = refine_to_smooth(&input, &s, 400).unwrap();
        let check = verify_refinement(&input, &r.output, &s);
        prop_assert!(check.refines && check.smooth && check.support_preserved, "{:?}", check.witnesses);
        // independent: points of σ lie in some output cone, and output cones lie in σ
        let maximal = r.output.maximal();
        for l in [[1, 1, 1], [1, 2, 3], [5, 0, 1], [0, 3, 7]] {
            let x: Vec<BigInt> = (0..3).map(|i| (0..3).map(|k| &sigma.rays[k][i] * l[k]).sum()).collect();
            prop_assert!(maximal.iter().any(|&j| r.output.cones[j].contains(&x)));
        }
        for c in &r.output.cones {
            prop_assert!(c.rays.iter().all(|x| sigma.contains(x)));
        }
    }
}

#[test]
fn hilbert_bases_match_brute_force() {
    let cases: Vec<(Vec<Vec<i64>>, IntegralStructure)> = vec![
        (vec![vec![1, 0, 0], vec![1, 2, 4]], IntegralStructure::standard(3)),
        (vec![vec![1, 0, 0], vec![0, 0, 1], vec![1, 1, 1]], IntegralStructure::standard(3)),
        (
            vec![vec![1, 0, 0], vec![0, 0, 1], vec![1, 1, 1]],
            IntegralStructure::new(IntMatrix::from_i64(&[&[0, 0, 2], &[0, 2, 0], &[1, 0, 0]]), BigInt::from(2))
                .unwrap(),
        ),
        (vec![vec![1, 0, 0], vec![0, 0, 1]], IntegralStructure::standard(3)),
        (vec![vec![1, -1, 1], vec![1, 1, 1]], IntegralStructure::standard(3)),
    ];
    for (rays, s) in cases {
        let sigma = RationalCone::new(3, rays.iter().map(|r| big(r)).collect()).unwrap();
        let hb = hilbert_basis(&sigma, &s);
        let ineqs = s.cone_in_dual(&sigma).rays;
        let check = verify_hilbert_basis(&ineqs, &hb, 8);
        assert!(check.complete && check.minimal, "{:?}", check.witnesses);
        // pointed duals only: the brute force cannot see a lineality space
        if hb.group.is_empty() {
            let mut brute = irreducibles(3, &ineqs, 4);
            brute.retain(|y| y.iter().all(|c| c.abs() <= BigInt::from(4)));
            let mut elems = hb.elements.clone();
            elems.sort();
            assert_eq!(elems, brute, "cone {:?}", sigma.rays);
        }
    }
}

#[test]
fn square_divisors_on_the_principal_cone() {
    let principal = Decomposition::principal(2).unwrap();
    let sigma = principal.cones.last().unwrap();
    let ys = [big(&[1, 0]), big(&[0, 1]), big(&[1, 1])];
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            if num_integer::gcd(a, b) != 1 {
                continue;
            }
            let x = big(&[a, b]);
            let div = divisor_of_square(sigma, &x).unwrap();
            for (ray, d) in sigma.rays.iter().zip(&div) {
                let y = ys.iter().find(|y| &rank_one_form(y) == ray).unwrap();
                let yx = dot(y, &x);
                assert_eq!(d, &(&yx * &yx));
                assert!(!d.is_negative());
            }
        }
    }
}

#[test]
fn quotient_lattices_are_idempotent() {
    let principal = Decomposition::principal(2).unwrap();
    for c in principal.cones.iter().filter(|c| !c.rays.is_empty()) {
        let q = quotient_lattice(c, 2).unwrap();
        let pushed: Vec<Vec<BigInt>> =
            c.rays.iter().map(|r| form_to_vec(&push_forward_form(&q, &vec_to_form(2, r)).unwrap())).collect();
        let image = RationalCone::new(sym_dim(q.rank), pushed).unwrap();
        let again = quotient_lattice(&image, q.rank).unwrap();
        assert_eq!(again.rank, q.rank);
        assert_eq!(again.radical.cols(), 0);
    }
}
