//! Exact double description: from `{x : a_i·x ≥ 0}` to extreme rays and a
//! lineality basis.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::lattice::{dot, kernel, primitive_ray, rank, solve, IntMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleDescription {
    pub ambient: usize,
    /// Extreme rays modulo the lineality space, primitive and orthogonal to
    /// it, sorted.
    pub rays: Vec<Vec<BigInt>>,
    /// ℤ-basis of the lineality lattice (columns of an integer kernel).
    pub lineality: Vec<Vec<BigInt>>,
}

impl DoubleDescription {
    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    /// Generators of the cone including both signs of the lineality basis.
    pub fn generators(&self) -> Vec<Vec<BigInt>> {
        let mut out = self.rays.clone();
        for l in &self.lineality {
            out.push(l.clone());
            out.push(l.iter().map(|x| -x).collect());
        }
        out
    }
}

#[derive(Clone)]
struct Ray {
    v: Vec<BigInt>,
    zeros: Vec<bool>,
}

fn combine(a: &BigInt, x: &[BigInt], b: &BigInt, y: &[BigInt]) -> Vec<BigInt> {
    x.iter().zip(y).map(|(u, v)| a * u - b * v).collect()
}

/// The cone `{x ∈ ℝⁿ : a·x ≥ 0 for every a in ineqs}`.
pub fn cone_from_inequalities(n: usize, ineqs: &[Vec<BigInt>]) -> DoubleDescription {
    let ineqs: Vec<&Vec<BigInt>> = ineqs.iter().filter(|a| a.iter().any(|x| !x.is_zero())).collect();
    let mut lineality: Vec<Vec<BigInt>> = IntMatrix::identity(n).col_vecs();
    let mut rays: Vec<Ray> = Vec::new();
    for (step, a) in ineqs.iter().enumerate() {
        let pos = lineality.iter().position(|l| !dot(a, l).is_zero());
        if let Some(k) = pos {
            let mut l0 = lineality.remove(k);
            if dot(a, &l0).is_negative() {
                l0.iter_mut().for_each(|x| *x = -&*x);
            }
            let al0 = dot(a, &l0);
            lineality = lineality.iter().map(|l| primitive_ray(&combine(&al0, l, &dot(a, l), &l0))).collect();
            for r in rays.iter_mut() {
                r.v = primitive_ray(&combine(&al0, &r.v, &dot(a, &r.v), &l0));
                r.zeros.push(true);
            }
            let mut zeros = vec![true; step];
            zeros.push(false);
            rays.push(Ray { v: l0, zeros });
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|r| dot(a, &r.v)).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (r, v) in rays.iter().zip(&vals) {
            if !v.is_negative() {
                let mut r2 = r.clone();
                r2.zeros.push(v.is_zero());
                next.push(r2);
            }
        }
        for (i, ri) in rays.iter().enumerate() {
            if !vals[i].is_positive() {
                continue;
            }
            for (j, rj) in rays.iter().enumerate() {
                if !vals[j].is_negative() {
                    continue;
                }
                let common: Vec<bool> = ri.zeros.iter().zip(&rj.zeros).map(|(x, y)| *x && *y).collect();
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, rk)| k == i || k == j || !common.iter().zip(&rk.zeros).all(|(c, z)| !*c || *z));
                if adjacent {
                    let v = primitive_ray(&combine(&vals[i], &rj.v, &vals[j], &ri.v));
                    let mut zeros = common;
                    zeros.push(true);
                    next.push(Ray { v, zeros });
                }
            }
        }
        rays = next;
    }
    // Canonical lineality basis and representatives orthogonal to it.
    let lineality: Vec<Vec<BigInt>> = if lineality.is_empty() {
        Vec::new()
    } else {
        let a = IntMatrix::from_rows(n, &ineqs.iter().map(|a| (*a).clone()).collect::<Vec<_>>());
        if ineqs.is_empty() {
            IntMatrix::identity(n).col_vecs()
        } else {
            kernel(&a).col_vecs()
        }
    };
    let lin_dim = lineality.len();
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    for r in rays {
        let v = project_off(&r.v, &lineality);
        if v.iter().all(Zero::is_zero) {
            continue;
        }
        let tight: Vec<Vec<BigInt>> = ineqs.iter().filter(|a| dot(a, &v).is_zero()).map(|a| (*a).clone()).collect();
        let tight_rank = if tight.is_empty() { 0 } else { rank(&IntMatrix::from_rows(n, &tight)) };
        if tight_rank + lin_dim + 1 < n {
            continue;
        }
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out.sort();
    DoubleDescription { ambient: n, rays: out, lineality }
}

/// Primitive representative of `v` modulo `span(lin)`, orthogonal to it.
pub fn project_off(v: &[BigInt], lin: &[Vec<BigInt>]) -> Vec<BigInt> {
    if lin.is_empty() {
        return primitive_ray(v);
    }
    let k = lin.len();
    let n = v.len();
    let l = IntMatrix::from_cols(n, lin);
    let gram = &l.transpose() * &l;
    let det = gram.det();
    let rhs: Vec<BigInt> = l.transpose().mul_vec(v).iter().map(|x| x * &det).collect();
    let y = solve(&gram, &rhs).expect("Gram matrix of a basis is invertible over ℚ");
    debug_assert_eq!(y.len(), k);
    let ly = l.mul_vec(&y);
    let w: Vec<BigInt> = v.iter().zip(&ly).map(|(a, b)| a * &det - b).collect();
    primitive_ray(&w)
}

/// Dual description of the cone generated by `gens`.
pub fn dual_of_generated(n: usize, gens: &[Vec<BigInt>]) -> DoubleDescription {
    cone_from_inequalities(n, gens)
}

/// Irredundant description of the cone generated by `gens`.
pub fn extreme_rays(n: usize, gens: &[Vec<BigInt>]) -> DoubleDescription {
    let dual = dual_of_generated(n, gens);
    cone_from_inequalities(n, &dual.generators())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ivec;

    #[test]
    fn whole_space_and_orthant() {
        let d = cone_from_inequalities(2, &[]);
        assert!(d.rays.is_empty());
        assert_eq!(d.lineality.len(), 2);
        let d = cone_from_inequalities(2, &[ivec(&[1, 0]), ivec(&[0, 1])]);
        assert_eq!(d.rays, vec![ivec(&[0, 1]), ivec(&[1, 0])]);
        assert!(d.is_pointed());
    }

    #[test]
    fn dual_of_a_two_dimensional_cone() {
        // dual of ⟨(1,0),(1,2)⟩ is ⟨(0,1),(2,-1)⟩
        let d = dual_of_generated(2, &[ivec(&[1, 0]), ivec(&[1, 2])]);
        assert_eq!(d.rays, vec![ivec(&[0, 1]), ivec(&[2, -1])]);
    }

    #[test]
    fn half_plane_has_lineality() {
        let d = cone_from_inequalities(2, &[ivec(&[1, 1])]);
        assert_eq!(d.lineality.len(), 1);
        assert_eq!(d.rays, vec![ivec(&[1, 1])]);
    }

    #[test]
    fn redundant_generators_are_dropped() {
        let d = extreme_rays(
            3,
            &[ivec(&[1, 0, 0]), ivec(&[0, 1, 0]), ivec(&[1, 1, 0]), ivec(&[2, 2, 0]), ivec(&[0, 0, 1])],
        );
        assert_eq!(d.rays, vec![ivec(&[0, 0, 1]), ivec(&[0, 1, 0]), ivec(&[1, 0, 0])]);
    }

    #[test]
    fn square_pyramid_has_four_rays() {
        let gens = vec![ivec(&[1, 0, 1]), ivec(&[0, 1, 1]), ivec(&[-1, 0, 1]), ivec(&[0, -1, 1]), ivec(&[0, 0, 1])];
        let d = extreme_rays(3, &gens);
        assert_eq!(d.rays.len(), 4);
        assert_eq!(dual_of_generated(3, &gens).rays.len(), 4);
    }
}
