//! Finite squares `B/H₁ → B/H′ ← B/H₂`, `B/H₁ → B/H ← B/H₂` with
//! `H₁ + H₂ ⊆ H ∩ H′`, and the order of their limit.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::Rng;
use serde::Serialize;

use super::diagram::{limit, QuotientDiagram};
use super::matrix::IntMatrix;
use crate::error::Result;

/// `B = ⊕ ℤ/n_k` with four subgroups given by generators.
#[derive(Clone, Debug, Serialize)]
pub struct SquareInstance {
    pub moduli: Vec<u64>,
    pub h1: Vec<Vec<u64>>,
    pub h2: Vec<Vec<u64>>,
    pub h: Vec<Vec<u64>>,
    pub h_prime: Vec<Vec<u64>>,
}

fn add(m: &[u64], a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).zip(m).map(|((x, y), n)| (x + y) % n).collect()
}

fn sub(m: &[u64], a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).zip(m).map(|((x, y), n)| (x + n - y) % n).collect()
}

/// The subgroup generated by `gens`, as a set of elements.
pub fn generated(m: &[u64], gens: &[Vec<u64>]) -> BTreeSet<Vec<u64>> {
    let mut set = BTreeSet::from([vec![0; m.len()]]);
    let mut frontier = vec![vec![0; m.len()]];
    while let Some(x) = frontier.pop() {
        for g in gens {
            let y = add(m, &x, g);
            if set.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    set
}

impl SquareInstance {
    /// Random instance with `|B| ≤ max_order`.
    pub fn random<R: Rng>(rng: &mut R, max_order: u64) -> Self {
        let mut moduli = Vec::new();
        let mut order = 1;
        let factors = rng.gen_range(1..=3);
        for _ in 0..factors {
            let cap = max_order / order;
            if cap < 2 {
                break;
            }
            let n = rng.gen_range(2..=cap.min(16));
            moduli.push(n);
            order *= n;
        }
        let elem = |rng: &mut R| moduli.iter().map(|&n| rng.gen_range(0..n)).collect::<Vec<u64>>();
        let h1 = vec![elem(rng)];
        let h2 = vec![elem(rng)];
        let mut h = [h1.clone(), h2.clone()].concat();
        let mut h_prime = h.clone();
        h.push(elem(rng));
        h_prime.push(elem(rng));
        SquareInstance { moduli, h1, h2, h, h_prime }
    }

    pub fn order(&self) -> u64 {
        self.moduli.iter().product()
    }

    /// `|{(b₁, b₂) : b₁ − b₂ ∈ H ∩ H′}| / (|H₁|·|H₂|)`.
    pub fn pair_count(&self) -> u64 {
        let m = &self.moduli;
        let meet: BTreeSet<Vec<u64>> =
            generated(m, &self.h).intersection(&generated(m, &self.h_prime)).cloned().collect();
        let all: Vec<Vec<u64>> = generated(m, &identity_gens(m)).into_iter().collect();
        let mut pairs = 0u64;
        for b1 in &all {
            for b2 in &all {
                if meet.contains(&sub(m, b1, b2)) {
                    pairs += 1;
                }
            }
        }
        pairs / (generated(m, &self.h1).len() as u64 * generated(m, &self.h2).len() as u64)
    }

    /// `|B/(H₁∩H₂)| · |(H∩H′)/(H₁+H₂)|`.
    pub fn formula(&self) -> u64 {
        let m = &self.moduli;
        let (h1, h2) = (generated(m, &self.h1), generated(m, &self.h2));
        let meet12 = h1.intersection(&h2).count() as u64;
        let sum12 = generated(m, &[self.h1.clone(), self.h2.clone()].concat()).len() as u64;
        let meet = generated(m, &self.h).intersection(&generated(m, &self.h_prime)).count() as u64;
        self.order() / meet12 * (meet / sum12)
    }

    pub fn diagram(&self) -> QuotientDiagram {
        let n = self.moduli.len();
        let cols = |gens: &[Vec<u64>]| {
            IntMatrix::from_cols(
                n,
                &gens.iter().map(|g| g.iter().map(|&x| BigInt::from(x)).collect()).collect::<Vec<_>>(),
            )
        };
        QuotientDiagram {
            ambient: n,
            relations: IntMatrix::diagonal(n, n, self.moduli.iter().map(|&x| BigInt::from(x))),
            subgroups: vec![cols(&self.h1), cols(&self.h2), cols(&self.h), cols(&self.h_prime)],
            edges: vec![(0, 2), (0, 3), (1, 2), (1, 3)],
        }
    }

    pub fn limit_order(&self) -> Result<BigInt> {
        Ok(limit(&self.diagram())?.group.order().expect("limit of finite groups is finite"))
    }
}

fn identity_gens(m: &[u64]) -> Vec<Vec<u64>> {
    (0..m.len()).map(|k| (0..m.len()).map(|l| u64::from(k == l)).collect()).collect()
}
