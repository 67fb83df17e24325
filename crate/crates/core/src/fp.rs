//! Linear algebra over a prime field 𝔽_p with small p.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) && p < (1 << 16) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{p} is not a supported prime")))
    }
}

pub fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut r0, mut r1) = (p as i64, (a % p) as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    assert_eq!(r0, 1, "{a} is not invertible mod {p}");
    t0.rem_euclid(p as i64) as u32
}

pub fn reduce(x: i64, p: u32) -> u32 {
    x.rem_euclid(p as i64) as u32
}

/// Square matrix over 𝔽_p acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FpMatrix {
    pub n: usize,
    pub p: u32,
    pub data: Vec<u32>,
}

impl FpMatrix {
    pub fn identity(n: usize, p: u32) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1 % p;
        }
        FpMatrix { n, p, data }
    }

    pub fn from_fn(n: usize, p: u32, f: impl Fn(usize, usize) -> i64) -> Self {
        let data = (0..n * n).map(|k| reduce(f(k / n, k % n), p)).collect();
        FpMatrix { n, p, data }
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.n + j] = v % self.p;
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        (0..self.n)
            .map(|i| {
                let row = &self.data[i * self.n..(i + 1) * self.n];
                (row.iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % p) as u32
            })
            .collect()
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        let n = self.n;
        let p = self.p as u64;
        let mut data = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k] as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = ((data[i * n + j] as u64 + a * other.data[k * n + j] as u64) % p) as u32;
                }
            }
        }
        FpMatrix { n, p: self.p, data }
    }

    pub fn transpose(&self) -> FpMatrix {
        FpMatrix::from_fn(self.n, self.p, |i, j| self.get(j, i) as i64)
    }

    pub fn inverse(&self) -> Option<FpMatrix> {
        let n = self.n;
        let rows: Vec<Vec<u32>> = (0..n)
            .map(|i| {
                let mut r = self.data[i * n..(i + 1) * n].to_vec();
                r.extend((0..n).map(|j| u32::from(i == j)));
                r
            })
            .collect();
        let red = rref(rows, self.p);
        if red.len() < n || (0..n).any(|i| red[i][i] != 1) {
            return None;
        }
        let data = red.iter().flat_map(|r| r[n..].to_vec()).collect();
        Some(FpMatrix { n, p: self.p, data })
    }
}

/// Reduced row echelon form; zero rows dropped.
pub fn rref(mut rows: Vec<Vec<u32>>, p: u32) -> Vec<Vec<u32>> {
    let Some(width) = rows.first().map(Vec::len) else {
        return rows;
    };
    let pp = p as u64;
    let mut lead = 0;
    for col in 0..width {
        let Some(piv) = (lead..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(lead, piv);
        let inv = inv_mod(rows[lead][col], p) as u64;
        for x in rows[lead].iter_mut() {
            *x = ((*x as u64 * inv) % pp) as u32;
        }
        let pivot_row = rows[lead].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            let f = row[col] as u64;
            if i == lead || f == 0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = ((*x as u64 + (pp - f) * y as u64) % pp) as u32;
            }
        }
        lead += 1;
        if lead == rows.len() {
            break;
        }
    }
    rows.truncate(lead);
    rows
}

pub fn rank(rows: &[Vec<u32>], p: u32) -> usize {
    rref(rows.to_vec(), p).len()
}

/// Subspace of 𝔽_pⁿ stored by its reduced row echelon basis, so equality of
/// values is equality of subspaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    pub n: usize,
    pub basis: Vec<Vec<u32>>,
}

impl Subspace {
    pub fn span(n: usize, p: u32, vectors: Vec<Vec<u32>>) -> Self {
        Subspace { n, basis: rref(vectors, p) }
    }

    pub fn coordinate(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut basis: Vec<Vec<u32>> =
            indices.into_iter().map(|j| (0..n).map(|k| u32::from(k == j)).collect()).collect();
        basis.sort_by(|a, b| b.cmp(a));
        Subspace { n, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn image(&self, g: &FpMatrix) -> Subspace {
        Subspace::span(self.n, g.p, self.basis.iter().map(|v| g.apply(v)).collect())
    }

    /// Dimension of the intersection with the coordinate subspace spanned by
    /// the basis vectors `j < k`.
    pub fn dim_meet_prefix(&self, k: usize, p: u32) -> usize {
        let tail: Vec<Vec<u32>> = self.basis.iter().map(|v| v[k..].to_vec()).collect();
        self.dim() - if k == self.n { 0 } else { rank(&tail, p) }
    }

    pub fn contains(&self, v: &[u32], p: u32) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank(&rows, p) == self.dim()
    }

    pub fn is_subspace_of(&self, other: &Subspace, p: u32) -> bool {
        self.basis.iter().all(|v| other.contains(v, p))
    }
}

/// Every vector of 𝔽_pⁿ in lexicographic order.
pub fn all_vectors(n: usize, p: u32) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u64).pow(n as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0; n];
        for x in v.iter_mut().rev() {
            *x = (k % p as u64) as u32;
            k /= p as u64;
        }
        v
    })
}

/// Every `d`-dimensional subspace of 𝔽_pⁿ, by enumerating reduced echelon
/// forms (pivot sets and free entries).
pub fn all_subspaces(n: usize, d: usize, p: u32) -> Vec<Subspace> {
    let mut out = Vec::new();
    let mut pivots = Vec::new();
    pivot_sets(n, d, 0, &mut pivots, &mut |piv| {
        let mut free = Vec::new();
        for (r, &c) in piv.iter().enumerate() {
            for j in c + 1..n {
                if !piv.contains(&j) {
                    free.push((r, j));
                }
            }
        }
        for vals in all_vectors(free.len(), p) {
            let mut basis = vec![vec![0u32; n]; d];
            for (r, &c) in piv.iter().enumerate() {
                basis[r][c] = 1;
            }
            for (&(r, j), v) in free.iter().zip(vals) {
                basis[r][j] = v;
            }
            out.push(Subspace { n, basis });
        }
    });
    out
}

fn pivot_sets(n: usize, d: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if cur.len() == d {
        f(cur);
        return;
    }
    for c in start..n {
        cur.push(c);
        pivot_sets(n, d, c + 1, cur, f);
        cur.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses() {
        for p in [2, 3, 5, 7] {
            for a in 1..p {
                assert_eq!(a * inv_mod(a, p) % p, 1);
            }
        }
    }

    #[test]
    fn rref_is_canonical() {
        let a = rref(vec![vec![1, 2, 0], vec![2, 1, 1]], 3);
        let b = rref(vec![vec![0, 0, 1], vec![1, 2, 1]], 3);
        assert_eq!(a, b);
        assert_eq!(rank(&[vec![1, 1], vec![2, 2]], 3), 1);
    }

    #[test]
    fn subspace_counts_are_gaussian_binomials() {
        // [4 choose 2]_2 = 35, [4 choose 1]_3 = 40
        assert_eq!(all_subspaces(4, 2, 2).len(), 35);
        assert_eq!(all_subspaces(4, 1, 3).len(), 40);
        let all = all_subspaces(3, 2, 2);
        let set: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(set.len(), all.len());
        for s in &all {
            assert_eq!(&Subspace::span(3, 2, s.basis.clone()), s);
        }
    }

    #[test]
    fn matrix_inverse_roundtrip() {
        let g = FpMatrix::from_fn(3, 5, |i, j| [[1, 2, 0], [0, 1, 4], [3, 0, 2]][i][j]);
        let h = g.inverse().unwrap();
        assert_eq!(g.mul(&h), FpMatrix::identity(3, 5));
        assert!(FpMatrix::from_fn(2, 3, |_, _| 1).inverse().is_none());
    }

    #[test]
    fn prefix_meets() {
        let s = Subspace::span(3, 3, vec![vec![1, 1, 0], vec![0, 0, 1]]);
        assert_eq!(s.dim_meet_prefix(1, 3), 0);
        assert_eq!(s.dim_meet_prefix(2, 3), 1);
        assert_eq!(s.dim_meet_prefix(3, 3), 2);
        assert_eq!(Subspace::coordinate(3, [0, 2]), Subspace::span(3, 3, vec![vec![0, 0, 1], vec![1, 0, 0]]));
    }
}
