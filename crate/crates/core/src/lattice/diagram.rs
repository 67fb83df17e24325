//! Finite diagrams of lattices: colimits of free ℤ-modules and limits of
//! quotients of a common finite abelian group.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::group::{cokernel, lattice_contains, FinAbGroup};
use super::matrix::IntMatrix;
use super::snf::{column_basis, kernel, snf, solve};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagramEdge {
    pub source: usize,
    pub target: usize,
    /// Shape `(rank of target) × (rank of source)`.
    pub map: IntMatrix,
}

/// Nodes are free modules `ℤ^{rank}`; edges are integer matrices.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LatticeDiagram {
    pub nodes: Vec<usize>,
    pub edges: Vec<DiagramEdge>,
}

impl LatticeDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, rank: usize) -> usize {
        self.nodes.push(rank);
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, source: usize, target: usize, map: IntMatrix) -> Result<()> {
        let (Some(&sr), Some(&tr)) = (self.nodes.get(source), self.nodes.get(target)) else {
            return Err(Error::Shape(format!("edge {source}->{target} references a missing node")));
        };
        if map.shape() != (tr, sr) {
            return Err(Error::Shape(format!(
                "edge {source}->{target} has shape {:?}, expected ({tr}, {sr})",
                map.shape()
            )));
        }
        self.edges.push(DiagramEdge { source, target, map });
        Ok(())
    }

    /// Offset of each node's block in `⊕ nodes`.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.nodes
            .iter()
            .map(|&r| {
                let o = acc;
                acc += r;
                o
            })
            .collect()
    }

    pub fn total_rank(&self) -> usize {
        self.nodes.iter().sum()
    }

    /// Block matrix whose columns are `ι_s(x) − ι_t(f(x))` for every edge and
    /// every basis vector `x` of the edge's source.
    pub fn relation_matrix(&self) -> IntMatrix {
        let offsets = self.offsets();
        let cols: usize = self.edges.iter().map(|e| self.nodes[e.source]).sum();
        let mut rel = IntMatrix::zeros(self.total_rank(), cols);
        let mut c = 0;
        for e in &self.edges {
            let (so, to) = (offsets[e.source], offsets[e.target]);
            for j in 0..self.nodes[e.source] {
                rel[(so + j, c)] += BigInt::one();
                for i in 0..self.nodes[e.target] {
                    rel[(to + i, c)] -= &e.map[(i, j)];
                }
                c += 1;
            }
        }
        rel
    }
}

/// `(⊕ nodes) / ⟨x − f(x)⟩`, with coordinates for the image of every node
/// generator in the canonical generators of the quotient.
#[derive(Clone, Debug, Serialize)]
pub struct Colimit {
    pub group: FinAbGroup,
    pub is_free: bool,
    /// Column `k` of `node_maps[v]` is the image of the `k`-th generator of
    /// node `v`, in coordinates of the canonical generators (torsion
    /// coordinates first, reduced modulo their orders, then free ones).
    pub node_maps: Vec<IntMatrix>,
    /// Order of each coordinate (0 for free ones).
    #[serde(with = "crate::json::bigint_vec")]
    pub orders: Vec<BigInt>,
}

impl Colimit {
    /// Image of `x ∈ node`, torsion coordinates reduced.
    pub fn image(&self, node: usize, x: &[BigInt]) -> Vec<BigInt> {
        self.node_maps[node]
            .mul_vec(x)
            .into_iter()
            .zip(&self.orders)
            .map(|(v, o)| if o.is_zero() { v } else { num_integer::Integer::mod_floor(&v, o) })
            .collect()
    }
}

pub fn colimit(d: &LatticeDiagram) -> Colimit {
    let rel = d.relation_matrix();
    let s = snf(&rel);
    let n = d.total_rank();
    let diag = s.diagonal();
    // Coordinates y = U·x of ⊕ nodes; row i is killed when d_i = 1, cyclic of
    // order d_i when d_i > 1, free when d_i = 0 or i ≥ number of columns.
    let mut keep: Vec<(usize, BigInt)> = Vec::new();
    for i in 0..n {
        let order = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        if !order.is_one() {
            keep.push((i, order));
        }
    }
    let orders: Vec<BigInt> = keep.iter().map(|(_, o)| o.clone()).collect();
    let group = FinAbGroup::from_cyclic_orders(&orders);
    let offsets = d.offsets();
    let node_maps = d
        .nodes
        .iter()
        .zip(&offsets)
        .map(|(&rank, &off)| {
            let mut m = IntMatrix::zeros(keep.len(), rank);
            for (row, (i, order)) in keep.iter().enumerate() {
                for k in 0..rank {
                    let mut v = s.u[(*i, off + k)].clone();
                    if !order.is_zero() {
                        v = num_integer::Integer::mod_floor(&v, order);
                    }
                    m[(row, k)] = v;
                }
            }
            m
        })
        .collect();
    Colimit { is_free: group.is_free(), group, node_maps, orders }
}

/// A diagram of quotients `B/H_v` of one finite abelian group
/// `B = ℤⁿ / ⟨relations⟩`, with edges induced by the identity of `B`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientDiagram {
    pub ambient: usize,
    /// Columns generate the relation lattice of `B` (must have full rank).
    pub relations: IntMatrix,
    /// Generators (columns, as lifts to ℤⁿ) of each subgroup `H_v`.
    pub subgroups: Vec<IntMatrix>,
    pub edges: Vec<(usize, usize)>,
}

impl QuotientDiagram {
    /// Lattice `Λ_v ⊆ ℤⁿ` with `B/H_v = ℤⁿ/Λ_v`.
    pub fn node_lattice(&self, v: usize) -> IntMatrix {
        column_basis(&self.relations.hstack(&self.subgroups[v]))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Limit {
    pub group: FinAbGroup,
    /// For each node, the matrix sending the canonical generators of the limit
    /// to (lifts of) elements of `B/H_v`.
    pub projections: Vec<IntMatrix>,
}

pub fn limit(d: &QuotientDiagram) -> Result<Limit> {
    let n = d.ambient;
    if d.relations.rows() != n || d.subgroups.iter().any(|h| h.rows() != n) {
        return Err(Error::Shape("subgroup generators must live in the ambient lattice".into()));
    }
    if snf(&d.relations).rank() != n {
        return Err(Error::Invalid("the common group B must be finite".into()));
    }
    let lattices: Vec<IntMatrix> = (0..d.subgroups.len()).map(|v| d.node_lattice(v)).collect();
    for &(u, v) in &d.edges {
        if u >= lattices.len() || v >= lattices.len() {
            return Err(Error::Shape(format!("edge {u}->{v} references a missing node")));
        }
        if !lattice_contains(&lattices[v], &lattices[u]) {
            return Err(Error::Invalid(format!("edge {u}->{v} is not well defined: H_{u} is not contained in H_{v}")));
        }
    }
    let nv = lattices.len();
    // Unknowns: x ∈ ℤ^{n·nv}, then one coefficient block per edge.
    let edge_cols: Vec<usize> = d.edges.iter().map(|&(_, v)| lattices[v].cols()).collect();
    let unknowns = n * nv + edge_cols.iter().sum::<usize>();
    let mut sys = IntMatrix::zeros(n * d.edges.len(), unknowns);
    let mut c = n * nv;
    for (k, &(u, v)) in d.edges.iter().enumerate() {
        for i in 0..n {
            sys[(k * n + i, u * n + i)] += BigInt::one();
            sys[(k * n + i, v * n + i)] -= BigInt::one();
            for j in 0..edge_cols[k] {
                sys[(k * n + i, c + j)] = -lattices[v][(i, j)].clone();
            }
        }
        c += edge_cols[k];
    }
    let ker = kernel(&sys);
    let xs: Vec<usize> = (0..n * nv).collect();
    let mut lifted = ker.select_rows(&xs);
    if d.edges.is_empty() {
        lifted = IntMatrix::identity(n * nv);
    }
    let l_basis = column_basis(&lifted);
    // ⊕ Λ_v expressed in the basis of L.
    let mut sub_cols = Vec::new();
    for (v, lat) in lattices.iter().enumerate() {
        for j in 0..lat.cols() {
            let mut x = vec![BigInt::zero(); n * nv];
            for i in 0..n {
                x[v * n + i] = lat[(i, j)].clone();
            }
            let coords = solve(&l_basis, &x)
                .ok_or_else(|| Error::Internal("node lattice not inside the limit lattice".into()))?;
            sub_cols.push(coords);
        }
    }
    let c_mat = IntMatrix::from_cols(l_basis.cols(), &sub_cols);
    let group = cokernel(&c_mat);
    let s = snf(&c_mat);
    let diag = s.diagonal();
    let gens: Vec<usize> = (0..l_basis.cols()).filter(|&i| !diag.get(i).is_some_and(|d| d.is_one())).collect();
    let gen_mat = &l_basis * &s.u_inv.select_cols(&gens);
    let projections = (0..nv)
        .map(|v| {
            let rows: Vec<usize> = (v * n..(v + 1) * n).collect();
            gen_mat.select_rows(&rows)
        })
        .collect();
    Ok(Limit { group, projections })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::matrix::ivec;

    #[test]
    fn single_node_colimit_is_the_node() {
        let mut d = LatticeDiagram::new();
        d.add_node(3);
        let c = colimit(&d);
        assert!(c.is_free);
        assert_eq!(c.group, FinAbGroup::free(3));
    }

    #[test]
    fn pushout_along_multiplication() {
        let mut d = LatticeDiagram::new();
        let a = d.add_node(1);
        let b = d.add_node(1);
        d.add_edge(a, b, IntMatrix::from_i64(&[&[3]])).unwrap();
        let c = colimit(&d);
        assert!(c.is_free);
        assert_eq!(c.group.free_rank(), 1);
        let src = c.image(a, &ivec(&[1]));
        let tgt = c.image(b, &ivec(&[1]));
        assert_eq!(src[0], &tgt[0] * BigInt::from(3));
        assert!(tgt[0] == BigInt::one() || tgt[0] == BigInt::from(-1));
    }

    #[test]
    fn edge_shape_is_validated() {
        let mut d = LatticeDiagram::new();
        d.add_node(2);
        d.add_node(1);
        assert!(d.add_edge(0, 1, IntMatrix::identity(2)).is_err());
        assert!(d.add_edge(0, 5, IntMatrix::identity(2)).is_err());
    }

    fn z4_square(h1: i64, h2: i64, h: i64, hp: i64) -> QuotientDiagram {
        let g = |x: i64| IntMatrix::from_i64(&[&[x]]);
        QuotientDiagram {
            ambient: 1,
            relations: g(4),
            subgroups: vec![g(h1), g(h2), g(h), g(hp)],
            edges: vec![(0, 2), (0, 3), (1, 2), (1, 3)],
        }
    }

    #[test]
    fn limit_of_lemma_square_on_z4() {
        // H1 = H2 = 0, H = H' = 2Z/4: pairs (b1, b2) with b1 - b2 even.
        let l = limit(&z4_square(0, 0, 2, 2)).unwrap();
        assert_eq!(l.group.order(), Some(BigInt::from(8)));
        // everything trivial: the diagonal copy of B
        let l = limit(&z4_square(0, 0, 0, 0)).unwrap();
        assert_eq!(l.group.order(), Some(BigInt::from(4)));
        assert_eq!(l.group.factors(), ivec(&[4]).as_slice());
    }

    #[test]
    fn limit_of_klein_square() {
        let d = QuotientDiagram {
            ambient: 2,
            relations: IntMatrix::from_i64(&[&[2, 0], &[0, 2]]),
            subgroups: vec![
                IntMatrix::from_i64(&[&[1], &[0]]),
                IntMatrix::from_i64(&[&[0], &[1]]),
                IntMatrix::identity(2),
                IntMatrix::identity(2),
            ],
            edges: vec![(0, 2), (0, 3), (1, 2), (1, 3)],
        };
        assert_eq!(limit(&d).unwrap().group.order(), Some(BigInt::from(4)));
    }

    #[test]
    fn ill_defined_edge_is_rejected() {
        // B/2B -> B/0 is not induced by the identity of B = Z/4.
        let d = QuotientDiagram {
            ambient: 1,
            relations: IntMatrix::from_i64(&[&[4]]),
            subgroups: vec![IntMatrix::from_i64(&[&[2]]), IntMatrix::from_i64(&[&[0]])],
            edges: vec![(0, 1)],
        };
        assert!(matches!(limit(&d), Err(Error::Invalid(_))));
    }
}
