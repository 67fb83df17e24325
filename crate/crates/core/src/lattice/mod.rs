//! Exact integer linear algebra.

pub mod diagram;
pub mod group;
pub mod matrix;
pub mod snf;
pub mod square;

pub use diagram::{colimit, limit, Colimit, DiagramEdge, LatticeDiagram, Limit, QuotientDiagram};
pub use group::{
    cokernel, lattice_contains, lattice_index, lattice_intersection, lattice_sum, relative_index, FinAbGroup,
};
pub use matrix::{content, dot, ivec, primitive, primitive_ray, IntMatrix};
pub use snf::{column_basis, kernel, rank, saturate, snf, solve, Saturation, SmithDecomposition};
