//! Boundary combinatorics of toroidal compactifications of Siegel moduli
//! spaces with parahoric level at p.

pub mod error;
pub mod json;
pub mod lattice;

pub use error::{Error, Result};
pub mod charlattice;
pub mod cli;
pub mod complex;
pub mod flags;
pub mod fp;
pub mod polyhedral;
pub mod sweep;
pub mod weyl;
