//! Computational machinery for higher-rank abelian actions by toral
//! automorphisms: exact spectral data and Weyl chambers, Diophantine
//! probes for the lattice-separation lemmas, grid-based exponential-mixing
//! experiments, and a numerical Franks-Manning conjugacy solver with
//! smoothness diagnostics.

pub mod actions;
pub mod diophantine;
pub mod spectrum;
pub mod eig;
pub mod grid;
pub mod mixing;
pub mod poly;

pub use actions::{AbelianLinearAction, ActionError, ActionFile, IntegerMatrix};
