//! Gaussian tree approximation (GTA) detection for finite-alphabet linear
//! systems, with classic baselines and a Monte Carlo benchmark harness.
//!
//! The detection problem is integer least squares: recover `x ∈ A^n` from
//! `y = Hx + ε`. The GTA detector drops the alphabet constraint, takes the
//! Gaussian posterior of the resulting linear system, replaces it with its
//! closest spanning-tree factorization (maximum spanning tree over squared
//! pairwise correlations), reimposes the alphabet on the tree, and solves
//! the loop-free model exactly with belief propagation. Baselines: ZF,
//! MMSE, MMSE-SIC (V-BLAST ordering), exhaustive ML, and a loopy-BP
//! diagnostic on the complete pairwise graph.

// `!(x > 0.0)` guards must also reject NaN, which `x <= 0.0` would let through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bp;
pub mod channel;
pub mod constellation;
pub mod detectors;
mod error;
pub mod harness;
pub mod posterior;
pub mod tree;

pub use bp::{BeliefTable, FactorTables};
pub use channel::{ComplexChannel, LinearSystem};
pub use constellation::Constellation;
pub use detectors::{BpMode, DetectionResult, DetectorSpec, GtaVariant, TreeKind};
pub use error::{Error, Result};
pub use harness::{OutputFormat, SimConfig, SimReport};
pub use posterior::GaussianPosterior;
pub use tree::{EdgeCpd, RootedTree};
