//! Bond percolation on Hamming graphs `H(d, n)` and on the Erdős–Rényi
//! random graph: cluster sampling, exploration processes, exact random-graph
//! moments, non-backtracking walks, diagram sums and critical-point solvers.
//!
//! Deterministic numerics are generic over [`Scalar`]/[`Real`]; the aliases
//! below fix the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymptotics;
pub mod critpoint;
pub mod diagrams;
pub mod errg;
pub mod error;
pub mod exploration;
pub mod graph;
pub mod percolation;
pub mod prf;
pub mod randwalk;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{EdgeId, HammingGraph, Vertex};
pub use percolation::{Caps, ClusterReport, SampleSpec, TwoPointField};
pub use scalar::{Real, Scalar};
pub use stats::EstimateWithError;

pub type Field64 = diagrams::GroupField<f64>;
pub type Field32 = diagrams::GroupField<f32>;
pub type ErrgMoments64 = errg::ErrgMoments<f64>;
pub type ErrgMoments32 = errg::ErrgMoments<f32>;
pub type ExactRational = num_rational::BigRational;
pub type BruteForceExact = errg::BruteForce<num_rational::BigRational>;
