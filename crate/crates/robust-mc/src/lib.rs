//! Robust matrix completion with column-wise corruption, under general
//! column-local orthonormal bases.
//!
//! The library recovers the column space of a low-rank matrix and the
//! support of corrupted columns from a subset of expansion coefficients,
//! via a nuclear-norm + l2,1 convex program solved with an inexact
//! augmented-Lagrangian scheme. An l2,1 filtering accelerator solves a
//! small seed problem and classifies the remaining columns in closed
//! form, and a low-rank-representation bridge turns recovered matrices
//! into subspace clusterings.

pub mod admm;
pub mod basis;
pub mod cli;
pub mod cluster;
pub mod error;
pub mod filter;
pub mod io;
pub mod mat;
pub mod metrics;
pub mod rng;
pub mod synth;

pub use admm::{default_lambda, solve, AdmmConfig, SolveResult};
pub use basis::{BasisKind, ColumnLocalBasis, ObservedCoefficients};
pub use error::{Error, Result};
pub use filter::{FilterConfig, FilterResult, RankEstimate};
pub use mat::DenseMatrix;
pub use metrics::{IncoherenceReport, SupportSet};
pub use rng::Rng;
pub use synth::{SyntheticProblem, SyntheticSpec};
