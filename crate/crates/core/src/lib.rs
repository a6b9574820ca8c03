//! Sparse inverse covariance estimation (graphical lasso).
//!
//! Solves `min_{A ≻ 0} −log det A + Tr(S·A) + α‖A‖₁` with a preconditioned
//! proximal iteration ([`solve_pista`]) or plain proximal gradient
//! ([`solve_gista`]). The [`problems`] module generates synthetic ground
//! truths and samples, and [`io`] reads and writes matrices, traces and run
//! records.
//!
//! ```
//! use glasso_core::{solve_pista, Problem, SolverConfig, SymMatrix};
//!
//! let s = SymMatrix::from_rows(&[vec![1.0, 0.9], vec![0.9, 1.0]]).unwrap();
//! let prob = Problem::new(s, 0.5).unwrap();
//! let result = solve_pista(&prob, None, &SolverConfig::default()).unwrap();
//! assert!(result.converged);
//! ```

pub mod gista;
pub mod io;
pub mod linalg;
pub mod objective;
pub mod pista;
pub mod problems;

pub use gista::{solve_gista, solve_gista_observed};
pub use io::{IoError, MatrixFormat, ProblemDescriptor, RunRecord, RunSummary};
pub use linalg::{cholesky, CholeskyFactor, LinalgError, SymMatrix};
pub use objective::{Mask, Problem, ProblemError};
pub use pista::{
    solve_pista, solve_pista_observed, IterTrace, Observer, SolveError, SolveResult,
    SolverConfig, StepEvent, Termination,
};
pub use problems::{GenError, GraphKind, GroundTruth, SampleSet};
