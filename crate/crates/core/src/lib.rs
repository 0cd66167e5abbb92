//! Recovery of subjective quality scores from noisy raw opinion scores.
//!
//! Raw scores are modeled as `x[e] + b[s] + noise` with per-subject
//! inconsistency and per-content ambiguity. [`solver::solve`] estimates the
//! video qualities `x`, subject biases `b`, subject inconsistencies `v` and
//! content ambiguities `a` by maximum likelihood, together with 95%
//! confidence intervals. The [`baselines`] module holds the traditional
//! alternatives (MOS, z-scoring, BT.500 subject rejection), [`synth`] the
//! seeded data generators, and [`harness`] the RMSE experiments.
//!
//! ```
//! use subjective_core::{solve, ScoreMatrix, SolverConfig};
//!
//! let m = ScoreMatrix::from_rows(
//!     &[vec![1.0, 2.0, 1.5], vec![3.0, 4.2, 3.4], vec![4.0, 4.9, 4.6]],
//!     vec![0, 0, 1],
//! )
//! .unwrap();
//! let est = solve(&m, &SolverConfig::default()).unwrap();
//! assert!(est.converged);
//! assert_eq!(est.params.x.len(), 3);
//! ```

pub mod baselines;
pub mod error;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod model;
pub mod moments;
pub mod solver;
pub mod synth;

pub use baselines::{
    mos, sr_mos, subject_rejection, zs_sr_mos, zscore, BaselineOutput, RejectionResult,
};
pub use error::{Error, Result};
pub use harness::{rmse, Condition, Experiment, ExperimentReport, MethodId, ReferenceKind, Units};
pub use matrix::{Axis, Labels, ScoreMatrix};
pub use model::{curvature, gradient, log_likelihood, ModelParams, PerFamily};
pub use moments::Moments;
pub use solver::{
    confidence_intervals, gauge_fix, initialize, newton_step, solve, solve_observed, Gauge,
    HalfWidth, ParamEstimates, ParamHalfWidths, SolverConfig,
};
pub use synth::{GeneratorSpec, ParamRanges};
