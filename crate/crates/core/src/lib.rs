//! Solvers for nonnegative least squares with nonnegative data (NNLS+),
//! posed as `min_{x >= 0} 0.5 ||A x||^2 - <A^T b, x>`.
//!
//! The main solver is an accelerated randomized coordinate method whose
//! iteration count is independent of the matrix scale, wrapped in an adaptive
//! restart loop that makes convergence linear. A dense reference
//! implementation, FISTA and projected-gradient baselines, LibSVM /
//! MatrixMarket / CSV ingestion, a synthetic instance generator, and CSV
//! metrics output round out the toolkit.
//!
//! Typical use:
//!
//! ```
//! use nnlsplus::{model, restart, synth};
//!
//! let data = synth::generate(&synth::SynthSpec { m: 30, n: 20, ..Default::default() });
//! let (matrix, _) = model::validate(data.matrix, model::Mode::Nonnegative).unwrap();
//! let inst = model::preprocess(matrix, &data.labels, model::Mode::Nonnegative).unwrap();
//! let cfg = restart::RestartConfig::to_target(1e-6);
//! let (solution, metrics) = restart::solve_restarted(&inst, &cfg, 0).unwrap();
//! assert!(solution.residual <= 1e-6);
//! assert!(!metrics.is_empty());
//! ```

pub mod baselines;
pub mod io;
pub mod metrics;
pub mod model;
pub mod restart;
pub mod schedule;
pub mod solver;
pub mod synth;

pub use metrics::{Event, MetricsRecord, RunMetrics};
pub use model::{
    preprocess, validate, Mode, ModelError, ProblemInstance, Solution, SolveStatus, SparseColMatrix,
};
pub use restart::{natural_map, natural_residual, solve_restarted, RestartConfig};
pub use schedule::{horizon, Branch, ScheduleError, StepSchedule};
pub use solver::{naive_run, solve_plain, BlockPartition, LazyState, SolverError};
