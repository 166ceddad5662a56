//! Comparison solvers run on the same preprocessed instance: FISTA with
//! nonnegativity projection and plain projected gradient descent, both
//! stepping with `1/L` for `L = ||A||^2` estimated by power iteration.
//!
//! In the metrics ledger every baseline iteration counts as exactly one data
//! pass, the cost of its gradient evaluation.

use std::time::Instant;

use crate::metrics::{Event, MetricsRecord, RunMetrics};
use crate::model::{ProblemInstance, Solution, SolveStatus, SparseColMatrix};
use crate::restart::natural_residual;
use crate::solver::SolverError;

#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub max_iters: u64,
    /// Stop once the natural residual falls to this value.
    pub tol_residual: f64,
    /// Power-iteration sweeps used to estimate `||A||^2`.
    pub power_iters: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            max_iters: 10_000,
            tol_residual: 1e-8,
            power_iters: 200,
        }
    }
}

/// Rayleigh-quotient estimate of `||A||^2` after `power_iters` power-iteration
/// sweeps on the Gram matrix, from a fixed deterministic start vector. The
/// estimate approaches the true value from below.
pub fn spectral_norm_sq(matrix: &SparseColMatrix, power_iters: usize) -> f64 {
    let n = matrix.cols();
    // slight tilt breaks symmetry that could trap the all-ones vector
    let mut v: Vec<f64> = (0..n).map(|j| 1.0 + j as f64 / n.max(1) as f64).collect();
    let mut rayleigh = 0.0;
    for _ in 0..power_iters.max(1) {
        let av = matrix.mat_vec(&v);
        let u = matrix.mat_t_vec(&av);
        let vu: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
        let vv: f64 = v.iter().map(|a| a * a).sum();
        if vv == 0.0 {
            return 0.0;
        }
        rayleigh = vu / vv;
        let norm: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return rayleigh.max(0.0);
        }
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / norm;
        }
    }
    rayleigh
}

fn check_start(inst: &ProblemInstance, x0: &[f64]) -> Result<(), SolverError> {
    if x0.len() != inst.n() {
        return Err(crate::model::ModelError::DimensionMismatch {
            expected: inst.n(),
            got: x0.len(),
        }
        .into());
    }
    for (j, &v) in x0.iter().enumerate() {
        if v.is_nan() || v < 0.0 {
            return Err(SolverError::StartOutOfBox { index: j, value: v });
        }
    }
    Ok(())
}

struct BaselineRun<'a> {
    inst: &'a ProblemInstance,
    start: Instant,
    metrics: RunMetrics,
}

impl<'a> BaselineRun<'a> {
    fn new(inst: &'a ProblemInstance) -> Self {
        BaselineRun {
            inst,
            start: Instant::now(),
            metrics: RunMetrics::new(),
        }
    }

    fn record(&mut self, iter: u64, x: &[f64]) -> Result<f64, SolverError> {
        let residual = natural_residual(self.inst, x)?;
        self.metrics.push(MetricsRecord {
            iter,
            data_passes: iter as f64,
            wall_s: self.start.elapsed().as_secs_f64(),
            objective: self.inst.objective(x)?,
            residual,
            event: Event::None,
        });
        Ok(residual)
    }

    fn finish(
        self,
        x: Vec<f64>,
        iterations: u64,
        status: SolveStatus,
    ) -> Result<(Solution, RunMetrics), SolverError> {
        let sol = Solution {
            objective: self.inst.objective(&x)?,
            residual: natural_residual(self.inst, &x)?,
            x: self.inst.unmap(&x),
            iterations,
            restarts: 0,
            status,
        };
        Ok((sol, self.metrics))
    }
}

/// Accelerated proximal gradient with projection onto the nonnegative
/// orthant: step `1/L`, momentum `theta_{k+1} = (1 + sqrt(1 + 4 theta_k^2))/2`.
pub fn fista(
    inst: &ProblemInstance,
    x0: &[f64],
    cfg: &BaselineConfig,
) -> Result<(Solution, RunMetrics), SolverError> {
    check_start(inst, x0)?;
    let l = spectral_norm_sq(inst.matrix(), cfg.power_iters);
    if l.is_nan() || l <= 0.0 {
        return Err(SolverError::InvalidConfig(format!(
            "spectral norm estimate {l} is not positive"
        )));
    }
    let mut run = BaselineRun::new(inst);
    let mut x = x0.to_vec();
    let mut z = x0.to_vec();
    let mut theta: f64 = 1.0;
    run.record(0, &x)?;
    for k in 1..=cfg.max_iters {
        let g = inst.gradient(&z)?;
        let x_new: Vec<f64> = z
            .iter()
            .zip(&g)
            .map(|(&zj, &gj)| (zj - gj / l).max(0.0))
            .collect();
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        z = x_new
            .iter()
            .zip(&x)
            .map(|(&xn, &xp)| xn + beta * (xn - xp))
            .collect();
        x = x_new;
        theta = theta_next;
        let residual = run.record(k, &x)?;
        if residual <= cfg.tol_residual {
            return run.finish(x, k, SolveStatus::Converged);
        }
    }
    let iters = cfg.max_iters;
    run.finish(x, iters, SolveStatus::BudgetExhausted)
}

/// Projected gradient descent with step `1/L`; the objective sequence is
/// nonincreasing.
pub fn pgd(
    inst: &ProblemInstance,
    x0: &[f64],
    cfg: &BaselineConfig,
) -> Result<(Solution, RunMetrics), SolverError> {
    check_start(inst, x0)?;
    let l = spectral_norm_sq(inst.matrix(), cfg.power_iters);
    if l.is_nan() || l <= 0.0 {
        return Err(SolverError::InvalidConfig(format!(
            "spectral norm estimate {l} is not positive"
        )));
    }
    let mut run = BaselineRun::new(inst);
    let mut x = x0.to_vec();
    run.record(0, &x)?;
    for k in 1..=cfg.max_iters {
        let g = inst.gradient(&x)?;
        x = x
            .iter()
            .zip(&g)
            .map(|(&xj, &gj)| (xj - gj / l).max(0.0))
            .collect();
        let residual = run.record(k, &x)?;
        if residual <= cfg.tol_residual {
            return run.finish(x, k, SolveStatus::Converged);
        }
    }
    let iters = cfg.max_iters;
    run.finish(x, iters, SolveStatus::BudgetExhausted)
}
