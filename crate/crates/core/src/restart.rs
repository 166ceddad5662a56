//! Natural map/residual optimality measure and the adaptive restart outer
//! loop that upgrades the sublinear inner solver to linear convergence.
//!
//! The natural map is `R(x) = x - (x - Lambda^{-1} grad f(x))_+`; it vanishes
//! exactly at solutions. The residual `r(x) = ||R(x)||_Lambda` is the restart
//! trigger: whenever the averaged inner iterate halves the residual of the
//! current anchor, the inner solver is restarted from it.

use crate::metrics::{Event, MetricsRecord, RunMetrics};
use crate::model::{ModelError, ProblemInstance, Solution, SolveStatus};
use crate::solver::{BlockPartition, LazyState, SolverError};

use std::time::Instant;

/// `R(x) = x - (x - Lambda^{-1} grad f(x))_+`, one gradient pass.
pub fn natural_map(inst: &ProblemInstance, x: &[f64]) -> Result<Vec<f64>, ModelError> {
    let g = inst.gradient(x)?;
    Ok(x.iter()
        .zip(&g)
        .zip(inst.lambda())
        .map(|((&xj, &gj), &lj)| xj - (xj - gj / lj).max(0.0))
        .collect())
}

/// `r(x) = ||R(x)||_Lambda = sqrt(sum_j lambda_j R_j(x)^2)`.
pub fn natural_residual(inst: &ProblemInstance, x: &[f64]) -> Result<f64, ModelError> {
    let map = natural_map(inst, x)?;
    Ok(map
        .iter()
        .zip(inst.lambda())
        .map(|(&rj, &lj)| lj * rj * rj)
        .sum::<f64>()
        .sqrt())
}

/// Outer-loop policy for [`solve_restarted`].
#[derive(Debug, Clone)]
pub struct RestartConfig {
    /// Stop once the averaged iterate's residual is at or below this.
    pub target_residual: f64,
    /// Residual ratio that triggers a restart (default 1/2).
    pub halving_factor: f64,
    /// Inner iterations between residual checks; defaults to one epoch.
    pub check_cadence: Option<u64>,
    pub max_restarts: u32,
    pub max_total_iters: u64,
}

impl Default for RestartConfig {
    fn default() -> Self {
        RestartConfig {
            target_residual: 1e-8,
            halving_factor: 0.5,
            check_cadence: None,
            max_restarts: u32::MAX,
            max_total_iters: u64::MAX,
        }
    }
}

impl RestartConfig {
    /// Default policy aimed at an absolute residual target.
    pub fn to_target(target_residual: f64) -> Self {
        RestartConfig {
            target_residual,
            ..RestartConfig::default()
        }
    }

    fn check(&self) -> Result<(), SolverError> {
        let h = self.halving_factor;
        if h.is_nan() || h <= 0.0 || h >= 1.0 {
            return Err(SolverError::InvalidConfig(format!(
                "halving factor must lie in (0, 1), got {}",
                self.halving_factor
            )));
        }
        if self.check_cadence == Some(0) {
            return Err(SolverError::InvalidConfig(
                "check cadence must be >= 1".into(),
            ));
        }
        if self.target_residual.is_nan() || self.target_residual < 0.0 {
            return Err(SolverError::InvalidConfig(format!(
                "target residual must be >= 0, got {}",
                self.target_residual
            )));
        }
        Ok(())
    }
}

/// Restarted solve from the zero start.
///
/// Runs the lazy inner solver, checking the averaged iterate every cadence;
/// on `r(x_tilde) <= halving * r(anchor)` the state is re-anchored there
/// (fresh schedule and correction vectors, exact `q`), and the loop stops at
/// the residual target or when a budget runs out. Restart boundaries land in
/// the metrics with the `restart` event.
pub fn solve_restarted(
    inst: &ProblemInstance,
    cfg: &RestartConfig,
    seed: u64,
) -> Result<(Solution, RunMetrics), SolverError> {
    let state = LazyState::new(inst, vec![0.0; inst.n()], seed)?;
    run_restarted(state, cfg)
}

/// Block-sampling variant of [`solve_restarted`].
pub fn solve_restarted_block(
    inst: &ProblemInstance,
    partition: BlockPartition,
    cfg: &RestartConfig,
    seed: u64,
) -> Result<(Solution, RunMetrics), SolverError> {
    let state = LazyState::new_block(inst, vec![0.0; inst.n()], partition, seed)?;
    run_restarted(state, cfg)
}

fn run_restarted(
    mut state: LazyState<'_>,
    cfg: &RestartConfig,
) -> Result<(Solution, RunMetrics), SolverError> {
    cfg.check()?;
    let inst = state.instance();
    let cadence = cfg.check_cadence.unwrap_or(state.units() as u64);
    let nnz = inst.nnz() as f64;
    let start = Instant::now();
    let mut metrics = RunMetrics::new();

    let anchor = state.output();
    let mut anchor_residual = natural_residual(inst, &anchor)?;
    metrics.push(MetricsRecord {
        iter: 0,
        data_passes: 0.0,
        wall_s: start.elapsed().as_secs_f64(),
        objective: inst.objective(&anchor)?,
        residual: anchor_residual,
        event: Event::None,
    });
    if anchor_residual <= cfg.target_residual {
        // already optimal; halts immediately with zero restarts
        let sol = make(inst, &anchor, 0, 0, SolveStatus::Converged)?;
        return Ok((sol, metrics));
    }
    if cfg.max_total_iters == 0 {
        let sol = make(inst, &anchor, 0, 0, SolveStatus::BudgetExhausted)?;
        return Ok((sol, metrics));
    }

    let mut restarts: u32 = 0;
    let mut total: u64 = 0;
    let mut best_residual = anchor_residual;
    let mut best_x = anchor;

    state.first_step();
    total += 1;
    loop {
        while !total.is_multiple_of(cadence) && total < cfg.max_total_iters {
            state.step();
            total += 1;
        }
        state.refresh_q();
        let x_tilde = state.output();
        let residual = natural_residual(inst, &x_tilde)?;
        if residual < best_residual {
            best_residual = residual;
            best_x = x_tilde.clone();
        }

        let reached_target = residual <= cfg.target_residual;
        let out_of_budget = total >= cfg.max_total_iters;
        // a restart is recorded only when it will actually execute
        let halved = !reached_target
            && !out_of_budget
            && residual <= cfg.halving_factor * anchor_residual
            && restarts < cfg.max_restarts;
        metrics.push(MetricsRecord {
            iter: total,
            data_passes: state.touched_nnz() as f64 / nnz,
            wall_s: start.elapsed().as_secs_f64(),
            objective: inst.objective(&x_tilde)?,
            residual,
            event: if halved { Event::Restart } else { Event::None },
        });

        if reached_target {
            let sol = make(inst, &x_tilde, total, restarts, SolveStatus::Converged)?;
            return Ok((sol, metrics));
        }
        if out_of_budget {
            let sol = make(inst, &best_x, total, restarts, SolveStatus::BudgetExhausted)?;
            return Ok((sol, metrics));
        }
        if halved {
            restarts += 1;
            anchor_residual = residual;
            state.reset(x_tilde)?;
            state.first_step();
            total += 1;
        } else {
            state.step();
            total += 1;
        }
    }
}

fn make(
    inst: &ProblemInstance,
    x_tilde: &[f64],
    iterations: u64,
    restarts: u32,
    status: SolveStatus,
) -> Result<Solution, SolverError> {
    Ok(Solution {
        x: inst.unmap(x_tilde),
        objective: inst.objective(x_tilde)?,
        residual: natural_residual(inst, x_tilde)?,
        iterations,
        restarts,
        status,
    })
}
