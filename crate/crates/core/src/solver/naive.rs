//! Dense reference implementation of the accelerated coordinate method.
//!
//! Every iteration materializes the averaged primal `x_tilde`, the dual
//! iterate `y`, and the extrapolated dual `ybar` as full vectors, recomputing
//! `A x` from scratch, so a step costs a full pass over the matrix. That makes
//! it useless at scale and ideal as an independent oracle for the lazy
//! implementation: the two share only the step schedule, the clamp, and the
//! coordinate sampler.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Mode, ProblemInstance};
use crate::schedule::StepSchedule;

use super::{check_start, SolverError};

/// Per-iteration record of a reference run: `x_k`, `x_tilde_k`, and `y_k`
/// for `k = 1..=iterations`.
#[derive(Debug, Clone)]
pub struct NaiveTrajectory {
    pub x: Vec<Vec<f64>>,
    pub x_tilde: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

/// Runs the dense reference for `iterations` steps from `x0`.
///
/// Iteration 1 is the dense anchor step (no sampling); iterations `k >= 2`
/// draw one coordinate each from the same seeded generator the lazy solver
/// uses, so equal seeds give comparable trajectories.
pub fn naive_run(
    inst: &ProblemInstance,
    x0: &[f64],
    iterations: u64,
    seed: u64,
) -> Result<NaiveTrajectory, SolverError> {
    let n = inst.n();
    let box_hi: Vec<f64> = match inst.mode() {
        Mode::Nonnegative => (0..n).map(|j| inst.box_upper(j)).collect(),
        Mode::General => vec![f64::INFINITY; n],
    };
    check_start(x0, &box_hi)?;
    let mut sched = StepSchedule::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrix = inst.matrix();
    let c = inst.c();
    let lambda = inst.lambda();
    let nf = n as f64;

    let mut x = x0.to_vec();
    let mut x_prev = x0.to_vec();
    let mut x_tilde = x0.to_vec();
    let mut y_prev = matrix.mat_vec(x0); // y_0
    let mut y_bar = y_prev.clone(); // ybar_0 = y_0
    let mut p = vec![0.0; n];

    let mut out = NaiveTrajectory {
        x: Vec::new(),
        x_tilde: Vec::new(),
        y: Vec::new(),
    };

    for k in 1..=iterations {
        x_prev.copy_from_slice(&x);
        if k == 1 {
            // dense anchor step: x_1 = clamp(x_0 - a_1 (A^T ybar_0 - c) / lambda)
            let a1 = sched.a();
            let grad_lin = matrix.mat_t_vec(&y_bar);
            for j in 0..n {
                p[j] += a1 * (grad_lin[j] - c[j]);
                x[j] = (x0[j] - p[j] / lambda[j]).clamp(0.0, box_hi[j]);
            }
            x_tilde.copy_from_slice(&x); // the k = 1 average is degenerate
        } else {
            let i = rng.random_range(0..n as u64) as usize;
            let (rows, vals) = matrix.col(i);
            let dot: f64 = rows.iter().zip(vals).map(|(&r, &v)| v * y_bar[r]).sum();
            let a = sched.a();
            p[i] += nf * a * (dot - c[i]);
            x[i] = (x0[i] - p[i] / lambda[i]).clamp(0.0, box_hi[i]);

            // x_tilde_k = (A_{k-1} x_tilde_{k-1} + a_k (n x_k - (n-1) x_{k-1})) / A_k
            let sum = sched.sum();
            let sum_prev = sched.sum_prev();
            for j in 0..n {
                x_tilde[j] =
                    (sum_prev * x_tilde[j] + a * (nf * x[j] - (nf - 1.0) * x_prev[j])) / sum;
            }
        }

        // y_k: recomputed from scratch (k = 1), then by the averaging recursion
        let y = if k == 1 {
            matrix.mat_vec(&x)
        } else {
            let a = sched.a();
            let sum = sched.sum();
            let sum_prev = sched.sum_prev();
            let ax = matrix.mat_vec(&x);
            let dx: Vec<f64> = x.iter().zip(&x_prev).map(|(a, b)| a - b).collect();
            let adx = matrix.mat_vec(&dx);
            (0..inst.m())
                .map(|row| (sum_prev * y_prev[row] + a * ax[row] + (nf - 1.0) * a * adx[row]) / sum)
                .collect()
        };

        // ybar_k = y_k + (a_k / a_{k+1}) (y_k - y_{k-1})
        let ratio = sched.a() / sched.a_next();
        for row in 0..inst.m() {
            y_bar[row] = y[row] + ratio * (y[row] - y_prev[row]);
        }
        y_prev.copy_from_slice(&y);

        out.x.push(x.clone());
        out.x_tilde.push(x_tilde.clone());
        out.y.push(y);
        sched.advance();
    }
    Ok(out)
}
