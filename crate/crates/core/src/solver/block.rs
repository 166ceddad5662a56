//! Mini-batch extension: contiguous column blocks sampled as units.
//!
//! Each block carries the squared spectral norm of its column submatrix,
//! which replaces the per-column norm as the curvature weight. Block updates
//! clamp at zero only.

use crate::model::ProblemInstance;

use super::SolverError;

/// Contiguous partition of the retained columns with per-block squared
/// spectral norms.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    /// Block boundaries; block `b` covers `starts[b]..starts[b+1]`.
    starts: Vec<usize>,
    norms: Vec<f64>,
}

impl BlockPartition {
    /// Splits the retained columns into contiguous blocks of `batch` columns
    /// (the last may be short) and estimates each block's squared spectral
    /// norm with `power_iters` power-iteration sweeps.
    ///
    /// The stored norm is never below the largest member column norm, which
    /// the true block norm always dominates.
    pub fn contiguous(
        inst: &ProblemInstance,
        batch: usize,
        power_iters: usize,
    ) -> Result<Self, SolverError> {
        if batch == 0 {
            return Err(SolverError::InvalidConfig("batch size must be >= 1".into()));
        }
        let n = inst.n();
        if n == 0 {
            return Err(SolverError::InvalidConfig(
                "cannot partition a degenerate instance".into(),
            ));
        }
        let mut starts = Vec::new();
        let mut norms = Vec::new();
        let mut lo = 0;
        while lo < n {
            let hi = (lo + batch).min(n);
            starts.push(lo);
            norms.push(block_norm_sq(inst, lo..hi, power_iters));
            lo = hi;
        }
        starts.push(n);
        Ok(BlockPartition { starts, norms })
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    /// Column range of block `b`.
    pub fn range(&self, b: usize) -> std::ops::Range<usize> {
        self.starts[b]..self.starts[b + 1]
    }

    /// Squared spectral norm of block `b`.
    pub fn norm_sq(&self, b: usize) -> f64 {
        self.norms[b]
    }

    /// Confirms the partition covers exactly the instance's retained columns.
    pub(super) fn check(&self, inst: &ProblemInstance) -> Result<(), SolverError> {
        if self.starts.last() != Some(&inst.n()) || self.starts.first() != Some(&0) {
            return Err(SolverError::InvalidConfig(format!(
                "partition covers {:?}..{:?} but instance has {} columns",
                self.starts.first(),
                self.starts.last(),
                inst.n()
            )));
        }
        Ok(())
    }
}

/// Squared spectral norm of the column submatrix `A[:, cols]` by power
/// iteration on its Gram matrix from the all-ones start vector, floored at
/// the largest member column norm.
fn block_norm_sq(inst: &ProblemInstance, cols: std::ops::Range<usize>, power_iters: usize) -> f64 {
    let matrix = inst.matrix();
    let width = cols.len();
    let mut v = vec![1.0; width];
    let mut rayleigh = 0.0;
    let mut work = vec![0.0; inst.m()];
    for _ in 0..power_iters.max(1) {
        work.fill(0.0);
        for (idx, j) in cols.clone().enumerate() {
            let (rows, vals) = matrix.col(j);
            for (&row, &val) in rows.iter().zip(vals) {
                work[row] += val * v[idx];
            }
        }
        let u: Vec<f64> = cols
            .clone()
            .map(|j| {
                let (rows, vals) = matrix.col(j);
                rows.iter()
                    .zip(vals)
                    .map(|(&row, &val)| val * work[row])
                    .sum()
            })
            .collect();
        let vu: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
        let vv: f64 = v.iter().map(|a| a * a).sum();
        if vv == 0.0 {
            break;
        }
        rayleigh = vu / vv;
        let norm: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi = ui / norm;
        }
    }
    let max_lambda = cols
        .map(|j| inst.lambda()[j])
        .fold(0.0_f64, |acc, l| acc.max(l));
    rayleigh.max(max_lambda)
}
