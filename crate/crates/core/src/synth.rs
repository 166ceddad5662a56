//! Seeded synthetic NNLS+ instances with controllable column-norm spread.
//!
//! Column `j` is rescaled to Euclidean norm `cond^(j/(n-1))`, so the squared
//! column norms span `[1, cond^2]` and `cond` controls how unevenly curved
//! the coordinates are. Labels are built as `A x_plant + noise` with strictly
//! positive noise, which keeps every `c_j = <A_:j, b>` positive: nonnegative
//! preprocessing retains all columns and the instance dimensions are exactly
//! `(m, n)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::io::Dataset;
use crate::model::SparseColMatrix;

/// Generator knobs; see [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub m: usize,
    pub n: usize,
    /// Expected fraction of nonzero entries per column.
    pub density: f64,
    /// Ratio of largest to smallest column norm.
    pub cond: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            m: 50,
            n: 100,
            density: 0.3,
            cond: 10.0,
            seed: 0,
        }
    }
}

/// Deterministically generates a nonnegative sparse dataset from `spec`.
pub fn generate(spec: &SynthSpec) -> Dataset {
    assert!(spec.m >= 1 && spec.n >= 1, "dimensions must be positive");
    assert!(
        spec.density > 0.0 && spec.density <= 1.0,
        "density in (0, 1]"
    );
    assert!(spec.cond >= 1.0, "cond must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (m, n) = (spec.m, spec.n);

    let mut col_entries: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    let mut row_covered = vec![false; m];
    for _ in 0..n {
        let mut entries = Vec::new();
        for (i, covered) in row_covered.iter_mut().enumerate() {
            if rng.random::<f64>() < spec.density {
                entries.push((i, 0.5 + rng.random::<f64>()));
                *covered = true;
            }
        }
        if entries.is_empty() {
            let i = rng.random_range(0..m as u64) as usize;
            entries.push((i, 0.5 + rng.random::<f64>()));
            row_covered[i] = true;
        }
        col_entries.push(entries);
    }
    for (i, covered) in row_covered.into_iter().enumerate() {
        if !covered {
            let j = rng.random_range(0..n as u64) as usize;
            col_entries[j].push((i, 0.5 + rng.random::<f64>()));
        }
    }

    // rescale each column to its target norm
    let mut triplets = Vec::new();
    for (j, entries) in col_entries.iter().enumerate() {
        let target = if n == 1 {
            1.0
        } else {
            spec.cond.powf(j as f64 / (n as f64 - 1.0))
        };
        let norm: f64 = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        let scale = target / norm;
        for &(i, v) in entries {
            triplets.push((i, j, v * scale));
        }
    }
    let matrix = SparseColMatrix::from_triplets(m, n, &triplets)
        .expect("generated triplets are structurally valid");

    // planted solution plus strictly positive noise keeps b > 0
    let mut x_plant = vec![0.0; n];
    let mut planted = 0;
    for xj in x_plant.iter_mut() {
        if rng.random::<f64>() < 0.5 {
            *xj = rng.random::<f64>();
            planted += 1;
        }
    }
    if planted == 0 {
        x_plant[0] = 0.5;
    }
    let ax = matrix.mat_vec(&x_plant);
    let peak = ax.iter().fold(1.0_f64, |a, &b| a.max(b));
    let labels: Vec<f64> = ax
        .iter()
        .map(|&v| v + 0.01 * peak * (0.5 + rng.random::<f64>()))
        .collect();

    Dataset { matrix, labels }
}
