//! Shared fixtures for the solver benchmarks.

use nnlsplus::model::{preprocess, validate, Mode, ProblemInstance};
use nnlsplus::synth::{generate, SynthSpec};

/// A preprocessed synthetic instance with all columns retained.
pub fn bench_instance(m: usize, n: usize, density: f64, cond: f64) -> ProblemInstance {
    let ds = generate(&SynthSpec {
        m,
        n,
        density,
        cond,
        seed: 42,
    });
    let (matrix, _) = validate(ds.matrix, Mode::Nonnegative).expect("synthetic data validates");
    preprocess(matrix, &ds.labels, Mode::Nonnegative).expect("synthetic data preprocesses")
}
