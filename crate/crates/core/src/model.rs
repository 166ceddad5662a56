//! Problem representation: sparse matrix storage, validation, preprocessing,
//! and objective/gradient evaluation for
//!
//! ```text
//! minimize_{x >= 0}  f(x) = 0.5 * ||A x||^2 - <c, x>,    c = A^T b.
//! ```
//!
//! In `Nonnegative` mode the data matrix `A` must be elementwise nonnegative.
//! Preprocessing then drops every column `j` with `c_j <= 0` (its optimal
//! coordinate is 0) and the optimum is confined to the box
//! `0 <= x_j <= c_j / ||A_:j||^2`. In `General` mode the entries of `A` may
//! have any sign, all columns are kept, and only `x >= 0` is enforced.

use std::fmt;

/// How the instance is interpreted.
///
/// `Nonnegative` requires `A >= 0` elementwise and enables the coordinate box;
/// `General` keeps only the `x >= 0` constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Nonnegative,
    General,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Nonnegative => write!(f, "nonnegative"),
            Mode::General => write!(f, "general"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    /// Structural defect in the raw CSC arrays.
    InvalidStructure(String),
    /// Nonnegative mode saw a negative stored entry.
    NegativeEntry { row: usize, col: usize, value: f64 },
    /// No rows, no columns, or no stored entries.
    EmptyMatrix,
    /// A column with no nonzero entries (objective unbounded below).
    ZeroColumn(usize),
    /// Vector length does not match the instance dimension.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidStructure(msg) => write!(f, "invalid matrix structure: {msg}"),
            ModelError::NegativeEntry { row, col, value } => write!(
                f,
                "negative entry {value} at ({row}, {col}) in nonnegative mode"
            ),
            ModelError::EmptyMatrix => write!(f, "matrix has no rows, columns, or nonzeros"),
            ModelError::ZeroColumn(j) => write!(f, "column {j} has no nonzero entries"),
            ModelError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
        }
    }
}

impl std::error::Error for ModelError {}

/// Immutable sparse matrix in compressed sparse column (CSC) layout.
///
/// Zeros are never stored. Row indices are strictly increasing within each
/// column, so a column walk visits each row at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseColMatrix {
    /// Builds a matrix from raw CSC arrays, checking the structural invariants.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if col_ptr.len() != cols + 1 {
            return Err(ModelError::InvalidStructure(format!(
                "col_ptr length {} != cols + 1 = {}",
                col_ptr.len(),
                cols + 1
            )));
        }
        if col_ptr[0] != 0 || col_ptr[cols] != row_idx.len() || row_idx.len() != values.len() {
            return Err(ModelError::InvalidStructure(
                "col_ptr endpoints do not match nnz".to_string(),
            ));
        }
        for j in 0..cols {
            if col_ptr[j] > col_ptr[j + 1] {
                return Err(ModelError::InvalidStructure(format!(
                    "col_ptr decreases at column {j}"
                )));
            }
            let mut prev = None;
            for k in col_ptr[j]..col_ptr[j + 1] {
                let r = row_idx[k];
                if r >= rows {
                    return Err(ModelError::InvalidStructure(format!(
                        "row index {r} out of bounds in column {j}"
                    )));
                }
                if let Some(p) = prev {
                    if r <= p {
                        return Err(ModelError::InvalidStructure(format!(
                            "row indices not strictly increasing in column {j}"
                        )));
                    }
                }
                prev = Some(r);
                let v = values[k];
                if !v.is_finite() || v == 0.0 {
                    return Err(ModelError::InvalidStructure(format!(
                        "stored value {v} at ({r}, {j}) must be finite and nonzero"
                    )));
                }
            }
        }
        Ok(SparseColMatrix {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds a matrix from (row, col, value) triplets. Duplicate coordinates
    /// are summed; entries that are (or sum to) zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, ModelError> {
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(ModelError::InvalidStructure(format!(
                    "triplet ({r}, {c}) out of bounds for {rows}x{cols}"
                )));
            }
            if !v.is_finite() {
                return Err(ModelError::InvalidStructure(format!(
                    "triplet value {v} at ({r}, {c}) is not finite"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> =
            triplets.iter().map(|&(r, c, v)| (c, r, v)).collect();
        sorted.sort_by_key(|&(c, r, _)| (c, r));

        let mut col_ptr = vec![0usize; cols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let (c, r, mut v) = sorted[i];
            i += 1;
            while i < sorted.len() && sorted[i].0 == c && sorted[i].1 == r {
                v += sorted[i].2;
                i += 1;
            }
            if v != 0.0 {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
            }
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Ok(SparseColMatrix {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds a matrix from a dense row-major array, skipping exact zeros.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self, ModelError> {
        if data.len() != rows * cols {
            return Err(ModelError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let triplets: Vec<(usize, usize, f64)> = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c, data[r * cols + c])))
            .filter(|&(_, _, v)| v != 0.0)
            .collect();
        Self::from_triplets(rows, cols, &triplets)
    }

    /// The `cols x cols` identity.
    pub fn identity(cols: usize) -> Self {
        SparseColMatrix {
            rows: cols,
            cols,
            col_ptr: (0..=cols).collect(),
            row_idx: (0..cols).collect(),
            values: vec![1.0; cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[f64]) {
        let lo = self.col_ptr[j];
        let hi = self.col_ptr[j + 1];
        (&self.row_idx[lo..hi], &self.values[lo..hi])
    }

    #[inline]
    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    /// Squared Euclidean norm of column `j`.
    pub fn col_norm_sq(&self, j: usize) -> f64 {
        let (_, vals) = self.col(j);
        vals.iter().map(|v| v * v).sum()
    }

    /// `A x`, one pass over the stored entries.
    pub fn mat_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mat_vec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                out[r] += v * xj;
            }
        }
        out
    }

    /// `A^T y`, one pass over the stored entries.
    pub fn mat_t_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "mat_t_vec dimension mismatch");
        (0..self.cols)
            .map(|j| {
                let (rows, vals) = self.col(j);
                rows.iter().zip(vals).map(|(&r, &v)| v * y[r]).sum()
            })
            .collect()
    }

    /// A copy with every stored value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        SparseColMatrix {
            rows: self.rows,
            cols: self.cols,
            col_ptr: self.col_ptr.clone(),
            row_idx: self.row_idx.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// A copy keeping only the listed columns, in order.
    fn select_columns(&self, keep: &[usize]) -> Self {
        let mut col_ptr = Vec::with_capacity(keep.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for &j in keep {
            let (rows, vals) = self.col(j);
            row_idx.extend_from_slice(rows);
            values.extend_from_slice(vals);
            col_ptr.push(row_idx.len());
        }
        SparseColMatrix {
            rows: self.rows,
            cols: keep.len(),
            col_ptr,
            row_idx,
            values,
        }
    }
}

/// Checks non-degeneracy and mode constraints.
///
/// All-zero rows are removed (the objective does not see them); the row map is
/// returned so callers can compact `b` to match. An all-zero column is an
/// error: it makes the objective unbounded below. In nonnegative mode every
/// stored entry must be positive.
///
/// Returns the validated matrix and, when rows were removed, the list of
/// retained original row indices.
pub fn validate(
    matrix: SparseColMatrix,
    mode: Mode,
) -> Result<(SparseColMatrix, Option<Vec<usize>>), ModelError> {
    if matrix.rows == 0 || matrix.cols == 0 || matrix.nnz() == 0 {
        return Err(ModelError::EmptyMatrix);
    }
    if mode == Mode::Nonnegative {
        for j in 0..matrix.cols {
            let (rows, vals) = matrix.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                if v < 0.0 {
                    return Err(ModelError::NegativeEntry {
                        row: r,
                        col: j,
                        value: v,
                    });
                }
            }
        }
    }
    for j in 0..matrix.cols {
        if matrix.col_nnz(j) == 0 {
            return Err(ModelError::ZeroColumn(j));
        }
    }

    let mut row_seen = vec![false; matrix.rows];
    for &r in &matrix.row_idx {
        row_seen[r] = true;
    }
    if row_seen.iter().all(|&s| s) {
        return Ok((matrix, None));
    }

    let kept: Vec<usize> = (0..matrix.rows).filter(|&r| row_seen[r]).collect();
    let mut new_row = vec![usize::MAX; matrix.rows];
    for (new, &old) in kept.iter().enumerate() {
        new_row[old] = new;
    }
    eprintln!(
        "note: removed {} all-zero row(s) during validation",
        matrix.rows - kept.len()
    );
    let compacted = SparseColMatrix {
        rows: kept.len(),
        cols: matrix.cols,
        col_ptr: matrix.col_ptr.clone(),
        row_idx: matrix.row_idx.iter().map(|&r| new_row[r]).collect(),
        values: matrix.values.clone(),
    };
    Ok((compacted, Some(kept)))
}

/// A validated, preprocessed instance the solvers run on.
///
/// Holds the retained columns of `A`, the positive linear term `c = A^T b`
/// restricted to them, the squared column norms `lambda`, and the map back to
/// original column indices. Immutable after construction and safe to share
/// across threads.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: SparseColMatrix,
    c: Vec<f64>,
    lambda: Vec<f64>,
    retained: Vec<usize>,
    original_cols: usize,
    mode: Mode,
}

/// Builds a [`ProblemInstance`] from a validated matrix and labels `b`.
///
/// Computes `c = A^T b`. In nonnegative mode every column with `c_j <= 0` is
/// dropped (its optimal coordinate is 0) and the index map records the
/// surviving columns. When every column is dropped the instance is degenerate
/// and `x = 0` is optimal; see [`ProblemInstance::is_degenerate`].
pub fn preprocess(
    matrix: SparseColMatrix,
    b: &[f64],
    mode: Mode,
) -> Result<ProblemInstance, ModelError> {
    if b.len() != matrix.rows {
        return Err(ModelError::DimensionMismatch {
            expected: matrix.rows,
            got: b.len(),
        });
    }
    let c_full = matrix.mat_t_vec(b);
    let original_cols = matrix.cols;
    let retained: Vec<usize> = match mode {
        Mode::Nonnegative => (0..original_cols).filter(|&j| c_full[j] > 0.0).collect(),
        Mode::General => (0..original_cols).collect(),
    };
    let a = if retained.len() == original_cols {
        matrix
    } else {
        matrix.select_columns(&retained)
    };
    let c: Vec<f64> = retained.iter().map(|&j| c_full[j]).collect();
    let lambda: Vec<f64> = (0..retained.len()).map(|j| a.col_norm_sq(j)).collect();
    Ok(ProblemInstance {
        a,
        c,
        lambda,
        retained,
        original_cols,
        mode,
    })
}

impl ProblemInstance {
    pub fn matrix(&self) -> &SparseColMatrix {
        &self.a
    }

    /// Number of retained columns (the solver dimension `n`).
    pub fn n(&self) -> usize {
        self.retained.len()
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn nnz(&self) -> usize {
        self.a.nnz()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Map from retained column index to original column index.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn original_cols(&self) -> usize {
        self.original_cols
    }

    /// True when preprocessing dropped every column; `x = 0` is then optimal.
    pub fn is_degenerate(&self) -> bool {
        self.retained.is_empty()
    }

    /// Number of columns dropped by preprocessing.
    pub fn dropped_cols(&self) -> usize {
        self.original_cols - self.retained.len()
    }

    /// Upper bound of the coordinate box for retained column `j`:
    /// `c_j / lambda_j` in nonnegative mode, unbounded in general mode.
    #[inline]
    pub fn box_upper(&self, j: usize) -> f64 {
        match self.mode {
            Mode::Nonnegative => self.c[j] / self.lambda[j],
            Mode::General => f64::INFINITY,
        }
    }

    fn check_len(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.n() {
            return Err(ModelError::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `f(x) = 0.5 * ||A x||^2 - <c, x>` in one sparse pass.
    pub fn objective(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.check_len(x)?;
        let ax = self.a.mat_vec(x);
        let quad: f64 = ax.iter().map(|v| v * v).sum();
        let lin: f64 = self.c.iter().zip(x).map(|(c, x)| c * x).sum();
        Ok(0.5 * quad - lin)
    }

    /// `grad f(x) = A^T (A x) - c` in two sparse passes.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_len(x)?;
        let ax = self.a.mat_vec(x);
        let mut g = self.a.mat_t_vec(&ax);
        for (gj, cj) in g.iter_mut().zip(&self.c) {
            *gj -= cj;
        }
        Ok(g)
    }

    /// Transports a retained-index vector back to original column indexing;
    /// dropped columns carry 0.
    pub fn unmap(&self, x_retained: &[f64]) -> Vec<f64> {
        assert_eq!(x_retained.len(), self.n(), "unmap dimension mismatch");
        let mut out = vec![0.0; self.original_cols];
        for (j, &orig) in self.retained.iter().enumerate() {
            out[orig] = x_retained[j];
        }
        out
    }
}

/// Terminal state of a solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Stopping criterion met within budget.
    Converged,
    /// Iteration budget ran out; the best iterate is still returned.
    BudgetExhausted,
}

/// Final output of a solver run, in original column indexing.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Primal point, dropped columns hold 0.
    pub x: Vec<f64>,
    /// Objective value at `x` (on the retained instance).
    pub objective: f64,
    /// Natural residual at `x`.
    pub residual: f64,
    /// Total inner iterations performed.
    pub iterations: u64,
    /// Number of restarts performed.
    pub restarts: u32,
    pub status: SolveStatus,
}

impl Solution {
    /// The trivial all-zero solution for a degenerate instance.
    pub fn trivial(original_cols: usize) -> Self {
        Solution {
            x: vec![0.0; original_cols],
            objective: 0.0,
            residual: 0.0,
            iterations: 0,
            restarts: 0,
            status: SolveStatus::Converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye(n: usize) -> SparseColMatrix {
        SparseColMatrix::identity(n)
    }

    #[test]
    fn validate_identity_unchanged() {
        let (m, kept) = validate(eye(2), Mode::Nonnegative).unwrap();
        assert_eq!(m, eye(2));
        assert!(kept.is_none());
    }

    #[test]
    fn validate_removes_zero_row() {
        // 3x2 with row 1 empty
        let m = SparseColMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (2, 1, 2.0)]).unwrap();
        let (v, kept) = validate(m, Mode::Nonnegative).unwrap();
        assert_eq!(v.rows(), 2);
        assert_eq!(kept, Some(vec![0, 2]));
        // entries land on remapped rows
        assert_eq!(v.col(0), (&[0usize][..], &[1.0][..]));
        assert_eq!(v.col(1), (&[1usize][..], &[2.0][..]));
    }

    #[test]
    fn validate_rejects_negative_in_nonnegative_mode() {
        let m = SparseColMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -0.5)]).unwrap();
        match validate(m.clone(), Mode::Nonnegative) {
            Err(ModelError::NegativeEntry { row: 1, col: 1, .. }) => {}
            other => panic!("expected NegativeEntry, got {other:?}"),
        }
        // same matrix passes in general mode
        assert!(validate(m, Mode::General).is_ok());
    }

    #[test]
    fn validate_rejects_zero_column_and_empty() {
        let m = SparseColMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
        assert_eq!(
            validate(m, Mode::Nonnegative).unwrap_err(),
            ModelError::ZeroColumn(1)
        );
        let empty = SparseColMatrix::from_triplets(2, 2, &[]).unwrap();
        assert_eq!(
            validate(empty, Mode::Nonnegative).unwrap_err(),
            ModelError::EmptyMatrix
        );
    }

    #[test]
    fn preprocess_drops_nonpositive_c_columns() {
        let inst = preprocess(eye(2), &[1.0, -1.0], Mode::Nonnegative).unwrap();
        assert_eq!(inst.retained(), &[0]);
        assert_eq!(inst.c(), &[1.0]);
        assert_eq!(inst.dropped_cols(), 1);
    }

    #[test]
    fn preprocess_keeps_all_columns_when_c_positive() {
        let inst = preprocess(eye(4), &[1.0; 4], Mode::Nonnegative).unwrap();
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.c(), &[1.0; 4]);
        assert_eq!(inst.lambda(), &[1.0; 4]);
    }

    #[test]
    fn preprocess_lambda_is_squared_column_norm() {
        // column 0 = (1, 1), column 1 = (2,): lambda = (2, 4)
        let m =
            SparseColMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, 1.0), (0, 1, 2.0)]).unwrap();
        let inst = preprocess(m, &[1.0, 1.0], Mode::Nonnegative).unwrap();
        assert_eq!(inst.lambda(), &[2.0, 4.0]);
    }

    #[test]
    fn preprocess_all_dropped_is_degenerate() {
        let inst = preprocess(eye(2), &[-1.0, -2.0], Mode::Nonnegative).unwrap();
        assert!(inst.is_degenerate());
        assert_eq!(inst.n(), 0);
        assert_eq!(inst.unmap(&[]), vec![0.0, 0.0]);
    }

    #[test]
    fn general_mode_keeps_nonpositive_c_columns() {
        let inst = preprocess(eye(2), &[1.0, -1.0], Mode::General).unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.box_upper(1), f64::INFINITY);
    }

    #[test]
    fn objective_basics() {
        let inst = preprocess(eye(4), &[1.0; 4], Mode::Nonnegative).unwrap();
        assert_eq!(inst.objective(&[0.0; 4]).unwrap(), 0.0);
        assert_eq!(inst.objective(&[1.0; 4]).unwrap(), -2.0);
        assert!(matches!(
            inst.objective(&[0.0; 3]),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_basics() {
        let inst = preprocess(eye(4), &[1.0; 4], Mode::Nonnegative).unwrap();
        assert_eq!(inst.gradient(&[0.0; 4]).unwrap(), vec![-1.0; 4]);
        assert_eq!(inst.gradient(&[1.0; 4]).unwrap(), vec![0.0; 4]);
    }

    // Oracle: expanding the square gives f(x) = 0.5||Ax - b||^2 - 0.5||b||^2
    // whenever no columns were dropped.
    #[test]
    fn objective_matches_least_squares_expansion() {
        let mut rng = crate::test_util::rng(11);
        let (matrix, b) = crate::test_util::random_nonneg(5, 8, 0.6, &mut rng);
        let inst = preprocess(matrix.clone(), &b, Mode::General).unwrap();
        for trial in 0..5 {
            let x: Vec<f64> = (0..8)
                .map(|i| ((i + trial) % 3) as f64 * 0.37 + 0.01)
                .collect();
            let f = inst.objective(&x).unwrap();
            let ax = matrix.mat_vec(&x);
            let res_sq: f64 = ax.iter().zip(&b).map(|(a, b)| (a - b) * (a - b)).sum();
            let b_sq: f64 = b.iter().map(|v| v * v).sum();
            let oracle = 0.5 * res_sq - 0.5 * b_sq;
            assert!(
                (f - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()),
                "objective {f} vs expansion {oracle}"
            );
        }
    }

    // Oracle: central finite differences of the objective.
    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::test_util::rng(13);
        let (matrix, b) = crate::test_util::random_nonneg(6, 10, 0.5, &mut rng);
        let inst = preprocess(matrix, &b, Mode::Nonnegative).unwrap();
        let n = inst.n();
        let h = 1e-6;
        for trial in 0..3 {
            let x: Vec<f64> = (0..n)
                .map(|i| 0.05 + 0.01 * ((i + trial) % 7) as f64)
                .collect();
            let g = inst.gradient(&x).unwrap();
            for j in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (inst.objective(&xp).unwrap() - inst.objective(&xm).unwrap()) / (2.0 * h);
                let denom = g[j].abs().max(1.0);
                assert!(
                    (g[j] - fd).abs() / denom <= 1e-6,
                    "coordinate {j}: grad {} vs fd {fd}",
                    g[j]
                );
            }
        }
    }

    #[test]
    fn unmap_copies_through_index_map() {
        let inst = preprocess(eye(2), &[1.0, -1.0], Mode::Nonnegative).unwrap();
        assert_eq!(inst.unmap(&[0.7]), vec![0.7, 0.0]);
        let full = preprocess(eye(2), &[1.0, 1.0], Mode::Nonnegative).unwrap();
        assert_eq!(full.unmap(&[0.3, 0.4]), vec![0.3, 0.4]);
    }

    #[test]
    fn objective_and_gradient_are_pure() {
        let inst = preprocess(eye(4), &[1.0; 4], Mode::Nonnegative).unwrap();
        let x = [0.2, 0.4, 0.6, 0.8];
        let f1 = inst.objective(&x).unwrap();
        let f2 = inst.objective(&x).unwrap();
        assert_eq!(f1.to_bits(), f2.to_bits());
        let g1 = inst.gradient(&x).unwrap();
        let g2 = inst.gradient(&x).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    mod pipeline_properties {
        use super::*;
        use proptest::prelude::*;

        // Random entries and labels through validate + preprocess: every
        // surviving column has c_j > 0 and lambda_j > 0 in nonnegative mode,
        // and unmap puts retained coordinates back where they came from.
        proptest! {
            #[test]
            fn preprocess_invariants_hold(
                entries in proptest::collection::vec(
                    ((0usize..6), (0usize..5), 0.1f64..2.0),
                    8..30,
                ),
                b in proptest::collection::vec(-1.0f64..1.0, 6),
            ) {
                let matrix = SparseColMatrix::from_triplets(6, 5, &entries).unwrap();
                let Ok((matrix, kept)) = validate(matrix, Mode::Nonnegative) else {
                    return Ok(()); // zero column: rejection is the contract
                };
                let b_used: Vec<f64> = match kept {
                    None => b.clone(),
                    Some(rows) => rows.iter().map(|&r| b[r]).collect(),
                };
                let inst = preprocess(matrix, &b_used, Mode::Nonnegative).unwrap();
                for j in 0..inst.n() {
                    prop_assert!(inst.c()[j] > 0.0);
                    prop_assert!(inst.lambda()[j] > 0.0);
                    prop_assert!(inst.box_upper(j) > 0.0);
                }
                let marks: Vec<f64> = (0..inst.n()).map(|j| j as f64 + 1.0).collect();
                let full = inst.unmap(&marks);
                prop_assert_eq!(full.len(), inst.original_cols());
                for (j, &orig) in inst.retained().iter().enumerate() {
                    prop_assert_eq!(full[orig], marks[j]);
                }
                let dropped_zeros = full
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| !inst.retained().contains(idx))
                    .all(|(_, &v)| v == 0.0);
                prop_assert!(dropped_zeros);
            }
        }
    }

    #[test]
    fn from_triplets_sums_duplicates_and_drops_zeros() {
        let m = SparseColMatrix::from_triplets(
            2,
            2,
            &[
                (0, 0, 1.0),
                (0, 0, 2.0),
                (1, 1, 3.0),
                (1, 1, -3.0),
                (0, 1, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.col(0), (&[0usize][..], &[3.0][..]));
    }
}
