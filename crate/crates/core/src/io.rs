//! Dataset ingestion (LibSVM, MatrixMarket coordinate, dense CSV) and CSV
//! serialization of metrics and solutions.
//!
//! All numeric output is printed with 17 significant digits so doubles
//! round-trip exactly. LibSVM and MatrixMarket indices are 1-based on disk;
//! everything in memory is 0-based.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::metrics::{Event, MetricsRecord, RunMetrics};
use crate::model::{ModelError, Solution, SparseColMatrix};

/// A parsed data file: rows are samples, columns are features.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub matrix: SparseColMatrix,
    pub labels: Vec<f64>,
}

#[derive(Debug)]
pub enum IoError {
    Io(std::io::Error),
    /// Malformed content, with 1-based line number.
    Parse {
        line: usize,
        msg: String,
    },
    /// MatrixMarket banner is missing or names an unsupported kind.
    Banner(String),
    /// Labels file length does not match the matrix rows.
    LabelMismatch {
        expected: usize,
        got: usize,
    },
    /// No data lines at all.
    Empty,
    Model(ModelError),
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "{e}"),
            IoError::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            IoError::Banner(msg) => write!(f, "bad MatrixMarket banner: {msg}"),
            IoError::LabelMismatch { expected, got } => {
                write!(f, "labels: expected {expected} values, got {got}")
            }
            IoError::Empty => write!(f, "file contains no data"),
            IoError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError::Io(e)
    }
}

impl From<ModelError> for IoError {
    fn from(e: ModelError) -> Self {
        IoError::Model(e)
    }
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Parse {
        line,
        msg: msg.into(),
    })
}

fn skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Reads a LibSVM file: one sample per line, `label idx:val idx:val ...` with
/// 1-based, strictly increasing indices. Blank lines and `#` comments are
/// skipped; zero-valued entries are dropped. The column count is the largest
/// index seen unless `cols_override` widens it.
pub fn read_libsvm(
    path: impl AsRef<Path>,
    cols_override: Option<usize>,
) -> Result<Dataset, IoError> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_col = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if skippable(line) {
            continue;
        }
        let row = labels.len();
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let label: f64 = match label_tok.parse() {
            Ok(v) => v,
            Err(_) => return parse_err(lineno, format!("bad label {label_tok:?}")),
        };
        labels.push(label);
        let mut prev_idx = 0usize;
        for tok in tokens {
            let Some((idx_s, val_s)) = tok.split_once(':') else {
                return parse_err(lineno, format!("expected idx:val, got {tok:?}"));
            };
            let idx: usize = match idx_s.parse() {
                Ok(v) => v,
                Err(_) => return parse_err(lineno, format!("bad index {idx_s:?}")),
            };
            let val: f64 = match val_s.parse() {
                Ok(v) => v,
                Err(_) => return parse_err(lineno, format!("bad value {val_s:?}")),
            };
            if idx == 0 {
                return parse_err(lineno, "indices are 1-based; got 0");
            }
            if idx <= prev_idx {
                return parse_err(
                    lineno,
                    format!("indices must strictly increase ({prev_idx} then {idx})"),
                );
            }
            prev_idx = idx;
            max_col = max_col.max(idx);
            if val != 0.0 {
                triplets.push((row, idx - 1, val));
            }
        }
    }
    if labels.is_empty() {
        return Err(IoError::Empty);
    }
    let cols = match cols_override {
        Some(c) if c < max_col => {
            return parse_err(0, format!("override cols {c} below max index {max_col}"))
        }
        Some(c) => c,
        None => max_col,
    };
    let matrix = SparseColMatrix::from_triplets(labels.len(), cols, &triplets)?;
    Ok(Dataset { matrix, labels })
}

/// Reads a MatrixMarket coordinate real/integer general matrix plus a labels
/// file holding one value per line. Duplicate coordinates are summed (noted
/// on stderr, the usual coordinate-format convention).
pub fn read_matrix_market(
    path_matrix: impl AsRef<Path>,
    path_labels: impl AsRef<Path>,
) -> Result<Dataset, IoError> {
    let text = fs::read_to_string(path_matrix)?;
    let mut lines = text.lines().enumerate();

    let banner = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            None => return Err(IoError::Empty),
        }
    };
    let tokens: Vec<&str> = banner.split_whitespace().collect();
    if tokens.first() != Some(&"%%MatrixMarket") {
        return Err(IoError::Banner("missing %%MatrixMarket header".into()));
    }
    let expect = |pos: usize, allowed: &[&str], what: &str| -> Result<(), IoError> {
        match tokens.get(pos) {
            Some(t) if allowed.contains(&t.to_ascii_lowercase().as_str()) => Ok(()),
            other => Err(IoError::Banner(format!(
                "unsupported {what} {other:?} (need one of {allowed:?})"
            ))),
        }
    };
    expect(1, &["matrix"], "object")?;
    expect(2, &["coordinate"], "format")?;
    expect(3, &["real", "integer", "double"], "field")?;
    expect(4, &["general"], "symmetry")?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut entries_seen = 0usize;
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return parse_err(lineno, "size line must be `rows cols nnz`");
                }
                let dims: Result<Vec<usize>, _> = fields.iter().map(|f| f.parse()).collect();
                match dims {
                    Ok(d) => size = Some((d[0], d[1], d[2])),
                    Err(_) => return parse_err(lineno, "bad size line"),
                }
            }
            Some((m, n, nnz)) => {
                if fields.len() != 3 {
                    return parse_err(lineno, "entry must be `row col value`");
                }
                let (Ok(i), Ok(j), Ok(v)) = (
                    fields[0].parse::<usize>(),
                    fields[1].parse::<usize>(),
                    fields[2].parse::<f64>(),
                ) else {
                    return parse_err(lineno, format!("bad entry {t:?}"));
                };
                if i == 0 || j == 0 || i > m || j > n {
                    return parse_err(lineno, format!("entry ({i}, {j}) outside {m}x{n}"));
                }
                entries_seen += 1;
                if entries_seen > nnz {
                    return parse_err(lineno, format!("more than the declared {nnz} entries"));
                }
                if v != 0.0 {
                    triplets.push((i - 1, j - 1, v));
                }
            }
        }
    }
    let Some((m, n, nnz)) = size else {
        return Err(IoError::Empty);
    };
    if entries_seen != nnz {
        return parse_err(0, format!("declared {nnz} entries, found {entries_seen}"));
    }
    let matrix = SparseColMatrix::from_triplets(m, n, &triplets)?;
    if matrix.nnz() != triplets.len() {
        eprintln!(
            "note: {} duplicate entries summed while reading matrix",
            triplets.len() - matrix.nnz()
        );
    }

    let labels = read_labels(path_labels)?;
    if labels.len() != m {
        return Err(IoError::LabelMismatch {
            expected: m,
            got: labels.len(),
        });
    }
    Ok(Dataset { matrix, labels })
}

fn read_labels(path: impl AsRef<Path>) -> Result<Vec<f64>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if skippable(line) {
            continue;
        }
        match line.trim().parse::<f64>() {
            Ok(v) => labels.push(v),
            Err(_) => return parse_err(lineno + 1, format!("bad label {:?}", line.trim())),
        }
    }
    Ok(labels)
}

/// Reads a dense CSV with rows `label,v1,...,vn`; zeros are dropped when the
/// sparse matrix is built.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset, IoError> {
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    let mut triplets = Vec::new();
    let mut cols: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if skippable(line) {
            continue;
        }
        let row = labels.len();
        let mut fields = line.split(',');
        let label_tok = fields.next().expect("non-empty line").trim();
        let label: f64 = match label_tok.parse() {
            Ok(v) => v,
            Err(_) => return parse_err(lineno, format!("bad label {label_tok:?}")),
        };
        labels.push(label);
        let mut count = 0usize;
        for tok in fields {
            let v: f64 = match tok.trim().parse() {
                Ok(v) => v,
                Err(_) => return parse_err(lineno, format!("bad value {:?}", tok.trim())),
            };
            if v != 0.0 {
                triplets.push((row, count, v));
            }
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return parse_err(lineno, format!("expected {c} features, got {count}"))
            }
            _ => {}
        }
    }
    let Some(cols) = cols else {
        return Err(IoError::Empty);
    };
    let matrix = SparseColMatrix::from_triplets(labels.len(), cols, &triplets)?;
    Ok(Dataset { matrix, labels })
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the metrics time series as CSV with header
/// `iter,data_passes,wall_s,objective,natural_residual,event`.
pub fn write_metrics(metrics: &RunMetrics, path: impl AsRef<Path>) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        out,
        "iter,data_passes,wall_s,objective,natural_residual,event"
    )?;
    for r in metrics.records() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iter,
            fmt_f64(r.data_passes),
            fmt_f64(r.wall_s),
            fmt_f64(r.objective),
            fmt_f64(r.residual),
            r.event.as_str()
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads back a metrics CSV produced by [`write_metrics`].
pub fn read_metrics(path: impl AsRef<Path>) -> Result<RunMetrics, IoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "iter,data_passes,wall_s,objective,natural_residual,event")) => {}
        Some((_, h)) => return parse_err(1, format!("unexpected header {h:?}")),
        None => return Err(IoError::Empty),
    }
    let mut metrics = RunMetrics::new();
    for (lineno, line) in lines {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return parse_err(lineno, format!("expected 6 fields, got {}", fields.len()));
        }
        let iter: u64 = match fields[0].parse() {
            Ok(v) => v,
            Err(_) => return parse_err(lineno, "bad iter"),
        };
        let mut nums = [0.0f64; 4];
        for (slot, tok) in nums.iter_mut().zip(&fields[1..5]) {
            *slot = match tok.parse() {
                Ok(v) => v,
                Err(_) => return parse_err(lineno, format!("bad float {tok:?}")),
            };
        }
        let event = match fields[5] {
            "" => Event::None,
            "restart" => Event::Restart,
            other => return parse_err(lineno, format!("unknown event {other:?}")),
        };
        metrics.push(MetricsRecord {
            iter,
            data_passes: nums[0],
            wall_s: nums[1],
            objective: nums[2],
            residual: nums[3],
            event,
        });
    }
    Ok(metrics)
}

/// Writes the solution as an `index,value` CSV of its nonzeros (1-based
/// indices, matching the input conventions) plus a `#` summary footer.
pub fn write_solution(solution: &Solution, path: impl AsRef<Path>) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "index,value")?;
    for (j, &v) in solution.x.iter().enumerate() {
        if v != 0.0 {
            writeln!(out, "{},{}", j + 1, fmt_f64(v))?;
        }
    }
    writeln!(
        out,
        "# objective={} residual={} iterations={} restarts={}",
        fmt_f64(solution.objective),
        fmt_f64(solution.residual),
        solution.iterations,
        solution.restarts
    )?;
    out.flush()?;
    Ok(())
}
