//! Convergence time series shared by every solver.
//!
//! Each record holds the iteration index, the cumulative cost in data passes
//! (touched nonzeros divided by `nnz(A)`), wall-clock seconds, the objective
//! value, and the natural residual. Restart boundaries are tagged in the
//! `event` column.

/// What happened at a recorded point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Event {
    #[default]
    None,
    Restart,
}

impl Event {
    pub fn as_str(&self) -> &'static str {
        match self {
            Event::None => "",
            Event::Restart => "restart",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub iter: u64,
    pub data_passes: f64,
    pub wall_s: f64,
    pub objective: f64,
    pub residual: f64,
    pub event: Event,
}

/// Time series of solver progress, ordered by iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    records: Vec<MetricsRecord>,
}

impl RunMetrics {
    pub fn new() -> Self {
        RunMetrics::default()
    }

    /// Appends a record, enforcing strictly increasing iterations and
    /// nondecreasing data passes.
    pub fn push(&mut self, record: MetricsRecord) {
        if let Some(last) = self.records.last() {
            assert!(
                record.iter > last.iter,
                "metrics iterations must strictly increase ({} then {})",
                last.iter,
                record.iter
            );
            assert!(
                record.data_passes >= last.data_passes,
                "metrics data passes must not decrease"
            );
        }
        self.records.push(record);
    }

    pub fn records(&self) -> &[MetricsRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Iteration indices of restart events.
    pub fn restart_iters(&self) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.event == Event::Restart)
            .map(|r| r.iter)
            .collect()
    }

    /// Residuals at restart events, in order.
    pub fn restart_residuals(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.event == Event::Restart)
            .map(|r| r.residual)
            .collect()
    }
}

impl FromIterator<MetricsRecord> for RunMetrics {
    fn from_iter<T: IntoIterator<Item = MetricsRecord>>(iter: T) -> Self {
        let mut m = RunMetrics::new();
        for r in iter {
            m.push(r);
        }
        m
    }
}
