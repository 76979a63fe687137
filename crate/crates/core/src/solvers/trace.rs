use std::fmt::Write as _;
use std::io::{self, Write};

pub const TRACE_CSV_HEADER: &str = "iter,rel_err,bregman_x,dual_residual,step_z,step_x,elapsed_s";

/// One sampled point of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub rel_err: Option<f64>,
    /// `D_f^{x*}(x, x_hat)`; recorded only when requested and a reference exists.
    pub bregman_x: Option<f64>,
    /// `||A^T z||_2`.
    pub dual_residual: Option<f64>,
    pub step_z: f64,
    pub step_x: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `rec` unless a record for the same iteration already exists.
    pub fn push(&mut self, rec: TraceRecord) {
        match self.records.last() {
            Some(last) if last.iter >= rec.iter => {}
            _ => self.records.push(rec),
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(self.to_csv().as_bytes())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.records.len() + 1));
        s.push_str(TRACE_CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.iter,
                opt(r.rel_err),
                opt(r.bregman_x),
                opt(r.dual_residual),
                r.step_z,
                r.step_x,
                r.elapsed_seconds
            );
        }
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
