use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernels::NewtonStats;

/// One logged iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRecord {
    pub iteration: usize,
    pub objective: f64,
    /// `‖x_k − x_{k−1}‖`
    pub primal_step: f64,
    /// `‖y_k − y_{k−1}‖`
    pub dual_step: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceLog {
    pub records: Vec<LogRecord>,
    pub newton: NewtonStats,
    pub operator_norm: f64,
    pub tau: f64,
    pub sigma: f64,
    pub initial: String,
}

impl ConvergenceLog {
    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective)
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("iteration,objective,primal_step,dual_step\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{},{},{}", r.iteration, r.objective, r.primal_step, r.dual_step);
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}
