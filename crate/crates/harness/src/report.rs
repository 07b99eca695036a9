use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};

/// Where a reported optimum came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptSource {
    Analytic,
    BruteForce,
}

/// Result of one run. Field order is the JSON key order; `wall_time_ms`
/// is last and is the only field allowed to differ between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub algorithm: String,
    pub dataset: String,
    pub config: RunConfig,
    pub n: usize,
    pub stream_length: usize,
    pub k: usize,
    pub seed: u64,
    pub alpha: f64,
    pub tau: Option<f64>,
    pub set: Vec<usize>,
    pub value: f64,
    pub opt: Option<f64>,
    pub opt_source: Option<OptSource>,
    pub ratio: Option<f64>,
    pub peak_stored: usize,
    pub space_budget: Option<f64>,
    pub oracle_calls: u64,
    pub max_calls_per_element: Option<u64>,
    pub violations: usize,
    pub violation_details: Vec<String>,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report with wall time zeroed, for determinism comparisons.
    pub fn without_wall_time(&self) -> RunReport {
        RunReport {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Writes `contents` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &std::path::Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| HarnessError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}
