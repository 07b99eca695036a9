//! Parameter-grid sweeps. Runs are independent and execute on the rayon
//! pool; rows come back in grid order regardless of scheduling.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::report::RunReport;
use crate::runner::run;

/// CSV header, in column order.
pub const HEADER: [&str; 15] = [
    "kind",
    "algorithm",
    "dataset",
    "k",
    "epsilon",
    "seed",
    "value",
    "value_sd",
    "opt",
    "ratio",
    "peak_stored",
    "oracle_calls",
    "max_calls_per_element",
    "violations",
    "wall_time_ms",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    /// `run` or `summary`.
    pub kind: &'static str,
    pub algorithm: String,
    pub dataset: String,
    pub k: usize,
    pub epsilon: f64,
    /// The seed, or `*` on summary rows.
    pub seed: String,
    pub value: f64,
    pub value_sd: Option<f64>,
    pub opt: Option<f64>,
    pub ratio: Option<f64>,
    pub peak_stored: f64,
    pub oracle_calls: f64,
    pub max_calls_per_element: Option<u64>,
    pub violations: usize,
    pub wall_time_ms: f64,
}

impl Row {
    fn from_report(r: &RunReport) -> Self {
        Row {
            kind: "run",
            algorithm: r.algorithm.clone(),
            dataset: r.dataset.clone(),
            k: r.k,
            epsilon: r.config.epsilon,
            seed: r.seed.to_string(),
            value: r.value,
            value_sd: None,
            opt: r.opt,
            ratio: r.ratio,
            peak_stored: r.peak_stored as f64,
            oracle_calls: r.oracle_calls as f64,
            max_calls_per_element: r.max_calls_per_element,
            violations: r.violations,
            wall_time_ms: r.wall_time_ms,
        }
    }
}

pub struct SweepResult {
    pub reports: Vec<RunReport>,
    pub rows: Vec<Row>,
}

impl SweepResult {
    pub fn violations(&self) -> usize {
        self.reports.iter().map(|r| r.violations).sum()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn sweep(configs: &[RunConfig], base: &Path) -> Result<SweepResult> {
    let reports = configs
        .par_iter()
        .map(|c| run(c, base, false).map(|o| o.report))
        .collect::<Result<Vec<_>>>()?;
    let rows = rows_with_summaries(&reports);
    Ok(SweepResult { reports, rows })
}

/// One row per run, followed after each group by a mean/σ summary row when
/// the group spans several seeds. A group is every run whose config matches
/// apart from the seed.
pub fn rows_with_summaries(reports: &[RunReport]) -> Vec<Row> {
    let mut groups: Vec<(RunConfig, Vec<&RunReport>)> = Vec::new();
    for r in reports {
        let mut key = r.config.clone();
        key.seed = 0;
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    let mut rows = Vec::new();
    for (_, members) in groups {
        rows.extend(members.iter().map(|r| Row::from_report(r)));
        if members.len() > 1 {
            rows.push(summary(&members));
        }
    }
    rows
}

fn mean_sd(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn summary(members: &[&RunReport]) -> Row {
    let first = members[0];
    let (value, sd) = mean_sd(members.iter().map(|r| r.value));
    let opt = first.opt.filter(|_| members.iter().all(|r| r.opt == first.opt));
    let ratio = members
        .iter()
        .map(|r| r.ratio)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / v.len() as f64);
    Row {
        kind: "summary",
        algorithm: first.algorithm.clone(),
        dataset: first.dataset.clone(),
        k: first.k,
        epsilon: first.config.epsilon,
        seed: "*".into(),
        value,
        value_sd: Some(sd),
        opt,
        ratio,
        peak_stored: mean_sd(members.iter().map(|r| r.peak_stored as f64)).0,
        oracle_calls: mean_sd(members.iter().map(|r| r.oracle_calls as f64)).0,
        max_calls_per_element: members.iter().filter_map(|r| r.max_calls_per_element).max(),
        violations: members.iter().map(|r| r.violations).sum(),
        wall_time_ms: mean_sd(members.iter().map(|r| r.wall_time_ms)).0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_grid;

    #[test]
    fn seed_grid_adds_one_summary_row() {
        let grid = parse_grid(
            "algorithm = randomized-known-tau\ndataset = random-cut:8:0.4:2\nk = 2\nepsilon = 0.25\nseed = 1, 2, 3, 4\n",
        )
        .unwrap();
        let res = sweep(&grid, Path::new(".")).unwrap();
        assert_eq!(res.rows.len(), 5);
        let s = &res.rows[4];
        assert_eq!((s.kind, s.seed.as_str()), ("summary", "*"));
        let values: Vec<f64> = res.rows[..4].iter().map(|r| r.value).collect();
        assert!((s.value - values.iter().sum::<f64>() / 4.0).abs() < 1e-12);
        let csv = res.to_csv().unwrap();
        assert!(csv.starts_with(&HEADER.join(",")));
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn single_point_grid_equals_run() {
        let text = "algorithm = threshold\ndataset = random-cut:9:0.4:5\nk = 3\n";
        let grid = parse_grid(text).unwrap();
        let res = sweep(&grid, Path::new(".")).unwrap();
        let direct = run(&RunConfig::parse(text).unwrap(), Path::new("."), false).unwrap().report;
        assert_eq!(res.reports[0].without_wall_time(), direct.without_wall_time());
        assert_eq!(res.rows.len(), 1);
    }
}
