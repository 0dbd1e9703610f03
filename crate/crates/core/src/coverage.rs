//! Monte-Carlo coverage of the interval procedures: per distribution,
//! sample size and method, the share of intervals containing the true
//! value, together with mean and median widths and failure counts.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{true_measures, DistributionSpec};
use crate::error::{RcvError, Result};
use crate::intervals::{compute_interval, IntervalOptions, Method, DEFAULT_BOOT_B, DEFAULT_LEVEL};
use crate::robust::Measure;
use crate::seeding::derive_seed;

/// Path tag separating bootstrap seeds from sampling seeds.
const BOOT_STREAM: u64 = 0xB007;

fn default_sizes() -> Vec<usize> {
    vec![50, 100, 200, 500, 1000]
}

fn default_trials() -> usize {
    2000
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

fn default_boot_b() -> usize {
    DEFAULT_BOOT_B
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub distributions: Vec<DistributionSpec>,
    #[serde(default = "default_sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_boot_b")]
    pub boot_b: usize,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(RcvError::Parameter("trials must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(RcvError::Parameter(format!("level {} not in (0, 1)", self.level)));
        }
        if self.distributions.is_empty() || self.methods.is_empty() || self.sample_sizes.is_empty() {
            return Err(RcvError::Parameter(
                "distributions, sample_sizes and methods must be non-empty".into(),
            ));
        }
        if let Some(&n) = self.sample_sizes.iter().find(|&&n| n < 2) {
            return Err(RcvError::SampleSize { min: 2, got: n });
        }
        if self.methods.contains(&Method::RatioTwoSample) {
            return Err(RcvError::Parameter("the two-sample ratio interval cannot be simulated".into()));
        }
        for d in &self.distributions {
            d.validate()?;
        }
        Ok(())
    }
}

/// Aggregated outcome for one (distribution, n, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub distribution: String,
    pub n: usize,
    pub method: Method,
    /// `None` when the true value is undefined and the cell was skipped.
    pub coverage: Option<f64>,
    pub mean_width: Option<f64>,
    pub median_width: Option<f64>,
    pub failures: usize,
    pub trials: usize,
    pub true_value: Option<f64>,
}

/// Outcome of one interval in one trial: `Some((covered, width))` or a
/// failure.
type TrialOutcome = Option<(bool, f64)>;

fn summarize(
    distribution: &DistributionSpec,
    n: usize,
    method: Method,
    truth: Option<f64>,
    outcomes: &[TrialOutcome],
) -> CoverageRow {
    let trials = outcomes.len();
    let Some(_) = truth else {
        return CoverageRow {
            distribution: distribution.to_string(),
            n,
            method,
            coverage: None,
            mean_width: None,
            median_width: None,
            failures: 0,
            trials,
            true_value: None,
        };
    };
    let mut widths: Vec<f64> = outcomes.iter().flatten().map(|&(_, w)| w).collect();
    let covered = outcomes.iter().flatten().filter(|(c, _)| *c).count();
    let failures = trials - widths.len();
    widths.sort_by(f64::total_cmp);
    let mean_width = (!widths.is_empty()).then(|| widths.iter().sum::<f64>() / widths.len() as f64);
    let median_width = (!widths.is_empty()).then(|| {
        let k = widths.len();
        if k % 2 == 1 {
            widths[k / 2]
        } else {
            0.5 * (widths[k / 2 - 1] + widths[k / 2])
        }
    });
    CoverageRow {
        distribution: distribution.to_string(),
        n,
        method,
        coverage: Some(covered as f64 / trials as f64),
        mean_width,
        median_width,
        failures,
        trials,
        true_value: truth,
    }
}

fn truth_for(method: Method, cv: Option<f64>, rcv_q: f64, rcv_m: f64) -> Option<f64> {
    match method.measure() {
        Some(Measure::Cv) => cv,
        Some(Measure::RcvQ) => Some(rcv_q),
        Some(Measure::RcvM) => Some(rcv_m),
        None => None,
    }
}

/// Runs every trial of one (distribution, n) cell and returns one outcome
/// vector per method.
fn run_cell(
    config: &SimulationConfig,
    dist_index: usize,
    n: usize,
    truths: &[Option<f64>],
) -> Vec<Vec<TrialOutcome>> {
    let spec = &config.distributions[dist_index];
    let per_trial: Vec<Vec<TrialOutcome>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let path = [dist_index as u64, n as u64, trial];
            let seed = derive_seed(config.base_seed, &path);
            let sample = spec.sample(n, seed);
            let opts = IntervalOptions {
                level: config.level,
                boot_b: config.boot_b,
                seed: derive_seed(config.base_seed, &[path[0], path[1], path[2], BOOT_STREAM]),
            };
            config
                .methods
                .iter()
                .zip(truths)
                .map(|(&method, truth)| {
                    let truth = (*truth)?;
                    let sample = sample.as_ref().ok()?;
                    let ci = compute_interval(sample, method, &opts).ok()?;
                    Some((ci.contains(truth), ci.width()))
                })
                .collect()
        })
        .collect();
    (0..config.methods.len())
        .map(|j| per_trial.iter().map(|row| row[j]).collect())
        .collect()
}

/// Runs the full simulation. `workers` fixes the thread count (the result
/// does not depend on it); `progress` is called after each finished cell
/// with `(cells done, total cells, cell label)`.
pub fn run_coverage_with_progress<F>(
    config: &SimulationConfig,
    workers: Option<usize>,
    progress: F,
) -> Result<Vec<CoverageRow>>
where
    F: Fn(usize, usize, &str) + Sync,
{
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| RcvError::Parameter(format!("cannot build worker pool: {e}")))?;
    let total = config.distributions.len() * config.sample_sizes.len();
    pool.install(|| {
        let mut rows = Vec::with_capacity(total * config.methods.len());
        let mut done = 0;
        for (di, spec) in config.distributions.iter().enumerate() {
            let t = true_measures(spec)?;
            let truths: Vec<Option<f64>> = config
                .methods
                .iter()
                .map(|&m| truth_for(m, t.cv, t.rcv_q, t.rcv_m))
                .collect();
            for &n in &config.sample_sizes {
                let outcomes = run_cell(config, di, n, &truths);
                for ((&method, truth), out) in config.methods.iter().zip(&truths).zip(&outcomes) {
                    let mut row = summarize(spec, n, method, *truth, out);
                    if truth.is_none() {
                        row.trials = 0;
                    }
                    rows.push(row);
                }
                done += 1;
                progress(done, total, &format!("{spec} n={n}"));
            }
        }
        Ok(rows)
    })
}

pub fn run_coverage(config: &SimulationConfig, workers: Option<usize>) -> Result<Vec<CoverageRow>> {
    run_coverage_with_progress(config, workers, |_, _, _| {})
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = RcvError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(RcvError::Parameter(format!("unknown output format '{other}'"))),
        }
    }
}

/// Serializes results with the fixed column order distribution, n, method,
/// coverage, mean_width, median_width, failures, trials, true_value.
pub fn emit_results(rows: &[CoverageRow], format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).map_err(|e| RcvError::Io(e.to_string()))?;
            }
            if rows.is_empty() {
                w.write_record([
                    "distribution",
                    "n",
                    "method",
                    "coverage",
                    "mean_width",
                    "median_width",
                    "failures",
                    "trials",
                    "true_value",
                ])
                .map_err(|e| RcvError::Io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| RcvError::Io(e.to_string()))
        }
        OutputFormat::Json => {
            let mut out = serde_json::to_vec_pretty(rows).map_err(|e| RcvError::Io(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

/// Reads results written by [`emit_results`].
pub fn read_results<R: Read>(reader: R, format: OutputFormat) -> Result<Vec<CoverageRow>> {
    match format {
        OutputFormat::Csv => csv::Reader::from_reader(reader)
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| RcvError::Io(e.to_string())),
        OutputFormat::Json => serde_json::from_reader(reader).map_err(|e| RcvError::Io(e.to_string())),
    }
}
