//! Monte-Carlo experiment harness.
//!
//! One experiment draws `R` random instances, solves each relaxation, rounds
//! with `T` trials, evaluates the theoretical bound, and aggregates the
//! empirical ratios `v_UBQP / v_SDP`. Every realization is a pure function
//! of `(config, realization index)`: the instance comes from the seed
//! recorded in its own record, and rounding trials use per-trial substreams,
//! so serial and worker-pool runs emit byte-identical reports.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{certify, max_bound, min_bound};
use crate::instance::{generate_gaussian_instance, InstanceParams, ModelSense, RANK_REL_TOL};
use crate::oracle::{oracle_value, GridSpec, OracleStatus};
use crate::relaxation::solve_relaxation;
use crate::rng::{derive_seed, Stream};
use crate::rounding::{rank_reduce_relaxation, round_max, round_min, TrialStreams};
use crate::solver::SolverSettings;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "{excluded} of {total} realizations failed (more than the 1% exclusion budget); \
         first failure: {first}"
    )]
    TooManyExclusions { excluded: usize, total: usize, first: String },
    #[error("worker pool construction failed: {0}")]
    Pool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub shape: InstanceParams,
    pub realizations: usize,
    pub trials: usize,
    pub seed: u64,
    /// Apply rank reduction before sampling (on by default; off for ablation).
    pub rank_reduce: bool,
    /// Also run the brute-force oracle per realization (N = 2 only).
    pub oracle_grid: Option<GridSpec>,
    /// Worker threads; 1 means fully serial.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(shape: InstanceParams, realizations: usize, trials: usize, seed: u64) -> Self {
        Self { shape, realizations, trials, seed, rank_reduce: true, oracle_grid: None, workers: 1 }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let s = &self.shape;
        let mut faults = Vec::new();
        if s.num_constraints < 2 {
            faults.push("M >= 2 required".to_string());
        }
        if s.dim < 2 {
            faults.push("N >= 2 required".to_string());
        }
        if s.cardinality < 1 || s.cardinality > s.num_constraints {
            faults.push("1 <= Q <= M required".to_string());
        }
        if !(0.0..=1.0).contains(&s.epsilon) {
            faults.push("epsilon in [0,1] required".to_string());
        }
        if s.sense == ModelSense::Maximize && s.epsilon == 0.0 {
            faults.push(
                "maximization experiments need epsilon > 0 (no ratio guarantee exists at 0)"
                    .to_string(),
            );
        }
        if self.realizations < 1 {
            faults.push("R >= 1 required".to_string());
        }
        if self.trials < 1 {
            faults.push("T >= 1 required".to_string());
        }
        if self.oracle_grid.is_some() && s.dim != 2 {
            faults.push("the oracle needs N = 2".to_string());
        }
        if faults.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::InvalidConfig(faults.join("; ")))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationRecord {
    pub realization: usize,
    /// Derived instance seed; replaying `solve`/`round` with it reproduces
    /// this realization exactly.
    pub seed: u64,
    pub v_sdp: f64,
    pub v_ubqp: f64,
    pub ratio: f64,
    pub mu: f64,
    pub certified: bool,
    pub iters: usize,
    pub resamples: usize,
    /// Oracle value and its discretization error, when the oracle ran.
    pub oracle: Option<f64>,
    pub oracle_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Aggregates {
    pub count: usize,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation with the (R−1) denominator; 0 with
    /// `std_defined = false` for a single record.
    pub std: f64,
    pub std_defined: bool,
}

impl Aggregates {
    /// Single code path shared by the runner and any recomputation, so the
    /// results match bit for bit.
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { count, max: f64::NAN, mean: f64::NAN, std: 0.0, std_defined: false };
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / count as f64;
        if count < 2 {
            return Self { count, max, mean, std: 0.0, std_defined: false };
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
        Self { count, max, mean, std: var.sqrt(), std_defined: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// 30 equal-width bins spanning from 1 (the trivial ratio) to the worst
    /// observed ratio, whichever side of 1 the data lies on.
    pub fn of_ratios(values: &[f64]) -> Self {
        const BINS: usize = 30;
        let lo = values.iter().copied().fold(1.0_f64, f64::min);
        let hi = values.iter().copied().fold(1.0_f64, f64::max);
        let hi = if hi > lo { hi } else { lo + 1e-9 };
        let width = (hi - lo) / BINS as f64;
        let bin_edges: Vec<f64> = (0..=BINS).map(|k| lo + width * k as f64).collect();
        let mut counts = vec![0usize; BINS];
        for &v in values {
            let k = (((v - lo) / width) as usize).min(BINS - 1);
            counts[k] += 1;
        }
        Self { bin_edges, counts }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Exclusion {
    pub realization: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<RealizationRecord>,
    pub exclusions: Vec<Exclusion>,
    pub aggregates: Aggregates,
    pub histogram: Histogram,
}

fn run_one(config: &ExperimentConfig, r: usize) -> Result<RealizationRecord, String> {
    let seed = derive_seed(config.seed, Stream::Instance, r as u64);
    let instance = generate_gaussian_instance(&config.shape, seed);
    let (mut relax, raw) =
        solve_relaxation(&instance, &SolverSettings::default()).map_err(|e| e.to_string())?;
    let v_sdp = relax.value;
    if config.rank_reduce {
        relax = rank_reduce_relaxation(&instance, &relax).map_err(|e| e.to_string())?;
    }
    let streams = TrialStreams::new(seed);
    let outcome = match instance.sense {
        ModelSense::Minimize => round_min(&instance, &relax, config.trials, &streams),
        ModelSense::Maximize => round_max(&instance, &relax, config.trials, &streams),
    }
    .map_err(|e| e.to_string())?;
    if outcome.unbounded {
        return Err("rounding found an uncapped direction (model unbounded)".to_string());
    }
    let bound = match instance.sense {
        ModelSense::Minimize => min_bound(&instance),
        ModelSense::Maximize => max_bound(&instance, RANK_REL_TOL).map_err(|e| e.to_string())?,
    };
    let bound = certify(&bound, outcome.v_ubqp, v_sdp);
    let (oracle, oracle_error) = match &config.oracle_grid {
        Some(grid) => {
            let res = oracle_value(&instance, grid).map_err(|e| e.to_string())?;
            if res.status != OracleStatus::Solved {
                return Err(format!("oracle status {:?}", res.status));
            }
            (Some(res.value), Some(res.error_bound))
        }
        None => (None, None),
    };
    Ok(RealizationRecord {
        realization: r,
        seed,
        v_sdp,
        v_ubqp: outcome.v_ubqp,
        ratio: bound.empirical_ratio.expect("certified above"),
        mu: bound.mu,
        certified: bound.certified.expect("certified above"),
        iters: raw.iterations,
        resamples: outcome.trials_resampled,
        oracle,
        oracle_error,
    })
}

/// Run the full experiment. Failed realizations are excluded from the
/// aggregates and reported; more than 1% of them aborts the run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    config.validate()?;
    let total = config.realizations;
    let results: Vec<Result<RealizationRecord, String>> = if config.workers <= 1 {
        (0..total).map(|r| run_one(config, r)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| ExperimentError::Pool(e.to_string()))?;
        pool.install(|| {
            use rayon::prelude::*;
            (0..total).into_par_iter().map(|r| run_one(config, r)).collect()
        })
    };

    let mut records = Vec::with_capacity(total);
    let mut exclusions = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(record) => records.push(record),
            Err(reason) => exclusions.push(Exclusion { realization: r, reason }),
        }
    }
    if exclusions.len() * 100 > total {
        return Err(ExperimentError::TooManyExclusions {
            excluded: exclusions.len(),
            total,
            first: exclusions[0].reason.clone(),
        });
    }

    let ratios: Vec<f64> = records.iter().map(|rec| rec.ratio).collect();
    let aggregates = Aggregates::from_values(&ratios);
    let histogram = Histogram::of_ratios(&ratios);
    Ok(ExperimentReport { config: config.clone(), records, exclusions, aggregates, histogram })
}

#[derive(Clone, Debug)]
pub struct EmittedFiles {
    pub records_csv: PathBuf,
    pub summary_json: PathBuf,
    pub histogram_json: PathBuf,
}

pub const RECORDS_CSV_HEADER: &str =
    "realization,seed,v_sdp,v_ubqp,ratio,mu,certified,iters,resamples";

/// Write `records.csv`, `summary.json` and `histogram.json` into `dir`.
/// Floats use shortest-roundtrip formatting, so rewriting the same report is
/// byte-identical and the aggregates are recomputable from the CSV exactly.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<EmittedFiles, ExperimentError> {
    std::fs::create_dir_all(dir)?;
    let records_csv = dir.join("records.csv");
    {
        let mut f = std::io::BufWriter::new(std::fs::File::create(&records_csv)?);
        writeln!(f, "{RECORDS_CSV_HEADER}")?;
        for rec in &report.records {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{}",
                rec.realization,
                rec.seed,
                rec.v_sdp,
                rec.v_ubqp,
                rec.ratio,
                rec.mu,
                rec.certified,
                rec.iters,
                rec.resamples
            )?;
        }
    }
    let summary_json = dir.join("summary.json");
    let summary = serde_json::json!({
        "config": report.config,
        "aggregates": report.aggregates,
        "excluded": report.exclusions.len(),
        "exclusions": report.exclusions,
    });
    std::fs::write(&summary_json, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    let histogram_json = dir.join("histogram.json");
    std::fs::write(
        &histogram_json,
        serde_json::to_string_pretty(&report.histogram)?.as_bytes(),
    )?;
    Ok(EmittedFiles { records_csv, summary_json, histogram_json })
}

impl From<serde_json::Error> for ExperimentError {
    fn from(e: serde_json::Error) -> Self {
        ExperimentError::Io(e.into())
    }
}
