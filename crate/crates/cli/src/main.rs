//! Command-line front end: solve, round, bound, oracle and experiment
//! subcommands over the instance file format.
//!
//! Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 an
//! infeasible or unbounded model was detected.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use mbqcqp::bounds::{max_bound, min_bound, BoundReport};
use mbqcqp::experiment::{emit_report, run_experiment, ExperimentConfig, ExperimentError};
use mbqcqp::instance::{
    parse_instance, Field, HermitianMatrix, Instance, InstanceParams, ModelSense, RANK_REL_TOL,
};
use mbqcqp::oracle::{oracle_value, GridSpec, OracleStatus};
use mbqcqp::relaxation::{build_sdp2_min, build_sdp3_max, solve_relaxation, RelaxError};
use mbqcqp::rounding::{
    check_feasibility, rank_reduce_relaxation, round_max, round_min, RoundingError, TrialStreams,
};
use mbqcqp::solver::{residuals, SolveStatus, SolverSettings};

#[derive(Parser)]
#[command(
    name = "mbqcqp",
    version,
    about = "SDP relaxation and randomized rounding for mixed-binary QCQP models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Min,
    Max,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the SDP relaxation of an instance file
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Write the solution document here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, then round to a feasible mixed-binary point
    Round {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Skip the rank-reduction step before sampling
        #[arg(long = "no-rank-reduce")]
        no_rank_reduce: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the worst-case approximation-ratio guarantee
    Bound {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Brute-force reference value by support enumeration (N = 2 only)
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        /// Direction-grid resolution
        #[arg(long)]
        grid: usize,
    },
    /// Monte-Carlo sweep over random Gaussian instances
    Experiment {
        #[arg(long = "M")]
        m: usize,
        #[arg(long = "Q")]
        q: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        field: FieldArg,
        #[arg(long)]
        model: ModelArg,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        realizations: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Output directory for records.csv, summary.json, histogram.json
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Also run the brute-force oracle per realization (needs N = 2)
        #[arg(long)]
        oracle_grid: Option<usize>,
        #[arg(long = "no-rank-reduce")]
        no_rank_reduce: bool,
    },
}

/// Failure category carrying the process exit code.
enum Failure {
    Invalid(String),
    Solver(String),
    Degenerate(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Degenerate(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Solver(m) | Failure::Degenerate(m) => m,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(format!("i/o error: {e}"))
    }
}

impl From<RelaxError> for Failure {
    fn from(e: RelaxError) -> Self {
        match &e {
            RelaxError::Status { status } => match status {
                SolveStatus::Infeasible => {
                    Failure::Degenerate(format!("relaxation is infeasible: {e}"))
                }
                SolveStatus::Unbounded => {
                    Failure::Degenerate(format!("relaxation is unbounded: {e}"))
                }
                _ => Failure::Solver(e.to_string()),
            },
            _ => Failure::Solver(e.to_string()),
        }
    }
}

impl From<RoundingError> for Failure {
    fn from(e: RoundingError) -> Self {
        Failure::Solver(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match &e {
            ExperimentError::InvalidConfig(_) => Failure::Invalid(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure::Invalid(e.to_string()))
}

fn matrix_json(h: &HermitianMatrix, field: Field) -> serde_json::Value {
    let n = h.dim();
    let rows: Vec<serde_json::Value> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let z = h.matrix()[(i, j)];
                    match field {
                        Field::Real => json!(z.re),
                        Field::Complex => json!([z.re, z.im]),
                    }
                })
                .collect()
        })
        .collect();
    json!(rows)
}

fn emit_document(doc: &serde_json::Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("report serialization");
    match out {
        Some(path) => {
            std::fs::write(path, text.as_bytes())?;
            println!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { instance, out } => {
            let inst = load_instance(&instance)?;
            let (relax, raw) = solve_relaxation(&inst, &SolverSettings::default())?;
            let problem = match inst.sense {
                ModelSense::Minimize => build_sdp2_min(&inst),
                ModelSense::Maximize => build_sdp3_max(&inst),
            };
            let report = residuals(&problem, &raw).map_err(|e| Failure::Solver(e.to_string()))?;
            let doc = json!({
                "which": relax.which,
                "value": relax.value,
                "beta": relax.beta.iter().copied().collect::<Vec<f64>>(),
                "X2": matrix_json(&relax.x2, inst.field),
                "status": "optimal",
                "iterations": raw.iterations,
                "residuals": {
                    "primal_rel": report.primal_infeasibility_rel,
                    "dual_rel": report.dual_infeasibility_rel,
                    "gap_rel": report.duality_gap_rel,
                    "complementarity_rel": report.complementarity_rel,
                },
            });
            emit_document(&doc, out.as_deref())
        }
        Command::Round { instance, trials, seed, no_rank_reduce, out } => {
            let inst = load_instance(&instance)?;
            if trials == 0 {
                return Err(Failure::Invalid("--trials must be at least 1".into()));
            }
            let (mut relax, _) = solve_relaxation(&inst, &SolverSettings::default())?;
            let v_sdp = relax.value;
            if !no_rank_reduce {
                relax = rank_reduce_relaxation(&inst, &relax)?;
            }
            let streams = TrialStreams::new(seed);
            let outcome = match inst.sense {
                ModelSense::Minimize => round_min(&inst, &relax, trials, &streams)?,
                ModelSense::Maximize => round_max(&inst, &relax, trials, &streams)?,
            };
            if outcome.unbounded {
                return Err(Failure::Degenerate(
                    "rounding found an uncapped direction: the model is unbounded".into(),
                ));
            }
            let feas = check_feasibility(&inst, &outcome.x1, &outcome.best.x2);
            let x2_pairs: Vec<[f64; 2]> = outcome.best.x2.iter().map(|z| [z.re, z.im]).collect();
            let doc = json!({
                "support": outcome.support.one_based(),
                "x1": outcome.x1.iter().map(|&b| u8::from(b)).collect::<Vec<u8>>(),
                "x2": x2_pairs,
                "t": outcome.best.t,
                "objective": outcome.best.objective,
                "v_ubqp": outcome.v_ubqp,
                "v_sdp": v_sdp,
                "ratio": outcome.v_ubqp / v_sdp,
                "slacks": feas.slacks,
                "feasible": feas.feasible,
                "trials_attempted": outcome.trials_attempted,
                "trials_resampled": outcome.trials_resampled,
            });
            emit_document(&doc, out.as_deref())
        }
        Command::Bound { instance } => {
            let inst = load_instance(&instance)?;
            let report = match inst.sense {
                ModelSense::Minimize => min_bound(&inst),
                ModelSense::Maximize => {
                    max_bound(&inst, RANK_REL_TOL).map_err(|e| Failure::Invalid(e.to_string()))?
                }
            };
            print_bound_table(&report);
            let path = sibling_path(&instance, "bound.json");
            std::fs::write(&path, serde_json::to_string_pretty(&report).unwrap().as_bytes())?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Oracle { instance, grid } => {
            let inst = load_instance(&instance)?;
            let spec = GridSpec::with_total(grid);
            let result =
                oracle_value(&inst, &spec).map_err(|e| Failure::Invalid(e.to_string()))?;
            match result.status {
                OracleStatus::Solved => {}
                OracleStatus::Unbounded => {
                    return Err(Failure::Degenerate("oracle: the model is unbounded".into()))
                }
                OracleStatus::Infeasible => {
                    return Err(Failure::Degenerate("oracle: the model is infeasible".into()))
                }
            }
            println!(
                "oracle value {:.9} (error bound {:.3e}), support {:?}",
                result.value,
                result.error_bound,
                result.support.iter().map(|&i| i + 1).collect::<Vec<_>>()
            );
            let doc = json!({
                "value": result.value,
                "error_bound": result.error_bound,
                "support": result.support.iter().map(|&i| i + 1).collect::<Vec<_>>(),
                "w": result.w_pairs(),
                "grid": result.grid,
                "status": "solved",
            });
            let path = sibling_path(&instance, "oracle.json");
            std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap().as_bytes())?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Experiment {
            m,
            q,
            n,
            field,
            model,
            eps,
            realizations,
            trials,
            seed,
            out,
            workers,
            oracle_grid,
            no_rank_reduce,
        } => {
            let shape = InstanceParams {
                num_constraints: m,
                dim: n,
                field: match field {
                    FieldArg::Real => Field::Real,
                    FieldArg::Complex => Field::Complex,
                },
                sense: match model {
                    ModelArg::Min => ModelSense::Minimize,
                    ModelArg::Max => ModelSense::Maximize,
                },
                cardinality: q,
                epsilon: eps,
            };
            let mut config = ExperimentConfig::new(shape, realizations, trials, seed);
            config.workers = workers.max(1);
            config.rank_reduce = !no_rank_reduce;
            config.oracle_grid = oracle_grid.map(GridSpec::with_total);
            let report = run_experiment(&config)?;
            let files = emit_report(&report, &out)?;
            let agg = &report.aggregates;
            println!(
                "{} realizations ({} excluded): ratio max {:.4} mean {:.4} std {:.4}",
                report.records.len(),
                report.exclusions.len(),
                agg.max,
                agg.mean,
                agg.std
            );
            println!(
                "wrote {}, {}, {}",
                files.records_csv.display(),
                files.summary_json.display(),
                files.histogram_json.display()
            );
            Ok(())
        }
    }
}

fn sibling_path(instance: &Path, suffix: &str) -> PathBuf {
    let stem = instance.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    instance.with_file_name(format!("{stem}.{suffix}"))
}

fn print_bound_table(report: &BoundReport) {
    let model = match report.sense {
        ModelSense::Minimize => "min",
        ModelSense::Maximize => "max",
    };
    let field = match report.field {
        Field::Real => "real",
        Field::Complex => "complex",
    };
    println!("model        {model}");
    println!("field        {field}");
    println!("M            {}", report.m);
    println!("Q            {}", report.cardinality);
    println!("epsilon      {}", report.epsilon);
    println!("c-value      {:.6}", report.c_value);
    if let Some(k) = report.k_rank_sum {
        println!("K            {k:.6}");
    }
    println!("mu           {:.6e}", report.mu);
    println!("branch       {}", report.active_branch);
}
