//! Batch front door: JSON problem configs in, machine-readable tables out.
//!
//! Every command reads one config, runs one computation, and writes one
//! artifact (standard output by default, `--out` atomically otherwise).
//! Errors print a one-line JSON diagnostic on standard error and select the
//! process exit code: 2 for configuration problems, 4 for blown resource
//! budgets, 3 for everything the models or engines refuse.

mod config;
mod output;

pub use config::{AlternativeSpec, ComponentSpec, LogBase, NullSpec, RunConfig};
pub use output::{error_diagnostic, number, OutputFormat, ResultRow, CSV_HEADER};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exponents::{
    counting_problem, evaluate_query, sweep, ExponentKind, ExponentQuery, MethodHint,
};
use crate::ldp::eta_for_problem;
use crate::models::check_theorem4_assumptions;
use crate::oracle::{best_fixed_length_code, finite_n_exponents, mc_spectrum, np_tradeoff};
use output::{row_json, rows_to_csv, to_json_line, write_output};

#[derive(Debug, Parser)]
#[command(
    name = "infospec",
    version,
    about = "Hypothesis-testing exponents for general sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Problem configuration file (JSON)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Write the artifact here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output encoding: csv or json
    #[arg(long, value_parser = OutputFormat::parse)]
    format: Option<OutputFormat>,
    /// Logarithm base for rates and exponents: e or 2
    #[arg(long, value_parser = LogBase::parse)]
    log_base: Option<LogBase>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one exponent at a single rate
    Exponent {
        #[command(flatten)]
        common: CommonArgs,
        /// Exponent family: error, correct, or coding
        #[arg(long, value_parser = ExponentKind::parse)]
        kind: ExponentKind,
        /// Constraint rate
        #[arg(long)]
        r: f64,
        /// Force a specific evaluation route
        #[arg(long, value_parser = MethodHint::parse, default_value = "auto")]
        method: MethodHint,
    },
    /// Evaluate an exponent curve over a rate grid
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Exponent family: error, correct, or coding
        #[arg(long, value_parser = ExponentKind::parse)]
        kind: ExponentKind,
        /// First grid point
        #[arg(long)]
        r_min: f64,
        /// Last grid point
        #[arg(long)]
        r_max: f64,
        /// Number of grid points, both endpoints included
        #[arg(long)]
        steps: usize,
        /// Force a specific evaluation route
        #[arg(long, value_parser = MethodHint::parse, default_value = "auto")]
        method: MethodHint,
    },
    /// Exact finite-blocklength likelihood-ratio trade-off
    OracleNp {
        #[command(flatten)]
        common: CommonArgs,
        /// Blocklength
        #[arg(long)]
        n: usize,
        /// Rejection-budget rate; the budget is exp(-n r)
        #[arg(long)]
        r: Option<f64>,
    },
    /// Most probable fixed-length codebook and its exact error
    OracleCode {
        #[command(flatten)]
        common: CommonArgs,
        /// Blocklength
        #[arg(long)]
        n: usize,
        /// Codebook size
        #[arg(long)]
        size: Option<u64>,
        /// Coding rate; the size becomes ceil(exp(n r))
        #[arg(long)]
        r: Option<f64>,
    },
    /// Monte Carlo estimate of the divergence-density spectrum
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Blocklength
        #[arg(long)]
        n: usize,
        /// Number of sampled blocks
        #[arg(long)]
        samples: usize,
        /// Random seed
        #[arg(long)]
        seed: u64,
        /// Single evaluation point
        #[arg(long)]
        r: Option<f64>,
        /// First evaluation point of a grid
        #[arg(long)]
        r_min: Option<f64>,
        /// Last evaluation point of a grid
        #[arg(long)]
        r_max: Option<f64>,
        /// Number of grid points, both endpoints included
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Validate the correct-exponent support conditions
    CheckAssumptions {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Source-coding spectrum function of the null source
    Sigma {
        #[command(flatten)]
        common: CommonArgs,
        /// Single evaluation point
        #[arg(long)]
        r: Option<f64>,
        /// First evaluation point of a grid
        #[arg(long)]
        r_min: Option<f64>,
        /// Last evaluation point of a grid
        #[arg(long)]
        r_max: Option<f64>,
        /// Number of grid points, both endpoints included
        #[arg(long)]
        steps: Option<usize>,
    },
}

/// Evenly spaced grid with exact endpoints.
fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidInput(
            "grid endpoints must be finite".into(),
        ));
    }
    if steps < 2 {
        return Err(Error::InvalidInput(
            "a grid needs at least two steps".into(),
        ));
    }
    if hi <= lo {
        return Err(Error::InvalidInput(format!(
            "grid endpoints must satisfy r_min < r_max, got {lo} and {hi}"
        )));
    }
    let delta = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i == steps - 1 { hi } else { lo + i as f64 * delta })
        .collect())
}

/// Either one point from `--r` or a full grid from `--r-min/--r-max/--steps`.
fn grid_points(
    r: Option<f64>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    steps: Option<usize>,
) -> Result<Vec<f64>> {
    match (r, r_min, r_max, steps) {
        (Some(x), None, None, None) => {
            if !x.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "evaluation point {x} must be finite"
                )));
            }
            Ok(vec![x])
        }
        (None, Some(lo), Some(hi), Some(k)) => linspace(lo, hi, k),
        _ => Err(Error::InvalidInput(
            "give --r alone, or the full --r-min/--r-max/--steps grid".into(),
        )),
    }
}

struct Loaded {
    problem: crate::models::TestingProblem,
    /// Multiplier from nats into output units.
    scale: f64,
    /// Multiplier from input units into nats; multiplying keeps boundary
    /// inputs bitwise aligned with internal breakpoints.
    to_nats: f64,
    base: LogBase,
}

fn load(common: &CommonArgs) -> Result<Loaded> {
    let config = RunConfig::from_path(&common.config)?;
    let base = config.effective_log_base(common.log_base);
    let problem = config.problem(common.log_base)?;
    let scale = problem.output_scale();
    let to_nats = problem.input_scale();
    Ok(Loaded {
        problem,
        scale,
        to_nats,
        base,
    })
}

fn format_or(common: &CommonArgs, default: OutputFormat) -> OutputFormat {
    common.format.unwrap_or(default)
}

fn json_only(common: &CommonArgs, what: &str) -> Result<()> {
    if common.format == Some(OutputFormat::Csv) {
        return Err(Error::InvalidInput(format!("{what} output is JSON only")));
    }
    Ok(())
}

fn run_exponent(common: &CommonArgs, kind: ExponentKind, r: f64, method: MethodHint) -> Result<()> {
    let loaded = load(common)?;
    let query = ExponentQuery::new(kind, r * loaded.to_nats).with_method(method);
    let result = evaluate_query(&loaded.problem, &query)?;
    let row = ResultRow::from_result(r, kind, &result, loaded.scale);
    let content = match format_or(common, OutputFormat::Csv) {
        OutputFormat::Csv => rows_to_csv(&[row]),
        OutputFormat::Json => to_json_line(&row_json(&row))?,
    };
    write_output(common.out.as_deref(), &content)
}

fn run_sweep(
    common: &CommonArgs,
    kind: ExponentKind,
    r_min: f64,
    r_max: f64,
    steps: usize,
    method: MethodHint,
) -> Result<()> {
    let loaded = load(common)?;
    let grid_units = linspace(r_min, r_max, steps)?;
    let grid_nats: Vec<f64> = grid_units.iter().map(|r| r * loaded.to_nats).collect();
    let curve = sweep(&loaded.problem, kind, &grid_nats, method)?;
    let mut rows = Vec::with_capacity(curve.points.len());
    for (point, &r_out) in curve.points.iter().zip(&grid_units) {
        let result = point.outcome.as_ref().map_err(Error::clone)?;
        rows.push(ResultRow::from_result(r_out, kind, result, loaded.scale));
    }
    let content = match format_or(common, OutputFormat::Csv) {
        OutputFormat::Csv => rows_to_csv(&rows),
        OutputFormat::Json => {
            let doc = json!({
                "kind": kind.label(),
                "log_base": loaded.base.label(),
                "fingerprint": curve.fingerprint,
                "points": rows.iter().map(row_json).collect::<Vec<_>>(),
            });
            to_json_line(&doc)?
        }
    };
    write_output(common.out.as_deref(), &content)
}

fn run_oracle_np(common: &CommonArgs, n: usize, r: Option<f64>) -> Result<()> {
    let loaded = load(common)?;
    let tradeoff = np_tradeoff(&loaded.problem, n)?;
    let content = match format_or(common, OutputFormat::Json) {
        OutputFormat::Csv => {
            use std::fmt::Write as _;
            let mut text = String::from("mu,lambda\n");
            for (mu, lambda) in tradeoff.frontier() {
                let _ = writeln!(text, "{mu},{lambda}");
            }
            text
        }
        OutputFormat::Json => {
            let mut doc = json!({
                "n": n,
                "kappa": number(tradeoff.kappa()),
                "blocks": tradeoff.blocks().len(),
                "frontier": tradeoff
                    .frontier()
                    .iter()
                    .map(|(mu, lambda)| json!([number(*mu), number(*lambda)]))
                    .collect::<Vec<_>>(),
            });
            if let Some(r) = r {
                let fin = finite_n_exponents(&loaded.problem, n, r * loaded.to_nats)?;
                doc["operating"] = json!({
                    "r": number(r),
                    "mu_budget": number(fin.mu_budget),
                    "mu": number(fin.mu_budget.min(1.0)),
                    "lambda": number(fin.lambda),
                    "error_exponent": number(fin.error_exponent * loaded.scale),
                    "correct_exponent": number(fin.correct_exponent * loaded.scale),
                });
            }
            to_json_line(&doc)?
        }
    };
    write_output(common.out.as_deref(), &content)
}

fn run_oracle_code(common: &CommonArgs, n: usize, size: Option<u64>, r: Option<f64>) -> Result<()> {
    json_only(common, "fixed-length code")?;
    let loaded = load(common)?;
    let size = match (size, r) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInput(
                "give --size or --r, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Error::InvalidInput(
                "a codebook size is required: --size or --r".into(),
            ))
        }
        (Some(m), None) => m,
        (None, Some(r)) => {
            let raw = (n as f64 * (r * loaded.to_nats)).exp().ceil();
            if !(raw.is_finite() && raw >= 1.0 && raw <= (1u64 << 62) as f64) {
                return Err(Error::InvalidInput(format!(
                    "rate {r} at blocklength {n} gives an unusable codebook size {raw}"
                )));
            }
            raw as u64
        }
    };
    let code = best_fixed_length_code(loaded.problem.null(), n, size)?;
    let words: Value = if code.words.len() <= (1 << 16) {
        json!(code.words)
    } else {
        Value::Null
    };
    let doc = json!({
        "n": n,
        "size": size,
        "error": number(code.error),
        "words": words,
    });
    write_output(common.out.as_deref(), &to_json_line(&doc)?)
}

#[allow(clippy::too_many_arguments)]
fn run_spectrum(
    common: &CommonArgs,
    n: usize,
    samples: usize,
    seed: u64,
    r: Option<f64>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    steps: Option<usize>,
) -> Result<()> {
    let loaded = load(common)?;
    let points = grid_points(r, r_min, r_max, steps)?;
    let estimate = mc_spectrum(&loaded.problem, n, samples, seed)?;
    let evaluated: Vec<(f64, f64, f64, f64)> = points
        .iter()
        .map(|&x| {
            let nats = x * loaded.to_nats;
            let (lo, hi) = estimate.eta_band(nats);
            (
                x,
                estimate.eta_hat(nats) * loaded.scale,
                lo * loaded.scale,
                hi * loaded.scale,
            )
        })
        .collect();
    let content = match format_or(common, OutputFormat::Csv) {
        OutputFormat::Csv => {
            use std::fmt::Write as _;
            let mut text = String::from("R,eta_hat,band_lo,band_hi\n");
            for (x, eta, lo, hi) in &evaluated {
                let _ = writeln!(text, "{x},{eta},{lo},{hi}");
            }
            text
        }
        OutputFormat::Json => {
            let doc = json!({
                "n": n,
                "samples": samples,
                "seed": seed,
                "dkw_epsilon": number(estimate.dkw_epsilon),
                "points": evaluated
                    .iter()
                    .map(|(x, eta, lo, hi)| {
                        json!({
                            "R": number(*x),
                            "eta_hat": number(*eta),
                            "band_lo": number(*lo),
                            "band_hi": number(*hi),
                        })
                    })
                    .collect::<Vec<_>>(),
            });
            to_json_line(&doc)?
        }
    };
    write_output(common.out.as_deref(), &content)
}

fn run_check_assumptions(common: &CommonArgs) -> Result<()> {
    json_only(common, "assumption report")?;
    let loaded = load(common)?;
    let report = check_theorem4_assumptions(&loaded.problem)?;
    let doc = json!({
        "passed": report.passed,
        "witness": report.witness,
        "detail": report.detail,
        "probability_alternative": report.probability_alternative,
        "total_mass_exponent": number(report.total_mass_exponent * loaded.scale),
    });
    write_output(common.out.as_deref(), &to_json_line(&doc)?)?;
    report.require_passed()
}

fn run_sigma(
    common: &CommonArgs,
    r: Option<f64>,
    r_min: Option<f64>,
    r_max: Option<f64>,
    steps: Option<usize>,
) -> Result<()> {
    let loaded = load(common)?;
    let points = grid_points(r, r_min, r_max, steps)?;
    let counting = counting_problem(loaded.problem.null())?;
    let eta = eta_for_problem(&counting)?;
    let evaluated: Vec<(f64, f64)> = points
        .iter()
        .map(|&x| {
            crate::exponents::sigma_from_eta(&eta, x * loaded.to_nats)
                .map(|s| (x, s * loaded.scale))
        })
        .collect::<Result<_>>()?;
    let content = match format_or(common, OutputFormat::Csv) {
        OutputFormat::Csv => {
            use std::fmt::Write as _;
            let mut text = String::from("R,sigma\n");
            for (x, s) in &evaluated {
                let _ = writeln!(text, "{x},{s}");
            }
            text
        }
        OutputFormat::Json => {
            let doc = json!({
                "log_base": loaded.base.label(),
                "points": evaluated
                    .iter()
                    .map(|(x, s)| json!({"R": number(*x), "sigma": number(*s)}))
                    .collect::<Vec<_>>(),
            });
            to_json_line(&doc)?
        }
    };
    write_output(common.out.as_deref(), &content)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Exponent {
            common,
            kind,
            r,
            method,
        } => run_exponent(&common, kind, r, method),
        Command::Sweep {
            common,
            kind,
            r_min,
            r_max,
            steps,
            method,
        } => run_sweep(&common, kind, r_min, r_max, steps, method),
        Command::OracleNp { common, n, r } => run_oracle_np(&common, n, r),
        Command::OracleCode { common, n, size, r } => run_oracle_code(&common, n, size, r),
        Command::Spectrum {
            common,
            n,
            samples,
            seed,
            r,
            r_min,
            r_max,
            steps,
        } => run_spectrum(&common, n, samples, seed, r, r_min, r_max, steps),
        Command::CheckAssumptions { common } => run_check_assumptions(&common),
        Command::Sigma {
            common,
            r,
            r_min,
            r_max,
            steps,
        } => run_sigma(&common, r, r_min, r_max, steps),
    }
}

/// Parse the process arguments, run one command, and return the exit code.
pub fn run() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => match execute(cli.command) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("{}", error_diagnostic(&err));
                err.exit_code()
            }
        },
        Err(err) => {
            let usage_error = err.use_stderr();
            let _ = err.print();
            if usage_error {
                let diag = Error::InvalidInput(format!("argument parsing: {}", err.kind()));
                eprintln!("{}", error_diagnostic(&diag));
                2
            } else {
                0
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse_into_the_expected_command() {
        let cli = Cli::try_parse_from([
            "infospec",
            "exponent",
            "--config",
            "problem.json",
            "--kind",
            "error",
            "--r",
            "0.5",
        ])
        .unwrap();
        match cli.command {
            Command::Exponent {
                common, kind, r, ..
            } => {
                assert_eq!(common.config, PathBuf::from("problem.json"));
                assert_eq!(kind, ExponentKind::Error);
                assert_eq!(r, 0.5);
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn sweep_flags_cover_the_grid_and_base() {
        let cli = Cli::try_parse_from([
            "infospec",
            "sweep",
            "--config",
            "c.json",
            "--kind",
            "correct",
            "--r-min",
            "0",
            "--r-max",
            "8",
            "--steps",
            "5",
            "--log-base",
            "2",
            "--format",
            "json",
        ])
        .unwrap();
        match cli.command {
            Command::Sweep {
                common,
                kind,
                r_min,
                r_max,
                steps,
                ..
            } => {
                assert_eq!(kind, ExponentKind::Correct);
                assert_eq!((r_min, r_max, steps), (0.0, 8.0, 5));
                assert_eq!(common.log_base, Some(LogBase::Two));
                assert_eq!(common.format, Some(OutputFormat::Json));
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn unknown_kind_is_a_parse_error() {
        let result = Cli::try_parse_from([
            "infospec",
            "exponent",
            "--config",
            "c.json",
            "--kind",
            "sideways",
            "--r",
            "0.5",
        ]);
        assert!(result.is_err());
    }

    #[test]
    fn linspace_hits_both_endpoints_exactly() {
        let grid = linspace(0.0, 8.0, 5).unwrap();
        assert_eq!(grid, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        assert!(linspace(0.0, 1.0, 1).is_err());
        assert!(linspace(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn grid_points_wants_exactly_one_shape() {
        assert_eq!(grid_points(Some(0.3), None, None, None).unwrap(), vec![0.3]);
        assert_eq!(
            grid_points(None, Some(0.0), Some(1.0), Some(3)).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert!(grid_points(None, None, None, None).is_err());
        assert!(grid_points(Some(0.1), Some(0.0), Some(1.0), Some(3)).is_err());
    }
}
