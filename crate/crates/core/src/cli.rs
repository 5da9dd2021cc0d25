//! Command-line front end. [`run`] parses arguments, dispatches to the
//! solvers and maps failures to exit codes: 0 success, 1 invalid input,
//! 2 numerical failure.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::compare::{self, ComparisonReport};
use crate::contest::{self, ContestSolution, GridSpec, VerificationReport};
use crate::demand::{DemandModel, Table, DEFAULT_ROOT_TOL};
use crate::equilibrium::{self, NashOptions, NashSolution};
use crate::error::Error;
use crate::payoffs::MarketParams;
use crate::report::format_sig;

/// Environment variable overriding every default tolerance.
pub const TOL_ENV: &str = "COURNOT_LAB_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

const SIG: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "cournot-lab",
    version,
    about = "Nash equilibria and unbeatable strategies in Cournot duopoly"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cournot-Nash equilibrium (closed form or best-response iteration).
    Nash(NashArgs),
    /// Unbeatable strategy solving the relative-profit contest.
    Contest(ContestArgs),
    /// Grid check of whether a quantity is (strictly) unbeatable.
    Verify(VerifyArgs),
    /// Contest versus Nash outcome for the differentiated market.
    Compare(CompareArgs),
    /// Comparison table over a grid of costs and substitutabilities.
    Sweep(SweepArgs),
    /// End-to-end homogeneous linear scenario with c = 0.5.
    DemoSchaffer(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Market {
    Homogeneous,
    Differentiated,
}

#[derive(Debug, Args)]
pub struct MarketArgs {
    #[arg(long, value_enum)]
    pub market: Market,
    /// Demand curve for homogeneous markets: `linear:<intercept>,<slope>`,
    /// `exp:<scale>` or `table:<path.csv>`.
    #[arg(long)]
    pub demand: Option<String>,
    /// Marginal cost.
    #[arg(long)]
    pub c: f64,
    /// Substitutability (differentiated markets only).
    #[arg(long)]
    pub b: Option<f64>,
    /// Allow tabulated demand to extrapolate past its last knot.
    #[arg(long)]
    pub extrapolate: bool,
}

#[derive(Debug, Args)]
pub struct NashArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = equilibrium::DEFAULT_DAMPING)]
    pub damping: f64,
    #[arg(long, default_value_t = equilibrium::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long)]
    pub domain_hi: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ContestArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// Quantity to check; required unless `--probe` is given.
    #[arg(long)]
    pub candidate: Option<f64>,
    /// Check every grid point and list the unbeatable ones.
    #[arg(long)]
    pub probe: bool,
    #[arg(long, default_value_t = 0.0)]
    pub grid_lo: f64,
    #[arg(long)]
    pub grid_hi: Option<f64>,
    /// Defaults to 10 001 points, or 2 001 with `--probe`.
    #[arg(long)]
    pub grid_count: Option<usize>,
    #[arg(long)]
    pub strict_tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated costs.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
    )]
    pub c_values: Vec<f64>,
    /// Comma-separated substitutabilities.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1"
    )]
    pub b_values: Vec<f64>,
    /// Emit `b value` blocks per metric instead of a table.
    #[arg(long)]
    pub plot: bool,
    /// Evaluate rows in parallel (output is identical).
    #[arg(long)]
    pub parallel: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INVALID
            },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: msg.into(),
    }
}

/// Parses a `--demand` value.
pub fn parse_demand(spec: &str, extrapolate: bool) -> Result<DemandModel<f64>, Error> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("demand `{spec}` must look like kind:args")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("`{s}` is not a number in demand `{spec}`")))
    };
    match kind {
        "linear" => {
            let (a, s) = rest.split_once(',').ok_or_else(|| {
                Error::invalid("linear demand needs `linear:<intercept>,<slope>`")
            })?;
            DemandModel::linear(num(a)?, num(s)?)
        }
        "exp" => DemandModel::exponential(num(rest)?),
        "table" => Ok(DemandModel::Tabulated(
            Table::from_csv_path(rest)?.with_extrapolation(extrapolate),
        )),
        other => Err(Error::invalid(format!("unknown demand kind `{other}`"))),
    }
}

fn env_tol() -> Result<Option<f64>, Failure> {
    match std::env::var(TOL_ENV) {
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
            _ => Err(invalid(format!(
                "{TOL_ENV}=`{s}` is not a positive decimal"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Flag value, else environment override, else built-in default.
fn pick_tol(flag: Option<f64>, env: Option<f64>, default: f64) -> f64 {
    flag.or(env).unwrap_or(default)
}

fn market_params(args: &MarketArgs) -> Result<MarketParams<f64>, Failure> {
    match args.market {
        Market::Homogeneous => {
            let spec = args
                .demand
                .as_deref()
                .ok_or_else(|| invalid("--market homogeneous needs --demand"))?;
            if args.b.is_some() {
                return Err(invalid(
                    "--b is only meaningful for --market differentiated",
                ));
            }
            Ok(MarketParams::homogeneous(
                parse_demand(spec, args.extrapolate)?,
                args.c,
            )?)
        }
        Market::Differentiated => {
            if args.demand.is_some() {
                return Err(invalid(
                    "--demand is only meaningful for --market homogeneous",
                ));
            }
            let b = args
                .b
                .ok_or_else(|| invalid("--market differentiated needs --b"))?;
            Ok(MarketParams::differentiated(args.c, b)?)
        }
    }
}

fn fmt(x: f64) -> String {
    format_sig(x, SIG)
}

fn write_records<W: Write>(
    out: &mut W,
    format: Format,
    fields: &[(&str, String)],
) -> Result<(), Failure> {
    match format {
        Format::Text => {
            for (k, v) in fields {
                writeln!(out, "{k}={v}")?;
            }
        }
        Format::Csv => {
            let keys: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let vals: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
            writeln!(out, "{}", keys.join(","))?;
            writeln!(out, "{}", vals.join(","))?;
        }
        Format::Json => unreachable!("json is serialized from the typed value"),
    }
    Ok(())
}

fn write_json<W: Write, S: Serialize>(out: &mut W, value: &S) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn nash_fields(s: &NashSolution<f64>) -> Vec<(&'static str, String)> {
    vec![
        ("q_hat", fmt(s.q_hat)),
        ("Q_hat", fmt(s.total)),
        ("p_hat", fmt(s.p_hat)),
        ("phi_hat", fmt(s.phi_hat)),
        (
            "method",
            match s.method {
                equilibrium::SolveMethod::Analytic => "analytic".into(),
                equilibrium::SolveMethod::Iterative => "iterative".into(),
            },
        ),
        ("residual", fmt(s.residual)),
        (
            "iterations",
            s.iterations.map(|n| n.to_string()).unwrap_or_default(),
        ),
    ]
}

fn contest_fields(s: &ContestSolution<f64>) -> Vec<(&'static str, String)> {
    vec![
        ("q_star", fmt(s.q_star)),
        ("Q_star", fmt(s.total)),
        ("p_star", fmt(s.p_star)),
        ("phi_star", fmt(s.phi_star)),
        ("strict", s.strict.to_string()),
    ]
}

fn verification_fields(r: &VerificationReport<f64>) -> Vec<(&'static str, String)> {
    vec![
        ("candidate", fmt(r.candidate)),
        ("is_unbeatable", r.is_unbeatable.to_string()),
        ("is_strict", r.is_strict.to_string()),
        ("min_relative_payoff", fmt(r.min_relative_payoff)),
        ("witness", r.witness.map(fmt).unwrap_or_default()),
        ("grid_lo", fmt(r.grid.lo())),
        ("grid_hi", fmt(r.grid.hi())),
        ("grid_count", r.grid.count().to_string()),
    ]
}

fn comparison_fields(r: &ComparisonReport<f64>) -> Vec<(&'static str, String)> {
    compare::CSV_HEADER
        .split(',')
        .zip(r.values())
        .map(|(k, v)| (k, fmt(v)))
        .collect()
}

fn cmd_nash<W: Write>(args: &NashArgs, out: &mut W) -> Result<(), Failure> {
    let env = env_tol()?;
    let params = market_params(&args.market)?;
    let solution = match params.demand() {
        Some(demand) => {
            let opts = NashOptions {
                domain_hi: args.domain_hi,
                tol: pick_tol(args.tol, env, equilibrium::DEFAULT_NASH_TOL),
                damping: args.damping,
                max_iter: args.max_iter,
            };
            equilibrium::nash_homogeneous(demand, params.cost(), &opts)?
        }
        None => {
            let b = params
                .substitutability()
                .expect("differentiated market has b");
            equilibrium::nash_differentiated(params.cost(), b)?
        }
    };
    match args.format {
        Format::Json => write_json(out, &solution),
        f => write_records(out, f, &nash_fields(&solution)),
    }
}

fn cmd_contest<W: Write>(args: &ContestArgs, out: &mut W) -> Result<(), Failure> {
    let env = env_tol()?;
    let params = market_params(&args.market)?;
    let solution = match params.demand() {
        Some(demand) => {
            let tol = pick_tol(args.tol, env, DEFAULT_ROOT_TOL);
            contest::unbeatable_homogeneous(demand, params.cost(), tol)?
        }
        None => {
            let b = params
                .substitutability()
                .expect("differentiated market has b");
            contest::unbeatable_differentiated(params.cost(), b)?
        }
    };
    match args.format {
        Format::Json => write_json(out, &solution),
        f => write_records(out, f, &contest_fields(&solution)),
    }
}

fn cmd_verify<W: Write>(args: &VerifyArgs, out: &mut W) -> Result<(), Failure> {
    let env = env_tol()?;
    let params = market_params(&args.market)?;
    let strict_tol = pick_tol(args.strict_tol, env, contest::DEFAULT_STRICT_TOL);
    let hi = args.grid_hi.unwrap_or_else(|| params.default_q_max());
    if args.probe {
        if args.candidate.is_some() {
            return Err(invalid("--probe checks every grid point; drop --candidate"));
        }
        let count = args.grid_count.unwrap_or(contest::DEFAULT_PROBE_POINTS);
        let grid = GridSpec::new(args.grid_lo, hi, count)?;
        let found = contest::uniqueness_probe(&params, &grid, strict_tol)?;
        match args.format {
            Format::Json => write_json(out, &found)?,
            Format::Text | Format::Csv => {
                writeln!(out, "unbeatable")?;
                for q in found {
                    writeln!(out, "{}", fmt(q))?;
                }
            }
        }
        return Ok(());
    }
    let candidate = args
        .candidate
        .ok_or_else(|| invalid("verify needs --candidate (or --probe)"))?;
    let count = args.grid_count.unwrap_or(contest::DEFAULT_VERIFY_POINTS);
    let grid = GridSpec::new(args.grid_lo, hi, count)?;
    let report = contest::verify_unbeatable(&params, candidate, &grid, strict_tol)?;
    match args.format {
        Format::Json => write_json(out, &report),
        Format::Text => {
            write!(out, "{}", report.to_key_value())?;
            Ok(())
        }
        Format::Csv => write_records(out, Format::Csv, &verification_fields(&report)),
    }
}

fn cmd_compare<W: Write>(args: &CompareArgs, out: &mut W) -> Result<(), Failure> {
    let report = compare::compare(args.c, args.b)?;
    match args.format {
        Format::Json => write_json(out, &report),
        Format::Csv => {
            compare::write_csv(std::slice::from_ref(&report), &mut *out)?;
            Ok(())
        }
        Format::Text => write_records(out, Format::Text, &comparison_fields(&report)),
    }
}

fn cmd_sweep<W: Write>(args: &SweepArgs, out: &mut W) -> Result<(), Failure> {
    let rows = if args.parallel {
        compare::sweep_parallel(&args.c_values, &args.b_values)?
    } else {
        compare::sweep(&args.c_values, &args.b_values)?
    };
    if args.plot {
        compare::write_plot(&rows, &mut *out)?;
        return Ok(());
    }
    match args.format {
        Format::Json => write_json(out, &rows),
        Format::Csv => {
            compare::write_csv(&rows, &mut *out)?;
            Ok(())
        }
        Format::Text => {
            for (i, row) in rows.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                write_records(out, Format::Text, &comparison_fields(row))?;
            }
            Ok(())
        }
    }
}

fn cmd_demo<W: Write>(args: &DemoArgs, out: &mut W) -> Result<(), Failure> {
    let c = args.c;
    let demand = DemandModel::linear(1.0, 1.0)?;
    let contest = contest::unbeatable_homogeneous(&demand, c, DEFAULT_ROOT_TOL)?;
    let nash = equilibrium::nash_differentiated(c, 1.0)?;
    let iterative = equilibrium::nash_homogeneous(&demand, c, &NashOptions::default())?;
    let report = compare::compare(c, 1.0)?;

    writeln!(out, "Homogeneous good, P(Q) = 1 - Q, c = {}", fmt(c))?;
    writeln!(out)?;
    writeln!(out, "{:<22} {:>16} {:>16}", "", "contest", "nash")?;
    let rows = [
        ("per-player quantity", contest.q_star, nash.q_hat),
        ("total output", contest.total, nash.total),
        ("price", contest.p_star, nash.p_hat),
        ("per-player profit", contest.phi_star, nash.phi_hat),
    ];
    for (label, a, b) in rows {
        writeln!(out, "{label:<22} {:>16} {:>16}", fmt(a), fmt(b))?;
    }
    writeln!(out)?;
    writeln!(
        out,
        "contest: price equals cost ({}) and profits are zero; strictly unbeatable: {}",
        fmt(contest.p_star),
        contest.strict
    )?;
    writeln!(
        out,
        "nash: profit {} per player; best-response iteration agrees (q = {}, {} steps)",
        fmt(nash.phi_hat),
        fmt(iterative.q_hat),
        iterative.iterations.unwrap_or(0)
    )?;
    writeln!(
        out,
        "moving from contest to competition cuts output by {}",
        fmt(report.output_drop)
    )?;
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S, O, E>(args: I, out: &mut O, err: &mut E) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = err.flush();
                    EXIT_OK
                }
                _ => EXIT_INVALID,
            };
        }
    };
    let result = match &cli.command {
        Command::Nash(a) => cmd_nash(a, out),
        Command::Contest(a) => cmd_contest(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::DemoSchaffer(a) => cmd_demo(a, out),
    };
    match result.and_then(|()| out.flush().map_err(Failure::from)) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
