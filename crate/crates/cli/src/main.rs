//! `dlr`: typecheck, differentiate, evaluate and compare terms of the
//! real-valued lambda calculus, and check distance judgments.

mod commands;
mod source;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dlr_core::relations::ProbeConfig;

/// Input that was read successfully but is rejected: a parse or type
/// error, an invalid derivation, a failing law. Exits with status 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Parser)]
#[command(name = "dlr", version, about = "Program distances for a simply typed calculus over the reals")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct RunConfig {
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Real probes per check.
    #[arg(long, global = true, env = "DLR_PROBES", default_value_t = 1000)]
    pub probes: usize,
    /// Function probes per arrow type.
    #[arg(long, global = true, default_value_t = 16)]
    pub functions: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Range of probe points, as LO:HI.
    #[arg(long, global = true, default_value = "-10:10", allow_hyphen_values = true)]
    pub range: String,
    /// Largest probe input error.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub max_error: f64,
    /// Relative slack of float comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Rebinds the definition `eps` of the input file.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eps: Option<String>,
}

impl RunConfig {
    pub fn probe_config(&self) -> Result<ProbeConfig> {
        let range = parse_pair(&self.range).ok_or_else(|| anyhow::anyhow!("--range expects LO:HI, found `{}`", self.range))?;
        let cfg = ProbeConfig {
            real_count: self.probes,
            range,
            max_error: self.max_error,
            function_count: self.functions,
            seed: self.seed,
            slack: self.tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `A:B` as two floats.
pub fn parse_pair(s: &str) -> Option<(f64, f64)> {
    let (a, b) = s.split_once(':')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

#[derive(Subcommand)]
enum Command {
    /// Print the type of every definition in FILE.
    Typecheck { file: PathBuf },
    /// Print the derivative term of EXPR.
    Derive {
        file: PathBuf,
        expr: String,
        /// Normalize the derivative first.
        #[arg(long)]
        normalize: bool,
    },
    /// Evaluate a closed EXPR.
    Eval {
        file: PathBuf,
        expr: String,
        /// Evaluate over rationals; primitives without exact values fail.
        #[arg(long)]
        exact: bool,
    },
    /// Tabulate the distance bound between two functions on the reals.
    Diff {
        file: PathBuf,
        f: String,
        g: String,
        /// A point X:B to tabulate; may be repeated.
        #[arg(long = "at", allow_hyphen_values = true)]
        at: Vec<String>,
        /// Probe rows shown when no --at is given.
        #[arg(long, default_value_t = 10)]
        rows: usize,
    },
    /// Check the quasi-metric propositions on a finite quantale.
    Laws {
        #[arg(long, conflicts_with = "quantale")]
        builtin: Option<String>,
        /// A quantale table file.
        #[arg(long)]
        quantale: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        size: usize,
    },
    /// Validate a derivation file.
    Judge {
        file: PathBuf,
        /// Also check the conclusion against the logical distance relation.
        #[arg(long)]
        dlog: bool,
    },
    /// Check that a closed term is related to itself by its derivative.
    Fundamental { file: PathBuf, expr: String },
    /// Check that (F, A, G) lies in a relation.
    Check {
        #[arg(value_enum)]
        relation: commands::RelationArg,
        file: PathBuf,
        f: String,
        a: String,
        g: String,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = &cli.run;
    let report = match cli.command {
        Command::Typecheck { file } => commands::typecheck(cfg, &file)?,
        Command::Derive { file, expr, normalize } => commands::derive(cfg, &file, &expr, normalize)?,
        Command::Eval { file, expr, exact } => commands::eval(cfg, &file, &expr, exact)?,
        Command::Diff { file, f, g, at, rows } => {
            let points = at
                .iter()
                .map(|p| match parse_pair(p) {
                    Some((x, b)) if b >= 0.0 && x.is_finite() => Ok((x, b)),
                    _ => bail!("--at expects X:B with B >= 0, found `{p}`"),
                })
                .collect::<Result<Vec<_>>>()?;
            commands::diff(cfg, &file, &f, &g, &points, rows)?
        }
        Command::Laws { builtin, quantale, size } => commands::laws(builtin.as_deref(), quantale.as_deref(), size)?,
        Command::Judge { file, dlog } => commands::judge(cfg, &file, dlog)?,
        Command::Fundamental { file, expr } => commands::fundamental(cfg, &file, &expr)?,
        Command::Check { relation, file, f, a, g } => commands::check(cfg, relation, &file, &f, &a, &g)?,
    };
    match cfg.format {
        Format::Text => print!("{}", report.text),
        Format::Json => println!("{}", serde_json::to_string_pretty(&report.json)?),
    }
    Ok(report.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Invalid>() { 1 } else { 2 })
        }
    }
}
