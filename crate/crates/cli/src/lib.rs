//! Command-line driver: channel specs in, JSON or CSV reports out.
//!
//! Exit codes: 0 success or confirmed, 1 violated or falsified,
//! 2 inconclusive, 3 usage or spec error.

pub mod report;
pub mod spec;

use std::ffi::OsString;
use std::time::Instant;

use channel_purity::covariance::{covariance_test, CovarianceVerdict};
use channel_purity::optim::{maximize_output_pnorm, minimize_output_entropy, OptimizerConfig};
use channel_purity::random::rng_from_seed;
use channel_purity::verify::{self, SweepReport, Verdict, VerificationReport, COLLAPSE_TOL, PRODUCT_TOL};
use channel_purity::{zoo, Channel, PurityError, SchattenP};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub use report::{ChannelInfo, RunReport, Status};
pub use spec::{load_channel, parse_spec, resolve, ChannelSpec, SpecError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

pub const THREADS_ENV: &str = "CHANNEL_PURITY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "channel-purity", version, about = "Optimal output purity of quantum channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Channel spec: inline JSON or a file path.
    #[arg(long, global = true)]
    pub channel: Option<String>,
    /// Second channel for pair commands.
    #[arg(long, global = true)]
    pub omega: Option<String>,
    /// Covariant outer channel for `verify lemma`.
    #[arg(long, global = true)]
    pub psi: Option<String>,
    /// Inner channel with a rank-one output for `verify lemma`.
    #[arg(long, global = true)]
    pub m: Option<String>,
    /// Schatten exponent, a number >= 1 or `inf`.
    #[arg(long, global = true, value_parser = parse_p)]
    pub p: Option<SchattenP>,
    /// Comma-separated exponents for `verify sweep`.
    #[arg(long = "p-grid", global = true, value_delimiter = ',', value_parser = parse_p)]
    pub p_grid: Option<Vec<SchattenP>>,
    #[arg(long, global = true)]
    pub starts: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Samples for `check covariance`.
    #[arg(long, global = true, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<String>,
}

fn parse_p(s: &str) -> Result<SchattenP, String> {
    s.parse::<SchattenP>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Channel families accepted in specs.
    #[command(subcommand)]
    Zoo(ZooCommand),
    #[command(subcommand)]
    Check(CheckCommand),
    /// Optimal output purity.
    #[command(subcommand)]
    Opt(OptCommand),
    #[command(subcommand)]
    Verify(VerifyCommand),
    #[command(subcommand)]
    Classify(ClassifyCommand),
}

#[derive(Debug, Clone, Subcommand)]
pub enum ZooCommand {
    List,
    Describe { name: String },
}

#[derive(Debug, Clone, Subcommand)]
pub enum CheckCommand {
    /// Choi-matrix test of complete positivity and trace preservation.
    Cptp,
    /// Sampling test that can falsify unitary covariance.
    Covariance,
}

#[derive(Debug, Clone, Subcommand)]
pub enum OptCommand {
    /// Minimal output entropy.
    Smin,
    /// Maximal output p-norm.
    Nup,
}

#[derive(Debug, Clone, Subcommand)]
pub enum VerifyCommand {
    /// Search for an input with a rank-one output.
    RankOne,
    /// nu_p(psi o m) = nu_p(psi) for covariant psi and m with a rank-one output.
    Lemma,
    /// Multiplicativity of nu_p on channel x omega.
    Mult,
    /// Additivity of the minimal output entropy on channel x omega.
    Add,
    /// Multiplicativity over a grid of p, then additivity.
    Sweep,
}

#[derive(Debug, Clone, Subcommand)]
pub enum ClassifyCommand {
    /// Place a diagonal-form qubit channel in the families with known additivity.
    Qubit,
}

/// Failures that end a run with exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Library(#[from] PurityError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// What a command produced before it is wrapped in a report.
struct Outcome {
    status: Status,
    results: Value,
    csv: Option<String>,
}

impl Outcome {
    fn success(results: Value) -> Self {
        Outcome { status: Status::Success, results, csv: None }
    }
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Confirmed => Status::Confirmed,
        Verdict::Violated => Status::Violated,
        Verdict::Inconclusive => Status::Inconclusive,
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize to JSON")
}

struct Context {
    flags: Flags,
    channels: Vec<ChannelInfo>,
}

impl Context {
    fn load(&mut self, role: &str, arg: &Option<String>, flag: &str) -> Result<Channel, CliError> {
        let Some(arg) = arg else {
            return Err(CliError::Usage(format!("--{flag} is required for this command")));
        };
        let ch = load_channel(arg)?;
        self.channels.push(ChannelInfo {
            role: role.to_string(),
            label: ch.label().to_string(),
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
        });
        Ok(ch)
    }

    fn channel(&mut self) -> Result<Channel, CliError> {
        let arg = self.flags.channel.clone();
        self.load("channel", &arg, "channel")
    }

    fn omega(&mut self) -> Result<Channel, CliError> {
        let arg = self.flags.omega.clone();
        self.load("omega", &arg, "omega")
    }

    fn config(&self, dim: usize) -> OptimizerConfig {
        let cfg = OptimizerConfig::for_dim(dim).with_seed(self.flags.seed);
        match self.flags.starts {
            Some(n) => cfg.with_starts(n),
            None => cfg,
        }
    }

    fn p(&self) -> SchattenP {
        self.flags.p.unwrap_or(SchattenP::Finite(2.0))
    }
}

const CSV_HEADER: &str = "p,lhs,rhs,gap,verdict\n";

fn csv_row(r: &VerificationReport) -> String {
    let p = r.p.map(|p| p.to_string()).unwrap_or_default();
    let verdict = to_value(&r.verdict);
    format!("{p},{},{},{},{}\n", r.lhs, r.rhs, r.gap, verdict.as_str().unwrap_or(""))
}

fn verification(r: VerificationReport) -> Outcome {
    let csv = format!("{CSV_HEADER}{}", csv_row(&r));
    Outcome { status: verdict_status(r.verdict), results: to_value(&r), csv: Some(csv) }
}

fn sweep_outcome(s: SweepReport) -> Outcome {
    let mut csv = CSV_HEADER.to_string();
    for r in s.reports.iter().filter(|r| r.p.is_some()) {
        csv.push_str(&csv_row(r));
    }
    let mut results = to_value(&s);
    results["scope"] = json!("multiplicativity is checked on the listed exponents only, not on the continuum of p");
    Outcome { status: verdict_status(s.verdict), results, csv: Some(csv) }
}

fn execute(command: &Command, ctx: &mut Context) -> Result<Outcome, CliError> {
    let flags = ctx.flags.clone();
    match command {
        Command::Zoo(ZooCommand::List) => {
            let list: Vec<Value> = zoo::FAMILIES.iter().map(|(name, schema)| json!({"name": name, "schema": schema})).collect();
            Ok(Outcome::success(Value::Array(list)))
        }
        Command::Zoo(ZooCommand::Describe { name }) => match zoo::FAMILIES.iter().find(|(n, _)| n == name) {
            Some((n, schema)) => Ok(Outcome::success(json!({"name": n, "schema": schema}))),
            None => Err(CliError::Usage(format!("unknown family {name:?}; see `zoo list`"))),
        },
        Command::Check(CheckCommand::Cptp) => {
            let ch = ctx.channel()?;
            let choi = ch.to_choi();
            let verdict = choi.cptp_verdict(flags.tol.unwrap_or(1e-9));
            let status = if verdict.cptp { Status::Success } else { Status::Violated };
            Ok(Outcome { status, results: json!({"verdict": verdict, "choi_eigenvalues": choi.eigenvalues()}), csv: None })
        }
        Command::Check(CheckCommand::Covariance) => {
            let ch = ctx.channel()?;
            let mut rng = rng_from_seed(flags.seed);
            let r = covariance_test(&ch, flags.samples, flags.tol.unwrap_or(channel_purity::covariance::DEFAULT_COVARIANCE_TOL), &mut rng)?;
            let status = match r.verdict {
                CovarianceVerdict::Consistent => Status::Success,
                CovarianceVerdict::Falsified => Status::Falsified,
            };
            Ok(Outcome { status, results: to_value(&r), csv: None })
        }
        Command::Opt(which) => {
            let ch = ctx.channel()?;
            let cfg = ctx.config(ch.dim_in());
            let report = match which {
                OptCommand::Smin => minimize_output_entropy(&ch, &cfg)?,
                OptCommand::Nup => maximize_output_pnorm(&ch, ctx.p(), &cfg)?,
            };
            Ok(Outcome::success(to_value(&report)))
        }
        Command::Verify(VerifyCommand::RankOne) => {
            let ch = match (&flags.channel, &flags.m) {
                (None, Some(_)) => {
                    let arg = flags.m.clone();
                    ctx.load("m", &arg, "m")?
                }
                _ => ctx.channel()?,
            };
            let search = verify::find_rank_one_output(&ch, &ctx.config(ch.dim_in()))?;
            let report = search.to_report();
            Ok(Outcome { status: verdict_status(report.verdict), results: json!({"search": search, "report": report}), csv: None })
        }
        Command::Verify(VerifyCommand::Lemma) => {
            let (psi_arg, m_arg) = (flags.psi.clone(), flags.m.clone());
            let psi = ctx.load("psi", &psi_arg, "psi")?;
            let m = ctx.load("m", &m_arg, "m")?;
            let cfg = ctx.config(m.dim_in());
            let r = verify::verify_norm_collapse(&psi, &m, ctx.p(), &cfg, flags.tol.unwrap_or(COLLAPSE_TOL))?;
            Ok(verification(r))
        }
        Command::Verify(pair) => {
            let phi = ctx.channel()?;
            let omega = ctx.omega()?;
            let cfg = ctx.config(phi.dim_in() * omega.dim_in());
            let tol = flags.tol.unwrap_or(PRODUCT_TOL);
            match pair {
                VerifyCommand::Mult => Ok(verification(verify::verify_multiplicativity(&phi, &omega, ctx.p(), &cfg, tol)?)),
                VerifyCommand::Add => Ok(verification(verify::verify_additivity(&phi, &omega, &cfg, tol)?)),
                _ => {
                    let grid = flags.p_grid.clone().unwrap_or_else(verify::default_p_grid);
                    Ok(sweep_outcome(verify::p_sweep(&phi, &omega, &grid, &cfg, tol)?))
                }
            }
        }
        Command::Classify(ClassifyCommand::Qubit) => {
            let ch = ctx.channel()?;
            let params = zoo::qubit_params_of(&ch)?;
            let condition = zoo::qubit_cptp_condition(&params);
            if !condition.cptp {
                return Ok(Outcome {
                    status: Status::Violated,
                    results: json!({"params": params, "cptp_condition": condition}),
                    csv: None,
                });
            }
            let class = zoo::classify_qubit_family(&params)?;
            let image = zoo::bloch_image(&params)?;
            Ok(Outcome::success(json!({
                "params": params,
                "cptp_condition": condition,
                "classification": class,
                "bloch_image": image,
            })))
        }
    }
}

/// Output of a finished run.
#[derive(Debug)]
pub struct RunOutput {
    pub exit_code: i32,
    /// Text for stdout: the JSON report, or CSV rows under `--format csv`.
    pub stdout: String,
    /// Human-readable message for stderr.
    pub stderr: String,
    pub report: Option<RunReport>,
}

fn command_echo(args: &[OsString]) -> Vec<String> {
    args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect()
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                RunOutput { exit_code: code, stdout: String::new(), stderr: text, report: None }
            } else {
                RunOutput { exit_code: code, stdout: text, stderr: String::new(), report: None }
            };
        }
    };
    let started = Instant::now();
    let mut ctx = Context { flags: cli.flags.clone(), channels: Vec::new() };
    let outcome = execute(&cli.command, &mut ctx);
    let mut report = RunReport::new(command_echo(&args), cli.flags.seed);
    report.channels = std::mem::take(&mut ctx.channels);
    let mut stderr = String::new();
    let mut csv = None;
    match outcome {
        Ok(o) => {
            report.status = o.status;
            report.results = o.results;
            csv = o.csv;
        }
        Err(e) => {
            report.status = Status::Error;
            report.error = Some(e.to_string());
            stderr = format!("error: {e}\n");
        }
    }
    report.exit_code = report.status.exit_code();
    report.timing.wall_seconds = started.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&report).expect("reports serialize to JSON") + "\n";

    let mut exit_code = report.exit_code;
    let text = match cli.flags.format {
        Format::Csv if report.status != Status::Error => match csv {
            Some(rows) => rows,
            None => {
                stderr.push_str("error: --format csv is only available for verify lemma, mult, add and sweep\n");
                exit_code = EXIT_USAGE;
                json
            }
        },
        _ => json,
    };
    let stdout = match &cli.flags.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => String::new(),
            Err(source) => {
                stderr.push_str(&format!("error: {}\n", CliError::Io { path: path.clone(), source }));
                exit_code = EXIT_USAGE;
                text
            }
        },
        None => text,
    };
    RunOutput { exit_code, stdout, stderr, report: Some(report) }
}

/// Caps the rayon pool from `CHANNEL_PURITY_THREADS`; 0 or unset leaves the default.
pub fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a nonnegative integer, got {raw:?}"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}
