//! Command-line front end.
//!
//! Results go to stdout as JSON; files are written only when a path flag is
//! given (or for the scan CSV, which has a default path). Exit codes: 0 ok,
//! 1 invalid input, 2 numerical failure, 3 monotonicity violated.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::bipartite::{bipartite_e, BipartiteFrame};
use crate::error::{Error, Result};
use crate::format::round_sig;
use crate::io;
use crate::linalg::partial_trace_last;
use crate::locc_fuzz::{run_campaign, FuzzConfig, PovmSampler};
use crate::registry;
use crate::spinchain::{self, KinkMeasure};
use crate::states::{DensityMatrix, Party, RngSeed, StateShape};
use crate::tripartite::{concurrence, e_from_spectrum, tangle, TripartiteFrame};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_FUZZ_FAILED: i32 = 3;

pub const THREADS_ENV: &str = "ENTMONO_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "entmono",
    version,
    about = "Entanglement monotones, LOCC fuzzing and the XY-chain sweep"
)]
struct Cli {
    #[command(subcommand)]
    command: RawCommand,
}

#[derive(Debug, Subcommand)]
enum RawCommand {
    /// Bipartite monotone of a pure state (JSON array of rows).
    Bipartite {
        #[arg(long)]
        state: PathBuf,
        /// raw | bell | maxd:<D> | custom:<N>
        #[arg(long, default_value = "raw")]
        frame: String,
    },
    /// Genuine tripartite monotone of a 2x2xn state, or of a 4x4 reduced state.
    Tripartite {
        #[command(flatten)]
        input: TwoQubitInput,
        /// raw | max | custom:<N>
        #[arg(long, default_value = "raw")]
        frame: String,
        /// Spectrum route (see `entmono list`); state input only.
        #[arg(long)]
        route: Option<String>,
    },
    /// Wootters concurrence of rho_AB.
    Concurrence {
        #[command(flatten)]
        input: TwoQubitInput,
    },
    /// Residual tangle of a three-qubit pure state.
    Tangle {
        #[arg(long)]
        state: PathBuf,
    },
    /// XY-chain sweep: CSV of E and C versus lambda, kink summary on stdout.
    Spinchain {
        #[arg(long, default_value_t = 0.5)]
        lambda_min: f64,
        #[arg(long, default_value_t = 2.5)]
        lambda_max: f64,
        #[arg(long, default_value_t = 2001)]
        steps: usize,
        #[arg(long, default_value = "raw")]
        frame: String,
        #[arg(long, default_value = "spinchain.csv")]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Randomized LOCC monotonicity campaign.
    Fuzz {
        /// n1,n2 for bipartite or 2,2,n for tripartite states
        #[arg(long)]
        shape: String,
        /// Comma-separated subset of A,B,C (default: all parties of the shape)
        #[arg(long)]
        parties: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        frame: Option<String>,
        #[arg(long)]
        route: Option<String>,
        #[arg(long, default_value_t = crate::tolerances::MONOTONICITY)]
        tolerance: f64,
        /// Use unitaries disguised as POVMs instead of random POVMs.
        #[arg(long)]
        unitary_povms: bool,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, hide = true, default_value_t = 0.0)]
        tamper_branch_bias: f64,
    },
    /// Registered spectrum routes and measures.
    List,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct TwoQubitInput {
    /// 2x2xn pure state, nested [2][2][n]
    #[arg(long)]
    state: Option<PathBuf>,
    /// 4x4 density matrix, array of rows
    #[arg(long)]
    rho: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    State(PathBuf),
    Rho(PathBuf),
}

impl From<TwoQubitInput> for Input {
    fn from(i: TwoQubitInput) -> Self {
        match (i.state, i.rho) {
            (Some(p), _) => Input::State(p),
            (None, Some(p)) => Input::Rho(p),
            (None, None) => unreachable!("clap enforces one of --state / --rho"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
    pub frame: TripartiteFrame,
    pub out: PathBuf,
    pub svg: Option<PathBuf>,
}

/// A validated command.
#[derive(Debug, Clone)]
pub enum Command {
    BipartiteE {
        state: PathBuf,
        frame: BipartiteFrame,
    },
    TripartiteE {
        input: Input,
        frame: TripartiteFrame,
        route: String,
    },
    Concurrence {
        input: Input,
    },
    Tangle {
        state: PathBuf,
    },
    SpinchainScan(ScanOptions),
    Fuzz {
        config: FuzzConfig,
        report: Option<PathBuf>,
    },
    List,
}

/// Why parsing stopped: a usage error (exit 1) or help/version output (exit 0).
#[derive(Debug)]
pub struct UsageError {
    pub message: String,
    pub exit_code: i32,
}

fn usage(message: impl Into<String>) -> UsageError {
    UsageError {
        message: message.into(),
        exit_code: EXIT_INVALID,
    }
}

fn parse_parties(s: &str) -> Result<Vec<Party>> {
    let mut out: Vec<Party> = Vec::new();
    for tok in s.split(',').filter(|t| !t.trim().is_empty()) {
        let p: Party = tok.parse()?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<Command, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let exit_code = if e.use_stderr() {
            EXIT_INVALID
        } else {
            EXIT_OK
        };
        UsageError {
            message: e.render().to_string(),
            exit_code,
        }
    })?;
    let bad = |e: Error| usage(e.to_string());
    Ok(match cli.command {
        RawCommand::Bipartite { state, frame } => Command::BipartiteE {
            state,
            frame: frame.parse().map_err(bad)?,
        },
        RawCommand::Tripartite {
            input,
            frame,
            route,
        } => {
            let input = Input::from(input);
            if route.is_some() && matches!(input, Input::Rho(_)) {
                return Err(usage("--route needs a pure state (--state), not --rho"));
            }
            let route = route.unwrap_or_else(|| "m-svd".to_string());
            registry::spectrum_route(&route).map_err(bad)?;
            Command::TripartiteE {
                input,
                frame: frame.parse().map_err(bad)?,
                route,
            }
        }
        RawCommand::Concurrence { input } => Command::Concurrence {
            input: input.into(),
        },
        RawCommand::Tangle { state } => Command::Tangle { state },
        RawCommand::Spinchain {
            lambda_min,
            lambda_max,
            steps,
            frame,
            out,
            svg,
        } => {
            spinchain::grid(lambda_min, lambda_max, steps).map_err(bad)?;
            Command::SpinchainScan(ScanOptions {
                lambda_min,
                lambda_max,
                steps,
                frame: frame.parse().map_err(bad)?,
                out,
                svg,
            })
        }
        RawCommand::Fuzz {
            shape,
            parties,
            trials,
            seed,
            measure,
            frame,
            route,
            tolerance,
            unitary_povms,
            report,
            tamper_branch_bias,
        } => {
            let shape: StateShape = shape.parse().map_err(bad)?;
            let parties = match parties {
                Some(p) => parse_parties(&p).map_err(bad)?,
                None => match shape {
                    StateShape::Bipartite(..) => vec![Party::A, Party::B],
                    StateShape::Tripartite(_) => vec![Party::A, Party::B, Party::C],
                },
            };
            let mut config = FuzzConfig::new(shape, parties, trials, RngSeed(seed));
            config.measure = measure;
            config.frame = frame;
            config.route = route;
            config.tolerance = tolerance;
            config.sampler = if unitary_povms {
                PovmSampler::Unitary
            } else {
                PovmSampler::Random
            };
            config.branch_bias = tamper_branch_bias;
            config.validate().map_err(bad)?;
            Command::Fuzz { config, report }
        }
        RawCommand::List => Command::List,
    })
}

fn value_json(x: f64) -> String {
    json!({ "value": round_sig(x) }).to_string()
}

fn reduced_state(input: &Input) -> Result<DensityMatrix> {
    match input {
        Input::State(p) => partial_trace_last(&io::parse_tripartite(&io::read_to_string(p)?)?),
        Input::Rho(p) => io::parse_density(&io::read_to_string(p)?),
    }
}

fn kinks_json(kinks: &[spinchain::KinkReport]) -> serde_json::Value {
    kinks
        .iter()
        .map(|k| {
            json!({
                "location": round_sig(k.location),
                "jump": round_sig(k.jump),
                "bracket": [round_sig(k.bracket.0), round_sig(k.bracket.1)],
            })
        })
        .collect()
}

fn run_scan(opts: &ScanOptions, out: &mut dyn Write) -> Result<i32> {
    let records = spinchain::scan(opts.lambda_min, opts.lambda_max, opts.steps, opts.frame)?;
    let e_kinks = spinchain::detect_kinks(&records, KinkMeasure::E)?;
    let c_kinks = spinchain::detect_kinks(&records, KinkMeasure::C)?;
    io::write_atomic(&opts.out, spinchain::to_csv(&records).as_bytes())?;
    if let Some(svg) = &opts.svg {
        let all: Vec<_> = e_kinks.iter().chain(&c_kinks).copied().collect();
        io::write_atomic(svg, spinchain::to_svg(&records, &all).as_bytes())?;
    }
    let path = |p: &Path| p.display().to_string();
    let summary = json!({
        "rows": records.len(),
        "csv": path(&opts.out),
        "svg": opts.svg.as_deref().map(path),
        "kinks": { "E": kinks_json(&e_kinks), "C": kinks_json(&c_kinks) },
    });
    writeln!(out, "{summary}")?;
    Ok(EXIT_OK)
}

fn execute(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::BipartiteE { state, frame } => {
            let s = io::parse_bipartite(&io::read_to_string(state)?)?;
            writeln!(out, "{}", value_json(bipartite_e(&s, *frame)?))?;
        }
        Command::TripartiteE {
            input,
            frame,
            route,
        } => {
            let e = match input {
                Input::State(p) => {
                    let s = io::parse_tripartite(&io::read_to_string(p)?)?;
                    e_from_spectrum(&registry::spectrum_route(route)?.spectrum(&s)?, *frame)?
                }
                Input::Rho(_) => {
                    crate::tripartite::tripartite_e_from_rho(&reduced_state(input)?, *frame)?
                }
            };
            writeln!(out, "{}", value_json(e))?;
        }
        Command::Concurrence { input } => {
            writeln!(out, "{}", value_json(concurrence(&reduced_state(input)?)?))?;
        }
        Command::Tangle { state } => {
            let s = io::parse_tripartite(&io::read_to_string(state)?)?;
            writeln!(out, "{}", value_json(tangle(&s)?))?;
        }
        Command::SpinchainScan(opts) => return run_scan(opts, out),
        Command::Fuzz { config, report } => {
            let r = run_campaign(config)?;
            let text = r.to_json();
            if let Some(p) = report {
                io::write_atomic(p, format!("{text}\n").as_bytes())?;
            }
            writeln!(out, "{text}")?;
            return Ok(if r.passed { EXIT_OK } else { EXIT_FUZZ_FAILED });
        }
        Command::List => {
            let routes: Vec<_> = registry::spectrum_routes()
                .iter()
                .map(|r| json!({ "name": r.name(), "description": r.description() }))
                .collect();
            let listing = json!({ "routes": routes, "measures": registry::MEASURE_NAMES });
            writeln!(out, "{listing}")?;
        }
    }
    Ok(EXIT_OK)
}

/// Positive thread cap from `ENTMONO_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::InvalidParameter(format!("{THREADS_ENV}: {e}"))),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidParameter(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
    }
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

/// Runs a validated command, printing results to `out` and errors to stderr.
pub fn run_to(cmd: &Command, out: &mut dyn Write) -> i32 {
    let result = thread_cap().and_then(|cap| match cap {
        None => execute(cmd, out),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut buf = Vec::new();
            let code = pool.install(|| execute(cmd, &mut buf));
            out.write_all(&buf)?;
            code
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn run(cmd: &Command) -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_to(cmd, &mut lock)
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cmd) => run(&cmd),
        Err(u) => {
            if u.exit_code == EXIT_OK {
                print!("{}", u.message);
            } else {
                eprint!("{}", u.message);
            }
            u.exit_code
        }
    }
}
