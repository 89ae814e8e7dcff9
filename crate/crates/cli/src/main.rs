//! `qcoh`: coherence measures, channels and verification suites from the command line.
//!
//! Results go to stdout as JSON (one document, or one line per record);
//! diagnostics go to stderr. Exit codes: 0 success, 2 parse or usage error,
//! 3 invalid state or channel, 4 unknown or out-of-range generator,
//! 5 dimension mismatch, 6 verification failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcoh::channels::MeasurementOutcome;
use qcoh::coherence::{
    coherence, dephase, max_coherence, max_coherent_state, relative_entropy_coherence, Variant,
};
use qcoh::divergence::{f_entropy, f_entropy_hat, quasi_relative_entropy, ExtendedReal};
use qcoh::generator::{builtin_catalog, GeneratorFunction};
use qcoh::io::{load_channel, read_state, to_json, IoError, StateFile};
use qcoh::random::random_density;
use qcoh::verify::{run_suite, sio_counterexample_report, TrialConfig, SUITES};
use qcoh::Error;

#[derive(Parser)]
#[command(name = "qcoh", version, about = "Quasi-relative entropy coherence measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Plain,
    Hat,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Plain => Variant::Plain,
            VariantArg::Hat => Variant::Hat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Demo {
    LogChain,
    MaxCoherent,
    SioSeparation,
}

#[derive(Subcommand)]
enum Command {
    /// C_f (plain) or Ĉ_f (hat) of a state file.
    Coherence {
        state: PathBuf,
        #[arg(long = "f", default_value = "neg_log")]
        f: String,
        #[arg(long, value_enum, default_value = "plain")]
        variant: VariantArg,
    },
    /// S_f(A‖B) for two state files.
    Divergence {
        a: PathBuf,
        b: PathBuf,
        #[arg(long = "f", default_value = "neg_log")]
        f: String,
    },
    /// S_f (plain, reference I/d) or Ŝ_f (hat, reference I) of a state file.
    Entropy {
        state: PathBuf,
        #[arg(long = "f", default_value = "neg_log")]
        f: String,
        #[arg(long, value_enum, default_value = "plain")]
        variant: VariantArg,
    },
    /// Applies a channel (file or depol-ext:d, erase-ext:d, dephase:d) to a state file.
    Channel {
        channel: String,
        state: PathBuf,
        /// Print every outcome p_n and post-measurement state instead of the output state.
        #[arg(long)]
        selective: bool,
    },
    /// Runs verification suites and prints one JSON report per line.
    Verify {
        #[arg(long, default_value = "all", value_parser = suite_names())]
        suite: String,
        #[arg(long, env = "QCOH_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: Option<u64>,
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
        dims: Option<Vec<u64>>,
        #[arg(long = "f", value_delimiter = ',')]
        f: Option<Vec<String>>,
        /// Write the reports to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prints a worked example with pass/fail marks.
    Demo {
        #[arg(value_enum)]
        name: Demo,
        #[arg(long, env = "QCOH_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..=8))]
        dim: u64,
    },
}

fn suite_names() -> clap::builder::PossibleValuesParser {
    let mut names: Vec<&'static str> = SUITES.to_vec();
    names.push("all");
    clap::builder::PossibleValuesParser::new(names)
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Generator(String),
    #[error("{0}")]
    Dimension(String),
    #[error("{0} suite(s) failed")]
    SuiteFailed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Invalid(_) => 3,
            CliError::Generator(_) => 4,
            CliError::Dimension(_) => 5,
            CliError::SuiteFailed(_) => 6,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::DimensionMismatch { .. } => CliError::Dimension(msg),
            Error::UnknownGenerator(_) | Error::ParamOutOfRange { .. } => CliError::Generator(msg),
            Error::InvalidConfig(_) => CliError::Parse(msg),
            _ => CliError::Invalid(msg),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Invalid(inner) => CliError::Invalid(inner.to_string()),
            other => CliError::Parse(other.to_string()),
        }
    }
}

type CliResult = Result<(), CliError>;

fn generator(spec: &str) -> Result<GeneratorFunction, CliError> {
    spec.parse::<GeneratorFunction>()
        .map_err(|e| CliError::Generator(e.to_string()))
}

fn print_json<T: Serialize + ?Sized>(value: &T) {
    println!("{}", to_json(value));
}

fn cmd_coherence(state: &Path, f: &str, variant: Variant) -> CliResult {
    let f = generator(f)?;
    let rho = read_state(state)?;
    print_json(&coherence(&rho, &f, variant)?);
    Ok(())
}

#[derive(Serialize)]
struct ScalarOutput {
    f_name: String,
    value: ExtendedReal,
}

fn cmd_divergence(a: &Path, b: &Path, f: &str) -> CliResult {
    let f = generator(f)?;
    let a = read_state(a)?;
    let b = read_state(b)?;
    let value = quasi_relative_entropy(&a, &b, &f)?;
    print_json(&ScalarOutput { f_name: f.name(), value });
    Ok(())
}

#[derive(Serialize)]
struct EntropyOutput {
    f_name: String,
    variant: Variant,
    value: f64,
}

fn cmd_entropy(state: &Path, f: &str, variant: Variant) -> CliResult {
    let f = generator(f)?;
    let rho = read_state(state)?;
    let value = match variant {
        Variant::Plain => f_entropy(&rho, &f)?,
        Variant::Hat => f_entropy_hat(&rho, &f)?,
    };
    print_json(&EntropyOutput { f_name: f.name(), variant, value });
    Ok(())
}

#[derive(Serialize)]
struct OutcomeOutput {
    index: usize,
    probability: f64,
    post_state: Option<StateFile>,
}

impl From<&MeasurementOutcome> for OutcomeOutput {
    fn from(o: &MeasurementOutcome) -> Self {
        Self {
            index: o.index,
            probability: o.probability,
            post_state: o.post_state.as_ref().map(|s| StateFile::from_matrix(s.matrix())),
        }
    }
}

#[derive(Serialize)]
struct SelectiveOutput {
    outcomes: Vec<OutcomeOutput>,
}

fn cmd_channel(channel: &str, state: &Path, selective: bool) -> CliResult {
    let ch = load_channel(channel)?;
    let rho = read_state(state)?;
    if selective {
        let outcomes = ch.selective_outcomes(&rho)?;
        print_json(&SelectiveOutput {
            outcomes: outcomes.iter().map(OutcomeOutput::from).collect(),
        });
    } else {
        print_json(&StateFile::from_matrix(ch.apply(&rho)?.matrix()));
    }
    Ok(())
}

fn cmd_verify(
    suite: &str,
    seed: u64,
    trials: Option<u64>,
    dims: Option<Vec<u64>>,
    f: Option<Vec<String>>,
    out: Option<&Path>,
) -> CliResult {
    let mut cfg = TrialConfig { seed, ..TrialConfig::default() };
    if let Some(t) = trials {
        cfg.trials_per_case = t as usize;
    }
    if let Some(d) = dims {
        cfg.dims = d.into_iter().map(|d| d as usize).collect();
    }
    if let Some(f) = f {
        cfg.f_list = f;
    }
    cfg.validate()?;
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut lines = String::new();
    let mut failed = 0;
    for name in names {
        let report = run_suite(name, &cfg)?;
        eprintln!(
            "{}: {} (trials {}, worst violation {:.3e})",
            report.suite,
            if report.pass { "PASS" } else { "FAIL" },
            report.trials,
            report.worst_violation
        );
        if !report.pass {
            failed += 1;
        }
        lines.push_str(&to_json(&report));
        lines.push('\n');
    }
    match out {
        Some(path) => fs::write(path, &lines)
            .map_err(|e| CliError::Parse(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{lines}"),
    }
    if failed > 0 {
        return Err(CliError::SuiteFailed(failed));
    }
    Ok(())
}

#[derive(Serialize)]
struct LogChainRow {
    demo: &'static str,
    entropy_difference: f64,
    coherence_hat: f64,
    relative_entropy: ExtendedReal,
    pass: bool,
}

#[derive(Serialize)]
struct MaxCoherentRow {
    demo: &'static str,
    f_name: String,
    d: usize,
    plain: f64,
    plain_bound: f64,
    hat: f64,
    hat_bound: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SioRow {
    demo: &'static str,
    f_name: String,
    plain_gap: f64,
    hat_gap: f64,
    expected: &'static str,
    pass: bool,
}

fn cmd_demo(name: Demo, seed: u64, dim: usize) -> CliResult {
    let mut all_pass = true;
    match name {
        Demo::LogChain => {
            let rho = random_density(dim, dim, seed)?;
            let f = GeneratorFunction::neg_log();
            let entropy_difference = relative_entropy_coherence(&rho);
            let coherence_hat = coherence(&rho, &f, Variant::Hat)?.value;
            let relative_entropy = quasi_relative_entropy(&rho, &dephase(&rho), &f)?;
            let pass = (entropy_difference - coherence_hat).abs() <= 1e-8
                && (relative_entropy.to_f64() - coherence_hat).abs() <= 1e-8;
            all_pass &= pass;
            print_json(&LogChainRow {
                demo: "log-chain",
                entropy_difference,
                coherence_hat,
                relative_entropy,
                pass,
            });
        }
        Demo::MaxCoherent => {
            let psi = max_coherent_state(dim).as_density();
            for f in builtin_catalog() {
                let plain = coherence(&psi, &f, Variant::Plain)?.value;
                let hat = coherence(&psi, &f, Variant::Hat)?.value;
                let plain_bound = max_coherence(&f, dim, Variant::Plain);
                let hat_bound = max_coherence(&f, dim, Variant::Hat);
                let pass = (plain - plain_bound).abs() <= 1e-10 && (hat - hat_bound).abs() <= 1e-10;
                all_pass &= pass;
                print_json(&MaxCoherentRow {
                    demo: "max-coherent",
                    f_name: f.name(),
                    d: dim,
                    plain,
                    plain_bound,
                    hat,
                    hat_bound,
                    pass,
                });
            }
        }
        Demo::SioSeparation => {
            let plus = max_coherent_state(2).as_density();
            for f in builtin_catalog() {
                let report = sio_counterexample_report(&f, 2, Some(&plus))?;
                let is_log = f == GeneratorFunction::neg_log();
                let pass = if is_log { report.gap() <= 1e-10 } else { report.gap() > 0.01 };
                all_pass &= pass;
                print_json(&SioRow {
                    demo: "sio-separation",
                    f_name: f.name(),
                    plain_gap: report.plain.gap,
                    hat_gap: report.hat.gap,
                    expected: if is_log { "equal" } else { "separated" },
                    pass,
                });
            }
        }
    }
    if !all_pass {
        eprintln!("demo check failed");
        return Err(CliError::SuiteFailed(1));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Coherence { state, f, variant } => cmd_coherence(&state, &f, variant.into()),
        Command::Divergence { a, b, f } => cmd_divergence(&a, &b, &f),
        Command::Entropy { state, f, variant } => cmd_entropy(&state, &f, variant.into()),
        Command::Channel { channel, state, selective } => cmd_channel(&channel, &state, selective),
        Command::Verify { suite, seed, trials, dims, f, out } => {
            cmd_verify(&suite, seed, trials, dims, f, out.as_deref())
        }
        Command::Demo { name, seed, dim } => cmd_demo(name, seed, dim as usize),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcoh: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
