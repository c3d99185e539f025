//! The `wiretap` command-line front end.
//!
//! Every subcommand is a thin composition over the library: file I/O
//! and flag plumbing here, numbers elsewhere. Exit codes: 0 on success,
//! 1 on validation problems (bad flags, missing or malformed files,
//! cap breaches), 2 on numeric failure (an identity-suite residual
//! breach or a non-converging optimization).
//!
//! Identical argv and seeds produce byte-identical outputs. Values are
//! stored and computed in nats; `--bits` only rescales what is printed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::identities::{run_suite, SuiteConfig};
use crate::probkit::{Channel, Dist};
use crate::quantkit::DensityMatrix;
use crate::region::{
    channel_coding_capacity, sample_region, secrecy_capacity, AuxiliaryModel, OptimizerConfig,
    RatePoint, SamplerConfig,
};
use crate::simulate::{
    build_codebook, estimate_error, exact_equivocation, DecoderConfig, MonteCarloConfig,
};

const EXIT_OK: i32 = 0;
const EXIT_VALIDATION: i32 = 1;
const EXIT_NUMERIC: i32 = 2;

#[derive(Parser)]
#[command(
    name = "wiretap",
    about = "Capacity regions and coding experiments for classical and quantum wiretap channels",
    long_about = None,
    after_help = "\
FILE FORMATS
  distribution  {\"axes\":[{\"name\":..,\"labels\":[..]}],\"weights\":[..]} (row-major, axis order)
  channel       {\"schema_version\":1,\"input_axes\":[..],\"output_axes\":[..],\"rows\":[[..],..]}
  density       {\"factors\":[..],\"re\":[[..]],\"im\":[[..]]}
  auxiliary     {\"schema_version\":1,\"dist_u\":..,\"chan_v_given_u\":..,\"chan_x_given_v\":..}

CSV CONTRACTS
  region samples   sample,i_diff,i_v,i_yu,i_zu
  region vertices  r_e,r_s,r_t
  simulate         n,trials,p_err,ci_low,ci_high

All informations are in nats unless --bits is given (display only).
WIRETAP_THREADS caps the worker thread count (default: all cores)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy of (a marginal of) a stored distribution or density matrix
    Entropy(EntropyArgs),
    /// Run the chain-rule identity suite on seeded random models
    Verify(VerifyArgs),
    /// Sample auxiliary models and report their rate-region constraints
    Region(RegionArgs),
    /// Optimize the secrecy rate (or --shannon for plain coding capacity)
    Capacity(CapacityArgs),
    /// Monte Carlo decoding-error estimates over block lengths
    Simulate(SimulateArgs),
    /// Exact per-letter equivocation of a seeded codebook
    Equivocation(EquivocationArgs),
}

#[derive(Args)]
struct EntropyArgs {
    /// Distribution JSON file
    #[arg(long, conflicts_with = "density")]
    dist: Option<PathBuf>,
    /// Density-matrix JSON file
    #[arg(long)]
    density: Option<PathBuf>,
    /// Variables to keep (comma separated; default: all)
    #[arg(long, value_delimiter = ',')]
    vars: Vec<String>,
    /// Conditioning variables (comma separated)
    #[arg(long, value_delimiter = ',')]
    given: Vec<String>,
    /// Display in bits instead of nats
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random classical wiretap models
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Number of random density-matrix models
    #[arg(long, default_value_t = 100)]
    quantum_cases: usize,
    /// Largest block length of the random models
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    /// Largest classical alphabet size
    #[arg(long, default_value_t = 3)]
    max_alphabet: usize,
    /// Largest quantum block length (qubit factors)
    #[arg(long, default_value_t = 2)]
    max_quantum_n: usize,
    /// Write the JSONL report stream here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RegionArgs {
    /// Wiretap channel JSON (two output axes)
    #[arg(long)]
    channel: PathBuf,
    /// Auxiliary alphabet size for u (default: |X| + 3)
    #[arg(long)]
    nu: Option<usize>,
    /// Auxiliary alphabet size for v (default: |X| (|X|+4) + 3)
    #[arg(long)]
    nv: Option<usize>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-sample CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the hull vertex CSV here
    #[arg(long)]
    vertices: Option<PathBuf>,
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct CapacityArgs {
    /// Channel JSON: two output axes for secrecy, one for --shannon
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long)]
    nv: Option<usize>,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plain channel-coding capacity of a single-output channel
    #[arg(long)]
    shannon: bool,
    /// Write the maximizing auxiliary model JSON here
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[arg(long)]
    bits: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Auxiliary model JSON used as the codebook generator
    #[arg(long)]
    aux: PathBuf,
    /// Equivocation rate (nats per use)
    #[arg(long)]
    re: f64,
    /// Secret-message rate
    #[arg(long)]
    rs: f64,
    /// Shared-message rate
    #[arg(long)]
    rt: f64,
    /// Block lengths, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit secret-message count (overrides round(exp(n rs)))
    #[arg(long, requires = "nt")]
    ns: Option<usize>,
    /// Explicit shared-message count
    #[arg(long, requires = "ns")]
    nt: Option<usize>,
    /// Reuse a single codebook for all trials
    #[arg(long)]
    fix_codebook: bool,
    /// Drop the equivocation family from the decoder tests
    #[arg(long)]
    no_equivocation_test: bool,
    /// Write the summary CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one JSON line per trial here
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Args)]
struct EquivocationArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long)]
    aux: PathBuf,
    /// Block length
    #[arg(long)]
    n: usize,
    /// Secret-message count
    #[arg(long)]
    ns: usize,
    /// Shared-message count
    #[arg(long)]
    nt: usize,
    /// Codebook seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    bits: bool,
}

/// Entry point used by the binary: reads argv and the thread-count
/// environment variable.
pub fn run_from_env() -> i32 {
    if let Ok(threads) = std::env::var("WIRETAP_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
    }
    run(std::env::args())
}

/// Parses and executes an argv; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help/version as "errors" with success status.
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Entropy(a) => cmd_entropy(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Region(a) => cmd_region(a),
        Command::Capacity(a) => cmd_capacity(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Equivocation(a) => cmd_equivocation(a),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            EXIT_VALIDATION
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            EXIT_NUMERIC
        }
    }
}

enum CliError {
    Validation(String),
    Numeric(String),
}

type CliResult = std::result::Result<i32, CliError>;

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {what} `{}`: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("malformed {what} `{}`: {e}", path.display())))
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| CliError::Validation(format!("cannot write `{}`: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn scale(bits: bool) -> f64 {
    if bits {
        1.0 / std::f64::consts::LN_2
    } else {
        1.0
    }
}

fn unit(bits: bool) -> &'static str {
    if bits {
        "bits"
    } else {
        "nats"
    }
}

fn cmd_entropy(a: EntropyArgs) -> CliResult {
    let vars: Vec<&str> = a.vars.iter().map(String::as_str).collect();
    let given: Vec<&str> = a.given.iter().map(String::as_str).collect();
    let value = if let Some(path) = &a.dist {
        let d: Dist = load_json(path, "distribution")?;
        let keep: Vec<&str> = if vars.is_empty() { d.axis_names() } else { vars.clone() };
        if given.is_empty() {
            d.marginal(&keep).map_err(validation)?.entropy()
        } else {
            crate::probkit::conditional_entropy(&d, &keep, &given).map_err(validation)?
        }
    } else if let Some(path) = &a.density {
        let rho: DensityMatrix = load_json(path, "density matrix")?;
        let all: Vec<String> = rho.factors().iter().map(|f| f.name.clone()).collect();
        let keep: Vec<&str> =
            if vars.is_empty() { all.iter().map(String::as_str).collect() } else { vars.clone() };
        if given.is_empty() {
            rho.partial_trace(&keep).map_err(validation)?.von_neumann_entropy()
        } else {
            crate::probkit::conditional_entropy(&rho, &keep, &given).map_err(validation)?
        }
    } else {
        return Err(CliError::Validation("pass --dist or --density".into()));
    };
    println!("{} {}", value * scale(a.bits), unit(a.bits));
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs) -> CliResult {
    if a.cases == 0 && a.quantum_cases == 0 {
        return Err(CliError::Validation("nothing to verify: both case counts are zero".into()));
    }
    let cfg = SuiteConfig {
        seed: a.seed,
        classical_cases: a.cases,
        quantum_cases: a.quantum_cases,
        max_n: a.max_n.clamp(1, 4),
        max_alphabet: a.max_alphabet.clamp(2, 4),
        max_quantum_n: a.max_quantum_n.clamp(1, 2),
    };
    let reports = run_suite(&cfg).map_err(validation)?;
    let mut out = String::new();
    let mut failed = 0usize;
    for r in &reports {
        let _ = writeln!(out, "{}", r.to_json_line());
        if !r.passed {
            failed += 1;
        }
    }
    write_output(&a.out, &out)?;
    eprintln!("{} checks, {} failed", reports.len(), failed);
    if failed > 0 {
        Err(CliError::Numeric(format!("{failed} identity checks exceeded tolerance")))
    } else {
        Ok(EXIT_OK)
    }
}

/// The default auxiliary cardinalities are polynomial in the input
/// size; adequacy of these particular defaults is configuration, not a
/// verified claim.
fn default_sizes(channel: &Channel, nu: Option<usize>, nv: Option<usize>) -> (usize, usize) {
    let n_x = channel.input_size();
    (nu.unwrap_or(n_x + 3), nv.unwrap_or(n_x * (n_x + 4) + 3))
}

fn cmd_region(a: RegionArgs) -> CliResult {
    let channel: Channel = load_json(&a.channel, "channel")?;
    let (n_u, n_v) = default_sizes(&channel, a.nu, a.nv);
    let cfg = SamplerConfig { samples: a.samples, seed: a.seed, concentration: 1.0 };
    let sample = sample_region(&channel, n_u, n_v, &cfg).map_err(validation)?;
    let s = scale(a.bits);

    let mut csv = String::from("sample,i_diff,i_v,i_yu,i_zu\n");
    for (i, c) in sample.constraints.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{i},{},{},{},{}",
            c.i_diff * s,
            c.i_v * s,
            c.i_yu * s,
            c.i_zu * s
        );
    }
    write_output(&a.out, &csv)?;

    let mut vcsv = String::from("r_e,r_s,r_t\n");
    for v in &sample.hull_vertices {
        let _ = writeln!(vcsv, "{},{},{}", v.r_e * s, v.r_s * s, v.r_t * s);
    }
    match &a.vertices {
        Some(_) => write_output(&a.vertices, &vcsv)?,
        None => {
            if a.out.is_some() {
                print!("{vcsv}");
            } else {
                eprintln!(
                    "({} hull vertices; use --vertices to write them)",
                    sample.hull_vertices.len()
                );
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_capacity(a: CapacityArgs) -> CliResult {
    let channel: Channel = load_json(&a.channel, "channel")?;
    let s = scale(a.bits);
    if a.shannon {
        let c = channel_coding_capacity(&channel, 1e-12)
            .map_err(|e| CliError::Numeric(e.to_string()))?;
        println!("{} {}", c * s, unit(a.bits));
        return Ok(EXIT_OK);
    }
    let (n_u, n_v) = default_sizes(&channel, a.nu, a.nv);
    let cfg = OptimizerConfig { restarts: a.restarts, seed: a.seed, ..Default::default() };
    let result =
        secrecy_capacity(&channel, n_u, n_v, &cfg).map_err(|e| CliError::Numeric(e.to_string()))?;
    let spread = result
        .restart_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!("{} {}", result.value * s, unit(a.bits));
    eprintln!(
        "restarts: {} in [{}, {}]",
        result.restart_values.len(),
        spread.0 * s,
        spread.1 * s
    );
    if let Some(path) = &a.model_out {
        let json = serde_json::to_string_pretty(&result.argmax)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        std::fs::write(path, json)
            .map_err(|e| CliError::Validation(format!("cannot write `{}`: {e}", path.display())))?;
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    let channel: Channel = load_json(&a.channel, "channel")?;
    let aux: AuxiliaryModel = load_json(&a.aux, "auxiliary model")?;
    let rates = RatePoint::new(a.re, a.rs, a.rt).map_err(validation)?;
    let counts = match (a.ns, a.nt) {
        (Some(ns), Some(nt)) => Some((ns, nt)),
        _ => None,
    };
    let mut csv = String::from("n,trials,p_err,ci_low,ci_high\n");
    let mut jsonl = String::new();
    for &n in &a.n {
        if n == 0 {
            return Err(CliError::Validation("block length must be positive".into()));
        }
        let cfg = MonteCarloConfig {
            trials: a.trials,
            seed: a.seed,
            counts,
            fix_codebook: a.fix_codebook,
            collect_trials: a.jsonl.is_some(),
            decoder: DecoderConfig { include_equivocation_test: !a.no_equivocation_test },
        };
        let est = estimate_error(&channel, &aux, &rates, n, &cfg).map_err(validation)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            est.n, est.trials, est.p_err, est.ci_low, est.ci_high
        );
        for rec in &est.trial_log {
            let mut line = serde_json::to_string(rec).expect("record serializes");
            line.insert_str(line.len() - 1, &format!(",\"n\":{n}"));
            let _ = writeln!(jsonl, "{line}");
        }
    }
    write_output(&a.out, &csv)?;
    if a.jsonl.is_some() {
        write_output(&a.jsonl, &jsonl)?;
    }
    Ok(EXIT_OK)
}

fn cmd_equivocation(a: EquivocationArgs) -> CliResult {
    let channel: Channel = load_json(&a.channel, "channel")?;
    let aux: AuxiliaryModel = load_json(&a.aux, "auxiliary model")?;
    let cb = build_codebook(&aux, a.n, a.ns, a.nt, a.seed).map_err(validation)?;
    let eq = exact_equivocation(&cb, &channel).map_err(validation)?;
    println!("{} {}", eq * scale(a.bits), unit(a.bits));
    Ok(EXIT_OK)
}
