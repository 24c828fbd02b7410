//! `sldc` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 search cap exceeded, 4 malformed
//! container, 5 I/O error, 6 verification failure, 1 any other
//! computational error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sldc::bench::{exhaustive_verify, mc_expected_length, scaling_experiment};
use sldc::bounds::bounds_report;
use sldc::speedlimit::{protocol_cost_experiment, run_protocol};
use sldc::{
    parse_codeword, serialize_codeword, BoundsReport, CodeParams, Codebook, ContainerError, ExhaustiveReport,
    LengthStats, ProtocolCost, ScalingFit, SparseSeq,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sldc::Error),
    #[error("container: {0}")]
    Container(#[from] ContainerError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(sldc::Error::QueryOutOfRange { .. } | sldc::Error::InvalidParams(_)) => 2,
            CliError::Core(sldc::Error::InvalidSequence(_)) => 2,
            CliError::Core(sldc::Error::SearchCapExceeded { .. } | sldc::Error::TrialsOverflowed { .. }) => 3,
            CliError::Container(_) => 4,
            CliError::Io(_) => 5,
            CliError::VerifyFailed => 6,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "sldc", version, about = "Locally decodable compression of sparse bit vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct CodeArgs {
    /// Sequence length in bits.
    #[arg(long)]
    n: u64,
    /// Number of ones.
    #[arg(long)]
    r: u32,
    /// Probe budget per query.
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Level search cap; defaults to max(64, 8 * ceil(upper bound)).
    #[arg(long)]
    kmax: Option<u64>,
}

impl CodeArgs {
    fn params(&self) -> CliResult<CodeParams> {
        Ok(match self.kmax {
            Some(k) => CodeParams::with_k_max(self.n, self.r, self.d, self.seed, k)?,
            None => CodeParams::new(self.n, self.r, self.d, self.seed)?,
        })
    }
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode a support list (whitespace-separated 1-based indices) into a container.
    Encode {
        #[arg(long)]
        n: u64,
        /// Defaults to the number of indices read.
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        d: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        kmax: Option<u64>,
        /// Support list file; stdin when absent or "-".
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode one bit of a container and show the probe trace.
    Query {
        container: PathBuf,
        /// 1-based source index.
        #[arg(long)]
        j: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Decode a container back to its support list.
    Decode {
        container: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower and upper bounds on the expected codeword length.
    Bounds {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        d: u32,
        /// Allowed block error probability.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Experiments: Monte Carlo length, scaling fit, exhaustive sweep.
    Bench {
        #[command(subcommand)]
        kind: BenchKind,
    },
    /// Membership protocol under a speed limit.
    Speedlimit {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Seed for trial sampling; defaults to --seed.
        #[arg(long)]
        trial_seed: Option<u64>,
        /// Run a single query against this set instead of the experiment.
        #[arg(long)]
        set: Option<String>,
        /// Query index for --set.
        #[arg(long)]
        i: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Exhaustively check zero-error decoding of an instance.
    Verify {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Subcommand)]
enum BenchKind {
    /// Mean codeword length over random sparse inputs.
    Mc {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        trial_seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Log-log slope of mean length against n.
    Scaling {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        d: u32,
        /// Comma-separated ascending sequence lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<u64>,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Same check as `verify`.
    Exhaustive {
        #[command(flatten)]
        code: CodeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Runs one invocation; returns the process exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command, stdin, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "sldc: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, stdin: &mut dyn Read, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Encode { n, r, d, seed, kmax, input, out } => {
            let text = match input {
                Some(p) if p.as_os_str() != "-" => fs::read_to_string(p)?,
                _ => {
                    let mut s = String::new();
                    stdin.read_to_string(&mut s)?;
                    s
                }
            };
            let support = parse_support(&text)?;
            let r = match r {
                Some(r) if r as usize != support.len() => {
                    return Err(CliError::Usage(format!("--r {r} but {} indices were given", support.len())))
                }
                Some(r) => r,
                None => support.len() as u32,
            };
            let code = CodeArgs { n, r, d, seed, kmax };
            let params = code.params()?;
            let x = SparseSeq::from_unsorted(n, support)?;
            let c = Codebook::new(params).encode(&x)?;
            fs::write(out, serialize_codeword(&params, &c))?;
            Ok(())
        }
        Command::Query { container, j, format } => {
            let (params, c) = read_container(&container)?;
            let (_, trace) = Codebook::new(params).decode_bit(&c, j)?;
            match format {
                Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&trace)?)?,
                Format::Text => writeln!(
                    stdout,
                    "x[{}] = {}  (level {}, probed {:?} -> {:?})",
                    trace.query, trace.decoded as u8, trace.level, trace.positions, trace.values
                )?,
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        query: u64,
                        level: u64,
                        decoded: u8,
                        probes: usize,
                        positions: String,
                        values: String,
                    }
                    let join = |v: Vec<String>| v.join(" ");
                    write_csv(
                        stdout,
                        [Row {
                            query: trace.query,
                            level: trace.level,
                            decoded: trace.decoded as u8,
                            probes: trace.positions.len(),
                            positions: join(trace.positions.iter().map(u64::to_string).collect()),
                            values: join(trace.values.iter().map(|&b| (b as u8).to_string()).collect()),
                        }],
                    )?
                }
            }
            Ok(())
        }
        Command::Decode { container, out } => {
            let (params, c) = read_container(&container)?;
            let x = Codebook::new(params).decode_full(&c)?;
            let mut text = x.support().iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
            text.push('\n');
            match out {
                Some(p) => fs::write(p, text)?,
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(())
        }
        Command::Bounds { n, r, d, eps, out } => {
            let rep: BoundsReport = bounds_report(n, r, d, eps)?;
            emit(&out, stdout, &rep, || {
                #[derive(Serialize)]
                struct Row {
                    n: u64,
                    r: u32,
                    d: u32,
                    eps: f64,
                    entropy_bits: f64,
                    lower_thm1: f64,
                    #[serde(rename = "M")]
                    m: Option<u64>,
                    lower_lym: Option<f64>,
                    upper_thm2: f64,
                }
                vec![Row {
                    n,
                    r,
                    d,
                    eps,
                    entropy_bits: rep.entropy_bits,
                    lower_thm1: rep.lower_thm1,
                    m: rep.m,
                    lower_lym: rep.lower_lym,
                    upper_thm2: rep.upper_thm2,
                }]
            })
        }
        Command::Bench { kind } => bench(kind, stdout),
        Command::Speedlimit { code, trials, trial_seed, set, i, out } => {
            let params = code.params()?;
            match (set, i) {
                (Some(set), Some(i)) => {
                    let s = SparseSeq::from_unsorted(params.n, parse_support(&set)?)?;
                    let tr = run_protocol(&params, &s, i)?;
                    let mut w = sink(&out, stdout)?;
                    match out.format {
                        Format::Text => writeln!(w, "{tr}")?,
                        _ => writeln!(w, "{}", serde_json::to_string_pretty(&tr)?)?,
                    }
                    Ok(())
                }
                (None, None) => {
                    let cost: ProtocolCost = protocol_cost_experiment(&params, trials, trial_seed.unwrap_or(code.seed))?;
                    emit(&out, stdout, &cost, || vec![cost.clone()])
                }
                _ => Err(CliError::Usage("--set and --i must be given together".into())),
            }
        }
        Command::Verify { code, out } => {
            let rep: ExhaustiveReport = exhaustive_verify(&code.params()?)?;
            emit(&out, stdout, &rep, || vec![rep.clone()])?;
            if rep.passed() {
                Ok(())
            } else {
                Err(CliError::VerifyFailed)
            }
        }
    }
}

fn bench(kind: BenchKind, stdout: &mut dyn Write) -> CliResult<()> {
    match kind {
        BenchKind::Mc { code, trials, trial_seed, out } => {
            let params = code.params()?;
            let stats: LengthStats = mc_expected_length(&params, trials, trial_seed.unwrap_or(code.seed))?;
            emit(&out, stdout, &stats, || {
                #[derive(Serialize)]
                struct Row {
                    n: u64,
                    r: u32,
                    d: u32,
                    seed: u64,
                    trials: u64,
                    mean: f64,
                    stddev: f64,
                    ci95_halfwidth: f64,
                    min: u64,
                    max: u64,
                }
                vec![Row {
                    n: code.n,
                    r: code.r,
                    d: code.d,
                    seed: code.seed,
                    trials,
                    mean: stats.mean,
                    stddev: stats.stddev,
                    ci95_halfwidth: stats.ci95_halfwidth,
                    min: stats.min,
                    max: stats.max,
                }]
            })
        }
        BenchKind::Scaling { r, d, n_grid, trials, seed, out } => {
            let fit: ScalingFit = scaling_experiment(r, d, &n_grid, trials, seed)?;
            emit(&out, stdout, &fit, || {
                #[derive(Serialize)]
                struct Row {
                    r: u32,
                    d: u32,
                    n: u64,
                    trials: u64,
                    mean: f64,
                    ci95_halfwidth: f64,
                    log2_n: f64,
                    log2_mean: f64,
                    slope: f64,
                }
                fit.points
                    .iter()
                    .map(|p| Row {
                        r,
                        d,
                        n: p.n,
                        trials,
                        mean: p.mean,
                        ci95_halfwidth: p.ci95_halfwidth,
                        log2_n: p.log2_n,
                        log2_mean: p.log2_mean,
                        slope: fit.slope,
                    })
                    .collect()
            })
        }
        BenchKind::Exhaustive { code, out } => {
            let rep: ExhaustiveReport = exhaustive_verify(&code.params()?)?;
            emit(&out, stdout, &rep, || vec![rep.clone()])
        }
    }
}

fn parse_support(text: &str) -> CliResult<Vec<u64>> {
    text.split_whitespace()
        .map(|t| t.parse::<u64>().map_err(|_| CliError::Usage(format!("not an index: {t:?}"))))
        .collect()
}

fn read_container(path: &PathBuf) -> CliResult<(CodeParams, sldc::Codeword)> {
    let bytes = fs::read(path)?;
    let (header, c) = parse_codeword(&bytes)?;
    Ok((header.params()?, c))
}

fn sink<'a>(out: &OutArgs, stdout: &'a mut dyn Write) -> CliResult<Box<dyn Write + 'a>> {
    Ok(match &out.out {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(stdout),
    })
}

fn write_csv<R: Serialize>(w: &mut dyn Write, rows: impl IntoIterator<Item = R>) -> CliResult<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes `value` as JSON, or `rows()` as CSV with a header row.
fn emit<T: Serialize, R: Serialize>(
    out: &OutArgs,
    stdout: &mut dyn Write,
    value: &T,
    rows: impl FnOnce() -> Vec<R>,
) -> CliResult<()> {
    let mut w = sink(out, stdout)?;
    match out.format {
        Format::Csv => write_csv(&mut *w, rows()),
        Format::Json => {
            writeln!(w, "{}", serde_json::to_string_pretty(value)?)?;
            Ok(())
        }
        Format::Text => write_text(&mut *w, &serde_json::to_value(value)?),
    }
}

// One `key: value` line per field; nested values stay as compact JSON.
fn write_text(w: &mut dyn Write, value: &serde_json::Value) -> CliResult<()> {
    match value {
        serde_json::Value::Object(map) => {
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (k, v) in map {
                match v {
                    serde_json::Value::String(s) => writeln!(w, "{k:<width$}  {s}")?,
                    other => writeln!(w, "{k:<width$}  {other}")?,
                }
            }
        }
        other => writeln!(w, "{other}")?,
    }
    Ok(())
}
