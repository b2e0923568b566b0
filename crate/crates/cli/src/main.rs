use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use refjump::Executor;
use refjump_cli::config::{from_table, parse_document, set_key};
use refjump_cli::run::emit;
use refjump_cli::{CliError, ExperimentConfig, RunKind};
use toml::{Table, Value};

#[derive(Parser)]
#[command(name = "refjump", version, about = "Reflected jump-diffusion laboratory")]
struct Cli {
    /// Experiment config document (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed of the counter-based random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Primary output format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Process preset: drifted-rbm, exponential-jumps or ou.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Numerics {
    /// Euler step.
    #[arg(long)]
    dt: Option<f64>,
    /// Number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<i64>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal Lyapunov exponent and rate constants.
    Certificate {
        /// Wasserstein order, at least 1.
        #[arg(long)]
        p: Option<f64>,
        /// Evaluate at this exponent instead of optimizing.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Sample paths as CSV (path_id, t, x, ell).
    Simulate {
        /// Starting point.
        #[arg(long)]
        x0: Option<f64>,
        /// Simulation horizon.
        #[arg(long)]
        t_max: Option<f64>,
        /// Emit every n-th grid point.
        #[arg(long)]
        stride: Option<i64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Synchronously coupled pairs as CSV.
    Couple {
        /// Starting point of the first copy.
        #[arg(long)]
        x1: Option<f64>,
        /// Starting point of the second copy.
        #[arg(long)]
        x2: Option<f64>,
        /// Simulation horizon.
        #[arg(long)]
        t_max: Option<f64>,
        /// Emit every n-th grid point.
        #[arg(long)]
        stride: Option<i64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Wasserstein decay between two starting points.
    Decay {
        /// Starting point of the first copy.
        #[arg(long)]
        x1: Option<f64>,
        /// Starting point of the second copy.
        #[arg(long)]
        x2: Option<f64>,
        /// Comma-separated observation times.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        /// Wasserstein order, at least 1.
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Path-space decay over windows.
    PathDecay {
        /// Starting point of the first copy.
        #[arg(long)]
        x1: Option<f64>,
        /// Starting point of the second copy.
        #[arg(long)]
        x2: Option<f64>,
        /// Comma-separated windows `t:t_end`.
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<String>>,
        /// Wasserstein order, at least 1.
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Distance to a stationary ensemble.
    Stationary {
        /// Starting point of the transient ensemble.
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        /// Burn-in time or `auto`.
        #[arg(long)]
        burn_in: Option<String>,
        /// Wasserstein order, at least 1.
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Coupling invariants, gap contraction and the supermartingale probe.
    Verify {
        /// Starting point of the first copy.
        #[arg(long)]
        x1: Option<f64>,
        /// Starting point of the second copy.
        #[arg(long)]
        x2: Option<f64>,
        /// Simulation horizon.
        #[arg(long)]
        t_max: Option<f64>,
        /// Horizon of the supermartingale probe.
        #[arg(long)]
        probe_time: Option<f64>,
        #[command(flatten)]
        numerics: Numerics,
    },
    /// Reproduce the worked examples with golden verdicts.
    Examples {
        #[command(flatten)]
        numerics: Numerics,
    },
}

type Overrides = Vec<(&'static str, Value)>;

fn float(out: &mut Overrides, key: &'static str, v: Option<f64>) {
    if let Some(v) = v {
        out.push((key, Value::Float(v)));
    }
}

fn int(out: &mut Overrides, key: &'static str, v: Option<i64>) {
    if let Some(v) = v {
        out.push((key, Value::Integer(v)));
    }
}

fn floats(out: &mut Overrides, key: &'static str, v: Option<Vec<f64>>) {
    if let Some(v) = v {
        out.push((key, Value::Array(v.into_iter().map(Value::Float).collect())));
    }
}

fn numerics(out: &mut Overrides, n: Numerics) {
    float(out, "numerics.dt", n.dt);
    int(out, "numerics.paths", n.paths);
}

fn parse_windows(spec: Vec<String>) -> Result<Value, CliError> {
    spec.iter()
        .map(|w| {
            let (a, b) = w.split_once(':').ok_or_else(|| CliError::Config(format!("window {w:?} is not t:t_end")))?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("window {w:?} is not numeric")))
            };
            Ok(Value::Array(vec![Value::Float(parse(a)?), Value::Float(parse(b)?)]))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Value::Array)
}

impl Command {
    fn kind(&self) -> RunKind {
        match self {
            Command::Certificate { .. } => RunKind::Certificate,
            Command::Simulate { .. } => RunKind::Simulate,
            Command::Couple { .. } => RunKind::Couple,
            Command::Decay { .. } => RunKind::Decay,
            Command::PathDecay { .. } => RunKind::PathDecay,
            Command::Stationary { .. } => RunKind::Stationary,
            Command::Verify { .. } => RunKind::Verify,
            Command::Examples { .. } => RunKind::Examples,
        }
    }

    fn overrides(self) -> Result<Overrides, CliError> {
        let mut o = vec![("run.kind", Value::String(self.kind().name().into()))];
        match self {
            Command::Certificate { p, lambda } => {
                float(&mut o, "run.p", p);
                float(&mut o, "run.lambda", lambda);
            }
            Command::Simulate { x0, t_max, stride, numerics: n } => {
                float(&mut o, "run.x0", x0);
                float(&mut o, "numerics.t_max", t_max);
                int(&mut o, "run.stride", stride);
                numerics(&mut o, n);
            }
            Command::Couple { x1, x2, t_max, stride, numerics: n } => {
                float(&mut o, "run.x1", x1);
                float(&mut o, "run.x2", x2);
                float(&mut o, "numerics.t_max", t_max);
                int(&mut o, "run.stride", stride);
                numerics(&mut o, n);
            }
            Command::Decay { x1, x2, times, p, numerics: n } => {
                float(&mut o, "run.x1", x1);
                float(&mut o, "run.x2", x2);
                floats(&mut o, "run.times", times);
                float(&mut o, "run.p", p);
                numerics(&mut o, n);
            }
            Command::PathDecay { x1, x2, windows, p, numerics: n } => {
                float(&mut o, "run.x1", x1);
                float(&mut o, "run.x2", x2);
                if let Some(w) = windows {
                    o.push(("run.windows", parse_windows(w)?));
                }
                float(&mut o, "run.p", p);
                numerics(&mut o, n);
            }
            Command::Stationary { x, times, burn_in, p, numerics: n } => {
                float(&mut o, "run.x", x);
                floats(&mut o, "run.times", times);
                if let Some(b) = burn_in {
                    let value = match b.parse::<f64>() {
                        Ok(t) => Value::Float(t),
                        Err(_) => Value::String(b),
                    };
                    o.push(("numerics.burn_in", value));
                }
                float(&mut o, "run.p", p);
                numerics(&mut o, n);
            }
            Command::Verify { x1, x2, t_max, probe_time, numerics: n } => {
                float(&mut o, "run.x1", x1);
                float(&mut o, "run.x2", x2);
                float(&mut o, "numerics.t_max", t_max);
                float(&mut o, "run.probe_time", probe_time);
                numerics(&mut o, n);
            }
            Command::Examples { numerics: n } => numerics(&mut o, n),
        }
        Ok(o)
    }
}

fn load(cli: Cli) -> Result<(ExperimentConfig, usize), CliError> {
    let mut doc = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_document(&text)?
        }
        None => Table::new(),
    };
    let mut o = cli.command.overrides()?;
    if let Some(seed) = cli.seed {
        let seed = i64::try_from(seed).map_err(|_| CliError::Config("seed must be below 2^63".into()))?;
        o.push(("numerics.seed", Value::Integer(seed)));
    }
    if let Some(out) = &cli.out {
        o.push(("output.path", Value::String(out.display().to_string())));
    }
    if let Some(f) = cli.format {
        o.push(("output.format", Value::String(f)));
    }
    if let Some(p) = cli.preset {
        o.push(("process.preset", Value::String(p)));
    }
    for (key, value) in o {
        set_key(&mut doc, key, value)?;
    }
    Ok((from_table(doc)?, cli.jobs))
}

fn run(cfg: &ExperimentConfig, jobs: usize) -> Result<bool, CliError> {
    let exec = Executor::new(jobs)?;
    let report = match &cfg.output.path {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            let report = emit(cfg, &exec, &mut file)?;
            file.flush()?;
            if cfg.output.format == refjump_cli::Format::Csv {
                report.write_json(io::stdout().lock())?;
            }
            report
        }
        None => {
            let mut stdout = BufWriter::new(io::stdout().lock());
            let report = emit(cfg, &exec, &mut stdout)?;
            stdout.flush()?;
            report
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for v in report.failures() {
        eprintln!("FAILED {}: measured {} vs threshold {} ({})", v.check, v.measured, v.threshold, v.criterion);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load(cli).and_then(|(cfg, jobs)| run(&cfg, jobs));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
