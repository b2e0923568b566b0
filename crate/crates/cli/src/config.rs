//! Experiment configuration.
//!
//! A TOML document with up to four sections:
//!
//! ```toml
//! [process]
//! preset = "drifted-rbm"          # or "exponential-jumps", "ou"
//! sigma = 1.0
//! drift.type = "affine"           # constant | affine | tabulated
//! drift.slope = -1.0
//! drift.intercept = -1.0
//! jumps.type = "exponential"      # none | exponential | deterministic | mixture
//! jumps.rate = 2.0
//! jumps.intensity = 1.0
//!
//! [numerics]
//! dt = 1e-3
//! t_max = 10.0
//! paths = 10000
//! seed = 0
//! burn_in = "auto"
//!
//! [run]
//! kind = "decay"
//! x1 = 0.0
//! x2 = 1.0
//! times = [1.0, 2.0, 4.0]
//!
//! [output]
//! path = "decay.csv"
//! format = "csv"
//! ```
//!
//! Command-line flags are applied as key overrides on the parsed document
//! before validation, so a flag always wins over the file and the file over
//! the built-in default. Every default that fills a key relevant to the run
//! is recorded in [`ExperimentConfig::defaults_applied`].

use std::fmt;
use std::path::PathBuf;

use refjump::coupling::check_coupling_step;
use refjump::{DisplacementLaw, DriftSpec, JumpFamily};
use refjump::ProcessSpec;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, Result};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_PATHS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_T_MAX: f64 = 10.0;
pub const DEFAULT_TIMES: [f64; 5] = [0.0, 1.0, 2.0, 4.0, 8.0];
pub const DEFAULT_WINDOWS: [(f64, f64); 4] = [(0.0, 1.0), (1.0, 2.0), (2.0, 4.0), (4.0, 8.0)];
pub const DEFAULT_PROBE_TIME: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    Certificate,
    Simulate,
    Couple,
    Decay,
    PathDecay,
    Stationary,
    Verify,
    Examples,
}

impl RunKind {
    pub const ALL: [RunKind; 8] = [
        RunKind::Certificate,
        RunKind::Simulate,
        RunKind::Couple,
        RunKind::Decay,
        RunKind::PathDecay,
        RunKind::Stationary,
        RunKind::Verify,
        RunKind::Examples,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RunKind::Certificate => "certificate",
            RunKind::Simulate => "simulate",
            RunKind::Couple => "couple",
            RunKind::Decay => "decay",
            RunKind::PathDecay => "path-decay",
            RunKind::Stationary => "stationary",
            RunKind::Verify => "verify",
            RunKind::Examples => "examples",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            CliError::config(format!("unknown run kind {s:?}; expected one of {}", names.join(", ")))
        })
    }

    /// Runs whose experiments drive synchronously coupled pairs.
    pub fn couples(self) -> bool {
        matches!(
            self,
            RunKind::Couple | RunKind::Decay | RunKind::PathDecay | RunKind::Stationary | RunKind::Verify
        )
    }

    pub fn default_format(self) -> Format {
        match self {
            RunKind::Certificate | RunKind::Verify | RunKind::Examples => Format::Json,
            _ => Format::Csv,
        }
    }

    /// Keys whose defaults are reported for this run.
    fn relevant(self) -> &'static [&'static str] {
        use RunKind::*;
        match self {
            Certificate => &["run.p"],
            Simulate => &["numerics.dt", "numerics.t_max", "numerics.paths", "numerics.seed", "run.x0", "run.stride"],
            Couple => &["numerics.dt", "numerics.t_max", "numerics.paths", "numerics.seed", "run.x1", "run.x2"],
            Decay => &["numerics.dt", "numerics.paths", "numerics.seed", "run.x1", "run.x2", "run.times", "run.p"],
            PathDecay => &["numerics.dt", "numerics.paths", "numerics.seed", "run.x1", "run.x2", "run.windows", "run.p"],
            Stationary => &[
                "numerics.dt",
                "numerics.paths",
                "numerics.seed",
                "numerics.burn_in",
                "run.x",
                "run.times",
                "run.p",
            ],
            Verify => &[
                "numerics.dt",
                "numerics.t_max",
                "numerics.paths",
                "numerics.seed",
                "run.x1",
                "run.x2",
                "run.probe_time",
            ],
            Examples => &["numerics.dt", "numerics.paths", "numerics.seed"],
        }
    }
}

impl fmt::Display for RunKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BurnIn {
    Auto(AutoTag),
    Time(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Numerics {
    pub dt: f64,
    pub t_max: f64,
    pub paths: usize,
    pub seed: u64,
    pub burn_in: BurnIn,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParams {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x: f64,
    pub times: Vec<f64>,
    pub windows: Vec<(f64, f64)>,
    pub p: f64,
    /// Fixed Lyapunov exponent; the optimizer picks it when absent.
    pub lambda: Option<f64>,
    pub stride: usize,
    pub probe_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Output {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// A validated experiment with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: RunKind,
    pub process: Option<ProcessSpec>,
    pub numerics: Numerics,
    pub run: RunParams,
    pub output: Output,
    #[serde(skip)]
    pub defaults_applied: Vec<String>,
}

const TOP: &[&str] = &["process", "numerics", "run", "output"];
const SECTIONS: &[(&str, &[&str])] = &[
    ("process", &["preset", "sigma", "drift", "jumps"]),
    ("process.drift", &["type", "value", "slope", "intercept", "knots"]),
    ("process.jumps", &["type", "rate", "size", "intensity", "components"]),
    ("process.jumps.components", &["weight", "type", "rate", "size"]),
    ("numerics", &["dt", "t_max", "paths", "seed", "burn_in"]),
    ("run", &["kind", "x0", "x1", "x2", "x", "times", "windows", "p", "lambda", "stride", "probe_time"]),
    ("output", &["path", "format"]),
];

fn section_keys(path: &str) -> Option<&'static [&'static str]> {
    if path.is_empty() {
        return Some(TOP);
    }
    SECTIONS.iter().find(|(name, _)| *name == path).map(|(_, keys)| *keys)
}

fn collect_unknown(table: &Table, schema: &str, shown: &str, out: &mut Vec<String>) {
    let allowed = section_keys(schema).unwrap_or(&[]);
    for (key, value) in table {
        let child_schema = if schema.is_empty() { key.clone() } else { format!("{schema}.{key}") };
        let child_shown = if shown.is_empty() { key.clone() } else { format!("{shown}.{key}") };
        if !allowed.contains(&key.as_str()) {
            out.push(child_shown);
            continue;
        }
        if section_keys(&child_schema).is_none() {
            continue;
        }
        match value {
            Value::Table(t) => collect_unknown(t, &child_schema, &child_shown, out),
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    if let Value::Table(t) = item {
                        collect_unknown(t, &child_schema, &format!("{child_shown}[{i}]"), out);
                    }
                }
            }
            _ => {}
        }
    }
}

/// Sets `dotted` (e.g. `numerics.dt`) in `doc`, creating sections as needed.
pub fn set_key(doc: &mut Table, dotted: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = dotted.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut table = doc;
    for part in parts {
        let entry = table.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("cannot override {dotted}: {part} is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

pub fn parse_document(doc: &str) -> Result<Table> {
    doc.parse::<Table>().map_err(|e| CliError::config(format!("malformed document: {e}")))
}

/// Parses and validates a config document.
pub fn parse_config(doc: &str) -> Result<ExperimentConfig> {
    from_table(parse_document(doc)?)
}

#[derive(Debug, Default, Deserialize)]
struct RawDoc {
    process: Option<RawProcess>,
    numerics: Option<RawNumerics>,
    run: Option<RawRun>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
struct RawProcess {
    preset: Option<String>,
    sigma: Option<f64>,
    drift: Option<RawDrift>,
    jumps: Option<RawJumps>,
}

#[derive(Debug, Deserialize)]
struct RawDrift {
    #[serde(rename = "type")]
    kind: String,
    value: Option<f64>,
    slope: Option<f64>,
    intercept: Option<f64>,
    knots: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Deserialize)]
struct RawJumps {
    #[serde(rename = "type")]
    kind: String,
    rate: Option<f64>,
    size: Option<f64>,
    intensity: Option<f64>,
    components: Option<Vec<RawComponent>>,
}

#[derive(Debug, Deserialize)]
struct RawComponent {
    weight: f64,
    #[serde(rename = "type")]
    kind: String,
    rate: Option<f64>,
    size: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawNumerics {
    dt: Option<f64>,
    t_max: Option<f64>,
    paths: Option<i64>,
    seed: Option<i64>,
    burn_in: Option<BurnIn>,
}

#[derive(Debug, Default, Deserialize)]
struct RawRun {
    kind: Option<String>,
    x0: Option<f64>,
    x1: Option<f64>,
    x2: Option<f64>,
    x: Option<f64>,
    times: Option<Vec<f64>>,
    windows: Option<Vec<(f64, f64)>>,
    p: Option<f64>,
    lambda: Option<f64>,
    stride: Option<i64>,
    probe_time: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct RawOutput {
    path: Option<String>,
    format: Option<Format>,
}

/// Tracks which defaults were applied.
struct Defaults {
    relevant: &'static [&'static str],
    applied: Vec<String>,
}

impl Defaults {
    fn fill<T: fmt::Debug>(&mut self, key: &str, given: Option<T>, default: T) -> T {
        given.unwrap_or_else(|| {
            if self.relevant.contains(&key) {
                self.applied.push(format!("{key} = {default:?}"));
            }
            default
        })
    }
}

/// Validates an already-merged document.
pub fn from_table(doc: Table) -> Result<ExperimentConfig> {
    let mut unknown = Vec::new();
    collect_unknown(&doc, "", "", &mut unknown);
    if !unknown.is_empty() {
        return Err(CliError::config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let raw: RawDoc = Value::Table(doc).try_into().map_err(|e| CliError::config(format!("{e}")))?;
    let run = raw.run.unwrap_or_default();
    let kind = RunKind::parse(run.kind.as_deref().ok_or_else(|| CliError::config("run.kind is required"))?)?;
    let mut defaults = Defaults { relevant: kind.relevant(), applied: Vec::new() };

    let process = match raw.process {
        Some(p) => Some(build_process(p, &mut defaults.applied)?),
        None if kind == RunKind::Examples => None,
        None => return Err(CliError::config("a [process] section is required")),
    };

    let n = raw.numerics.unwrap_or_default();
    let numerics = Numerics {
        dt: defaults.fill("numerics.dt", n.dt, DEFAULT_DT),
        t_max: defaults.fill("numerics.t_max", n.t_max, DEFAULT_T_MAX),
        paths: {
            let paths = defaults.fill("numerics.paths", n.paths, DEFAULT_PATHS as i64);
            if paths < 1 {
                return Err(CliError::config("paths must be at least 1"));
            }
            paths as usize
        },
        seed: {
            let seed = defaults.fill("numerics.seed", n.seed, DEFAULT_SEED as i64);
            u64::try_from(seed).map_err(|_| CliError::config("seed must be nonnegative"))?
        },
        burn_in: defaults.fill("numerics.burn_in", n.burn_in, BurnIn::Auto(AutoTag::Auto)),
    };
    if !(numerics.dt > 0.0 && numerics.dt.is_finite()) {
        return Err(CliError::config("dt must be positive"));
    }
    if !(numerics.t_max > 0.0 && numerics.t_max.is_finite()) {
        return Err(CliError::config("t_max must be positive"));
    }
    if let BurnIn::Time(b) = numerics.burn_in {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(CliError::config("burn_in must be nonnegative or \"auto\""));
        }
    }

    let params = RunParams {
        x0: defaults.fill("run.x0", run.x0, 0.0),
        x1: defaults.fill("run.x1", run.x1, 0.0),
        x2: defaults.fill("run.x2", run.x2, 1.0),
        x: defaults.fill("run.x", run.x, 1.0),
        times: defaults.fill("run.times", run.times, DEFAULT_TIMES.to_vec()),
        windows: defaults.fill("run.windows", run.windows, DEFAULT_WINDOWS.to_vec()),
        p: defaults.fill("run.p", run.p, 1.0),
        lambda: run.lambda,
        stride: {
            let stride = defaults.fill("run.stride", run.stride, 1);
            if stride < 1 {
                return Err(CliError::config("stride must be at least 1"));
            }
            stride as usize
        },
        probe_time: defaults.fill("run.probe_time", run.probe_time, DEFAULT_PROBE_TIME),
    };
    validate_params(kind, &params)?;

    let out = raw.output.unwrap_or_default();
    let format = out.format.unwrap_or_else(|| {
        let f = kind.default_format();
        defaults.applied.push(format!("output.format = {f:?}"));
        f
    });
    let output = Output { path: out.path.map(PathBuf::from), format };

    if let Some(spec) = &process {
        spec.validate_nondegenerate()?;
        if kind.couples() {
            check_coupling_step(spec, numerics.dt)?;
        }
    }

    Ok(ExperimentConfig { kind, process, numerics, run: params, output, defaults_applied: defaults.applied })
}

fn validate_params(kind: RunKind, p: &RunParams) -> Result<()> {
    let starts = [("x0", p.x0), ("x1", p.x1), ("x2", p.x2), ("x", p.x)];
    if let Some((name, v)) = starts.iter().find(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
        return Err(CliError::config(format!("{name} must be a nonnegative starting point, got {v}")));
    }
    if kind.couples() && kind != RunKind::Stationary && p.x1 > p.x2 {
        return Err(CliError::config(format!("coupled runs need x1 <= x2, got {} > {}", p.x1, p.x2)));
    }
    if !(p.p >= 1.0 && p.p.is_finite()) {
        return Err(CliError::config(format!("p must be at least 1, got {}", p.p)));
    }
    if p.times.is_empty() || p.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) || p.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::config("times must be nonempty, nonnegative and strictly increasing"));
    }
    if p.windows.is_empty() || p.windows.iter().any(|&(a, b)| !(a >= 0.0 && b > a && b.is_finite())) {
        return Err(CliError::config("windows must be nonempty with 0 <= t < t_end"));
    }
    if let Some(l) = p.lambda {
        if !(l > 0.0) {
            return Err(CliError::config(format!("lambda must be positive, got {l}")));
        }
    }
    if !(p.probe_time > 0.0 && p.probe_time.is_finite()) {
        return Err(CliError::config("probe_time must be positive"));
    }
    Ok(())
}

fn preset(name: &str) -> Result<ProcessSpec> {
    match name {
        "drifted-rbm" => Ok(ProcessSpec::drifted_rbm(-1.0, 1.0)?),
        "exponential-jumps" => Ok(ProcessSpec::exponential_jumps_example()),
        "ou" => Ok(ProcessSpec::ornstein_uhlenbeck(1.0, 1.0, 1.0)?),
        other => Err(CliError::config(format!(
            "unknown preset {other:?}; expected drifted-rbm, exponential-jumps or ou"
        ))),
    }
}

fn required(v: Option<f64>, key: &str, what: &str) -> Result<f64> {
    v.ok_or_else(|| CliError::config(format!("{key} is required for {what}")))
}

fn build_drift(d: RawDrift) -> Result<DriftSpec> {
    match d.kind.as_str() {
        "constant" => Ok(DriftSpec::constant(required(d.value, "process.drift.value", "constant drift")?)),
        "affine" => Ok(DriftSpec::affine(
            required(d.slope, "process.drift.slope", "affine drift")?,
            required(d.intercept, "process.drift.intercept", "affine drift")?,
        )),
        "tabulated" => {
            let knots = d.knots.ok_or_else(|| CliError::config("process.drift.knots is required for tabulated drift"))?;
            Ok(DriftSpec::tabulated(knots)?)
        }
        other => Err(CliError::config(format!(
            "unknown drift type {other:?}; expected constant, affine or tabulated"
        ))),
    }
}

fn build_law(kind: &str, rate: Option<f64>, size: Option<f64>, key: &str) -> Result<DisplacementLaw> {
    match kind {
        "exponential" => Ok(DisplacementLaw::exponential(required(rate, &format!("{key}.rate"), "exponential jumps")?)),
        "deterministic" => {
            Ok(DisplacementLaw::deterministic(required(size, &format!("{key}.size"), "deterministic jumps")?))
        }
        other => Err(CliError::config(format!(
            "unknown displacement law {other:?} at {key}; expected exponential or deterministic"
        ))),
    }
}

fn build_jumps(j: RawJumps) -> Result<JumpFamily> {
    if j.kind == "none" {
        return Ok(JumpFamily::NoJumps);
    }
    let intensity = required(j.intensity, "process.jumps.intensity", "jumps")?;
    let law = if j.kind == "mixture" {
        let comps = j.components.ok_or_else(|| CliError::config("process.jumps.components is required for mixture jumps"))?;
        let parts = comps
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let key = format!("process.jumps.components[{i}]");
                Ok((c.weight, build_law(&c.kind, c.rate, c.size, &key)?))
            })
            .collect::<Result<Vec<_>>>()?;
        DisplacementLaw::mixture(parts)?
    } else {
        build_law(&j.kind, j.rate, j.size, "process.jumps")?
    };
    Ok(JumpFamily::levy(law, intensity)?)
}

fn build_process(p: RawProcess, applied: &mut Vec<String>) -> Result<ProcessSpec> {
    let base = p.preset.as_deref().map(preset).transpose()?;
    let drift = match (p.drift, &base) {
        (Some(d), _) => build_drift(d)?,
        (None, Some(b)) => b.drift.clone(),
        (None, None) => return Err(CliError::config("process.drift is required without a preset")),
    };
    let sigma = match (p.sigma, &base) {
        (Some(s), _) => s,
        (None, Some(b)) => b.sigma,
        (None, None) => return Err(CliError::config("process.sigma is required without a preset")),
    };
    let jumps = match (p.jumps, &base) {
        (Some(j), _) => build_jumps(j)?,
        (None, Some(b)) => b.jumps.clone(),
        (None, None) => {
            applied.push("process.jumps.type = \"none\"".into());
            JumpFamily::NoJumps
        }
    };
    Ok(ProcessSpec::new(drift, sigma, jumps)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[process]\npreset = \"drifted-rbm\"\n[run]\nkind = \"certificate\"\n";

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.kind, RunKind::Certificate);
        assert_eq!(cfg.numerics.dt, 1e-3);
        assert_eq!(cfg.numerics.paths, 10_000);
        assert_eq!(cfg.numerics.seed, 0);
        assert_eq!(cfg.run.p, 1.0);
        assert!(cfg.defaults_applied.iter().any(|d| d.starts_with("run.p")));
        assert!(cfg.defaults_applied.iter().any(|d| d.starts_with("output.format")));
        assert_eq!(cfg.output.format, Format::Json);
        let spec = cfg.process.unwrap();
        assert_eq!(spec, ProcessSpec::drifted_rbm(-1.0, 1.0).unwrap());
    }

    #[test]
    fn zero_dt_is_rejected() {
        let doc = format!("{MINIMAL}[numerics]\ndt = 0\n");
        let err = parse_config(&doc).unwrap_err().to_string();
        assert!(err.contains("dt must be positive"), "{err}");
    }

    #[test]
    fn coupling_step_bound_is_enforced() {
        let doc = "[process]\nsigma = 1.0\ndrift.type = \"affine\"\ndrift.slope = -10.0\ndrift.intercept = -10.0\n\
                   [numerics]\ndt = 0.2\n[run]\nkind = \"couple\"\n";
        let err = parse_config(doc).unwrap_err().to_string();
        assert!(err.contains("step too large for monotone coupling"), "{err}");
        // the same document is fine for a run without coupling
        assert!(parse_config(&doc.replace("couple", "simulate")).is_ok());
        assert!(parse_config(&doc.replace("0.2", "0.05")).is_ok());
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let doc = "[process]\npreset = \"ou\"\ncolour = 1\ndrift.type = \"constant\"\ndrift.value = -1.0\ndrift.shape = 2\n\
                   [run]\nkind = \"certificate\"\nspeed = 3\n[extra]\na = 1\n";
        let err = parse_config(doc).unwrap_err().to_string();
        for key in ["process.colour", "process.drift.shape", "run.speed", "extra"] {
            assert!(err.contains(key), "{key} missing from {err}");
        }
    }

    #[test]
    fn mixture_components_are_checked() {
        let doc = "[process]\nsigma = 1.0\ndrift.type = \"constant\"\ndrift.value = -2.0\n\
                   [process.jumps]\ntype = \"mixture\"\nintensity = 1.0\n\
                   components = [{ weight = 0.5, type = \"exponential\", rate = 2.0 }, { weight = 0.5, type = \"deterministic\", size = 0.1, tilt = 1 }]\n\
                   [run]\nkind = \"certificate\"\n";
        let err = parse_config(doc).unwrap_err().to_string();
        assert!(err.contains("process.jumps.components[1].tilt"), "{err}");
        let cfg = parse_config(&doc.replace(", tilt = 1", "")).unwrap();
        assert_eq!(cfg.process.unwrap().mgf_domain(), 2.0);
    }

    #[test]
    fn overrides_beat_the_file() {
        let mut doc = parse_document(&format!("{MINIMAL}[numerics]\nseed = 5\n")).unwrap();
        set_key(&mut doc, "numerics.seed", Value::Integer(9)).unwrap();
        set_key(&mut doc, "output.format", Value::String("csv".into())).unwrap();
        let cfg = from_table(doc).unwrap();
        assert_eq!(cfg.numerics.seed, 9);
        assert_eq!(cfg.output.format, Format::Csv);
    }

    #[test]
    fn explicit_process_without_preset() {
        let doc = "[process]\nsigma = 1.0\ndrift.type = \"constant\"\ndrift.value = -1.0\n\
                   jumps.type = \"exponential\"\njumps.rate = 2.0\njumps.intensity = 1.0\n[run]\nkind = \"certificate\"\n";
        let cfg = parse_config(doc).unwrap();
        assert_eq!(cfg.process.unwrap(), ProcessSpec::exponential_jumps_example());
    }

    #[test]
    fn constraint_violations_name_the_invariant() {
        let cases = [
            ("[numerics]\npaths = 0\n[run]\nkind = \"certificate\"\n", "paths must be at least 1"),
            ("[numerics]\nt_max = -1.0\n[run]\nkind = \"certificate\"\n", "t_max must be positive"),
            ("[run]\nkind = \"certificate\"\np = 0.5\n", "p must be at least 1"),
            ("[run]\nkind = \"decay\"\ntimes = [2.0, 1.0]\n", "strictly increasing"),
        ];
        for (tail, msg) in cases {
            let doc = format!("[process]\npreset = \"drifted-rbm\"\n{tail}");
            let err = parse_config(&doc).unwrap_err().to_string();
            assert!(err.contains(msg), "{err}");
        }
        assert!(parse_config("[run]\nkind = \"certificate\"\n").is_err());
        assert!(parse_config("[run]\nkind = \"examples\"\n").is_ok());
        assert!(parse_config("[run]\nkind = \"bogus\"\n").is_err());
    }

    #[test]
    fn burn_in_accepts_auto_or_time() {
        let cfg = parse_config(&format!("{MINIMAL}[numerics]\nburn_in = \"auto\"\n")).unwrap();
        assert_eq!(cfg.numerics.burn_in, BurnIn::Auto(AutoTag::Auto));
        let cfg = parse_config(&format!("{MINIMAL}[numerics]\nburn_in = 12\n")).unwrap();
        assert_eq!(cfg.numerics.burn_in, BurnIn::Time(12.0));
    }
}
