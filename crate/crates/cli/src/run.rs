//! Dispatch of validated configs to the core experiments.

use std::io::Write;

use refjump::certificate::{certificate_at, make_certificate};
use refjump::coupling::{audit_coupling, contraction_check_ensemble, simulate_coupled, supermartingale_probe};
use refjump::engine::{default_burn_in, estimate_stationary, simulate_path};
use refjump::wasserstein::{decay_curve, path_decay_curve, stationary_gap, BOUND_SLACK};
use refjump::{DecayCurve, Executor, ProcessSpec, RateCertificate, StreamSeed};

use crate::config::{BurnIn, ExperimentConfig, Format, RunKind};
use crate::error::{CliError, Result};
use crate::examples::run_examples;
use crate::report::{Cell, Report, Table, Verdict};

/// Paths simulated per batch when streaming path dumps.
const BATCH: usize = 64;

const ENSEMBLE_STATIONARY: u64 = 10;
const ENSEMBLE_CONTRACTION: u64 = 11;
const ENSEMBLE_AUDIT: u64 = 12;
const ENSEMBLE_PROBE: u64 = 13;

/// Runs the experiment. Path dumps of `simulate` and `couple` are streamed
/// to `csv` when given; every other table lands in the report.
pub fn execute(cfg: &ExperimentConfig, exec: &Executor, csv: Option<&mut dyn Write>) -> Result<Report> {
    let started = std::time::Instant::now();
    let mut report = match cfg.kind {
        RunKind::Examples => {
            let mut r = run_examples(cfg.numerics.seed, cfg.numerics.paths, cfg.numerics.dt, exec)?;
            r.config = Some(cfg.clone());
            r.defaults_applied = cfg.defaults_applied.clone();
            r
        }
        kind => {
            let spec = cfg.process.as_ref().ok_or_else(|| CliError::config("a [process] section is required"))?;
            let mut r = Report::new(kind, Some(cfg));
            match kind {
                RunKind::Certificate => certificate(cfg, spec, &mut r)?,
                RunKind::Simulate => simulate(cfg, spec, exec, csv, &mut r)?,
                RunKind::Couple => couple(cfg, spec, exec, csv, &mut r)?,
                RunKind::Decay | RunKind::PathDecay => decay(cfg, spec, exec, &mut r)?,
                RunKind::Stationary => stationary(cfg, spec, exec, &mut r)?,
                RunKind::Verify => verify(cfg, spec, exec, &mut r)?,
                RunKind::Examples => unreachable!(),
            }
            r
        }
    };
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(report)
}

fn rate_certificate(cfg: &ExperimentConfig, spec: &ProcessSpec) -> Result<RateCertificate> {
    Ok(match cfg.run.lambda {
        Some(l) => certificate_at(spec, l, cfg.run.p)?,
        None => make_certificate(spec, cfg.run.p)?,
    })
}

fn certificate(cfg: &ExperimentConfig, spec: &ProcessSpec, report: &mut Report) -> Result<()> {
    let cert = rate_certificate(cfg, spec)?;
    let mut t = Table::new("certificate", &["lambda", "k", "G", "K", "p", "lambda_max", "a3_holds"]);
    t.push(vec![
        cert.lambda.into(),
        cert.k.into(),
        cert.growth.into(),
        cert.contraction.into(),
        cert.p.into(),
        cert.lambda_max.into(),
        cert.a3_holds.into(),
    ]);
    report.tables.push(t);
    report.certify("certificate", &cert);
    Ok(())
}

fn simulate(
    cfg: &ExperimentConfig,
    spec: &ProcessSpec,
    exec: &Executor,
    mut csv: Option<&mut dyn Write>,
    report: &mut Report,
) -> Result<()> {
    let n = cfg.numerics.paths;
    let seed = StreamSeed::new(cfg.numerics.seed);
    let stride = cfg.run.stride;
    let mut writer = csv.as_mut().map(csv::Writer::from_writer);
    if let Some(w) = writer.as_mut() {
        w.write_record(["path_id", "t", "x", "ell"])?;
    }
    let mut endpoints = Vec::with_capacity(n);
    let mut local_times = Vec::with_capacity(n);
    for start in (0..n).step_by(BATCH) {
        let count = BATCH.min(n - start);
        let batch = exec.map_paths(count, |i| {
            let path = start as u64 + i;
            simulate_path(spec, cfg.run.x0, cfg.numerics.t_max, cfg.numerics.dt, seed.path_streams(0, path), path)
        });
        for sample in batch {
            let sample = sample?;
            endpoints.push(*sample.values.last().expect("grid has a start point"));
            local_times.push(*sample.local_time.last().expect("grid has a start point"));
            if let Some(w) = writer.as_mut() {
                let last = sample.grid.len() - 1;
                for i in (0..sample.grid.len()).filter(|i| i % stride == 0 || *i == last) {
                    w.write_record([
                        sample.seed_tag.to_string(),
                        Cell::Float(sample.grid[i]).to_csv(),
                        Cell::Float(sample.values[i]).to_csv(),
                        Cell::Float(sample.local_time[i]).to_csv(),
                    ])?;
                }
            }
        }
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    let (m, se) = refjump::scalar::mean_and_stderr(&endpoints);
    report.estimate("mean X(t_max)", m, se);
    let (m, se) = refjump::scalar::mean_and_stderr(&local_times);
    report.estimate("mean local time at t_max", m, se);
    Ok(())
}

fn couple(
    cfg: &ExperimentConfig,
    spec: &ProcessSpec,
    exec: &Executor,
    mut csv: Option<&mut dyn Write>,
    report: &mut Report,
) -> Result<()> {
    let n = cfg.numerics.paths;
    let seed = StreamSeed::new(cfg.numerics.seed);
    let (x1, x2) = (cfg.run.x1, cfg.run.x2);
    let mut writer = csv.as_mut().map(csv::Writer::from_writer);
    if let Some(w) = writer.as_mut() {
        w.write_record(["path_id", "t", "x_lower", "x_upper", "coalesced"])?;
    }
    let mut coalesced = 0usize;
    let mut tau = Vec::new();
    for start in (0..n).step_by(BATCH) {
        let count = BATCH.min(n - start);
        let batch = exec.map_paths(count, |i| {
            let path = start as u64 + i;
            simulate_coupled(spec, x1, x2, cfg.numerics.t_max, cfg.numerics.dt, seed.path_streams(0, path))
                .map(|p| (path, p))
        });
        for item in batch {
            let (path, paths) = item?;
            if let Some(i) = paths.coalesced_from {
                coalesced += 1;
                tau.push(paths.grid[i]);
            }
            if let Some(w) = writer.as_mut() {
                let last = paths.grid.len() - 1;
                for i in (0..paths.grid.len()).filter(|i| i % cfg.run.stride == 0 || *i == last) {
                    let joined = paths.coalesced_from.is_some_and(|c| i >= c);
                    w.write_record([
                        path.to_string(),
                        Cell::Float(paths.grid[i]).to_csv(),
                        Cell::Float(paths.lower[i]).to_csv(),
                        Cell::Float(paths.upper[i]).to_csv(),
                        Cell::from(joined).to_csv(),
                    ])?;
                }
            }
        }
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    let frac = coalesced as f64 / n as f64;
    report.estimate("coalesced fraction by t_max", frac, (frac * (1.0 - frac) / n as f64).sqrt());
    if !tau.is_empty() {
        let (m, se) = refjump::scalar::mean_and_stderr(&tau);
        report.estimate("mean coalescence time (coalesced paths)", m, se);
    }
    Ok(())
}

/// Decay table with the documented columns first and the extra noise
/// columns trailing.
pub fn decay_table(curve: &DecayCurve, windows: bool) -> Table {
    let mut columns = vec![
        "t",
        "wp_coupling",
        "wp_coupling_stderr",
        "wp_marginal",
        "bound_thm1",
        "bound_thm2",
        "n_paths",
        "wp_marginal_noise",
        "bound_thm1_stderr",
        "bound_thm2_stderr",
    ];
    if windows {
        columns.push("t_end");
    }
    let mut t = Table::new("decay", &columns);
    for r in &curve.rows {
        let mut row = vec![
            r.t.into(),
            r.wp_coupling.into(),
            r.wp_coupling_stderr.into(),
            r.wp_marginal.into(),
            r.bound_thm1.into(),
            r.bound_thm2.into(),
            curve.n_paths.into(),
            r.wp_marginal_noise.into(),
            r.bound_thm1_stderr.into(),
            r.bound_thm2_stderr.into(),
        ];
        if windows {
            row.push(r.t_end.into());
        }
        t.push(row);
    }
    t
}

/// Bound verdicts with the Monte Carlo slack: the marginal distance (or the
/// coupling estimate when no marginal is available) against the Lyapunov
/// bound, the coupling estimate against the contraction bound.
pub fn bound_verdicts(curve: &DecayCurve, label: &str) -> Vec<Verdict> {
    let mut out = Vec::new();
    for r in &curve.rows {
        if let Some(b) = r.bound_thm1 {
            let (what, measured) = match r.wp_marginal {
                Some(m) => ("wp_marginal", m),
                None => ("wp_coupling", r.wp_coupling),
            };
            out.push(Verdict::at_most(
                format!("{label}: {what} <= {BOUND_SLACK} * bound_thm1 at t = {}", r.t),
                measured,
                BOUND_SLACK * b,
            ));
        }
        if let Some(b) = r.bound_thm2 {
            out.push(Verdict::at_most(
                format!("{label}: wp_coupling <= {BOUND_SLACK} * bound_thm2 at t = {}", r.t),
                r.wp_coupling,
                BOUND_SLACK * b,
            ));
        }
    }
    out
}

fn decay(cfg: &ExperimentConfig, spec: &ProcessSpec, exec: &Executor, report: &mut Report) -> Result<()> {
    let cert = rate_certificate(cfg, spec)?;
    let seed = StreamSeed::new(cfg.numerics.seed);
    let (n, h) = (cfg.numerics.paths, cfg.numerics.dt);
    let windows = cfg.kind == RunKind::PathDecay;
    let curve = if windows {
        path_decay_curve(spec, &cert, cfg.run.x1, cfg.run.x2, &cfg.run.windows, n, h, seed, exec)?
    } else {
        decay_curve(spec, &cert, cfg.run.x1, cfg.run.x2, &cfg.run.times, n, h, seed, exec)?
    };
    note_missing_bounds(&cert, report);
    report.tables.push(decay_table(&curve, windows));
    report.verdicts.extend(bound_verdicts(&curve, cfg.kind.name()));
    report.certify("certificate", &cert);
    Ok(())
}

fn note_missing_bounds(cert: &RateCertificate, report: &mut Report) {
    if !cert.a3_holds {
        report.warnings.push(format!("k(lambda) = {} <= 0: no bounds reported", cert.k));
    } else if !cert.contraction_applicable {
        report.warnings.push("contraction bound not applicable (k <= p*G or G unavailable)".into());
    }
}

fn stationary(cfg: &ExperimentConfig, spec: &ProcessSpec, exec: &Executor, report: &mut Report) -> Result<()> {
    let cert = rate_certificate(cfg, spec)?;
    let burn_in = match cfg.numerics.burn_in {
        BurnIn::Time(b) => b,
        BurnIn::Auto(_) => default_burn_in(cert.k).ok_or_else(|| {
            CliError::config("burn_in = \"auto\" needs k(lambda) > 0; set numerics.burn_in explicitly")
        })?,
    };
    if burn_in <= 0.0 {
        return Err(CliError::config("stationary runs need burn_in > 0"));
    }
    let seed = StreamSeed::new(cfg.numerics.seed);
    let (n, h) = (cfg.numerics.paths, cfg.numerics.dt);
    let pi = estimate_stationary(spec, &cert, burn_in, n, 0.0, h, seed, ENSEMBLE_STATIONARY, exec)?;
    report.warnings.extend(pi.warnings.iter().cloned());
    report.estimate("(pi, V)", pi.mean_v, pi.stderr_v);
    let curve = stationary_gap(spec, &cert, cfg.run.x, &pi, &cfg.run.times, n, h, seed, exec)?;
    note_missing_bounds(&cert, report);
    report.tables.push(decay_table(&curve, false));
    report.verdicts.extend(bound_verdicts(&curve, "stationary"));
    report.certify("certificate", &cert);
    Ok(())
}

fn verify(cfg: &ExperimentConfig, spec: &ProcessSpec, exec: &Executor, report: &mut Report) -> Result<()> {
    let cert = rate_certificate(cfg, spec)?;
    let seed = StreamSeed::new(cfg.numerics.seed);
    let (n, h, horizon) = (cfg.numerics.paths, cfg.numerics.dt, cfg.numerics.t_max);
    let (x1, x2) = (cfg.run.x1, cfg.run.x2);

    let audit = audit_coupling(spec, x1, x2, horizon, h, n, seed, ENSEMBLE_AUDIT, exec)?;
    report.verdicts.push(Verdict::at_most("coupling ordering violations", audit.ordering_violations as f64, 0.0));
    report.verdicts.push(Verdict::at_most("coalescence breaks", audit.coalescence_breaks as f64, 0.0));
    report.verdicts.push(Verdict::at_most("jump gap changes", audit.jump_gap_changes as f64, 0.0));
    report.estimate("coupled grid points audited", audit.grid_points as f64, 0.0);
    report.estimate("jump events audited", audit.jump_events as f64, 0.0);

    match cert.growth {
        Some(g) => {
            let check = contraction_check_ensemble(spec, x1, x2, horizon, h, g, n, seed, ENSEMBLE_CONTRACTION, exec)?;
            report.verdicts.push(Verdict::at_most(
                "gap contraction: max gap(t) - (x2 - x1) e^{Gt}",
                check.max_violation,
                check.tolerance,
            ));
        }
        None => report.warnings.push("growth constant unavailable: gap contraction not checked".into()),
    }

    if cert.a3_holds {
        let probe = supermartingale_probe(spec, &cert, x2, cfg.run.probe_time, n, h, seed, ENSEMBLE_PROBE, exec)?;
        report.estimate("E[e^{k(t^tau)} V(X(t^tau))]", probe.estimate, probe.stderr);
        report.verdicts.push(Verdict::at_most(
            "supermartingale: estimate <= V(x2) + 3 stderr",
            probe.estimate,
            probe.ceiling + 3.0 * probe.stderr,
        ));
    } else {
        report.warnings.push(format!("k(lambda) = {} <= 0: supermartingale probe skipped", cert.k));
    }
    report.certify("certificate", &cert);
    Ok(())
}

/// The table written for `--format csv` runs that do not stream paths.
pub fn primary_table(report: &Report) -> Table {
    match report.kind {
        RunKind::Verify | RunKind::Examples => report.verdicts_table(),
        _ => report.tables.first().cloned().unwrap_or_else(|| report.verdicts_table()),
    }
}

/// Writes the run's outputs: CSV to the sink for CSV runs, otherwise the
/// JSON report.
pub fn emit(cfg: &ExperimentConfig, exec: &Executor, sink: &mut dyn Write) -> Result<Report> {
    match cfg.output.format {
        Format::Csv => {
            let streams = matches!(cfg.kind, RunKind::Simulate | RunKind::Couple);
            let report = execute(cfg, exec, if streams { Some(&mut *sink) } else { None })?;
            if !streams {
                primary_table(&report).write_csv(&mut *sink)?;
            }
            Ok(report)
        }
        Format::Json => {
            let report = execute(cfg, exec, None)?;
            report.write_json(&mut *sink)?;
            Ok(report)
        }
    }
}
