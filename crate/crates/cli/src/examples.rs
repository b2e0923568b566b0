//! The worked examples as one deterministic run with golden verdicts.

use refjump::certificate::{certificate_at, make_certificate};
use refjump::coupling::{contraction_check_ensemble, supermartingale_probe};
use refjump::wasserstein::decay_curve;
use refjump::{Executor, ProcessSpec, StreamSeed};

use crate::config::RunKind;
use crate::error::Result;
use crate::report::{Report, Verdict};
use crate::run::{bound_verdicts, decay_table};

pub const EXP_JUMPS_LAMBDA: f64 = 0.304;
pub const EXP_JUMPS_LAMBDA_TOL: f64 = 0.005;
pub const EXP_JUMPS_K: f64 = 0.0785;
pub const EXP_JUMPS_K_TOL: f64 = 0.001;
/// Relative tolerance on the closed-form OU constants.
pub const OU_REL_TOL: f64 = 1e-4;
pub const RBM_DECAY_TIMES: [f64; 4] = [2.0, 4.0, 6.0, 8.0];
pub const OU_DECAY_TIMES: [f64; 3] = [0.5, 1.0, 2.0];
/// The OU coupling must decay at least this fast in log scale.
pub const OU_SLOPE_CEILING: f64 = -1.0;
pub const CONTRACTION_HORIZON: f64 = 10.0;
pub const PROBE_TIME: f64 = 5.0;

/// Least-squares slope of `ln y` against `t`.
pub fn log_slope(ts: &[f64], ys: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let tm = ts.iter().sum::<f64>() / n;
    let lm = logs.iter().sum::<f64>() / n;
    let cov: f64 = ts.iter().zip(&logs).map(|(t, l)| (t - tm) * (l - lm)).sum();
    let var: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
    cov / var
}

/// Runs, in order: the exponential-jumps certificate, the OU certificate,
/// the drifted-RBM decay against the Lyapunov bound, the OU decay against
/// the contraction bound, and the gap-contraction and supermartingale
/// verifications. Every verdict uses a tolerance fixed in this module or in
/// the core crate.
pub fn run_examples(seed: u64, paths: usize, dt: f64, exec: &Executor) -> Result<Report> {
    let mut report = Report::new(RunKind::Examples, None);
    let s = StreamSeed::new(seed);

    // (i) exponential jumps: g = −1, σ = 1, Exp(2) at unit intensity
    let jumps = ProcessSpec::exponential_jumps_example();
    let cert = make_certificate(&jumps, 1.0)?;
    report.verdicts.push(Verdict::near("exponential jumps: lambda*", cert.lambda, EXP_JUMPS_LAMBDA, EXP_JUMPS_LAMBDA_TOL));
    report.verdicts.push(Verdict::near("exponential jumps: k*", cert.k, EXP_JUMPS_K, EXP_JUMPS_K_TOL));
    report.certify("exponential jumps", &cert);

    // (ii) OU with a = m = σ = 1, p = 1: λ* = am/σ², k* = a²m²/(2σ²), K = k*/p + a
    let ou = ProcessSpec::ornstein_uhlenbeck(1.0, 1.0, 1.0)?;
    let cert = make_certificate(&ou, 1.0)?;
    let contraction = cert.contraction.unwrap_or(f64::NAN);
    report.verdicts.push(Verdict::near("ou: lambda*", cert.lambda, 1.0, OU_REL_TOL));
    report.verdicts.push(Verdict::near("ou: k*", cert.k, 0.5, 0.5 * OU_REL_TOL));
    report.verdicts.push(Verdict::near("ou: K", contraction, 1.5, 1.5 * OU_REL_TOL));
    report.verdicts.push(Verdict::greater("ou: p*K > k*", cert.p * contraction, cert.k));
    report.certify("ou", &cert);

    // (iii) drifted RBM decay against the Lyapunov bound
    let rbm = ProcessSpec::drifted_rbm(-1.0, 1.0)?;
    let rbm_cert = make_certificate(&rbm, 1.0)?;
    let curve = decay_curve(&rbm, &rbm_cert, 0.0, 1.0, &RBM_DECAY_TIMES, paths, dt, s, exec)?;
    report.verdicts.extend(bound_verdicts(&curve, "drifted rbm").into_iter().filter(|v| v.check.contains("thm1")));
    let mut table = decay_table(&curve, false);
    table.name = "drifted rbm decay".into();
    report.tables.push(table);
    report.certify("drifted rbm", &rbm_cert);

    // (iv) OU decay against the contraction bound, with a rate faster than k
    let curve = decay_curve(&ou, &cert, 0.0, 1.0, &OU_DECAY_TIMES, paths, dt, s, exec)?;
    report.verdicts.extend(bound_verdicts(&curve, "ou").into_iter().filter(|v| v.check.contains("thm2")));
    let ys: Vec<f64> = curve.rows.iter().map(|r| r.wp_coupling).collect();
    report.verdicts.push(Verdict::at_most("ou: log-slope of wp_coupling on [0.5, 2]", log_slope(&OU_DECAY_TIMES, &ys), OU_SLOPE_CEILING));
    let mut table = decay_table(&curve, false);
    table.name = "ou decay".into();
    report.tables.push(table);

    // (v) gap contraction for OU, supermartingale probes for both jump-free and jump models
    let growth = cert.growth.unwrap_or(f64::NAN);
    let check = contraction_check_ensemble(&ou, 0.0, 1.0, CONTRACTION_HORIZON, dt, growth, paths, s, 11, exec)?;
    report.verdicts.push(Verdict::at_most("ou: max gap(t) - e^{-t}", check.max_violation, check.tolerance));

    let probes = [("drifted rbm", &rbm, certificate_at(&rbm, 1.0, 1.0)?), ("exponential jumps", &jumps, certificate_at(&jumps, EXP_JUMPS_LAMBDA, 1.0)?)];
    for (name, spec, c) in probes {
        let probe = supermartingale_probe(spec, &c, 1.0, PROBE_TIME, paths, dt, s, 13, exec)?;
        report.estimate(&format!("{name}: E[e^(k(t^tau)) V(X(t^tau))]"), probe.estimate, probe.stderr);
        report.verdicts.push(Verdict::at_most(
            format!("{name}: supermartingale estimate <= V(1) + 3 stderr"),
            probe.estimate,
            probe.ceiling + 3.0 * probe.stderr,
        ));
    }
    Ok(report)
}
