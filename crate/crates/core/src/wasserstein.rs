//! Wasserstein distances on the half-line and decay curves against the
//! certificate bounds.
//!
//! On ℝ the comonotone (quantile) coupling is optimal for every `W_p`, so the
//! distance between two discrete measures is an integral over `u ∈ (0, 1)` of
//! `|F_A⁻¹(u) − F_B⁻¹(u)|^p`, which is piecewise constant on the merged weight
//! partition and computed exactly.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::certificate::RateCertificate;
use crate::coupling::{check_coupling_step, drive_coupled, CoupledState};
use crate::engine::{sample_at_times, transpose, EnsembleSummary, PathSample, TimeGrid};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::ProcessSpec;
use crate::scalar::{mean_and_stderr, Real};
use crate::stream::StreamSeed;

/// Monte Carlo slack applied to bounds in decay-curve acceptance checks.
pub const BOUND_SLACK: f64 = 1.1;

/// Weighted sample on `[0, ∞)`, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution<T> {
    points: Vec<T>,
    weights: Vec<T>,
    uniform: bool,
}

impl<T: Real> EmpiricalDistribution<T> {
    /// Equal-weight measure on the given points.
    pub fn from_samples(mut points: Vec<T>) -> Result<Self> {
        validate_points(&points)?;
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let w = T::from_usize(points.len()).unwrap().recip();
        Ok(EmpiricalDistribution { weights: vec![w; points.len()], points, uniform: true })
    }

    /// Weighted measure; weights are normalized to sum to one.
    pub fn weighted(points: Vec<T>, weights: Vec<T>) -> Result<Self> {
        validate_points(&points)?;
        if weights.len() != points.len() {
            return Err(Error::InvalidSample(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > T::zero())) {
            return Err(Error::InvalidSample("weights must be positive and finite".into()));
        }
        let total: T = weights.iter().copied().sum();
        let mut pairs: Vec<(T, T)> = points.into_iter().zip(weights.into_iter().map(|w| w / total)).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let (points, weights) = pairs.into_iter().unzip();
        Ok(EmpiricalDistribution { points, weights, uniform: false })
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mean(&self) -> T {
        self.points.iter().zip(&self.weights).map(|(&x, &w)| x * w).sum()
    }

    /// Same weights, points shifted by `c` (the result must stay nonnegative).
    pub fn translated(&self, c: T) -> Result<Self> {
        let points: Vec<T> = self.points.iter().map(|&x| x + c).collect();
        validate_points(&points)?;
        Ok(EmpiricalDistribution { points, weights: self.weights.clone(), uniform: self.uniform })
    }
}

fn validate_points<T: Real>(points: &[T]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(bad) = points.iter().find(|x| !(x.is_finite() && **x >= T::zero())) {
        return Err(Error::InvalidSample(format!("points must be finite and nonnegative, got {bad}")));
    }
    Ok(())
}

/// Exact `W_p` between two discrete measures on the line.
pub fn wp_exact<T: Real>(a: &EmpiricalDistribution<T>, b: &EmpiricalDistribution<T>, p: T) -> Result<T> {
    check_order(p)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.uniform && b.uniform && a.len() == b.len() {
        let n = T::from_usize(a.len()).unwrap();
        let total: T = a.points.iter().zip(&b.points).map(|(&x, &y)| (x - y).abs().powf(p)).sum();
        return Ok((total / n).powf(p.recip()));
    }
    let cum_a = cumulative(&a.weights);
    let cum_b = cumulative(&b.weights);
    let (mut i, mut j) = (0, 0);
    let mut u = T::zero();
    let mut total = T::zero();
    while i < cum_a.len() && j < cum_b.len() {
        let next = cum_a[i].min(cum_b[j]);
        total = total + (next - u) * (a.points[i] - b.points[j]).abs().powf(p);
        u = next;
        if cum_a[i] == next {
            i += 1;
        }
        if cum_b[j] == next {
            j += 1;
        }
    }
    Ok(total.powf(p.recip()))
}

fn cumulative<T: Real>(weights: &[T]) -> Vec<T> {
    let mut acc = T::zero();
    let mut out: Vec<T> = weights
        .iter()
        .map(|&w| {
            acc = acc + w;
            acc
        })
        .collect();
    // both partitions must end at exactly 1 for the merge to terminate together
    *out.last_mut().expect("nonempty") = T::one();
    out
}

fn check_order<T: Real>(p: T) -> Result<()> {
    if p >= T::one() && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("Wasserstein order p must be finite and >= 1, got {p}")))
    }
}

/// Minimum over all pairings of two equal-size uniform samples: an
/// enumeration oracle for [`wp_exact`], limited to `n ≤ 8`.
pub fn wp_bruteforce<T: Real>(a: &[T], b: &[T], p: T) -> Result<T> {
    check_order(p)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.len() != b.len() {
        return Err(Error::InvalidSample("brute force needs equal sample sizes".into()));
    }
    let n = a.len();
    if n > 8 {
        return Err(Error::OracleSizeExceeded(n));
    }
    let best = (0..n)
        .permutations(n)
        .map(|perm| perm.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).abs().powf(p)).sum::<T>())
        .fold(T::infinity(), T::min);
    Ok((best / T::from_usize(n).unwrap()).powf(p.recip()))
}

/// `max |P(t) − Q(t)|` over grid points in `[t0, t1]`, an upper bound on the
/// Skorokhod distance between the two paths restricted to the window.
pub fn path_sup_distance<T: Real>(a: &PathSample<T>, b: &PathSample<T>, window: (T, T)) -> Result<T> {
    if a.grid != b.grid || a.values.len() != b.values.len() {
        return Err(Error::GridMismatch);
    }
    let (t0, t1) = window;
    if t0 > t1 {
        return Err(Error::InvalidArgument(format!("empty window [{t0}, {t1}]")));
    }
    let slack = grid_slack(&a.grid);
    Ok(a.grid
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .filter(|(t, _)| **t >= t0 - slack && **t <= t1 + slack)
        .map(|(_, (x, y))| (*x - *y).abs())
        .fold(T::zero(), T::max))
}

fn grid_slack<T: Real>(grid: &[T]) -> T {
    if grid.len() > 1 {
        (grid[1] - grid[0]) * T::lit(1e-6)
    } else {
        T::zero()
    }
}

/// One time point of a decay experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow<T> {
    pub t: T,
    /// End of the path-space window `[t, t_end]`, if any.
    pub t_end: Option<T>,
    /// `(E|X₁ − X₂|^p)^{1/p}` under the synchronous coupling.
    pub wp_coupling: T,
    pub wp_coupling_stderr: T,
    /// Exact `W_p` between independent ensembles.
    pub wp_marginal: Option<T>,
    /// Sampling-noise scale of `wp_marginal` (half-split estimate).
    pub wp_marginal_noise: Option<T>,
    pub bound_thm1: Option<T>,
    pub bound_thm1_stderr: Option<T>,
    pub bound_thm2: Option<T>,
    pub bound_thm2_stderr: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve<T> {
    pub n_paths: usize,
    pub p: T,
    pub h: T,
    pub rows: Vec<DecayRow<T>>,
}

impl<T: Real> DecayCurve<T> {
    /// Rows where the optimal-coupling estimate exceeds the constructed
    /// coupling by more than three combined noise units.
    pub fn coupling_dominance_violations(&self) -> Vec<T> {
        let three = T::lit(3.0);
        self.rows
            .iter()
            .filter(|r| match r.wp_marginal {
                Some(m) => m > r.wp_coupling + three * (r.wp_coupling_stderr + r.wp_marginal_noise.unwrap_or(T::zero())),
                None => false,
            })
            .map(|r| r.t)
            .collect()
    }
}

/// `(mean of gap^p)^{1/p}` and its delta-method standard error.
fn coupling_moment<T: Real>(gaps: &[T], p: T) -> (T, T) {
    let powered: Vec<T> = gaps.iter().map(|&g| g.powf(p)).collect();
    let (m, se) = mean_and_stderr(&powered);
    let root = m.powf(p.recip());
    let se_root = if m > T::zero() { root / (p * m) * se } else { T::zero() };
    (root, se_root)
}

/// Noise scale of an empirical `W_p` between two `n`-samples: the distance
/// between the two halves of one sample, rescaled by `1/√2`.
fn half_split_noise<T: Real>(sample: &[T], p: T) -> Result<Option<T>> {
    if sample.len() < 2 {
        return Ok(None);
    }
    let mid = sample.len() / 2;
    let a = EmpiricalDistribution::from_samples(sample[..mid].to_vec())?;
    let b = EmpiricalDistribution::from_samples(sample[mid..2 * mid].to_vec())?;
    Ok(Some(wp_exact(&a, &b, p)? / T::lit(2.0).sqrt()))
}

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no observation times".into()));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= T::zero())) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("observation times must be nonnegative and increasing".into()));
    }
    Ok(())
}

/// Gaps of `n` coupled runs at the grid points nearest to `times`, indexed
/// `[time][path]`. Runs stop as soon as they coalesce.
#[allow(clippy::too_many_arguments)]
fn coupled_gaps<T: Real>(
    spec: &ProcessSpec<T>,
    start: impl Fn(u64) -> CoupledState<T> + Sync + Send,
    times: &[T],
    n: usize,
    h: T,
    seed: StreamSeed,
    ensemble: u64,
    exec: &Executor,
) -> Result<Vec<Vec<T>>> {
    check_coupling_step(spec, h)?;
    let horizon = *times.last().expect("checked nonempty");
    let grid = (horizon > T::zero()).then(|| TimeGrid::new(horizon, h)).transpose()?;
    let indices: Vec<usize> = match &grid {
        Some(g) => times.iter().map(|&t| g.index_of(t)).collect(),
        None => vec![0; times.len()],
    };
    let rows = exec.map_paths(n, |path| {
        let s0 = start(path);
        let mut out: Vec<T> = indices.iter().map(|&i| if i == 0 { s0.gap } else { T::zero() }).collect();
        if let (Some(grid), false) = (&grid, s0.coalesced()) {
            drive_coupled(spec, s0, grid, seed.path_streams(ensemble, path), |ev| {
                for (slot, &idx) in out.iter_mut().zip(&indices) {
                    if idx == ev.index {
                        *slot = ev.state.gap;
                    }
                }
                !ev.state.coalesced() && ev.index < *indices.last().unwrap()
            });
        }
        out
    });
    Ok(transpose(rows, times.len()))
}

const COUPLED: u64 = 0;
const MARGINAL_LOWER: u64 = 1;
const MARGINAL_UPPER: u64 = 2;
const MARGINAL_FROM_X: u64 = 3;

/// Decay of `W_p(Pᵗ(x₁,·), Pᵗ(x₂,·))` at the given times, with the order `p`
/// taken from the certificate.
#[allow(clippy::too_many_arguments)]
pub fn decay_curve<T: Real>(
    spec: &ProcessSpec<T>,
    cert: &RateCertificate<T>,
    x1: T,
    x2: T,
    times: &[T],
    n: usize,
    h: T,
    seed: StreamSeed,
    exec: &Executor,
) -> Result<DecayCurve<T>> {
    check_times(times)?;
    let start = CoupledState::new(x1, x2)?;
    if n == 0 {
        return Err(Error::Config("paths must be at least 1".into()));
    }
    let p = cert.p;
    let gaps = coupled_gaps(spec, |_| start, times, n, h, seed, COUPLED, exec)?;
    let lower = sample_at_times(spec, x1, times, n, h, seed, MARGINAL_LOWER, exec)?;
    let upper = sample_at_times(spec, x2, times, n, h, seed, MARGINAL_UPPER, exec)?;
    let mut rows = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        let (wp_coupling, wp_coupling_stderr) = coupling_moment(&gaps[j], p);
        let a = EmpiricalDistribution::from_samples(lower[j].clone())?;
        let b = EmpiricalDistribution::from_samples(upper[j].clone())?;
        rows.push(DecayRow {
            t,
            t_end: None,
            wp_coupling,
            wp_coupling_stderr,
            wp_marginal: Some(wp_exact(&a, &b, p)?),
            wp_marginal_noise: half_split_noise(&lower[j], p)?,
            bound_thm1: cert.lyapunov_bound(x1, x2, t).ok(),
            bound_thm1_stderr: None,
            bound_thm2: cert.contraction_bound(x1, x2, t).ok(),
            bound_thm2_stderr: None,
        });
    }
    Ok(DecayCurve { n_paths: n, p, h, rows })
}

/// Path-space version over windows `[t, t_end]`: the coupling estimate of
/// `(E sup_window |X₁ − X₂|^p)^{1/p}`. The contraction bound is reported
/// only for nonincreasing gap dynamics (`G ≤ 0`).
#[allow(clippy::too_many_arguments)]
pub fn path_decay_curve<T: Real>(
    spec: &ProcessSpec<T>,
    cert: &RateCertificate<T>,
    x1: T,
    x2: T,
    windows: &[(T, T)],
    n: usize,
    h: T,
    seed: StreamSeed,
    exec: &Executor,
) -> Result<DecayCurve<T>> {
    let start = CoupledState::new(x1, x2)?;
    check_coupling_step(spec, h)?;
    if windows.is_empty() || windows.iter().any(|&(a, b)| !(a >= T::zero() && b > a && b.is_finite())) {
        return Err(Error::InvalidArgument("windows must satisfy 0 <= t < t_end".into()));
    }
    if n == 0 {
        return Err(Error::Config("paths must be at least 1".into()));
    }
    let p = cert.p;
    let horizon = windows.iter().map(|w| w.1).fold(T::zero(), T::max);
    let grid = TimeGrid::new(horizon, h)?;
    let spans: Vec<(usize, usize)> = windows.iter().map(|&(a, b)| (grid.index_of(a), grid.index_of(b))).collect();
    let rows = exec.map_paths(n, |path| {
        let mut sup: Vec<T> = spans.iter().map(|&(a, _)| if a == 0 { start.gap } else { T::zero() }).collect();
        if !start.coalesced() {
            drive_coupled(spec, start, &grid, seed.path_streams(COUPLED, path), |ev| {
                for (slot, &(a, b)) in sup.iter_mut().zip(&spans) {
                    if ev.index >= a && ev.index <= b {
                        *slot = slot.max(ev.state.gap);
                    }
                }
                !ev.state.coalesced()
            });
        }
        sup
    });
    let per_window = transpose(rows, windows.len());
    let report_contraction = cert.growth.is_some_and(|g| g <= T::zero());
    let rows = windows
        .iter()
        .zip(&per_window)
        .map(|(&(t, t_end), sups)| {
            let (wp_coupling, wp_coupling_stderr) = coupling_moment(sups, p);
            DecayRow {
                t,
                t_end: Some(t_end),
                wp_coupling,
                wp_coupling_stderr,
                wp_marginal: None,
                wp_marginal_noise: None,
                bound_thm1: cert.lyapunov_bound(x1, x2, t).ok(),
                bound_thm1_stderr: None,
                bound_thm2: if report_contraction { cert.contraction_bound(x1, x2, t).ok() } else { None },
                bound_thm2_stderr: None,
            }
        })
        .collect();
    Ok(DecayCurve { n_paths: n, p, h, rows })
}

/// Distance from `Pᵗ(x,·)` to a stationary ensemble.
///
/// The coupling column pairs a run from `x` with a run from a stationary
/// point, which is a coupling of `Pᵗ(x,·)` with `πPᵗ = π`. Bounds use the
/// ensemble's `(π, V)` estimate; its standard error is propagated to first
/// order into the bound columns.
#[allow(clippy::too_many_arguments)]
pub fn stationary_gap<T: Real>(
    spec: &ProcessSpec<T>,
    cert: &RateCertificate<T>,
    x: T,
    stationary: &EnsembleSummary<T>,
    times: &[T],
    n: usize,
    h: T,
    seed: StreamSeed,
    exec: &Executor,
) -> Result<DecayCurve<T>> {
    check_times(times)?;
    if n == 0 {
        return Err(Error::Config("paths must be at least 1".into()));
    }
    let p = cert.p;
    let pi_points = stationary.endpoint_sample.points();
    let m = pi_points.len();
    CoupledState::new(x, x)?;
    let start = |path: u64| {
        let s = pi_points[(path as usize) % m];
        CoupledState { lower: s.min(x), gap: (s.max(x) - s.min(x)) }
    };
    let gaps = coupled_gaps(spec, start, times, n, h, seed, COUPLED, exec)?;
    let from_x = sample_at_times(spec, x, times, n, h, seed, MARGINAL_FROM_X, exec)?;
    let pi_v = stationary.mean_v;
    let pi_v_se = stationary.stderr_v;
    let v_x = cert.lyapunov(x);
    let inv_p = p.recip();
    let mut rows = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        let (wp_coupling, wp_coupling_stderr) = coupling_moment(&gaps[j], p);
        let sample = EmpiricalDistribution::from_samples(from_x[j].clone())?;
        // d/dπV of (πV + V(x))^{1/p} is (1/p)(πV + V(x))^{1/p − 1}
        let sensitivity = inv_p * (pi_v + v_x).powf(inv_p - T::one());
        let bound1 = cert.lyapunov_bound_measures(pi_v, v_x, t).ok();
        let bound2 = cert.contraction_bound_stationary(pi_v, x, t).ok();
        rows.push(DecayRow {
            t,
            t_end: None,
            wp_coupling,
            wp_coupling_stderr,
            wp_marginal: Some(wp_exact(&sample, &stationary.endpoint_sample, p)?),
            wp_marginal_noise: half_split_noise(&from_x[j], p)?,
            bound_thm1: bound1,
            bound_thm1_stderr: bound1.map(|_| cert.prefactor() * sensitivity * pi_v_se * (-cert.k * t / p).exp()),
            bound_thm2: bound2,
            bound_thm2_stderr: bound2.map(|_| sensitivity * pi_v_se * (-cert.contraction.unwrap() * t).exp()),
        });
    }
    Ok(DecayCurve { n_paths: n, p, h, rows })
}
