//! Reflected Euler simulation with Poisson piecing-out.
//!
//! Between jump epochs the state moves by the projected Euler step
//! `x ↦ max(0, x + g(x)h + σ√h z)`; the amount removed by the projection is
//! the local-time increment. Jump epochs come from an `Exp(Λ)` renewal clock
//! and each jump is applied right after the diffusion step of the first grid
//! point at or after its epoch.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::RateCertificate;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{JumpFamily, ProcessSpec};
use crate::scalar::{mean_and_stderr, Real};
use crate::stream::{PathStreams, StreamSeed};
use crate::wasserstein::EmpiricalDistribution;

pub const DEFAULT_STEP: f64 = 1e-3;

/// Uniform grid `tᵢ = i·h`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    pub h: T,
    pub steps: usize,
}

impl<T: Real> TimeGrid<T> {
    /// Smallest grid of step `h` reaching `horizon`.
    pub fn new(horizon: T, h: T) -> Result<Self> {
        if !(h > T::zero() && h.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {h}")));
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::Config(format!("time horizon must be positive, got {horizon}")));
        }
        if h > horizon {
            return Err(Error::Config(format!("dt = {h} exceeds the horizon {horizon}")));
        }
        // tolerate horizons that are a whole number of steps up to rounding
        let ratio = (horizon / h).as_f64();
        let steps = (ratio - 1e-9).ceil() as usize;
        Ok(TimeGrid { h, steps })
    }

    pub fn time(&self, i: usize) -> T {
        T::from_usize(i).unwrap() * self.h
    }

    pub fn horizon(&self) -> T {
        self.time(self.steps)
    }

    /// Grid index nearest to `t`.
    pub fn index_of(&self, t: T) -> usize {
        ((t / self.h).as_f64().round().max(0.0) as usize).min(self.steps)
    }

    /// Grid index of the first point at or after a jump epoch.
    pub fn jump_index(&self, tau: T) -> usize {
        ((tau / self.h).as_f64().ceil() as usize).max(1)
    }

    pub fn times(&self) -> Vec<T> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    /// Cumulative boundary push `ℓ(tᵢ)`.
    pub local_time: Vec<T>,
    pub jump_times: Vec<T>,
    /// Path index within its ensemble.
    pub seed_tag: u64,
}

/// Projected Euler step. Returns the new state and the local-time increment;
/// the increment is positive only when the new state is exactly zero.
#[inline]
pub fn reflected_step<T: Real>(x: T, spec: &ProcessSpec<T>, h: T, z: T) -> (T, T) {
    euler_step(x, spec, h, spec.sigma * h.sqrt(), z)
}

/// Projected step with the noise scale `σ√h` precomputed.
#[inline(always)]
pub(crate) fn euler_step<T: Real>(x: T, spec: &ProcessSpec<T>, h: T, noise: T, z: T) -> (T, T) {
    project(x + spec.drift_at(x) * h + noise * z)
}

#[inline(always)]
fn project<T: Real>(y: T) -> (T, T) {
    if y >= T::zero() {
        (y, T::zero())
    } else {
        (T::zero(), -y)
    }
}

/// Epochs of a rate-`Λ` Poisson clock on `(0, horizon]`.
pub fn sample_jump_times<T: Real, R: Rng + ?Sized>(intensity: T, horizon: T, rng: &mut R) -> Vec<T> {
    let mut times = Vec::new();
    if !(intensity > T::zero()) {
        return times;
    }
    let mut t = T::zero();
    loop {
        let u: f64 = rng.random();
        t = t + T::lit(-(-u).ln_1p()) / intensity;
        if t > horizon {
            return times;
        }
        times.push(t);
    }
}

/// Destination of a jump from `x` driven by the uniform `u`.
#[inline]
pub fn apply_jump<T: Real>(x: T, jumps: &JumpFamily<T>, u: T) -> T {
    match jumps.displacement() {
        Some(law) => x + law.quantile(u),
        None => x,
    }
}

/// Jump epochs of one path with their grid indices and displacement uniforms.
#[derive(Debug, Clone)]
pub(crate) struct JumpSchedule<T> {
    pub times: Vec<T>,
    pub indices: Vec<usize>,
    pub uniforms: Vec<T>,
}

impl<T: Real> JumpSchedule<T> {
    /// Epochs first, then one uniform per epoch, all from the jump substream.
    pub fn draw(spec: &ProcessSpec<T>, grid: &TimeGrid<T>, streams: &mut PathStreams) -> Self {
        let times = sample_jump_times(spec.jumps.intensity(), grid.horizon(), &mut streams.jumps);
        let indices = times.iter().map(|&t| grid.jump_index(t)).collect();
        let uniforms = times.iter().map(|_| T::lit(streams.jump_uniform())).collect();
        JumpSchedule { times, indices, uniforms }
    }
}

/// What happened on the step into grid point `i`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepEvent<T> {
    pub index: usize,
    /// State after the diffusion step, before any jump.
    pub projected: T,
    pub value: T,
    pub dl: T,
}

/// Drives one path through the grid, reporting every step to `observe`
/// until it returns `false`.
pub(crate) fn drive_path<T: Real>(
    spec: &ProcessSpec<T>,
    x0: T,
    grid: &TimeGrid<T>,
    mut streams: PathStreams,
    mut observe: impl FnMut(StepEvent<T>) -> bool,
) -> JumpSchedule<T> {
    let schedule = JumpSchedule::draw(spec, grid, &mut streams);
    let h = grid.h;
    let noise = spec.sigma * h.sqrt();
    let mut next_jump = 0;
    let mut x = x0;
    for i in 1..=grid.steps {
        let z = T::lit(streams.normal());
        let (y, dl) = euler_step(x, spec, h, noise, z);
        x = y;
        while next_jump < schedule.indices.len() && schedule.indices[next_jump] == i {
            x = apply_jump(x, &spec.jumps, schedule.uniforms[next_jump]);
            next_jump += 1;
        }
        if !observe(StepEvent { index: i, projected: y, value: x, dl }) {
            break;
        }
    }
    schedule
}

/// Full trajectory from `x0` over `[0, horizon]`.
pub fn simulate_path<T: Real>(
    spec: &ProcessSpec<T>,
    x0: T,
    horizon: T,
    h: T,
    streams: PathStreams,
    seed_tag: u64,
) -> Result<PathSample<T>> {
    check_start(x0)?;
    let grid = TimeGrid::new(horizon, h)?;
    let mut values = Vec::with_capacity(grid.steps + 1);
    let mut local_time = Vec::with_capacity(grid.steps + 1);
    values.push(x0);
    local_time.push(T::zero());
    let mut ell = T::zero();
    let schedule = drive_path(spec, x0, &grid, streams, |ev| {
        ell = ell + ev.dl;
        values.push(ev.value);
        local_time.push(ell);
        true
    });
    Ok(PathSample { grid: grid.times(), values, local_time, jump_times: schedule.times, seed_tag })
}

pub(crate) fn check_start<T: Real>(x0: T) -> Result<()> {
    if x0 >= T::zero() && x0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("initial state must be nonnegative, got {x0}")))
    }
}

/// Values of `n` independent paths from `x0` at the grid points nearest to
/// each of `times`; result is indexed `[time][path]`.
#[allow(clippy::too_many_arguments)]
pub fn sample_at_times<T: Real>(
    spec: &ProcessSpec<T>,
    x0: T,
    times: &[T],
    n: usize,
    h: T,
    seed: StreamSeed,
    ensemble: u64,
    exec: &Executor,
) -> Result<Vec<Vec<T>>> {
    check_start(x0)?;
    let horizon = times.iter().copied().fold(T::zero(), T::max);
    let indices: Vec<usize> = if horizon > T::zero() {
        let grid = TimeGrid::new(horizon, h)?;
        times.iter().map(|&t| grid.index_of(t)).collect()
    } else {
        vec![0; times.len()]
    };
    let per_path = exec.map_paths(n, |path| {
        let mut out = vec![x0; indices.len()];
        if horizon > T::zero() {
            let grid = TimeGrid::new(horizon, h).expect("validated above");
            let last = *indices.iter().max().unwrap();
            drive_path(spec, x0, &grid, seed.path_streams(ensemble, path), |ev| {
                for (slot, &idx) in out.iter_mut().zip(&indices) {
                    if idx == ev.index {
                        *slot = ev.value;
                    }
                }
                ev.index < last
            });
        }
        out
    });
    Ok(transpose(per_path, times.len()))
}

pub(crate) fn transpose<T: Copy>(rows: Vec<Vec<T>>, width: usize) -> Vec<Vec<T>> {
    (0..width).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

/// Long-run ensemble used as a sample from the stationary law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary<T> {
    pub n_paths: usize,
    pub endpoint_sample: EmpiricalDistribution<T>,
    /// Estimate of `E V(X(T))`, `V(x) = e^{λx}`.
    pub mean_v: T,
    pub stderr_v: T,
    pub warnings: Vec<String>,
}

/// `20/k`, the default burn-in when a certificate is available.
pub fn default_burn_in<T: Real>(k: T) -> Option<T> {
    (k > T::zero()).then(|| T::lit(20.0) / k)
}

/// Simulates `n` paths from zero to `burn_in + horizon` and keeps the endpoints.
#[allow(clippy::too_many_arguments)]
pub fn estimate_stationary<T: Real>(
    spec: &ProcessSpec<T>,
    cert: &RateCertificate<T>,
    burn_in: T,
    n: usize,
    horizon: T,
    h: T,
    seed: StreamSeed,
    ensemble: u64,
    exec: &Executor,
) -> Result<EnsembleSummary<T>> {
    if n == 0 {
        return Err(Error::Config("paths must be at least 1".into()));
    }
    if burn_in < T::zero() {
        return Err(Error::Config(format!("burn-in must be nonnegative, got {burn_in}")));
    }
    let mut warnings = Vec::new();
    if !cert.a3_holds {
        warnings.push("stationarity not certified: k(lambda) <= 0".to_string());
    }
    let end = sample_at_times(spec, T::zero(), &[burn_in + horizon], n, h, seed, ensemble, exec)?
        .pop()
        .expect("one observation time");
    let v: Vec<T> = end.iter().map(|&x| cert.lyapunov(x)).collect();
    let (mean_v, stderr_v) = mean_and_stderr(&v);
    Ok(EnsembleSummary {
        n_paths: n,
        endpoint_sample: EmpiricalDistribution::from_samples(end)?,
        mean_v,
        stderr_v,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DisplacementLaw, DriftSpec};

    fn zero_drift_no_noise() -> ProcessSpec<f64> {
        ProcessSpec::drifted_rbm(0.0, 0.0).unwrap()
    }

    #[test]
    fn reflected_step_examples() {
        assert_eq!(reflected_step(1.0, &zero_drift_no_noise(), 0.3, 1.7), (1.0, 0.0));
        let push = ProcessSpec::drifted_rbm(-1.0, 0.0).unwrap();
        assert_eq!(reflected_step(0.0, &push, 0.1, 0.0), (0.0, 0.1));
        let rbm = ProcessSpec::drifted_rbm(-1.0, 1.0).unwrap();
        let (x, dl): (f64, f64) = reflected_step(1.0, &rbm, 0.01, 0.5);
        assert!((x - 1.04).abs() < 1e-15);
        assert_eq!(dl, 0.0);
    }

    #[test]
    fn grid_construction() {
        let g = TimeGrid::new(2.0, 0.1).unwrap();
        assert_eq!(g.steps, 20);
        assert_eq!(TimeGrid::new(1.0, 0.3).unwrap().steps, 4);
        assert!(TimeGrid::new(1.0, 0.0).is_err());
        assert!(TimeGrid::new(0.0, 0.1).is_err());
        assert!(TimeGrid::new(0.1, 1.0).is_err());
        assert_eq!(g.jump_index(0.05), 1);
        assert_eq!(g.jump_index(0.1), 1);
        assert_eq!(g.jump_index(0.1000001), 2);
    }

    #[test]
    fn no_jumps_without_intensity() {
        let mut rng = StreamSeed::new(0).rng(0, 1, 0);
        assert!(sample_jump_times(0.0, 100.0, &mut rng).is_empty());
    }

    #[test]
    fn apply_jump_examples() {
        let det = JumpFamily::levy(DisplacementLaw::deterministic(1.0), 1.0).unwrap();
        assert_eq!(apply_jump(2.0, &det, 0.42), 3.0);
        let exp = JumpFamily::levy(DisplacementLaw::exponential(2.0), 1.0).unwrap();
        let u = 1.0 - (-2.0f64).exp();
        assert!((apply_jump(0.5, &exp, u) - 1.5).abs() < 1e-14);
        assert_eq!(apply_jump(0.5, &JumpFamily::NoJumps, 0.9), 0.5);
    }

    #[test]
    fn constant_path() {
        let p = simulate_path(&zero_drift_no_noise(), 1.0, 1.0, 0.01, StreamSeed::new(1).path_streams(0, 0), 0)
            .unwrap();
        assert_eq!(p.values.len(), 101);
        assert!(p.values.iter().all(|&v| v == 1.0));
        assert!(p.local_time.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn deterministic_descent_with_reflection() {
        let spec = ProcessSpec::<f64>::drifted_rbm(-1.0, 0.0).unwrap();
        let h = 0.125; // dyadic so the recursion is exact
        let p = simulate_path(&spec, 1.0, 2.0, h, StreamSeed::new(0).path_streams(0, 0), 0).unwrap();
        for (&t, &x) in p.grid.iter().zip(&p.values) {
            assert_eq!(x, (1.0 - t).max(0.0f64));
        }
        // after reaching zero each step pushes back by h
        assert_eq!(*p.local_time.last().unwrap(), 1.0);
    }

    #[test]
    fn path_invariants_with_jumps() {
        let spec = ProcessSpec::<f64>::exponential_jumps_example();
        let seed = StreamSeed::new(9);
        for path in 0..20 {
            let p = simulate_path(&spec, 0.0, 20.0, 0.01, seed.path_streams(0, path), path).unwrap();
            assert!(p.values.iter().all(|&v| v >= 0.0));
            assert_eq!(p.local_time[0], 0.0);
            assert!(p.local_time.windows(2).all(|w| w[1] >= w[0]));
            let grid = TimeGrid::new(20.0, 0.01).unwrap();
            let jump_steps: Vec<usize> = p.jump_times.iter().map(|&t| grid.jump_index(t)).collect();
            for i in 1..p.values.len() {
                if p.local_time[i] > p.local_time[i - 1] && !jump_steps.contains(&i) {
                    assert_eq!(p.values[i], 0.0);
                }
            }
            assert!(p.jump_times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn determinism() {
        let spec = ProcessSpec::<f64>::exponential_jumps_example();
        let seed = StreamSeed::new(5);
        let a = simulate_path(&spec, 1.0, 5.0, 0.01, seed.path_streams(2, 3), 3).unwrap();
        let b = simulate_path(&spec, 1.0, 5.0, 0.01, seed.path_streams(2, 3), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn jumps_do_not_perturb_brownian_increments() {
        let seed = StreamSeed::new(11);
        let plain = ProcessSpec::drifted_rbm(0.0, 1.0).unwrap();
        let with_jumps = ProcessSpec::levy(0.0, 1.0, DisplacementLaw::deterministic(0.0), 20.0).unwrap();
        let a = simulate_path(&plain, 5.0, 1.0, 0.01, seed.path_streams(0, 0), 0).unwrap();
        let b = simulate_path(&with_jumps, 5.0, 1.0, 0.01, seed.path_streams(0, 0), 0).unwrap();
        assert!(!b.jump_times.is_empty());
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn rejects_bad_arguments() {
        let spec = ProcessSpec::drifted_rbm(-1.0, 1.0).unwrap();
        let s = || StreamSeed::new(0).path_streams(0, 0);
        assert!(simulate_path(&spec, 1.0, 1.0, 0.0, s(), 0).is_err());
        assert!(simulate_path(&spec, 1.0, -1.0, 0.1, s(), 0).is_err());
        assert!(simulate_path(&spec, -1.0, 1.0, 0.1, s(), 0).is_err());
    }

    #[test]
    fn sample_at_times_matches_full_paths() {
        let spec = ProcessSpec::new(DriftSpec::affine(-1.0, -0.5), 0.7, JumpFamily::NoJumps).unwrap();
        let seed = StreamSeed::new(2);
        let snaps = sample_at_times(&spec, 0.3, &[0.0, 0.5, 1.0], 8, 0.01, seed, 4, &Executor::sequential()).unwrap();
        for path in 0..8u64 {
            let p = simulate_path(&spec, 0.3, 1.0, 0.01, seed.path_streams(4, path), path).unwrap();
            assert_eq!(snaps[0][path as usize], 0.3);
            assert_eq!(snaps[1][path as usize], p.values[50]);
            assert_eq!(snaps[2][path as usize], p.values[100]);
        }
    }

    #[test]
    fn deterministic_absorption_is_delta_zero() {
        let spec = ProcessSpec::drifted_rbm(-1.0, 0.0).unwrap();
        let cert = RateCertificate::from_constants(1.0, 1.0, Some(0.0), f64::INFINITY, 1.0).unwrap();
        let s = estimate_stationary(&spec, &cert, 5.0, 16, 1.0, 0.01, StreamSeed::new(0), 0, &Executor::sequential())
            .unwrap();
        assert_eq!(s.mean_v, 1.0);
        assert_eq!(s.stderr_v, 0.0);
        assert!(s.endpoint_sample.points().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn uncertified_stationarity_warns() {
        let spec = ProcessSpec::drifted_rbm(0.5, 1.0).unwrap();
        let cert = crate::certificate::make_certificate(&spec, 1.0).unwrap();
        let s = estimate_stationary(&spec, &cert, 0.0, 4, 0.1, 0.01, StreamSeed::new(0), 0, &Executor::sequential())
            .unwrap();
        assert_eq!(s.warnings.len(), 1);
    }
}
