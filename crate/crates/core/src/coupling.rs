//! Ordered synchronous coupling of two copies of the same process.
//!
//! Both copies see the same Brownian increments, the same Poisson clock and
//! the same displacement draw at every jump. The pair is tracked as
//! `(lower, gap)` with `upper = lower + gap`, so a shared translation-invariant
//! jump leaves the gap bit-for-bit unchanged and the ordering `lower ≤ upper`
//! holds exactly under rounding. Once the upper copy reaches zero both copies
//! sit at zero and are evolved as a single path from then on.

use serde::{Deserialize, Serialize};

use crate::certificate::RateCertificate;
use crate::engine::{check_start, drive_path, euler_step, JumpSchedule, TimeGrid};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{JumpFamily, ProcessSpec};
use crate::scalar::{mean_and_stderr, Real};
use crate::stream::{PathStreams, StreamSeed};

/// Gap contraction checks pass when the violation is at most this
/// multiple of the step size.
pub const CONTRACTION_TOLERANCE_FACTOR: f64 = 5.0;

/// Largest step for which the coupled Euler map preserves the ordering, or
/// `None` if every step does.
///
/// One step maps a gap `d` to `d·(1 + h·s)` with `s` a local drift slope, so
/// the most negative slope `s_min` requires `h < 1/|s_min|`.
pub fn max_coupling_step<T: Real>(spec: &ProcessSpec<T>) -> Option<T> {
    let s = spec.drift.steepest_descent();
    (s < T::zero()).then(|| -s.recip())
}

pub fn check_coupling_step<T: Real>(spec: &ProcessSpec<T>, h: T) -> Result<()> {
    match max_coupling_step(spec) {
        Some(bound) if !(h < bound) => Err(Error::StepTooLarge { dt: h.as_f64(), bound: bound.as_f64() }),
        _ => Ok(()),
    }
}

/// State of the coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledState<T> {
    pub lower: T,
    /// `upper − lower`, always `≥ 0`.
    pub gap: T,
}

impl<T: Real> CoupledState<T> {
    pub fn new(x1: T, x2: T) -> Result<Self> {
        check_start(x1)?;
        check_start(x2)?;
        if x1 > x2 {
            return Err(Error::InvalidArgument(format!("coupling needs x1 <= x2, got {x1} > {x2}")));
        }
        Ok(CoupledState { lower: x1, gap: x2 - x1 })
    }

    #[inline]
    pub fn upper(&self) -> T {
        self.lower + self.gap
    }

    pub fn coalesced(&self) -> bool {
        self.gap == T::zero()
    }
}

/// One coupled Euler step on the shared normal `z`.
pub fn coupled_step<T: Real>(state: CoupledState<T>, spec: &ProcessSpec<T>, h: T, z: T) -> Result<CoupledState<T>> {
    check_coupling_step(spec, h)?;
    Ok(advance(state, spec, h, spec.sigma * h.sqrt(), z).0)
}

/// Returns the new state and whether the upper copy hit zero.
#[inline(always)]
fn advance<T: Real>(state: CoupledState<T>, spec: &ProcessSpec<T>, h: T, noise: T, z: T) -> (CoupledState<T>, bool) {
    let (lower, dl) = euler_step(state.lower, spec, h, noise, z);
    if state.gap == T::zero() {
        return (CoupledState { lower, gap: T::zero() }, lower == T::zero());
    }
    let upper_start = state.upper();
    let (upper, _) = euler_step(upper_start, spec, h, noise, z);
    if upper == T::zero() {
        // the lower copy is at zero as well in exact arithmetic
        return (CoupledState { lower: T::zero(), gap: T::zero() }, true);
    }
    let gap = if dl > T::zero() {
        upper
    } else {
        // the noise cancels; updating the gap directly avoids rounding drift
        state.gap + (spec.drift_at(upper_start) - spec.drift_at(state.lower)) * h
    };
    // a negative gap is a rounding artifact of an ulp-sized gap
    (CoupledState { lower, gap: gap.max(T::zero()) }, false)
}

/// Shared jump: both copies move by the same displacement, the gap is untouched.
pub fn coupled_jump<T: Real>(state: CoupledState<T>, jumps: &JumpFamily<T>, u: T) -> CoupledState<T> {
    match jumps.displacement() {
        Some(law) => CoupledState { lower: state.lower + law.quantile(u), gap: state.gap },
        None => state,
    }
}

/// What happened on the coupled step into grid point `index`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CoupledEvent<T> {
    pub index: usize,
    pub state: CoupledState<T>,
    /// Gap right before the first jump of this step, if any jumped.
    pub gap_before_jump: Option<T>,
    /// Upper copy reached zero on this step (before any jump).
    pub hit_zero: bool,
}

/// Steps a coupled pair along `grid`, reporting to `observe` until it
/// returns `false`. Draws come from `streams` in the same order as
/// [`crate::engine::simulate_path`], so the lower copy reproduces a solo run
/// of the same stream.
pub(crate) fn drive_coupled<T: Real>(
    spec: &ProcessSpec<T>,
    start: CoupledState<T>,
    grid: &TimeGrid<T>,
    mut streams: PathStreams,
    mut observe: impl FnMut(CoupledEvent<T>) -> bool,
) -> JumpSchedule<T> {
    let schedule = JumpSchedule::draw(spec, grid, &mut streams);
    let h = grid.h;
    let noise = spec.sigma * h.sqrt();
    let mut next_jump = 0;
    let mut state = start;
    for i in 1..=grid.steps {
        let z = T::lit(streams.normal());
        let (stepped, hit_zero) = advance(state, spec, h, noise, z);
        state = stepped;
        let mut gap_before_jump = None;
        while next_jump < schedule.indices.len() && schedule.indices[next_jump] == i {
            gap_before_jump.get_or_insert(state.gap);
            state = coupled_jump(state, &spec.jumps, schedule.uniforms[next_jump]);
            next_jump += 1;
        }
        if !observe(CoupledEvent { index: i, state, gap_before_jump, hit_zero }) {
            break;
        }
    }
    schedule
}

/// A coupled pair of trajectories on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPaths<T> {
    pub grid: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub gap: Vec<T>,
    /// First grid index at which the upper copy is at zero.
    pub tau_index: Option<usize>,
    /// First grid index from which both copies coincide.
    pub coalesced_from: Option<usize>,
    pub jump_times: Vec<T>,
}

impl<T: Real> CoupledPaths<T> {
    pub fn initial_gap(&self) -> T {
        self.gap[0]
    }

    /// Grid indices strictly before the hitting time.
    pub fn pre_tau(&self) -> std::ops::Range<usize> {
        0..self.tau_index.unwrap_or(self.grid.len())
    }
}

/// Runs the coupled pair from `(x1, x2)` over `[0, horizon]`.
pub fn simulate_coupled<T: Real>(
    spec: &ProcessSpec<T>,
    x1: T,
    x2: T,
    horizon: T,
    h: T,
    streams: PathStreams,
) -> Result<CoupledPaths<T>> {
    let start = CoupledState::new(x1, x2)?;
    check_coupling_step(spec, h)?;
    let grid = TimeGrid::new(horizon, h)?;
    let mut lower = vec![start.lower];
    let mut upper = vec![start.upper()];
    let mut gap = vec![start.gap];
    let mut tau_index = (x2 == T::zero()).then_some(0);
    let mut coalesced_from = start.coalesced().then_some(0);
    let schedule = drive_coupled(spec, start, &grid, streams, |ev| {
        lower.push(ev.state.lower);
        upper.push(ev.state.upper());
        gap.push(ev.state.gap);
        if ev.hit_zero && tau_index.is_none() {
            tau_index = Some(ev.index);
        }
        if ev.state.coalesced() && coalesced_from.is_none() {
            coalesced_from = Some(ev.index);
        }
        true
    });
    Ok(CoupledPaths { grid: grid.times(), lower, upper, gap, tau_index, coalesced_from, jump_times: schedule.times })
}

/// `max_{t < τ} [gap(t) − (x₂ − x₁)e^{Gt}]`; nonpositive up to discretization
/// error when the gap obeys the exponential contraction bound.
pub fn contraction_violation<T: Real>(paths: &CoupledPaths<T>, growth: T) -> T {
    let d0 = paths.initial_gap();
    paths
        .pre_tau()
        .map(|i| paths.gap[i] - d0 * (growth * paths.grid[i]).exp())
        .fold(T::neg_infinity(), T::max)
}

/// Aggregate of contraction checks over an ensemble of coupled runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionCheck<T> {
    pub n_paths: usize,
    pub h: T,
    pub max_violation: T,
    pub tolerance: T,
    pub passed: bool,
}

/// [`contraction_violation`] over `n` coupled runs, streamed without storing paths.
#[allow(clippy::too_many_arguments)]
pub fn contraction_check_ensemble<T: Real>(
    spec: &ProcessSpec<T>,
    x1: T,
    x2: T,
    horizon: T,
    h: T,
    growth: T,
    n: usize,
    seed: StreamSeed,
    ensemble: u64,
    exec: &Executor,
) -> Result<ContractionCheck<T>> {
    let start = CoupledState::new(x1, x2)?;
    check_coupling_step(spec, h)?;
    let grid = TimeGrid::new(horizon, h)?;
    let d0 = start.gap;
    let per_path = exec.map_paths(n, |path| {
        let mut worst = if x2 == T::zero() { T::neg_infinity() } else { T::zero() };
        drive_coupled(spec, start, &grid, seed.path_streams(ensemble, path), |ev| {
            if ev.hit_zero {
                return false;
            }
            worst = worst.max(ev.state.gap - d0 * (growth * grid.time(ev.index)).exp());
            true
        });
        worst
    });
    let max_violation = per_path.into_iter().fold(T::neg_infinity(), T::max);
    let tolerance = T::lit(CONTRACTION_TOLERANCE_FACTOR) * h;
    Ok(ContractionCheck { n_paths: n, h, max_violation, tolerance, passed: max_violation <= tolerance })
}

/// Exact invariant counts over an ensemble of coupled runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingAudit {
    pub n_paths: usize,
    pub grid_points: u64,
    /// Grid points with `lower > upper`.
    pub ordering_violations: u64,
    /// Grid points after coalescence at which the copies differ.
    pub coalescence_breaks: u64,
    pub coalesced_paths: usize,
    pub jump_events: u64,
    /// Jumps across which the gap changed.
    pub jump_gap_changes: u64,
}

impl CouplingAudit {
    pub fn clean(&self) -> bool {
        self.ordering_violations == 0 && self.coalescence_breaks == 0 && self.jump_gap_changes == 0
    }
}

/// Runs `n` coupled pairs over the full horizon and counts violations of
/// the ordering, coalescence permanence and jump-gap invariants.
#[allow(clippy::too_many_arguments)]
pub fn audit_coupling<T: Real>(
    spec: &ProcessSpec<T>,
    x1: T,
    x2: T,
    horizon: T,
    h: T,
    n: usize,
    seed: StreamSeed,
    ensemble: u64,
    exec: &Executor,
) -> Result<CouplingAudit> {
    let start = CoupledState::new(x1, x2)?;
    check_coupling_step(spec, h)?;
    let grid = TimeGrid::new(horizon, h)?;
    let per_path = exec.map_paths(n, |path| {
        let mut a = CouplingAudit { n_paths: 1, grid_points: 1, ..Default::default() };
        let mut coalesced = start.coalesced();
        drive_coupled(spec, start, &grid, seed.path_streams(ensemble, path), |ev| {
            let s = ev.state;
            a.grid_points += 1;
            if s.lower > s.upper() {
                a.ordering_violations += 1;
            }
            if coalesced && s.lower != s.upper() {
                a.coalescence_breaks += 1;
            }
            coalesced |= s.lower == s.upper();
            if let Some(before) = ev.gap_before_jump {
                a.jump_events += 1;
                if before != s.gap {
                    a.jump_gap_changes += 1;
                }
            }
            true
        });
        a.coalesced_paths = coalesced as usize;
        a
    });
    Ok(per_path.into_iter().fold(CouplingAudit::default(), |acc, a| CouplingAudit {
        n_paths: acc.n_paths + a.n_paths,
        grid_points: acc.grid_points + a.grid_points,
        ordering_violations: acc.ordering_violations + a.ordering_violations,
        coalescence_breaks: acc.coalescence_breaks + a.coalescence_breaks,
        coalesced_paths: acc.coalesced_paths + a.coalesced_paths,
        jump_events: acc.jump_events + a.jump_events,
        jump_gap_changes: acc.jump_gap_changes + a.jump_gap_changes,
    }))
}

/// Monte Carlo value of the stopped Lyapunov functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeEstimate<T> {
    pub estimate: T,
    pub stderr: T,
    /// `V(x₂)`, the value the estimate may not exceed.
    pub ceiling: T,
}

impl<T: Real> ProbeEstimate<T> {
    /// `estimate ≤ V(x₂) + 3·stderr`.
    pub fn within_three_sigma(&self) -> bool {
        self.estimate <= self.ceiling + T::lit(3.0) * self.stderr
    }
}

/// Estimates `E[e^{k(t∧τ)} V(X₂(t∧τ))]` with `τ` the first grid time at
/// which the copy started at `x2` sits at zero. Only the upper copy enters
/// the functional, so it is simulated alone.
#[allow(clippy::too_many_arguments)]
pub fn supermartingale_probe<T: Real>(
    spec: &ProcessSpec<T>,
    cert: &RateCertificate<T>,
    x2: T,
    t: T,
    n: usize,
    h: T,
    seed: StreamSeed,
    ensemble: u64,
    exec: &Executor,
) -> Result<ProbeEstimate<T>> {
    check_start(x2)?;
    if n == 0 {
        return Err(Error::Config("paths must be at least 1".into()));
    }
    let ceiling = cert.lyapunov(x2);
    if x2 == T::zero() {
        return Ok(ProbeEstimate { estimate: T::one(), stderr: T::zero(), ceiling });
    }
    let grid = TimeGrid::new(t, h)?;
    let samples = exec.map_paths(n, |path| {
        let mut stopped = None;
        let mut last = x2;
        drive_path(spec, x2, &grid, seed.path_streams(ensemble, path), |ev| {
            if ev.projected == T::zero() {
                stopped = Some(grid.time(ev.index));
                return false;
            }
            last = ev.value;
            true
        });
        match stopped {
            Some(tau) => (cert.k * tau).exp(),
            None => (cert.k * grid.horizon()).exp() * cert.lyapunov(last),
        }
    });
    let (estimate, stderr) = mean_and_stderr(&samples);
    Ok(ProbeEstimate { estimate, stderr, ceiling })
}
