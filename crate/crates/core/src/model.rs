//! Declarative description of a reflected jump-diffusion on `[0, ∞)`.
//!
//! Between jumps the process follows `dX = g(X) dt + σ dW + dℓ` with constant
//! `σ`, where `ℓ` is the boundary push at zero. Jumps arrive at the epochs of a
//! Poisson clock with constant intensity `Λ` and displace the state upward by
//! an independent draw from a displacement law, so the jump measure from `x`
//! is the displacement law translated to `x` and scaled by `Λ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Drift function `g : [0, ∞) → ℝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DriftSpec<T> {
    Constant { value: T },
    /// `g(x) = slope·x + intercept`.
    Affine { slope: T, intercept: T },
    /// Piecewise linear through `(x, g(x))` knots, constant outside the knot range.
    Tabulated { knots: Vec<(T, T)> },
}

impl<T: Real> DriftSpec<T> {
    pub fn constant(value: T) -> Self {
        DriftSpec::Constant { value }
    }

    pub fn affine(slope: T, intercept: T) -> Self {
        DriftSpec::Affine { slope, intercept }
    }

    pub fn tabulated(knots: Vec<(T, T)>) -> Result<Self> {
        let drift = DriftSpec::Tabulated { knots };
        drift.validate()?;
        Ok(drift)
    }

    fn validate(&self) -> Result<()> {
        match self {
            DriftSpec::Constant { value } => finite("drift value", *value),
            DriftSpec::Affine { slope, intercept } => {
                finite("drift slope", *slope)?;
                finite("drift intercept", *intercept)
            }
            DriftSpec::Tabulated { knots } => {
                if knots.is_empty() {
                    return Err(Error::InvalidSpec("tabulated drift needs at least one knot".into()));
                }
                for &(x, g) in knots {
                    finite("knot x", x)?;
                    finite("knot g", g)?;
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidSpec(
                        "tabulated drift knots must be strictly increasing in x".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        match self {
            DriftSpec::Constant { value } => *value,
            DriftSpec::Affine { slope, intercept } => *slope * x + *intercept,
            DriftSpec::Tabulated { knots } => interpolate(knots, x),
        }
    }

    /// Smallest `G` with `x ↦ g(x) − G·x` nonincreasing.
    ///
    /// Tabulated drifts report the largest secant slope between consecutive
    /// knots; the constant extrapolation beyond the last knot is not included
    /// (see [`AssumptionReport::notes`]).
    pub fn growth_constant(&self) -> T {
        match self {
            DriftSpec::Constant { .. } => T::zero(),
            DriftSpec::Affine { slope, .. } => *slope,
            // a single knot is a constant drift
            DriftSpec::Tabulated { knots } if knots.len() == 1 => T::zero(),
            DriftSpec::Tabulated { knots } => secants(knots).fold(T::neg_infinity(), T::max),
        }
    }

    /// Most negative slope anywhere on the half-line (0 if none is negative).
    ///
    /// An Euler step `x ↦ x + g(x)h` is monotone iff `1 + h·slope ≥ 0` for every
    /// local slope, so this bounds the usable step of an ordered coupling.
    pub fn steepest_descent(&self) -> T {
        match self {
            DriftSpec::Constant { .. } => T::zero(),
            DriftSpec::Affine { slope, .. } => slope.min(T::zero()),
            DriftSpec::Tabulated { knots } => secants(knots).fold(T::zero(), T::min),
        }
    }

    /// `sup_{x > 0} g(x)`, possibly `+∞`.
    pub fn supremum(&self) -> T {
        match self {
            DriftSpec::Constant { value } => *value,
            DriftSpec::Affine { slope, intercept } => {
                if *slope > T::zero() {
                    T::infinity()
                } else {
                    *intercept
                }
            }
            DriftSpec::Tabulated { knots } => knots
                .iter()
                .filter(|(x, _)| *x > T::zero())
                .map(|&(_, g)| g)
                .fold(interpolate(knots, T::zero()), T::max),
        }
    }
}

fn secants<T: Real>(knots: &[(T, T)]) -> impl Iterator<Item = T> + '_ {
    knots.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
}

fn interpolate<T: Real>(knots: &[(T, T)], x: T) -> T {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    // first index with knot.x > x; guaranteed in 1..len
    let i = knots.partition_point(|k| k.0 <= x);
    let (x0, g0) = knots[i - 1];
    let (x1, g1) = knots[i];
    g0 + (g1 - g0) * (x - x0) / (x1 - x0)
}

fn finite<T: Real>(what: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{what} must be finite, got {v}")))
    }
}

/// Law of a single upward jump displacement `Z ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DisplacementLaw<T> {
    Exponential { rate: T },
    Deterministic { size: T },
    Mixture { components: Vec<(T, DisplacementLaw<T>)> },
}

impl<T: Real> DisplacementLaw<T> {
    pub fn exponential(rate: T) -> Self {
        DisplacementLaw::Exponential { rate }
    }

    pub fn deterministic(size: T) -> Self {
        DisplacementLaw::Deterministic { size }
    }

    pub fn mixture(components: Vec<(T, DisplacementLaw<T>)>) -> Result<Self> {
        let law = DisplacementLaw::Mixture { components };
        law.validate()?;
        Ok(law)
    }

    fn validate(&self) -> Result<()> {
        match self {
            DisplacementLaw::Exponential { rate } => {
                if !(rate.is_finite() && *rate > T::zero()) {
                    return Err(Error::InvalidSpec(format!("exponential rate must be positive, got {rate}")));
                }
            }
            DisplacementLaw::Deterministic { size } => {
                if !(size.is_finite() && *size >= T::zero()) {
                    return Err(Error::InvalidSpec(format!(
                        "deterministic jump size must be nonnegative, got {size}"
                    )));
                }
            }
            DisplacementLaw::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidSpec("mixture needs at least one component".into()));
                }
                let mut total = T::zero();
                for (w, law) in components {
                    if !(w.is_finite() && *w > T::zero()) {
                        return Err(Error::InvalidSpec(format!("mixture weight must be positive, got {w}")));
                    }
                    total = total + *w;
                    law.validate()?;
                }
                if (total - T::one()).abs() > T::lit(1e-9) {
                    return Err(Error::InvalidSpec(format!("mixture weights must sum to 1, got {total}")));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> T {
        match self {
            DisplacementLaw::Exponential { rate } => rate.recip(),
            DisplacementLaw::Deterministic { size } => *size,
            DisplacementLaw::Mixture { components } => {
                components.iter().map(|(w, law)| *w * law.mean()).sum()
            }
        }
    }

    /// Supremum of `λ` with `E e^{λZ} < ∞`.
    pub fn mgf_domain(&self) -> T {
        match self {
            DisplacementLaw::Exponential { rate } => *rate,
            DisplacementLaw::Deterministic { .. } => T::infinity(),
            DisplacementLaw::Mixture { components } => components
                .iter()
                .map(|(_, law)| law.mgf_domain())
                .fold(T::infinity(), T::min),
        }
    }

    /// `E e^{λZ}`; `+∞` outside the domain.
    pub fn mgf(&self, lambda: T) -> T {
        match self {
            DisplacementLaw::Exponential { rate } => {
                if lambda >= *rate {
                    T::infinity()
                } else {
                    *rate / (*rate - lambda)
                }
            }
            DisplacementLaw::Deterministic { size } => (lambda * *size).exp(),
            DisplacementLaw::Mixture { components } => {
                components.iter().map(|(w, law)| *w * law.mgf(lambda)).sum()
            }
        }
    }

    /// `P(Z ≥ z)`.
    pub fn tail(&self, z: T) -> T {
        if z <= T::zero() {
            return T::one();
        }
        match self {
            DisplacementLaw::Exponential { rate } => (-*rate * z).exp(),
            DisplacementLaw::Deterministic { size } => {
                if *size >= z {
                    T::one()
                } else {
                    T::zero()
                }
            }
            DisplacementLaw::Mixture { components } => {
                components.iter().map(|(w, law)| *w * law.tail(z)).sum()
            }
        }
    }

    /// Inverse-CDF draw from `u ∈ [0, 1)`.
    ///
    /// Mixtures are stratified: `u` selects the component by cumulative weight
    /// and is rescaled to `[0, 1)` within the selected stratum.
    pub fn quantile(&self, u: T) -> T {
        match self {
            DisplacementLaw::Exponential { rate } => -(-u).ln_1p() / *rate,
            DisplacementLaw::Deterministic { size } => *size,
            DisplacementLaw::Mixture { components } => {
                let mut lo = T::zero();
                for (i, (w, law)) in components.iter().enumerate() {
                    let hi = lo + *w;
                    if u < hi || i + 1 == components.len() {
                        let v = ((u - lo) / *w).max(T::zero()).min(T::one() - T::epsilon());
                        return law.quantile(v);
                    }
                    lo = hi;
                }
                unreachable!("mixture validated nonempty")
            }
        }
    }
}

/// Family of jump measures `(ν_x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum JumpFamily<T> {
    NoJumps,
    /// `ν_x([x + z, ∞)) = Λ·P(Z ≥ z)`: translation-invariant upward jumps.
    LevyUpward { displacement: DisplacementLaw<T>, intensity: T },
    /// Extension point for general state-dependent kernels. Not implemented:
    /// every operation on it reports an error or a failed assumption.
    StateCatalog,
}

impl<T: Real> JumpFamily<T> {
    pub fn levy(displacement: DisplacementLaw<T>, intensity: T) -> Result<Self> {
        let family = JumpFamily::LevyUpward { displacement, intensity };
        family.validate()?;
        Ok(family)
    }

    fn validate(&self) -> Result<()> {
        if let JumpFamily::LevyUpward { displacement, intensity } = self {
            if !(intensity.is_finite() && *intensity > T::zero()) {
                return Err(Error::InvalidSpec(format!("jump intensity must be positive, got {intensity}")));
            }
            displacement.validate()?;
        }
        Ok(())
    }

    /// Total jump intensity `Λ` (0 without jumps).
    pub fn intensity(&self) -> T {
        match self {
            JumpFamily::LevyUpward { intensity, .. } => *intensity,
            _ => T::zero(),
        }
    }

    pub fn displacement(&self) -> Option<&DisplacementLaw<T>> {
        match self {
            JumpFamily::LevyUpward { displacement, .. } => Some(displacement),
            _ => None,
        }
    }

    pub fn has_jumps(&self) -> bool {
        !matches!(self, JumpFamily::NoJumps)
    }

    /// Supremum of `λ` for which the jump integral in `c(x, λ)` is finite.
    pub fn mgf_domain(&self) -> T {
        match self {
            JumpFamily::LevyUpward { displacement, .. } => displacement.mgf_domain(),
            JumpFamily::NoJumps => T::infinity(),
            // nothing is known about the kernel
            JumpFamily::StateCatalog => T::zero(),
        }
    }

    /// `ν_x([y, ∞))`.
    pub fn tail_mass(&self, x: T, y: T) -> T {
        match self {
            JumpFamily::LevyUpward { displacement, intensity } => *intensity * displacement.tail(y - x),
            _ => T::zero(),
        }
    }

    /// `∫ (e^{λ(y−x)} − 1) ν_x(dy)`, independent of `x` for this family.
    pub fn exponential_moment_rate(&self, lambda: T) -> Result<T> {
        match self {
            JumpFamily::NoJumps => Ok(T::zero()),
            JumpFamily::LevyUpward { displacement, intensity } => {
                let bound = displacement.mgf_domain();
                if lambda >= bound {
                    return Err(Error::MgfDivergence { lambda: lambda.as_f64(), lambda_max: bound.as_f64() });
                }
                Ok(*intensity * (displacement.mgf(lambda) - T::one()))
            }
            JumpFamily::StateCatalog => {
                Err(Error::MgfDivergence { lambda: lambda.as_f64(), lambda_max: 0.0 })
            }
        }
    }
}

/// Drift, constant diffusion and jump family of one reflected jump-diffusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec<T> {
    pub drift: DriftSpec<T>,
    pub sigma: T,
    pub jumps: JumpFamily<T>,
}

/// Outcome of the structural assumption checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport<T> {
    pub a1_constant_intensity: bool,
    pub a2_stochastic_order: bool,
    pub a4_jump_monotone: bool,
    pub a4_growth: Option<T>,
    /// Largest effective drift over [`probe_grid`].
    pub mean_drift_bound: Option<T>,
    pub notes: Vec<String>,
}

/// `{0} ∪ {2^j : j = −4..=20}`.
pub fn probe_grid<T: Real>() -> Vec<T> {
    std::iter::once(T::zero())
        .chain((-4..=20).map(|j| T::lit(2f64.powi(j))))
        .collect()
}

impl<T: Real> ProcessSpec<T> {
    /// Validates the structural invariants. Degenerate dynamics (no noise,
    /// no jumps, nonnegative drift) are accepted here; see
    /// [`ProcessSpec::validate_nondegenerate`].
    pub fn new(drift: DriftSpec<T>, sigma: T, jumps: JumpFamily<T>) -> Result<Self> {
        drift.validate()?;
        jumps.validate()?;
        if !(sigma.is_finite() && sigma >= T::zero()) {
            return Err(Error::InvalidSpec(format!("sigma must be nonnegative, got {sigma}")));
        }
        Ok(ProcessSpec { drift, sigma, jumps })
    }

    /// Reflected Brownian motion with constant drift `g`.
    pub fn drifted_rbm(g: T, sigma: T) -> Result<Self> {
        Self::new(DriftSpec::constant(g), sigma, JumpFamily::NoJumps)
    }

    /// Reflected Ornstein–Uhlenbeck `dX = −a(m + X)dt + σ dW + dℓ`.
    pub fn ornstein_uhlenbeck(a: T, m: T, sigma: T) -> Result<Self> {
        Self::new(DriftSpec::affine(-a, -a * m), sigma, JumpFamily::NoJumps)
    }

    /// Constant drift and noise with translation-invariant upward jumps.
    pub fn levy(g: T, sigma: T, displacement: DisplacementLaw<T>, intensity: T) -> Result<Self> {
        Self::new(DriftSpec::constant(g), sigma, JumpFamily::levy(displacement, intensity)?)
    }

    /// `g = −1, σ = 1`, `Exp(2)` displacements at unit intensity.
    pub fn exponential_jumps_example() -> Self {
        Self::levy(-T::one(), T::one(), DisplacementLaw::exponential(T::lit(2.0)), T::one())
            .expect("valid preset")
    }

    /// Rejects processes that cannot leave their starting point in a
    /// nontrivial way: zero noise needs jumps or a strictly negative
    /// effective drift.
    pub fn validate_nondegenerate(&self) -> Result<()> {
        if self.sigma > T::zero() || self.jumps.has_jumps() {
            return Ok(());
        }
        match self.check_assumptions().mean_drift_bound {
            Some(m) if m < T::zero() => Ok(()),
            _ => Err(Error::InvalidSpec(
                "sigma = 0 requires jumps or a strictly negative effective drift".into(),
            )),
        }
    }

    #[inline]
    pub fn drift_at(&self, x: T) -> T {
        self.drift.eval(x)
    }

    /// `m(x) = g(x) + ∫ (y − x) ν_x(dy)`.
    pub fn effective_drift(&self, x: T) -> Result<T> {
        if x < T::zero() {
            return Err(Error::InvalidArgument(format!("state must be nonnegative, got {x}")));
        }
        let jump_part = match &self.jumps {
            JumpFamily::NoJumps => T::zero(),
            JumpFamily::LevyUpward { displacement, intensity } => *intensity * displacement.mean(),
            JumpFamily::StateCatalog => {
                return Err(Error::MeanDriftUndefined("state-dependent jump catalog has no mean".into()))
            }
        };
        Ok(self.drift.eval(x) + jump_part)
    }

    pub fn mgf_domain(&self) -> T {
        self.jumps.mgf_domain()
    }

    pub fn check_assumptions(&self) -> AssumptionReport<T> {
        let mut notes = Vec::new();
        let implemented = !matches!(self.jumps, JumpFamily::StateCatalog);
        if !implemented {
            notes.push("state-dependent jump catalog: assumptions cannot be verified".to_string());
        }
        if let DriftSpec::Tabulated { knots } = &self.drift {
            let g = self.drift.growth_constant();
            if knots.len() > 1 && g < T::zero() {
                notes.push(format!(
                    "tabulated drift: growth constant {g} holds on the knot range; the constant \
                     extrapolation beyond x = {} needs a nonnegative constant",
                    knots[knots.len() - 1].0
                ));
            }
        }
        let mean_drift_bound = if implemented {
            probe_grid::<T>()
                .into_iter()
                .map(|x| self.effective_drift(x).expect("implemented family"))
                .reduce(T::max)
        } else {
            None
        };
        if let Some(m) = mean_drift_bound {
            if m >= T::zero() {
                notes.push(format!("effective drift is not uniformly negative on the probe grid (max {m})"));
            }
        }
        AssumptionReport {
            a1_constant_intensity: implemented,
            a2_stochastic_order: implemented,
            a4_jump_monotone: implemented,
            a4_growth: Some(self.drift.growth_constant()),
            mean_drift_bound,
            notes,
        }
    }
}
