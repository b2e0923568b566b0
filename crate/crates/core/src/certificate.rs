//! Lyapunov rate certificates and the explicit Wasserstein decay bounds.
//!
//! With `V(x) = e^{λx}` the generator acts as `LV(x) = c(x, λ)·V(x)` away
//! from the boundary, where
//!
//! ```text
//! c(x, λ) = λ g(x) + λ²σ²/2 + ∫ (e^{λ(y−x)} − 1) ν_x(dy)
//! k(λ)    = −sup_{x>0} c(x, λ)
//! ```
//!
//! A positive `k(λ)` makes `e^{k t} V(X(t))` a supermartingale up to the
//! hitting time of zero, which is what every bound below rests on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProcessSpec;
use crate::optimize::{golden_section_max, grid_max};
use crate::scalar::Real;

/// Absolute tolerance of the λ search.
pub const LAMBDA_TOLERANCE: f64 = 1e-6;
/// Upper end of the λ search when jumps have every exponential moment.
pub const LAMBDA_SEARCH_CAP: f64 = 50.0;

const GRID_GUARD_NODES: usize = 400;

/// Certified constants `(λ, k(λ), G, K)` for a Wasserstein order `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate<T> {
    pub lambda: T,
    pub k: T,
    /// One-sided Lipschitz constant of the drift.
    #[serde(rename = "G")]
    pub growth: Option<T>,
    /// `K = k/p − G`.
    #[serde(rename = "K")]
    pub contraction: Option<T>,
    pub p: T,
    pub lambda_max: T,
    pub a3_holds: bool,
    /// `k > p·G`, the hypothesis of the contraction bound.
    pub contraction_applicable: bool,
    pub notes: Vec<String>,
}

impl<T: Real> RateCertificate<T> {
    /// Assembles a certificate from explicit constants.
    pub fn from_constants(lambda: T, k: T, growth: Option<T>, lambda_max: T, p: T) -> Result<Self> {
        if !(p >= T::one()) {
            return Err(Error::InvalidArgument(format!("Wasserstein order p must be >= 1, got {p}")));
        }
        if !(lambda > T::zero() && lambda < lambda_max) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in (0, {lambda_max}), got {lambda}"
            )));
        }
        let a3_holds = k > T::zero();
        let contraction = growth.map(|g| k / p - g);
        let contraction_applicable = a3_holds && growth.is_some_and(|g| k > p * g);
        Ok(RateCertificate {
            lambda,
            k,
            growth,
            contraction,
            p,
            lambda_max,
            a3_holds,
            contraction_applicable,
            notes: Vec::new(),
        })
    }

    /// `V(x) = e^{λx}`.
    pub fn lyapunov(&self, x: T) -> T {
        (self.lambda * x).exp()
    }

    /// `C = e·p/λ`.
    pub fn prefactor(&self) -> T {
        T::E() * self.p / self.lambda
    }

    /// `a = (p·e/λ)^p`, the constant in `x^p ≤ a·e^{λx}` on `x ≥ 0`.
    pub fn moment_constant(&self) -> T {
        self.prefactor().powf(self.p)
    }

    fn require_a3(&self) -> Result<()> {
        if self.a3_holds {
            Ok(())
        } else {
            Err(Error::NoValidCertificate { k: self.k.as_f64() })
        }
    }

    fn require_contraction(&self) -> Result<T> {
        self.require_a3()?;
        let (Some(g), Some(rate)) = (self.growth, self.contraction) else {
            return Err(Error::GrowthConstantUnavailable);
        };
        if !self.contraction_applicable {
            return Err(Error::ContractionNotApplicable {
                k: self.k.as_f64(),
                pg: (self.p * g).as_f64(),
            });
        }
        Ok(rate)
    }

    /// `C·exp(λ(x₁∨x₂)/p)·exp(−k t/p)`: bound on `W_p(Pᵗ(x₁,·), Pᵗ(x₂,·))`,
    /// also valid on path space over any window `[t, T]`.
    pub fn lyapunov_bound(&self, x1: T, x2: T, t: T) -> Result<T> {
        self.require_a3()?;
        Ok(self.prefactor() * (self.lambda * x1.max(x2) / self.p).exp() * self.decay(t))
    }

    /// `C·((ρ₁,V) + (ρ₂,V))^{1/p}·exp(−k t/p)` for initial laws with the given
    /// `V`-moments. With `ρ₁ = π`, `ρ₂ = δ_x` this bounds the distance to
    /// stationarity.
    pub fn lyapunov_bound_measures(&self, rho1_v: T, rho2_v: T, t: T) -> Result<T> {
        self.require_a3()?;
        if !(rho1_v >= T::one() && rho2_v >= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "V-moments are at least 1, got {rho1_v} and {rho2_v}"
            )));
        }
        Ok(self.prefactor() * (rho1_v + rho2_v).powf(self.p.recip()) * self.decay(t))
    }

    /// `exp(λ(x₁∨x₂)/p)·|x₁ − x₂|·exp(−K t)`.
    pub fn contraction_bound(&self, x1: T, x2: T, t: T) -> Result<T> {
        let rate = self.require_contraction()?;
        Ok((self.lambda * x1.max(x2) / self.p).exp() * (x1 - x2).abs() * (-rate * t).exp())
    }

    /// `((π,V) + V(x))^{1/p}·exp(−K t)`: distance to stationarity at rate `K`.
    pub fn contraction_bound_stationary(&self, pi_v: T, x: T, t: T) -> Result<T> {
        let rate = self.require_contraction()?;
        Ok((pi_v + self.lyapunov(x)).powf(self.p.recip()) * (-rate * t).exp())
    }

    fn decay(&self, t: T) -> T {
        (-self.k * t / self.p).exp()
    }
}

/// `c(x, λ)`.
pub fn eval_c<T: Real>(spec: &ProcessSpec<T>, x: T, lambda: T) -> Result<T> {
    if lambda < T::zero() {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    let jump = spec.jumps.exponential_moment_rate(lambda)?;
    Ok(lambda * spec.drift_at(x) + lambda * lambda * spec.sigma * spec.sigma / T::lit(2.0) + jump)
}

/// `k(λ) = −sup_{x>0} c(x, λ)`.
///
/// The diffusion coefficient is constant and the jump integral does not
/// depend on `x`, so `c(·, λ)` varies with `x` only through `λ·g(x)` and the
/// supremum is attained through the drift supremum, which is exact for every
/// drift shape (and `+∞` for increasing affine drifts).
pub fn k_of_lambda<T: Real>(spec: &ProcessSpec<T>, lambda: T) -> Result<T> {
    if lambda < T::zero() {
        return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {lambda}")));
    }
    if lambda == T::zero() {
        return Ok(T::zero());
    }
    let jump = spec.jumps.exponential_moment_rate(lambda)?;
    let sup_c = lambda * spec.drift.supremum() + lambda * lambda * spec.sigma * spec.sigma / T::lit(2.0) + jump;
    Ok(-sup_c)
}

/// Maximizer of `k` over the admissible exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaOptimum<T> {
    pub lambda: T,
    pub k: T,
    pub notes: Vec<String>,
}

/// Search interval for λ: `(ε, λ_max − ε)` with `ε = 10⁻⁶·λ_max`, or
/// `(10⁻⁶, 50)` when every exponential moment exists.
pub fn lambda_search_interval<T: Real>(lambda_max: T) -> (T, T) {
    if lambda_max.is_finite() {
        let eps = T::lit(1e-6) * lambda_max;
        (eps, lambda_max - eps)
    } else {
        (T::lit(1e-6), T::lit(LAMBDA_SEARCH_CAP))
    }
}

pub fn optimize_lambda<T: Real>(spec: &ProcessSpec<T>) -> Result<LambdaOptimum<T>> {
    let lambda_max = spec.mgf_domain();
    if !(lambda_max > T::zero()) {
        return Err(Error::MgfDivergence { lambda: 0.0, lambda_max: lambda_max.as_f64() });
    }
    let (lo, hi) = lambda_search_interval(lambda_max);
    // every λ in the interval is admissible, so the error arm is unreachable
    let objective = |l: T| k_of_lambda(spec, l).unwrap_or(T::neg_infinity());
    let (mut lambda, mut k) = golden_section_max(objective, lo, hi, T::lit(LAMBDA_TOLERANCE));
    let mut notes = vec![format!(
        "lambda by golden-section search on ({lo:e}, {hi:e}), tolerance {LAMBDA_TOLERANCE:e}"
    )];
    // k is concave for the implemented families; the scan catches anything else
    let (grid_lambda, grid_k) = grid_max(objective, lo, hi, GRID_GUARD_NODES);
    if grid_k > k {
        let step = (hi - lo) / T::from_usize(GRID_GUARD_NODES).unwrap();
        let (l2, k2) = golden_section_max(
            objective,
            (grid_lambda - step).max(lo),
            (grid_lambda + step).min(hi),
            T::lit(LAMBDA_TOLERANCE),
        );
        (lambda, k) = if k2 >= grid_k { (l2, k2) } else { (grid_lambda, grid_k) };
        notes.push("k(lambda) not unimodal on the search interval: grid scan fallback used".into());
    }
    if !lambda_max.is_finite() && hi - lambda < T::lit(1e3 * LAMBDA_TOLERANCE) {
        notes.push(format!("maximizer at the search cap {LAMBDA_SEARCH_CAP}: k may increase beyond it"));
    }
    if !k.is_finite() {
        notes.push("k(lambda) is -inf: the drift is unbounded above".into());
    }
    Ok(LambdaOptimum { lambda, k, notes })
}

/// Certificate at the optimal exponent.
pub fn make_certificate<T: Real>(spec: &ProcessSpec<T>, p: T) -> Result<RateCertificate<T>> {
    let opt = optimize_lambda(spec)?;
    let mut cert = assemble(spec, opt.lambda, opt.k, p)?;
    cert.notes.extend(opt.notes);
    Ok(cert)
}

/// Certificate at a caller-chosen exponent.
pub fn certificate_at<T: Real>(spec: &ProcessSpec<T>, lambda: T, p: T) -> Result<RateCertificate<T>> {
    let k = k_of_lambda(spec, lambda)?;
    assemble(spec, lambda, k, p)
}

fn assemble<T: Real>(spec: &ProcessSpec<T>, lambda: T, k: T, p: T) -> Result<RateCertificate<T>> {
    let report = spec.check_assumptions();
    let growth = if report.a4_jump_monotone { report.a4_growth } else { None };
    let mut cert = RateCertificate::from_constants(lambda, k, growth, spec.mgf_domain(), p)?;
    cert.notes
        .push("sup over x of c(x, lambda) taken through sup g: c depends on x only via g(x)".into());
    if !cert.a3_holds {
        cert.notes.push(format!("k(lambda) = {k} is not positive: no exponential rate certified"));
    }
    if growth.is_none() {
        cert.notes.push("growth constant G unavailable: contraction bounds disabled".into());
    } else if cert.a3_holds && !cert.contraction_applicable {
        cert.notes.push("k <= p*G: contraction bounds disabled".into());
    }
    cert.notes.extend(report.notes);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DisplacementLaw, DriftSpec, JumpFamily};

    fn example_two() -> ProcessSpec<f64> {
        ProcessSpec::exponential_jumps_example()
    }

    fn rbm() -> ProcessSpec<f64> {
        ProcessSpec::drifted_rbm(-1.0, 1.0).unwrap()
    }

    fn ou(a: f64, m: f64, s: f64) -> ProcessSpec<f64> {
        ProcessSpec::ornstein_uhlenbeck(a, m, s).unwrap()
    }

    #[test]
    fn c_for_example_two() {
        let l = 0.304;
        let expected = -l + l * l / 2.0 + 2.0 / (2.0 - l) - 1.0;
        for x in [0.0, 1.0, 50.0] {
            assert!((eval_c(&example_two(), x, l).unwrap() - expected).abs() < 1e-15);
        }
        assert!((expected + 0.0785).abs() < 1e-4);
    }

    #[test]
    fn c_vanishes_at_zero() {
        for spec in [example_two(), rbm(), ou(2.0, 0.5, 1.0)] {
            for x in [0.0, 0.5, 3.0] {
                assert_eq!(eval_c(&spec, x, 0.0).unwrap(), 0.0);
            }
            assert!(eval_c(&spec, 1.0, 1e-9).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn c_for_ou_by_hand() {
        assert_eq!(eval_c(&ou(1.0, 1.0, 1.0), 0.0, 1.0).unwrap(), -0.5);
    }

    #[test]
    fn c_mgf_divergence() {
        assert!(matches!(eval_c(&example_two(), 0.0, 2.0), Err(Error::MgfDivergence { .. })));
        assert!(matches!(k_of_lambda(&example_two(), 2.5), Err(Error::MgfDivergence { .. })));
    }

    #[test]
    fn deterministic_and_mixture_mgf() {
        let det = ProcessSpec::levy(-1.0, 0.0, DisplacementLaw::deterministic(0.5), 1.0).unwrap();
        let c = eval_c(&det, 0.0, 1.0).unwrap();
        assert!((c - (-1.0 + 0.5f64.exp() - 1.0)).abs() < 1e-15);
        let mix = DisplacementLaw::mixture(vec![
            (0.5, DisplacementLaw::exponential(2.0)),
            (0.5, DisplacementLaw::deterministic(1.0)),
        ])
        .unwrap();
        let spec = ProcessSpec::levy(-1.0, 1.0, mix, 2.0).unwrap();
        let l = 0.5;
        let m = 0.5 * 2.0 / 1.5 + 0.5 * 0.5f64.exp();
        let expected = -l + l * l / 2.0 + 2.0 * (m - 1.0);
        assert!((eval_c(&spec, 3.0, l).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn k_examples() {
        let k = k_of_lambda(&example_two(), 0.304).unwrap();
        assert!((k - 0.0785).abs() < 1e-3);
        assert_eq!(k_of_lambda(&rbm(), 1.0).unwrap(), 0.5);
        assert_eq!(k_of_lambda(&ou(1.0, 1.0, 1.0), 1.0).unwrap(), 0.5);
    }

    #[test]
    fn k_is_minus_infinity_for_increasing_drift() {
        let spec = ProcessSpec::new(DriftSpec::affine(0.5, -1.0), 1.0, JumpFamily::NoJumps).unwrap();
        assert_eq!(k_of_lambda(&spec, 0.5).unwrap(), f64::NEG_INFINITY);
        let cert = make_certificate(&spec, 1.0).unwrap();
        assert!(!cert.a3_holds);
    }

    #[test]
    fn optimizer_examples() {
        let opt = optimize_lambda(&example_two()).unwrap();
        assert!((opt.lambda - 0.304).abs() < 5e-3, "{}", opt.lambda);
        assert!((opt.k - 0.0785).abs() < 1e-3, "{}", opt.k);
        let opt: LambdaOptimum<f64> = optimize_lambda(&rbm()).unwrap();
        assert!((opt.lambda - 1.0).abs() < 1e-6);
        assert!((opt.k - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tabulated_certificate_uses_drift_sup() {
        let d = DriftSpec::tabulated(vec![(0.0, -2.0), (1.0, -1.0), (2.0, -3.0)]).unwrap();
        let spec = ProcessSpec::new(d, 1.0, JumpFamily::NoJumps).unwrap();
        // sup g = -1, so k(λ) = λ − λ²/2 exactly as for the drifted RBM
        let opt: LambdaOptimum<f64> = optimize_lambda(&spec).unwrap();
        assert!((opt.lambda - 1.0).abs() < 1e-6);
        let cert = make_certificate(&spec, 1.0).unwrap();
        assert_eq!(cert.growth, Some(1.0));
        assert!(!cert.contraction_applicable);
    }

    #[test]
    fn certificate_examples() {
        let c = make_certificate(&ou(1.0, 1.0, 1.0), 1.0).unwrap();
        assert_eq!(c.growth, Some(-1.0));
        assert!((c.contraction.unwrap() - 1.5).abs() < 1e-10);
        assert!(c.contraction_applicable && c.a3_holds);

        let c = make_certificate(&example_two(), 1.0).unwrap();
        assert_eq!(c.growth, Some(0.0));
        assert_eq!(c.contraction, Some(c.k));
        assert_eq!(c.lambda_max, 2.0);

        let c = make_certificate(&rbm(), 2.0).unwrap();
        assert!((c.contraction.unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(c.lambda_max, f64::INFINITY);
    }

    #[test]
    fn certificate_rejects_small_p() {
        assert!(make_certificate(&rbm(), 0.5).is_err());
    }

    #[test]
    fn catalog_has_no_certificate() {
        let spec = ProcessSpec::<f64>::new(DriftSpec::constant(-1.0), 1.0, JumpFamily::StateCatalog).unwrap();
        assert!(make_certificate(&spec, 1.0).is_err());
    }

    fn unit_cert() -> RateCertificate<f64> {
        RateCertificate::from_constants(1.0, 0.5, Some(0.0), f64::INFINITY, 1.0).unwrap()
    }

    #[test]
    fn lyapunov_bound_examples() {
        let c = unit_cert();
        assert!((c.lyapunov_bound(0.0, 0.0, 0.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
        assert!((c.lyapunov_bound(0.0, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let b = c.lyapunov_bound(0.5, 0.2, i as f64).unwrap();
            assert!(b <= prev && b >= 0.0);
            prev = b;
        }
        assert!(prev < 1e-9);
    }

    #[test]
    fn lyapunov_bound_requires_positive_k() {
        let c = RateCertificate::from_constants(1.0, -0.1, Some(0.0), f64::INFINITY, 1.0).unwrap();
        assert!(matches!(c.lyapunov_bound(0.0, 1.0, 1.0), Err(Error::NoValidCertificate { .. })));
        assert!(c.lyapunov_bound_measures(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn measure_bound_examples() {
        let c = unit_cert();
        let e = std::f64::consts::E;
        assert!((c.lyapunov_bound_measures(1.0, 1.0, 0.0).unwrap() - 2.0 * e).abs() < 1e-14);
        let t = (2.0 / 0.5) * 2f64.ln();
        let r = c.lyapunov_bound_measures(1.0, 1.0, t).unwrap() / c.lyapunov_bound_measures(1.0, 1.0, 0.0).unwrap();
        assert!((r - 0.25).abs() < 1e-14);
        assert!((c.lyapunov_bound_measures(2.0, 1.0, 0.0).unwrap() - 3.0 * e).abs() < 1e-14);
        assert!(c.lyapunov_bound_measures(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn contraction_bound_examples() {
        let c = make_certificate(&ou(1.0, 1.0, 1.0), 1.0).unwrap();
        let e = std::f64::consts::E;
        assert_eq!(c.contraction_bound(0.7, 0.7, 3.0).unwrap(), 0.0);
        assert!((c.contraction_bound(0.0, 1.0, 0.0).unwrap() - e).abs() < 1e-5);
        assert!((c.contraction_bound(0.0, 1.0, 1.0).unwrap() - 0.6065).abs() < 1e-4);
    }

    #[test]
    fn contraction_bound_needs_growth_constant() {
        let c = RateCertificate::from_constants(1.0, 0.5, None, f64::INFINITY, 1.0).unwrap();
        assert!(matches!(c.contraction_bound(0.0, 1.0, 0.0), Err(Error::GrowthConstantUnavailable)));
        let c = RateCertificate::from_constants(1.0, 0.5, Some(1.0), f64::INFINITY, 1.0).unwrap();
        assert!(matches!(c.contraction_bound(0.0, 1.0, 0.0), Err(Error::ContractionNotApplicable { .. })));
    }

    #[test]
    fn derived_constants() {
        let c = RateCertificate::from_constants(0.5, 0.1, Some(0.0), 2.0, 2.0).unwrap();
        let e = std::f64::consts::E;
        assert!((c.prefactor() - 4.0 * e).abs() < 1e-14);
        assert!((c.moment_constant() - 16.0 * e * e).abs() < 1e-12);
        assert!((c.lyapunov(2.0) - e).abs() < 1e-15);
        // x^p ≤ a e^{λx} on a grid
        for i in 0..2000 {
            let x = i as f64 * 0.05;
            assert!(x.powf(c.p) <= c.moment_constant() * c.lyapunov(x));
        }
    }

    #[test]
    fn from_constants_validation() {
        assert!(RateCertificate::from_constants(0.0, 0.5, None, 2.0, 1.0).is_err());
        assert!(RateCertificate::from_constants(2.0, 0.5, None, 2.0, 1.0).is_err());
        assert!(RateCertificate::from_constants(1.0, 0.5, None, 2.0, 0.9).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let spec = ProcessSpec::<f32>::drifted_rbm(-1.0, 1.0).unwrap();
        let opt = optimize_lambda(&spec).unwrap();
        assert!((opt.lambda - 1.0).abs() < 1e-3);
        assert!((opt.k - 0.5).abs() < 1e-5);
    }
}
