use proptest::prelude::*;

use refjump::certificate::{eval_c, k_of_lambda, make_certificate, optimize_lambda};
use refjump::coupling::{coupled_jump, coupled_step, CoupledState};
use refjump::engine::reflected_step;
use refjump::model::{DisplacementLaw, DriftSpec, JumpFamily};
use refjump::wasserstein::{wp_bruteforce, wp_exact};
use refjump::{EmpiricalDistribution, ProcessSpec};

fn points(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, 1..=max)
}

fn order() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.0, 2.0, 3.0])
}

fn emp(v: &[f64]) -> EmpiricalDistribution {
    EmpiricalDistribution::from_samples(v.to_vec()).unwrap()
}

/// Equal-size samples for the permutation oracle.
fn paired(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max).prop_flat_map(|n| {
        (prop::collection::vec(0.0..10.0f64, n), prop::collection::vec(0.0..10.0f64, n))
    })
}

fn repeat_each(v: &[f64], k: usize) -> Vec<f64> {
    v.iter().flat_map(|&x| std::iter::repeat_n(x, k)).collect()
}

proptest! {
    #[test]
    fn exact_matches_permutation_oracle((a, b) in paired(6), p in order()) {
        let fast = wp_exact(&emp(&a), &emp(&b), p).unwrap();
        let slow = wp_bruteforce(&a, &b, p).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow), "{fast} vs {slow}");
    }

    #[test]
    fn merged_partition_matches_oracle_on_replicated_samples(
        a in prop::collection::vec(0.0..10.0f64, 1..=2),
        b in prop::collection::vec(0.0..10.0f64, 4),
        p in order(),
    ) {
        // a uniform m-point sample is the same measure as each point repeated 4/m times
        let wide = repeat_each(&a, 4 / a.len());
        let merged = wp_exact(&emp(&a), &emp(&b), p).unwrap();
        let slow = wp_bruteforce(&wide, &b, p).unwrap();
        prop_assert!((merged - slow).abs() <= 1e-12 * (1.0 + slow));
    }

    #[test]
    fn metric_axioms(a in points(8), b in points(8), c in points(8), p in order()) {
        let (a, b, c) = (emp(&a), emp(&b), emp(&c));
        let ab = wp_exact(&a, &b, p).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!(wp_exact(&a, &a, p).unwrap() <= 1e-10);
        prop_assert!((ab - wp_exact(&b, &a, p).unwrap()).abs() <= 1e-10);
        let ac = wp_exact(&a, &c, p).unwrap();
        let cb = wp_exact(&c, &b, p).unwrap();
        prop_assert!(ab <= ac + cb + 1e-10);
    }

    #[test]
    fn translation_equivariance(a in points(8), c in 0.0..5.0f64, p in order()) {
        let a = emp(&a);
        let shifted = a.translated(c).unwrap();
        prop_assert!((wp_exact(&a, &shifted, p).unwrap() - c).abs() <= 1e-10);
    }

    #[test]
    fn order_monotonicity(a in points(8), b in points(8)) {
        let (a, b) = (emp(&a), emp(&b));
        let w1 = wp_exact(&a, &b, 1.0).unwrap();
        let w2 = wp_exact(&a, &b, 2.0).unwrap();
        let w3 = wp_exact(&a, &b, 3.0).unwrap();
        prop_assert!(w1 <= w2 + 1e-12 && w2 <= w3 + 1e-12);
        // W1 dominates the difference of means
        prop_assert!((a.mean() - b.mean()).abs() <= w1 + 1e-12);
    }

    #[test]
    fn affine_drift_evaluates_exactly(slope in -5.0..5.0f64, intercept in -5.0..5.0f64, x in 0.0..100.0f64) {
        let d = DriftSpec::affine(slope, intercept);
        prop_assert_eq!(d.eval(x), slope * x + intercept);
        prop_assert_eq!(d.growth_constant(), slope);
    }

    #[test]
    fn tabulated_drift_is_bounded_by_secant_growth(
        ys in prop::collection::vec(-3.0..3.0f64, 2..6),
        x in 0.0..6.0f64,
        dx in 0.0..2.0f64,
    ) {
        let knots: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
        let d = DriftSpec::tabulated(knots).unwrap();
        let g = d.growth_constant();
        let right_end = (ys.len() - 1) as f64;
        // one-sided Lipschitz inside the tabulated range
        if x + dx <= right_end {
            prop_assert!(d.eval(x + dx) - d.eval(x) <= g * dx + 1e-12);
        }
        prop_assert!(d.eval(x) <= d.supremum() + 1e-12);
    }

    #[test]
    fn levy_family_is_stochastically_ordered(rate in 0.1..5.0f64, lam in 0.1..5.0f64,
                                            x in 0.0..5.0f64, dx in 0.0..5.0f64, y in 0.0..15.0f64) {
        let jumps = JumpFamily::levy(DisplacementLaw::exponential(rate), lam).unwrap();
        prop_assert!(jumps.tail_mass(x, y) <= jumps.tail_mass(x + dx, y));
    }

    #[test]
    fn exponential_quantile_inverts_tail(rate in 0.1..10.0f64, u in 0.0..0.999f64) {
        let law = DisplacementLaw::exponential(rate);
        let z = law.quantile(u);
        prop_assert!(z >= 0.0);
        prop_assert!((law.tail(z) - (1.0 - u)).abs() <= 1e-12);
    }

    #[test]
    fn reflected_step_decomposes(x in 0.0..5.0f64, g in -3.0..3.0f64, sigma in 0.0..3.0f64,
                                 h in 1e-4..0.1f64, z in -5.0..5.0f64) {
        let spec = ProcessSpec::drifted_rbm(g, sigma).unwrap();
        let (next, dl) = reflected_step(x, &spec, h, z);
        let free = x + g * h + sigma * h.sqrt() * z;
        prop_assert!(next >= 0.0 && dl >= 0.0);
        prop_assert!(next == 0.0 || dl == 0.0);
        prop_assert!((next - dl - free).abs() <= 1e-12);
    }

    #[test]
    fn coupled_step_keeps_order_and_contracts(x1 in 0.0..5.0f64, d in 0.0..5.0f64, a in 0.1..5.0f64,
                                              m in 0.0..2.0f64, z in -5.0..5.0f64, u in 0.0..1.0f64) {
        let jumps = JumpFamily::levy(DisplacementLaw::exponential(2.0), 1.0).unwrap();
        let spec = ProcessSpec::new(DriftSpec::affine(-a, -a * m), 1.0, jumps).unwrap();
        let h = 0.5 / a;
        let s = CoupledState::new(x1, x1 + d).unwrap();
        let next = coupled_step(s, &spec, h, z).unwrap();
        prop_assert!(next.lower >= 0.0 && next.lower <= next.upper());
        prop_assert!(next.gap <= s.gap);
        let jumped = coupled_jump(next, &spec.jumps, u);
        prop_assert_eq!(jumped.gap, next.gap);
        prop_assert!(jumped.lower >= next.lower);
    }

    #[test]
    fn k_is_dominated_pointwise(g in -3.0..-0.1f64, sigma in 0.2..2.0f64, rate in 0.5..5.0f64,
                                lam in 0.0..2.0f64, frac in 0.01..0.99f64, x in 0.0..50.0f64) {
        let spec = ProcessSpec::levy(g, sigma, DisplacementLaw::exponential(rate), lam).unwrap();
        let lambda = frac * rate;
        let k = k_of_lambda(&spec, lambda).unwrap();
        prop_assert!(k <= -eval_c(&spec, x, lambda).unwrap() + 1e-12);
    }

    #[test]
    fn optimizer_beats_any_admissible_lambda(g in -3.0..-0.1f64, sigma in 0.2..2.0f64, rate in 0.5..5.0f64,
                                              lam in 0.0..2.0f64, frac in 0.01..0.99f64) {
        let spec = ProcessSpec::levy(g, sigma, DisplacementLaw::exponential(rate), lam).unwrap();
        let best = optimize_lambda(&spec).unwrap();
        let other = k_of_lambda(&spec, frac * rate).unwrap();
        prop_assert!(best.k >= other - 1e-9);
    }

    #[test]
    fn ou_certificate_closed_form(a in 0.2..3.0f64, m in 0.2..3.0f64, sigma in 0.2..3.0f64, p in 1.0..3.0f64) {
        let lambda = a * m / (sigma * sigma);
        // the search over an unbounded MGF domain stops at 50
        prop_assume!(lambda < 45.0);
        let spec = ProcessSpec::ornstein_uhlenbeck(a, m, sigma).unwrap();
        let cert = make_certificate(&spec, p).unwrap();
        let k = a * a * m * m / (2.0 * sigma * sigma);
        prop_assert!((cert.lambda - lambda).abs() <= 1e-4 * lambda);
        prop_assert!((cert.k - k).abs() <= 1e-4 * k);
        prop_assert!((cert.contraction.unwrap() - (cert.k / p + a)).abs() <= 1e-12 * (1.0 + a));
    }
}
