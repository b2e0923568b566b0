//! Distributional checks of the simulator against closed forms.

use refjump::certificate::make_certificate;
use refjump::engine::{estimate_stationary, sample_at_times, sample_jump_times};
use refjump::model::DisplacementLaw;
use refjump::stream::JUMPS;
use refjump::wasserstein::wp_exact;
use refjump::{EmpiricalDistribution, Executor, ProcessSpec, StreamSeed};

/// Kolmogorov–Smirnov distance of a sample from the `Exp(rate)` law.
fn ks_exponential(mut sample: Vec<f64>, rate: f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn jump_gaps_are_exponential() {
    let seed = StreamSeed::new(3);
    let mut gaps = Vec::new();
    for path in 0..200 {
        let times: Vec<f64> = sample_jump_times(2.0, 50.0, &mut seed.rng(0, JUMPS, path));
        let mut prev = 0.0;
        for t in times {
            gaps.push(t - prev);
            prev = t;
        }
    }
    let n = gaps.len() as f64;
    // 1% critical value of the one-sample KS statistic
    assert!(ks_exponential(gaps, 2.0) < 1.63 / n.sqrt());
}

#[test]
fn jump_counts_are_poisson() {
    let seed = StreamSeed::new(4);
    let (lam, horizon, n) = (1.5, 4.0, 20_000u64);
    let counts: Vec<f64> =
        (0..n).map(|p| sample_jump_times(lam, horizon, &mut seed.rng(1, JUMPS, p)).len() as f64).collect();
    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let expected = lam * horizon;
    assert!((mean - expected).abs() < 4.0 * (expected / n as f64).sqrt(), "mean {mean}");
    // Poisson dispersion: variance equals the mean
    assert!((var / mean - 1.0).abs() < 0.05, "dispersion {}", var / mean);
}

#[test]
fn exponential_displacements_have_the_right_mean() {
    let law = DisplacementLaw::exponential(2.0);
    let n = 1_000_000;
    let mean = (0..n).map(|i| law.quantile((i as f64 + 0.5) / n as f64)).sum::<f64>() / n as f64;
    assert!((mean - 0.5).abs() < 1e-3);
    assert_eq!(law.mean(), 0.5);
}

#[test]
fn drifted_rbm_relaxes_to_its_exponential_law() {
    // stationary law of reflected BM with drift −1 and unit noise is Exp(2)
    let spec = ProcessSpec::drifted_rbm(-1.0, 1.0).unwrap();
    let cert = make_certificate(&spec, 1.0).unwrap();
    let n = 4000;
    let pi = estimate_stationary(&spec, &cert, 8.0, n, 0.0, 1e-3, StreamSeed::new(5), 0, &Executor::sequential())
        .unwrap();
    let exact: Vec<f64> = (0..n).map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln() / 2.0).collect();
    let w1 = wp_exact(&pi.endpoint_sample, &EmpiricalDistribution::from_samples(exact).unwrap(), 1.0).unwrap();
    // Euler bias near the boundary is of order sqrt(h)
    assert!(w1 < 0.05, "W1 {w1}");
    let mean = pi.endpoint_sample.mean();
    assert!((mean - 0.5).abs() < 0.03 + 3.0 * 0.5 / (n as f64).sqrt(), "mean {mean}");
}

#[test]
fn euler_bias_shrinks_with_the_step() {
    let spec = ProcessSpec::drifted_rbm(-1.0, 1.0).unwrap();
    let ex = Executor::sequential();
    let n = 20_000;
    let mean_at = |h: f64| {
        let end = sample_at_times(&spec, 0.0, &[6.0], n, h, StreamSeed::new(6), 0, &ex).unwrap();
        end[0].iter().sum::<f64>() / n as f64
    };
    // E X(6) from zero is within 2e-3 of the stationary mean 0.5
    let coarse = (mean_at(2e-2) - 0.5).abs();
    let fine = (mean_at(2e-3) - 0.5).abs();
    assert!(fine < coarse / 2.0, "coarse {coarse}, fine {fine}");
}

#[test]
fn ou_mean_before_reflection_matters_little() {
    // far from zero the reflected OU with a = 1 behaves like the free one: m_t = x0 e^{−t} − m(1 − e^{−t})
    let spec = ProcessSpec::ornstein_uhlenbeck(1.0, 1.0, 0.1).unwrap();
    let n = 2000;
    let end = sample_at_times(&spec, 20.0, &[0.5, 1.0], n, 1e-3, StreamSeed::new(7), 0, &Executor::sequential())
        .unwrap();
    for (j, t) in [0.5f64, 1.0].into_iter().enumerate() {
        let mean = end[j].iter().sum::<f64>() / n as f64;
        let exact = 20.0 * (-t).exp() - (1.0 - (-t).exp());
        assert!((mean - exact).abs() < 0.01, "t={t}: {mean} vs {exact}");
    }
}
