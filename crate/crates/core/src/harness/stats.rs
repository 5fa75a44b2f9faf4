//! Distribution functions and the Kolmogorov-Smirnov machinery used by the
//! Gaussian test battery.

use crate::harness::KsOutcome;

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Unit-rate exponential CDF, `1 - e^{-x}` for x >= 0.
pub fn exp_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}

/// One-sample KS statistic `sup |F̂ - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        d = d.max(((i + 1) as f64 / n - c).abs());
        d = d.max((c - i as f64 / n).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction
/// `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn kolmogorov_p(d: f64, n: usize) -> f64 {
    let root = (n as f64).sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0f64;
    for k in 1..=100 {
        let term = 2.0 * (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// KS statistic and p-value against a reference CDF.
pub fn ks_against<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsOutcome {
    let d = ks_statistic(samples, cdf);
    KsOutcome { statistic: d, p_value: kolmogorov_p(d, samples.len()) }
}
