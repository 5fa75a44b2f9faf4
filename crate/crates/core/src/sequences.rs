//! Coefficient sequences and their variance statistics.
//!
//! A sequence supplies `a_n` for n >= 1 in O(1) and the derived quantities:
//! partial energy `S_N² = Σ_{n<=N} |a_n|²`, the variance normalizer
//!
//! ```text
//! σ_N² = S_N² + 2 Re Σ_{k>=1} λ^k Σ_{n<=N-k} conj(a_n) a_{n+k},
//! ```
//!
//! its tail analogue starting at index N, the growth ratio `|a_N|²/S_N²`,
//! and a nonincreasing envelope φ with `sup_{n<=N} |a_n|² <= φ(N) S_N²`.

use crate::error::{Error, Result};
use crate::util::{angle_at, Kahan};
use crate::C64;

/// Lag truncation: drop λ-lags once |λ|^K < 1e-16 (below double resolution
/// relative to the diagonal).
const LAG_EPS: f64 = 1e-16;

/// Procedural coefficient sequence.
#[derive(Debug, Clone)]
pub enum CoefficientSequence {
    /// `a_n = c`.
    Constant(C64),
    /// `a_n = n^p`.
    Power(f64),
    /// `a_n = r^n`.
    Geometric(f64),
    /// Explicit finite list (`a_n = 0` beyond it).
    Explicit(Vec<C64>),
    /// Given moduli with phases from an index-keyed generator.
    RandomPhase { moduli: Vec<f64>, seed: u64 },
}

use CoefficientSequence::*;

impl CoefficientSequence {
    /// Coefficient at index n >= 1.
    pub fn a(&self, n: u64) -> C64 {
        debug_assert!(n >= 1);
        match self {
            Constant(c) => *c,
            Power(p) => C64::new((n as f64).powf(*p), 0.0),
            Geometric(r) => C64::new(r.powi(n as i32), 0.0),
            Explicit(v) => v.get((n - 1) as usize).copied().unwrap_or(C64::new(0.0, 0.0)),
            RandomPhase { moduli, seed } => match moduli.get((n - 1) as usize) {
                Some(&m) => C64::from_polar(m, angle_at(*seed, n)),
                None => C64::new(0.0, 0.0),
            },
        }
    }

    /// First N coefficients.
    pub fn prefix(&self, n: u64) -> Vec<C64> {
        (1..=n).map(|i| self.a(i)).collect()
    }

    /// Whether `Σ |a_n|²` converges for this kind.
    pub fn is_square_summable(&self) -> bool {
        match self {
            Constant(c) => c.norm() == 0.0,
            Power(p) => *p < -0.5,
            Geometric(r) => r.abs() < 1.0,
            Explicit(_) | RandomPhase { .. } => true,
        }
    }

    /// Upper bound on `Σ_{n>cutoff} |a_n|²` for square-summable kinds.
    pub fn tail_energy_bound(&self, cutoff: u64) -> Result<f64> {
        match self {
            Constant(c) if c.norm() == 0.0 => Ok(0.0),
            Power(p) if *p < -0.5 => {
                // Σ_{n>C} n^{2p} <= ∫_C^∞ x^{2p} dx = C^{2p+1}/(-2p-1)
                Ok((cutoff as f64).powf(2.0 * p + 1.0) / (-2.0 * p - 1.0))
            }
            Geometric(r) if r.abs() < 1.0 => {
                let r2 = r * r;
                Ok(r2.powi(cutoff as i32 + 1) / (1.0 - r2))
            }
            Explicit(v) => Ok(v.iter().skip(cutoff as usize).map(|a| a.norm_sqr()).sum()),
            RandomPhase { moduli, .. } => Ok(moduli.iter().skip(cutoff as usize).map(|m| m * m).sum()),
            _ => Err(Error::DivergentSequence(format!("{self:?}"))),
        }
    }
}

/// Number of λ-lags needed before the geometric damping hits `LAG_EPS`.
pub fn lag_cutoff(lambda: C64, n: u64) -> u64 {
    if lambda.norm() == 0.0 || n <= 1 {
        return 0;
    }
    let k = (LAG_EPS.ln() / lambda.norm().ln()).ceil() as u64;
    k.min(n - 1)
}

/// Partial energy `S_N²`: pairwise summation streamed in fixed chunks, so
/// desk runs at N = 10^8..10^9 stay O(1) in memory.
pub fn energy(seq: &CoefficientSequence, n: u64) -> f64 {
    assert!(n >= 1);
    const CHUNK: u64 = 1 << 16;
    let mut partials = Vec::with_capacity((n / CHUNK + 1) as usize);
    let mut buf = Vec::with_capacity(CHUNK as usize);
    let mut i = 1;
    while i <= n {
        let hi = (i + CHUNK - 1).min(n);
        buf.clear();
        for j in i..=hi {
            buf.push(seq.a(j).norm_sqr());
        }
        partials.push(crate::util::pairwise_sum_f64(&buf));
        i = hi + 1;
    }
    crate::util::pairwise_sum_f64(&partials)
}

/// The variance normalizer `σ_N²`.
pub fn sigma2(seq: &CoefficientSequence, lambda: C64, n: u64) -> Result<f64> {
    if lambda.norm() >= 1.0 {
        return Err(Error::Domain(format!("|lambda| = {} must be < 1", lambda.norm())));
    }
    assert!(n >= 1);
    let coeffs = seq.prefix(n);
    Ok(sigma2_from_coeffs(&coeffs, lambda))
}

/// `σ²` of an explicit coefficient window (within-window lags only).
pub fn sigma2_from_coeffs(coeffs: &[C64], lambda: C64) -> f64 {
    let n = coeffs.len() as u64;
    let mut total = Kahan::new();
    for a in coeffs {
        total.add(a.norm_sqr());
    }
    let kmax = lag_cutoff(lambda, n);
    let mut lam_pow = C64::new(1.0, 0.0);
    for k in 1..=kmax {
        lam_pow *= lambda;
        let mut cross = C64::new(0.0, 0.0);
        for i in 0..(n - k) as usize {
            cross += coeffs[i].conj() * coeffs[i + k as usize];
        }
        total.add(2.0 * (lam_pow * cross).re);
    }
    let v = total.value();
    debug_assert!(v >= -1e-12 * v.abs().max(1.0));
    v.max(0.0)
}

/// Tail variance `σ²(N)` truncated at `cutoff`, with its truncation bound.
///
/// The bound covers both the dropped diagonal energy and the dropped lag
/// terms: `(1 + 2|λ|/(1-|λ|)) · tail_energy(cutoff)`.
pub fn tail_sigma2(
    seq: &CoefficientSequence,
    lambda: C64,
    n: u64,
    cutoff: u64,
) -> Result<(f64, f64)> {
    if lambda.norm() >= 1.0 {
        return Err(Error::Domain(format!("|lambda| = {} must be < 1", lambda.norm())));
    }
    if !seq.is_square_summable() {
        return Err(Error::DivergentSequence(
            "tail variance requires a square-summable sequence".into(),
        ));
    }
    assert!(cutoff >= n && n >= 1);
    let coeffs: Vec<C64> = (n..=cutoff).map(|i| seq.a(i)).collect();
    let value = sigma2_from_coeffs(&coeffs, lambda);
    let a = lambda.norm();
    let bound = (1.0 + 2.0 * a / (1.0 - a)) * seq.tail_energy_bound(cutoff)?;
    Ok((value, bound))
}

/// `|a_N|² / S_N²`.
pub fn growth_ratio(seq: &CoefficientSequence, n: u64) -> Result<f64> {
    let s = energy(seq, n);
    if s <= 0.0 {
        return Err(Error::AllZeroPrefix);
    }
    Ok(seq.a(n).norm_sqr() / s)
}

/// Nonincreasing envelope `φ(N) = max_{N<=M<=horizon} sup_{n<=M}|a_n|²/S_M²`.
///
/// Constant and power kinds use the analytic envelope (the raw ratio is
/// already nonincreasing) and ignore the horizon; other kinds build the
/// suffix maximum of the raw ratio over the declared horizon.
pub fn phi_envelope(seq: &CoefficientSequence, n: u64, horizon: u64) -> f64 {
    assert!(n >= 1 && horizon >= n);
    match seq {
        Constant(_) => 1.0 / n as f64,
        Power(p) => {
            if *p >= 0.0 {
                (n as f64).powf(2.0 * p) / energy(seq, n)
            } else {
                1.0 / energy(seq, n)
            }
        }
        _ => {
            // single pass: raw ratio for all M <= horizon, then suffix max
            let mut ratios = Vec::with_capacity(horizon as usize);
            let mut s = Kahan::new();
            let mut peak = 0.0f64;
            for m in 1..=horizon {
                let sq = seq.a(m).norm_sqr();
                s.add(sq);
                peak = peak.max(sq);
                ratios.push(if s.value() > 0.0 { peak / s.value() } else { 1.0 });
            }
            let mut best = 0.0f64;
            for m in (n..=horizon).rev() {
                best = best.max(ratios[(m - 1) as usize]);
            }
            best
        }
    }
}

/// Snapshot of the variance statistics at index N.
#[derive(Debug, Clone)]
pub struct VarianceProfile {
    pub n: u64,
    pub s_n2: f64,
    pub sigma_n2: f64,
    pub growth_ratio: f64,
    pub phi: f64,
}

/// Build the profile; `horizon` feeds the envelope for non-analytic kinds.
pub fn profile(
    seq: &CoefficientSequence,
    lambda: C64,
    n: u64,
    horizon: u64,
) -> Result<VarianceProfile> {
    Ok(VarianceProfile {
        n,
        s_n2: energy(seq, n),
        sigma_n2: sigma2(seq, lambda, n)?,
        growth_ratio: growth_ratio(seq, n)?,
        phi: phi_envelope(seq, n, horizon),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn energy_basics() {
        assert_abs_diff_eq!(energy(&Constant(c(1.0)), 5), 5.0);
        // geometric(2): 4 + 16 + 64
        assert_abs_diff_eq!(energy(&Geometric(2.0), 3), 84.0);
        // power(-1): bounded by pi^2/6
        let e = energy(&Power(-1.0), 200_000);
        assert!(e < std::f64::consts::PI.powi(2) / 6.0);
        assert!(e > std::f64::consts::PI.powi(2) / 6.0 - 1e-5);
    }

    #[test]
    fn sigma2_diagonal_and_small_cases() {
        assert_abs_diff_eq!(sigma2(&Constant(c(1.0)), c(0.0), 5).unwrap(), 5.0);
        // constant(1), lambda = 1/2, N = 2: 2 + 2*(1/2)*1 = 3
        assert_abs_diff_eq!(sigma2(&Constant(c(1.0)), c(0.5), 2).unwrap(), 3.0, epsilon = 1e-14);
        assert!(sigma2(&Constant(c(1.0)), c(1.0), 3).is_err());
    }

    #[test]
    fn kappa_sandwich_for_random_sequences() {
        for seed in 0..20u64 {
            let coeffs: Vec<C64> = (0..64)
                .map(|i| C64::from_polar(0.1 + angle_at(seed, i) / 7.0, angle_at(seed ^ 999, i)))
                .collect();
            let seq = Explicit(coeffs);
            let s2 = energy(&seq, 64);
            for lambda in [c(0.0), c(0.3), C64::new(0.5, 0.2)] {
                let a = lambda.norm();
                let kappa = (1.0 + a) / (1.0 - a);
                let v = sigma2(&seq, lambda, 64).unwrap();
                assert!(
                    v >= s2 / kappa - 1e-12 && v <= s2 * kappa + 1e-12,
                    "seed {seed} lambda {lambda}: {v} vs S2 {s2} kappa {kappa}"
                );
            }
        }
    }

    #[test]
    fn tail_sigma2_closed_forms() {
        // power(-1), lambda 0: tail from 1 approximates pi^2/6 within bound
        let (v, b) = tail_sigma2(&Power(-1.0), c(0.0), 1, 2_000_000).unwrap();
        assert!((v - std::f64::consts::PI.powi(2) / 6.0).abs() < b + 1e-9);

        // geometric(1/2), lambda 0, from N=3: sum_{n>=3} 4^{-n} = 1/48
        let (v, _) = tail_sigma2(&Geometric(0.5), c(0.0), 3, 300).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 48.0, epsilon = 1e-15);

        // divergent kind rejected
        assert!(matches!(
            tail_sigma2(&Constant(c(1.0)), c(0.0), 1, 10),
            Err(Error::DivergentSequence(_))
        ));

        // lambda = 0 tail equals the energy tail for any summable kind
        let (v, _) = tail_sigma2(&Power(-0.8), c(0.0), 5, 5000).unwrap();
        let e: f64 = (5u64..=5000).map(|n| (n as f64).powf(-1.6)).sum();
        assert_abs_diff_eq!(v, e, epsilon = 1e-10);
    }

    #[test]
    fn growth_ratio_cases() {
        assert_abs_diff_eq!(growth_ratio(&Constant(c(2.0)), 10).unwrap(), 0.1, epsilon = 1e-14);
        // geometric(2) tends to 3/4
        let g = growth_ratio(&Geometric(2.0), 30).unwrap();
        assert_abs_diff_eq!(g, 0.75, epsilon = 1e-6);
        // power(1): Faulhaber, 3/N asymptotically
        let g = growth_ratio(&Power(1.0), 1000).unwrap();
        assert_abs_diff_eq!(
            g,
            1000.0f64.powi(2) / (1000.0 * 1001.0 * 2001.0 / 6.0),
            epsilon = 1e-15
        );
        assert!((g - 3.0 / 1000.0).abs() < 1e-5);
        assert!(matches!(growth_ratio(&Explicit(vec![c(0.0); 4]), 3), Err(Error::AllZeroPrefix)));
    }

    #[test]
    fn phi_envelope_analytic_and_brute() {
        assert_abs_diff_eq!(phi_envelope(&Constant(c(3.0)), 10, 50), 0.1, epsilon = 1e-14);
        // power(1): N^2 / sum n^2
        let p = phi_envelope(&Power(1.0), 100, 100);
        assert_abs_diff_eq!(p, 10_000.0 / (100.0 * 101.0 * 201.0 / 6.0), epsilon = 1e-12);
        // spike at index 3 dominates the envelope at N = 2
        let seq = Explicit(vec![c(1.0), c(1.0), c(10.0), c(1.0), c(1.0)]);
        let phi2 = phi_envelope(&seq, 2, 5);
        // raw ratio peaks at M = 3: 100/102
        assert_abs_diff_eq!(phi2, 100.0 / 102.0, epsilon = 1e-14);
    }

    #[test]
    fn phi_envelope_is_nonincreasing() {
        let seqs: Vec<CoefficientSequence> = vec![
            Constant(c(1.0)),
            Power(1.0),
            Power(-0.4),
            Explicit((1..=64).map(|i| C64::from_polar(1.0 + (i as f64 * 0.7).sin(), 0.0)).collect()),
            RandomPhase { moduli: (1..=64).map(|i| 1.0 / (i as f64).sqrt()).collect(), seed: 4 },
        ];
        for seq in &seqs {
            let mut prev = f64::INFINITY;
            for n in 1..=60u64 {
                let p = phi_envelope(seq, n, 64);
                assert!(p <= prev + 1e-15, "{seq:?} at n = {n}: {p} > {prev}");
                prev = p;
            }
        }
    }

    #[test]
    fn random_phase_is_reproducible() {
        let seq = RandomPhase { moduli: vec![1.0, 2.0, 0.5], seed: 7 };
        assert_eq!(seq.a(2), seq.a(2));
        assert_abs_diff_eq!(seq.a(2).norm(), 2.0, epsilon = 1e-15);
        assert_eq!(seq.a(9), C64::new(0.0, 0.0));
    }

    #[test]
    fn lag_cutoff_matches_eps() {
        let k = lag_cutoff(c(0.5), 1000);
        assert!(0.5f64.powi(k as i32) < 1e-16);
        assert!(0.5f64.powi(k as i32 - 1) >= 1e-16);
        assert_eq!(lag_cutoff(c(0.0), 1000), 0);
        assert_eq!(lag_cutoff(c(0.5), 10), 9);
    }
}
