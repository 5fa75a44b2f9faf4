//! Statistical harness for the normalized partial sums
//! `T_N = (√2/σ_N) Σ_{n<=N} a_n f^n` and their tail variant, tested against
//! the standard complex normal (density `e^{-|w|²/2}/2π`; independent
//! standard normal marginals, `|T|²/2` unit-rate exponential, `E|T|² = 2`).
//!
//! Sampling is either an equispaced grid (deterministic; midpoint offset by
//! default so boundary fixed points of real-zero products are never grid
//! points) or counter-based Monte Carlo. All moments and test statistics
//! use fixed-shape reductions, so outputs are byte-identical for any worker
//! count.

pub mod stats;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::quad::midpoint_offset;
use crate::sequences::{self, CoefficientSequence};
use crate::util::{angle_at, pairwise_sum, Kahan, REDUCE_CHUNK};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Partial sums over 1..=N or the tail sum from N truncated at a cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    Partial,
    Tail { cutoff: u64 },
}

/// Point source for the sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sampling {
    Grid { m: usize, offset: f64 },
    Mc { seed: u64, m: usize },
}

impl Sampling {
    pub fn grid_default(m: usize) -> Self {
        Sampling::Grid { m, offset: midpoint_offset(m) }
    }

    pub fn count(&self) -> usize {
        match self {
            Sampling::Grid { m, .. } | Sampling::Mc { m, .. } => *m,
        }
    }

    #[inline]
    fn point(&self, j: usize) -> C64 {
        match *self {
            Sampling::Grid { m, offset } => {
                C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / m as f64 + offset)
            }
            Sampling::Mc { seed, .. } => C64::from_polar(1.0, angle_at(seed, j as u64)),
        }
    }
}

/// Sampled values of T_N plus run metadata.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub values: Vec<C64>,
    pub n: u64,
    pub sigma: f64,
    pub s_n2: f64,
    pub mode: Mode,
    pub sampling: Sampling,
    /// Reported truncation bound for tail mode (relative to σ²).
    pub truncation_rel_bound: f64,
    pub warnings: Vec<String>,
}

/// Pass bounds for the Gaussian test battery. `None` fields fall back to
/// the statistical floors `3/√M` (mean) and `5/√M` (second moment).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Thresholds {
    pub mean_modulus: Option<f64>,
    pub second_moment_window: Option<f64>,
    pub cf_gap: f64,
    pub ks_p: f64,
    pub radial_p: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            mean_modulus: None,
            second_moment_window: None,
            cf_gap: 0.02,
            ks_p: 0.01,
            radial_p: 0.01,
        }
    }
}

/// One characteristic-function comparison row.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CfRow {
    pub t_re: f64,
    pub t_im: f64,
    pub cf_re: f64,
    pub cf_im: f64,
    pub target: f64,
    pub gap: f64,
}

/// Kolmogorov-Smirnov outcome for one marginal.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Per-test verdicts against the thresholds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Verdicts {
    pub mean: bool,
    pub second_moment: bool,
    pub cf: bool,
    pub ks_re: bool,
    pub ks_im: bool,
    pub radial: bool,
}

/// Empirical-vs-theoretical comparison of a sample set against the
/// standard complex normal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianReport {
    pub n: u64,
    pub sample_count: usize,
    pub sigma: f64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub second_moment: f64,
    /// Covariance of (Re, Im).
    pub covariance: [[f64; 2]; 2],
    pub cf_table: Vec<CfRow>,
    pub cf_sup_gap: f64,
    pub ks_re: KsOutcome,
    pub ks_im: KsOutcome,
    pub radial_ks: KsOutcome,
    pub thresholds: ResolvedThresholds,
    pub verdicts: Verdicts,
    pub pass: bool,
}

/// Thresholds after resolving the statistical-floor defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResolvedThresholds {
    pub mean_modulus: f64,
    pub second_moment_window: f64,
    pub cf_gap: f64,
    pub ks_p: f64,
    pub radial_p: f64,
}

impl Thresholds {
    pub fn resolve(&self, sample_count: usize) -> ResolvedThresholds {
        let root = (sample_count as f64).sqrt();
        ResolvedThresholds {
            mean_modulus: self.mean_modulus.unwrap_or(3.0 / root),
            second_moment_window: self.second_moment_window.unwrap_or(5.0 / root),
            cf_gap: self.cf_gap,
            ks_p: self.ks_p,
            radial_p: self.radial_p,
        }
    }
}

/// Default characteristic-function grid: 0 plus a polar grid over |t| <= 3.
pub fn default_t_grid() -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    for i in 1..=6 {
        let r = 0.5 * i as f64;
        for k in 0..8 {
            out.push(C64::from_polar(r, std::f64::consts::TAU * k as f64 / 8.0));
        }
    }
    out
}

/// Smallest cutoff whose reported truncation bound is below `rel` relative
/// to the truncated tail variance.
pub fn auto_cutoff(
    seq: &CoefficientSequence,
    lambda: C64,
    n: u64,
    rel: f64,
) -> Result<u64> {
    let ok = |cutoff: u64| -> Result<bool> {
        let (value, bound) = sequences::tail_sigma2(seq, lambda, n, cutoff)?;
        Ok(value > 0.0 && bound <= rel * value)
    };
    let mut hi = (2 * n).max(64);
    let mut found = false;
    for _ in 0..40 {
        if ok(hi)? {
            found = true;
            break;
        }
        hi = hi.saturating_mul(2);
        if hi > (1 << 40) {
            break;
        }
    }
    if !found {
        return Err(Error::Domain("no cutoff satisfies the truncation tolerance".into()));
    }
    // bisect down to the smallest admissible cutoff
    let mut lo = (hi / 2).max(n);
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Sample `T_N` at every point of the sampling spec: one forward orbit per
/// point, coefficients accumulated with compensated summation for long
/// orbits, then scaled by `√2/σ`.
pub fn simulate(
    f: &BlaschkeProduct,
    seq: &CoefficientSequence,
    n: u64,
    mode: Mode,
    sampling: Sampling,
) -> Result<SampleSet> {
    if f.is_rotation() {
        return Err(Error::RotationRejected);
    }
    let lambda = f.derivative_at_zero();
    let mut warnings = Vec::new();
    let (first, last, sigma2, trunc_rel) = match mode {
        Mode::Partial => {
            if seq.is_square_summable() {
                warnings.push(
                    "square-summable sequence in partial mode: the normalized sums do not \
                     converge to the normal law"
                        .into(),
                );
            }
            (1u64, n, sequences::sigma2(seq, lambda, n)?, 0.0)
        }
        Mode::Tail { cutoff } => {
            let (value, bound) = sequences::tail_sigma2(seq, lambda, n, cutoff)?;
            if value <= 0.0 {
                return Err(Error::Domain("tail variance vanished".into()));
            }
            (n, cutoff, value, bound / value)
        }
    };
    let sigma = sigma2.sqrt();
    if sigma <= 0.0 {
        return Err(Error::Domain("sigma is zero; nothing to normalize".into()));
    }
    let coeffs: Vec<C64> = (first..=last).map(|i| seq.a(i)).collect();
    let scale = std::f64::consts::SQRT_2 / sigma;
    let count = sampling.count();
    let compensated = coeffs.len() > 10_000;

    use rayon::prelude::*;
    let n_chunks = count.div_ceil(REDUCE_CHUNK);
    let chunks: Vec<Vec<C64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(count);
            let mut out = Vec::with_capacity(hi - lo);
            // interleave a batch of independent orbits so the division and
            // square-root chains pipeline instead of serializing
            const BATCH: usize = 16;
            let mut j = lo;
            while j < hi {
                let bs = BATCH.min(hi - j);
                let mut ws = [C64::new(0.0, 0.0); BATCH];
                for (k, w) in ws[..bs].iter_mut().enumerate() {
                    *w = sampling.point(j + k);
                    for _ in 1..first {
                        *w = f.eval_boundary(*w);
                    }
                }
                if compensated {
                    let mut re = [Kahan::new(); BATCH];
                    let mut im = [Kahan::new(); BATCH];
                    for a in &coeffs {
                        for k in 0..bs {
                            ws[k] = f.eval_boundary(ws[k]);
                            let term = a * ws[k];
                            re[k].add(term.re);
                            im[k].add(term.im);
                        }
                    }
                    for k in 0..bs {
                        out.push(C64::new(re[k].value(), im[k].value()) * scale);
                    }
                } else {
                    let mut accs = [C64::new(0.0, 0.0); BATCH];
                    for a in &coeffs {
                        for k in 0..bs {
                            ws[k] = f.eval_boundary(ws[k]);
                            accs[k] += a * ws[k];
                        }
                    }
                    for acc in &accs[..bs] {
                        out.push(acc * scale);
                    }
                }
                j += bs;
            }
            out
        })
        .collect();
    let values: Vec<C64> = chunks.into_iter().flatten().collect();
    Ok(SampleSet {
        values,
        n,
        sigma,
        s_n2: (first..=last).map(|i| seq.a(i).norm_sqr()).sum(),
        mode,
        sampling,
        truncation_rel_bound: trunc_rel,
        warnings,
    })
}

/// Characteristic-function table for the sample set.
pub fn cf_curve(samples: &SampleSet, t_grid: &[C64]) -> Vec<CfRow> {
    t_grid
        .iter()
        .map(|&t| {
            let vals: Vec<C64> = samples
                .values
                .iter()
                .map(|&w| {
                    let inner = (t.conj() * w).re;
                    C64::from_polar(1.0, inner)
                })
                .collect();
            let cf = pairwise_sum(&vals) / vals.len() as f64;
            let target = (-t.norm_sqr() / 2.0).exp();
            CfRow {
                t_re: t.re,
                t_im: t.im,
                cf_re: cf.re,
                cf_im: cf.im,
                target,
                gap: (cf - C64::new(target, 0.0)).norm(),
            }
        })
        .collect()
}

/// Run the full Gaussian test battery.
pub fn gaussian_tests(
    samples: &SampleSet,
    t_grid: &[C64],
    thresholds: &Thresholds,
) -> GaussianReport {
    assert!(samples.values.len() >= 1000, "need at least 1e3 samples");
    assert!(t_grid.iter().any(|t| t.norm() == 0.0), "t grid must contain 0");
    let m = samples.values.len();
    let resolved = thresholds.resolve(m);

    let mean = pairwise_sum(&samples.values) / m as f64;
    let sq: Vec<C64> =
        samples.values.iter().map(|w| C64::new(w.norm_sqr(), 0.0)).collect();
    let second = (pairwise_sum(&sq) / m as f64).re;

    let mut cov = [[0.0f64; 2]; 2];
    {
        let (mut aa, mut ab, mut bb) = (Kahan::new(), Kahan::new(), Kahan::new());
        for w in &samples.values {
            let x = w.re - mean.re;
            let y = w.im - mean.im;
            aa.add(x * x);
            ab.add(x * y);
            bb.add(y * y);
        }
        cov[0][0] = aa.value() / m as f64;
        cov[0][1] = ab.value() / m as f64;
        cov[1][0] = cov[0][1];
        cov[1][1] = bb.value() / m as f64;
    }

    let cf_table = cf_curve(samples, t_grid);
    let cf_sup_gap = cf_table.iter().map(|r| r.gap).fold(0.0, f64::max);

    let re: Vec<f64> = samples.values.iter().map(|w| w.re).collect();
    let im: Vec<f64> = samples.values.iter().map(|w| w.im).collect();
    let rad: Vec<f64> = samples.values.iter().map(|w| w.norm_sqr() / 2.0).collect();
    let ks_re = stats::ks_against(&re, stats::normal_cdf);
    let ks_im = stats::ks_against(&im, stats::normal_cdf);
    let radial_ks = stats::ks_against(&rad, stats::exp_cdf);

    let verdicts = Verdicts {
        mean: mean.norm() <= resolved.mean_modulus,
        second_moment: (second - 2.0).abs() <= resolved.second_moment_window,
        cf: cf_sup_gap <= resolved.cf_gap,
        ks_re: ks_re.p_value >= resolved.ks_p,
        ks_im: ks_im.p_value >= resolved.ks_p,
        radial: radial_ks.p_value >= resolved.radial_p,
    };
    let pass = verdicts.mean
        && verdicts.second_moment
        && verdicts.cf
        && verdicts.ks_re
        && verdicts.ks_im
        && verdicts.radial;
    GaussianReport {
        n: samples.n,
        sample_count: m,
        sigma: samples.sigma,
        mean_re: mean.re,
        mean_im: mean.im,
        second_moment: second,
        covariance: cov,
        cf_table,
        cf_sup_gap,
        ks_re,
        ks_im,
        radial_ks,
        thresholds: resolved,
        verdicts,
        pass,
    }
}

/// One row of the optimality demonstration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimalityRow {
    pub n: u64,
    pub growth_ratio: f64,
    /// Triangle-inequality bound `√2 Σ|a_n| / σ_N`.
    pub hard_bound: f64,
    pub max_t_modulus: f64,
    pub cf_sup_gap: f64,
    /// Expected verdict is FAIL; `gaussian_pass` records what happened.
    pub gaussian_pass: bool,
}

/// Demonstrate that geometric(2) coefficients (growth ratio -> 3/4) break
/// the normal limit: bounded |T_N| and a characteristic function far from
/// the Gaussian target.
pub fn optimality_demo(
    f: &BlaschkeProduct,
    n_list: &[u64],
    m: usize,
    seed: u64,
) -> Result<Vec<OptimalityRow>> {
    let seq = CoefficientSequence::Geometric(2.0);
    let t_grid = default_t_grid();
    let thresholds = Thresholds::default();
    n_list
        .iter()
        .map(|&n| {
            let samples = simulate(f, &seq, n, Mode::Partial, Sampling::Mc { seed, m })?;
            let report = gaussian_tests(&samples, &t_grid, &thresholds);
            let abs_sum: f64 = (1..=n).map(|i| seq.a(i).norm()).sum();
            Ok(OptimalityRow {
                n,
                growth_ratio: sequences::growth_ratio(&seq, n)?,
                hard_bound: std::f64::consts::SQRT_2 * abs_sum / samples.sigma,
                max_t_modulus: samples.values.iter().map(|w| w.norm()).fold(0.0, f64::max),
                cf_sup_gap: report.cf_sup_gap,
                gaussian_pass: report.pass,
            })
        })
        .collect()
}

/// One row of the convergence sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u64,
    pub second_moment: f64,
    pub cf_sup_gap: f64,
    pub ks_re: f64,
    pub ks_im: f64,
    pub radial_ks: f64,
}

/// Observe the trend toward the normal law over an increasing N list.
pub fn sweep(
    f: &BlaschkeProduct,
    seq: &CoefficientSequence,
    n_list: &[u64],
    sampling: Sampling,
    t_grid: &[C64],
) -> Result<Vec<SweepRow>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("N list must be increasing".into()));
    }
    let thresholds = Thresholds::default();
    n_list
        .iter()
        .map(|&n| {
            let samples = simulate(f, seq, n, Mode::Partial, sampling)?;
            let rep = gaussian_tests(&samples, t_grid, &thresholds);
            Ok(SweepRow {
                n,
                second_moment: rep.second_moment,
                cf_sup_gap: rep.cf_sup_gap,
                ks_re: rep.ks_re.statistic,
                ks_im: rep.ks_im.statistic,
                radial_ks: rep.radial_ks.statistic,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn half() -> BlaschkeProduct {
        BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap()
    }

    fn ones() -> CoefficientSequence {
        CoefficientSequence::Constant(C64::new(1.0, 0.0))
    }

    #[test]
    fn rotation_is_rejected() {
        let rot = BlaschkeProduct::from_real_zeros(&[0.0]).unwrap();
        assert!(matches!(
            simulate(&rot, &ones(), 10, Mode::Partial, Sampling::grid_default(1000)),
            Err(Error::RotationRejected)
        ));
    }

    #[test]
    fn summable_partial_mode_warns() {
        let s = simulate(
            &half(),
            &CoefficientSequence::Power(-1.0),
            20,
            Mode::Partial,
            Sampling::grid_default(1024),
        )
        .unwrap();
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn n1_samples_have_modulus_sqrt2() {
        // T_1 = sqrt(2) f(z)/sigma with sigma = 1 for a_1 = 1
        let s = simulate(&half(), &ones(), 1, Mode::Partial, Sampling::grid_default(2048)).unwrap();
        assert_abs_diff_eq!(s.sigma, 1.0, epsilon = 1e-15);
        for w in &s.values {
            assert_abs_diff_eq!(w.norm(), std::f64::consts::SQRT_2, epsilon = 1e-12);
        }
    }

    #[test]
    fn grid_second_moment_matches_norm_for_small_n() {
        // exact for resolved spectra: E|T_N|² = 2 ||ξ||²/σ² with tiny N
        let s = simulate(&half(), &ones(), 4, Mode::Partial, Sampling::grid_default(1 << 15))
            .unwrap();
        let sq: Vec<C64> = s.values.iter().map(|w| C64::new(w.norm_sqr(), 0.0)).collect();
        let second = (pairwise_sum(&sq) / sq.len() as f64).re;
        assert!((second - 2.0).abs() < 1e-6, "E|T|² = {second}");
    }

    #[test]
    fn simulate_is_deterministic_across_worker_counts() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                simulate(&half(), &ones(), 50, Mode::Partial, Sampling::Mc { seed: 9, m: 20_000 })
                    .unwrap()
            })
        };
        let a = run(1);
        let b = run(8);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn synthetic_normal_oracle_passes() {
        // seeded Box-Muller standard complex normal samples
        let m = 200_000usize;
        let values: Vec<C64> = (0..m)
            .map(|j| {
                let u1 = (crate::util::splitmix64(11, j as u64) >> 11) as f64 / (1u64 << 53) as f64;
                let u2 = angle_at(12, j as u64);
                let r = (-2.0 * (1.0 - u1).max(1e-300).ln()).sqrt();
                C64::new(r * u2.cos(), r * u2.sin())
            })
            .collect();
        let samples = SampleSet {
            values,
            n: 0,
            sigma: 1.0,
            s_n2: 0.0,
            mode: Mode::Partial,
            sampling: Sampling::Mc { seed: 11, m },
            truncation_rel_bound: 0.0,
            warnings: vec![],
        };
        let rep = gaussian_tests(&samples, &default_t_grid(), &Thresholds::default());
        assert!(rep.pass, "{rep:?}");
        assert!(rep.cf_table[0].gap < 1e-15); // t = 0 row is exact
    }

    #[test]
    fn constant_samples_fail() {
        let values = vec![C64::new(0.7, -0.1); 5000];
        let samples = SampleSet {
            values,
            n: 0,
            sigma: 1.0,
            s_n2: 0.0,
            mode: Mode::Partial,
            sampling: Sampling::Mc { seed: 0, m: 5000 },
            truncation_rel_bound: 0.0,
            warnings: vec![],
        };
        let rep = gaussian_tests(&samples, &default_t_grid(), &Thresholds::default());
        assert!(!rep.pass);
        assert!(rep.cf_sup_gap >= 0.5);
    }

    #[test]
    fn auto_cutoff_satisfies_rule() {
        let seq = CoefficientSequence::Power(-1.0);
        let lambda = C64::new(0.5, 0.0);
        let c = auto_cutoff(&seq, lambda, 50, 1e-3).unwrap();
        let (v, b) = sequences::tail_sigma2(&seq, lambda, 50, c).unwrap();
        assert!(b <= 1e-3 * v);
    }

    #[test]
    fn optimality_demo_fails_gaussianity() {
        let rows = optimality_demo(&half(), &[20], 20_000, 77).unwrap();
        assert_abs_diff_eq!(rows[0].growth_ratio, 0.75, epsilon = 1e-6);
        assert!(!rows[0].gaussian_pass);
        assert!(rows[0].cf_sup_gap > 0.1);
        assert!(rows[0].max_t_modulus <= rows[0].hard_bound + 1e-9);
    }

    #[test]
    fn sweep_requires_increasing_n() {
        assert!(sweep(
            &half(),
            &ones(),
            &[10, 10],
            Sampling::grid_default(1000),
            &default_t_grid()
        )
        .is_err());
    }
}
