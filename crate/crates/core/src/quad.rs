//! Circle quadrature: equispaced grids, reproducible Monte Carlo points and
//! orbit-based correlation integrals.
//!
//! Equispaced M-point means are exact for trigonometric polynomials of
//! degree below M. Iterates of a non-monomial Blaschke product are *not*
//! trigonometric polynomials — their spectra extend far beyond the naive
//! d^n bound — so orbit quadrature of iterate correlations carries a
//! statistical ~1/sqrt(M) error floor once the spectrum outruns the grid.
//! The certified evaluation of those integrals lives in [`crate::spectral`];
//! this module provides the sampling machinery and the independent
//! cross-check estimates.

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::util::{angle_at, pairwise_sum, par_chunk_sums};
use crate::C64;

/// Equispaced grid `z_j = exp(i(2πj/M + offset))`.
#[derive(Debug, Clone)]
pub struct CircleGrid {
    m: usize,
    offset: f64,
}

/// Midpoint offset `π/M`: excludes ±1 (for even M), which can be boundary
/// fixed points of real-zero products and would freeze their orbits.
pub fn midpoint_offset(m: usize) -> f64 {
    std::f64::consts::PI / m as f64
}

/// Counter-based Monte Carlo sampler: point `j` is a pure function of
/// `(seed, j)`, independent of evaluation order and worker count.
#[derive(Debug, Clone, Copy)]
pub struct McSampler {
    pub seed: u64,
    pub count: usize,
}

/// Equispaced grid constructor.
pub fn uniform_grid(m: usize, offset: f64) -> CircleGrid {
    assert!(m >= 1, "grid needs at least one point");
    CircleGrid { m, offset }
}

impl CircleGrid {
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn point(&self, j: usize) -> C64 {
        C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / self.m as f64 + self.offset)
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.m).map(|j| self.point(j)).collect()
    }
}

impl McSampler {
    pub fn new(seed: u64, count: usize) -> Self {
        assert!(count >= 1);
        Self { seed, count }
    }

    #[inline]
    pub fn point(&self, j: usize) -> C64 {
        C64::from_polar(1.0, angle_at(self.seed, j as u64))
    }
}

/// Uniform i.i.d. boundary points, reproducible bit-for-bit per seed.
pub fn mc_points(sampler: &McSampler) -> Vec<C64> {
    (0..sampler.count).map(|j| sampler.point(j)).collect()
}

/// Mean of sampled values by pairwise summation.
pub fn integrate(values: &[C64]) -> Result<C64> {
    if values.is_empty() {
        return Err(Error::Argument("integrate needs a nonempty value list".into()));
    }
    Ok(pairwise_sum(values) / values.len() as f64)
}

/// Point source for orbit averages: either grid or Monte Carlo.
#[derive(Debug, Clone)]
pub enum PointSet {
    Grid(CircleGrid),
    Mc(McSampler),
}

impl PointSet {
    pub fn len(&self) -> usize {
        match self {
            PointSet::Grid(g) => g.len(),
            PointSet::Mc(s) => s.count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn point(&self, j: usize) -> C64 {
        match self {
            PointSet::Grid(g) => g.point(j),
            PointSet::Mc(s) => s.point(j),
        }
    }
}

/// Orbit estimate of `∫ ∏_j f^{ε_j n_j} dm`; `sign < 0` conjugates the
/// iterate (`f^{-n} = conj(f^n)`). One forward orbit per point, iterates
/// read off at the requested indices. Parallel with a fixed reduction shape.
pub fn correlation_integral(
    f: &BlaschkeProduct,
    indices: &[u32],
    signs: &[i8],
    points: &PointSet,
) -> Result<C64> {
    if indices.is_empty() || indices.len() != signs.len() {
        return Err(Error::Argument("indices and signs must be nonempty and equal-length".into()));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("indices must be strictly increasing".into()));
    }
    let n_max = *indices.last().unwrap();
    let count = points.len();
    let sum = par_chunk_sums(count, |range| {
        let mut chunk: Vec<C64> = Vec::with_capacity(range.len());
        for j in range {
            let mut w = points.point(j);
            let mut prod = C64::new(1.0, 0.0);
            let mut next = 0usize;
            for n in 1..=n_max {
                w = f.eval_boundary(w);
                while next < indices.len() && indices[next] == n {
                    prod *= if signs[next] < 0 { w.conj() } else { w };
                    next += 1;
                }
            }
            chunk.push(prod);
        }
        pairwise_sum(&chunk)
    });
    Ok(sum / count as f64)
}

/// Orbit estimate of `∫ |Σ_{n<=N} a_n f^n|^2 dm`.
pub fn partial_sum_norm2(
    f: &BlaschkeProduct,
    coeffs: &[C64],
    points: &PointSet,
) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(Error::Argument("coefficient list must be nonempty".into()));
    }
    let count = points.len();
    let sum = par_chunk_sums(count, |range| {
        let mut chunk: Vec<C64> = Vec::with_capacity(range.len());
        for j in range {
            let mut w = points.point(j);
            let mut acc = C64::new(0.0, 0.0);
            for a in coeffs {
                w = f.eval_boundary(w);
                acc += a * w;
            }
            chunk.push(C64::new(acc.norm_sqr(), 0.0));
        }
        pairwise_sum(&chunk)
    });
    Ok(sum.re / count as f64)
}

/// Naive trigonometric-degree bound `Σ_j d^{n_j}` for a correlation tuple,
/// saturating at `u64::MAX`.
pub fn naive_degree_bound(degree: usize, indices: &[u32]) -> u64 {
    let mut total: u64 = 0;
    for &n in indices {
        let mut p: u64 = 1;
        for _ in 0..n {
            p = p.saturating_mul(degree as u64);
        }
        total = total.saturating_add(p);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn small_grids_are_the_expected_point_sets() {
        let g = uniform_grid(1, 0.0);
        assert!((g.point(0) - c(1.0, 0.0)).norm() < 1e-15);

        let g = uniform_grid(4, 0.0);
        let pts = g.points();
        for (got, want) in pts.iter().zip([c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)]) {
            assert!((got - want).norm() < 1e-15);
        }

        let g = uniform_grid(3, std::f64::consts::PI);
        assert!((g.point(0) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn grid_exactness_window() {
        // mean of z^m vanishes for 0 < |m| < M and aliases at m = M
        let g = uniform_grid(16, 0.4);
        for m in 1..16i32 {
            let vals: Vec<C64> = (0..16).map(|j| g.point(j).powi(m)).collect();
            assert!(integrate(&vals).unwrap().norm() < 1e-14, "m = {m}");
        }
        let vals: Vec<C64> = (0..16).map(|j| g.point(j).powi(16)).collect();
        assert_abs_diff_eq!(integrate(&vals).unwrap().norm(), 1.0, epsilon = 1e-12);

        // aliasing example: z^2 on a 2-point grid integrates to 1
        let g2 = uniform_grid(2, 0.0);
        let vals: Vec<C64> = (0..2).map(|j| g2.point(j).powi(2)).collect();
        assert_abs_diff_eq!(integrate(&vals).unwrap().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn integrate_rejects_empty_input() {
        assert!(matches!(integrate(&[]), Err(Error::Argument(_))));
    }

    #[test]
    fn mc_points_are_deterministic_unit_modulus() {
        let s = McSampler::new(99, 512);
        let a = mc_points(&s);
        let b = mc_points(&s);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert!((x.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mc_mean_obeys_clt_bound() {
        let s = McSampler::new(2024, 1_000_000);
        let mean = par_chunk_sums(s.count, |r| {
            let vals: Vec<C64> = r.map(|j| s.point(j)).collect();
            pairwise_sum(&vals)
        }) / s.count as f64;
        assert!(mean.norm() < 3.0 / (s.count as f64).sqrt() * 1.7, "mean = {mean}");
    }

    #[test]
    fn correlation_integral_monomial_cases() {
        let sq = BlaschkeProduct::from_real_zeros(&[0.0, 0.0]).unwrap();
        // ∫ f dm = 0 for f = z^2 at exact grid
        let g = PointSet::Grid(uniform_grid(64, midpoint_offset(64)));
        let v = correlation_integral(&sq, &[1], &[1], &g).unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn correlation_integral_covariance_large_grid() {
        // spectral-resolution grid: ∫ conj(f) f^3 dm = λ^2 = 0.25
        let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
        let g = PointSet::Grid(uniform_grid(1 << 14, midpoint_offset(1 << 14)));
        let v = correlation_integral(&f, &[1, 3], &[-1, 1], &g).unwrap();
        assert_abs_diff_eq!(v.re, 0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-8);
        // conjugation symmetry: flipping all signs conjugates the value
        let w = correlation_integral(&f, &[1, 3], &[1, -1], &g).unwrap();
        assert!((w - v.conj()).norm() < 1e-14);
    }

    #[test]
    fn grid_and_mc_estimates_agree_statistically() {
        let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
        let grid = PointSet::Grid(uniform_grid(40_000, midpoint_offset(40_000)));
        let mc = PointSet::Mc(McSampler::new(5, 40_000));
        let a = correlation_integral(&f, &[1, 2], &[-1, 1], &grid).unwrap();
        let b = correlation_integral(&f, &[1, 2], &[-1, 1], &mc).unwrap();
        // bounded integrand: sample std <= 1
        assert!((a - b).norm() < 4.0 / (40_000f64).sqrt());
    }

    #[test]
    fn naive_degree_bound_saturates() {
        assert_eq!(naive_degree_bound(2, &[1, 3]), 10);
        assert_eq!(naive_degree_bound(3, &[2]), 9);
        assert_eq!(naive_degree_bound(2, &[200]), u64::MAX);
    }
}
