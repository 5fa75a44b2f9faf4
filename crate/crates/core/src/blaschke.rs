//! Finite Blaschke products fixing the origin.
//!
//! A product is `f(z) = e^{iθ} ∏_k b_{a_k}(z)` with every zero in the open
//! disk and at least one zero at the origin, so that `f(0) = 0` and boundary
//! iteration preserves normalized Lebesgue measure. The elementary factor is
//!
//! ```text
//! b_a(z) = (|a|/a) (a - z) / (1 - conj(a) z),   b_0(z) = z.
//! ```
//!
//! The normalizing factor `|a|/a` is undefined at `a = 0`, hence the special
//! case. With this normalization `b_a(0) = |a|`, so `f'(0) = phase · ∏ |a_k|`
//! over the nonzero zeros when the origin zero is simple, and `f'(0) = 0`
//! otherwise.

use crate::error::{Error, Result};
use crate::{poly, C64};

/// Zeros are accepted up to modulus `1 - DISK_MARGIN` (or exactly 0).
pub const DISK_MARGIN: f64 = 1e-12;

/// Unit-modulus checks tolerate this much drift.
pub const CIRCLE_TOL: f64 = 1e-12;

/// A finite Blaschke product with `f(0) = 0`.
#[derive(Debug, Clone)]
pub struct BlaschkeProduct {
    phase: C64,
    zeros: Vec<C64>,
    /// Precomputed nonzero-factor constants (|a|, |a|/a, conj(a)).
    factors: Vec<(f64, C64, C64)>,
    origin_multiplicity: u32,
}

impl PartialEq for BlaschkeProduct {
    fn eq(&self, other: &Self) -> bool {
        self.phase == other.phase && self.zeros == other.zeros
    }
}

/// `f = P/Q` with ascending coefficients, `Q[0] = 1`, `P[0] = 0`.
#[derive(Debug, Clone)]
pub struct RationalForm {
    pub numerator: Vec<C64>,
    pub denominator: Vec<C64>,
}

/// Validated constructor for `f(z) = phase · ∏_k b_{a_k}(z)`.
pub fn make_blaschke(phase: C64, zeros: &[C64]) -> Result<BlaschkeProduct> {
    if (phase.norm() - 1.0).abs() > CIRCLE_TOL {
        return Err(Error::NotOnCircle { what: "phase", modulus: phase.norm() });
    }
    if zeros.is_empty() {
        return Err(Error::NoZeroAtOrigin);
    }
    for a in zeros {
        let m = a.norm();
        if m != 0.0 && m > 1.0 - DISK_MARGIN {
            return Err(Error::ZeroOutsideDisk(format!("{a}")));
        }
    }
    if !zeros.iter().any(|a| a.norm() == 0.0) {
        return Err(Error::NoZeroAtOrigin);
    }
    let factors: Vec<(f64, C64, C64)> = zeros
        .iter()
        .filter(|a| a.norm() > 0.0)
        .map(|&a| {
            let m = a.norm();
            (m, m / a, a.conj())
        })
        .collect();
    let origin_multiplicity = (zeros.len() - factors.len()) as u32;
    Ok(BlaschkeProduct {
        phase: phase / phase.norm(),
        zeros: zeros.to_vec(),
        factors,
        origin_multiplicity,
    })
}

impl BlaschkeProduct {
    /// Product with phase 1 and the given zeros.
    pub fn with_zeros(zeros: &[C64]) -> Result<Self> {
        make_blaschke(C64::new(1.0, 0.0), zeros)
    }

    /// Convenience constructor from real zeros.
    pub fn from_real_zeros(zeros: &[f64]) -> Result<Self> {
        let zs: Vec<C64> = zeros.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::with_zeros(&zs)
    }

    pub fn phase(&self) -> C64 {
        self.phase
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// A product is a rotation iff it has degree 1 (single zero at 0).
    pub fn is_rotation(&self) -> bool {
        self.degree() == 1
    }

    /// True when every zero sits at the origin, i.e. `f(z) = phase · z^d`.
    pub fn is_monomial(&self) -> bool {
        self.zeros.iter().all(|a| a.norm() == 0.0)
    }

    /// `f'(0)`: phase times the product of nonzero-zero moduli if the origin
    /// zero is simple, zero otherwise.
    pub fn derivative_at_zero(&self) -> C64 {
        let origin_multiplicity = self.zeros.iter().filter(|a| a.norm() == 0.0).count();
        if origin_multiplicity > 1 {
            return C64::new(0.0, 0.0);
        }
        let modulus: f64 = self.zeros.iter().filter(|a| a.norm() > 0.0).map(|a| a.norm()).product();
        self.phase * modulus
    }

    /// Evaluate at `|w| <= 1` (within tolerance).
    #[inline]
    pub fn eval(&self, w: C64) -> C64 {
        debug_assert!(w.norm() <= 1.0 + 1e-12);
        let mut out = self.phase;
        for _ in 0..self.origin_multiplicity {
            out *= w;
        }
        // b_a(w) = (|a| - (|a|/a) w) / (1 - conj(a) w), all constants cached
        for &(abs_a, c, a_conj) in &self.factors {
            let num = C64::new(abs_a, 0.0) - c * w;
            let den = C64::new(1.0, 0.0) - a_conj * w;
            out *= num * den.conj() / den.norm_sqr();
        }
        out
    }

    /// Evaluate at a boundary point and renormalize to exact unit modulus.
    #[inline]
    pub fn eval_boundary(&self, z: C64) -> C64 {
        let v = self.eval(z);
        // norm_sqr + sqrt instead of hypot: the value sits near 1, far from
        // any overflow regime hypot guards against
        v * (1.0 / v.norm_sqr().sqrt())
    }

    /// `f^n(z)` on the circle; `f^0` is the identity. Renormalizes after
    /// every step so rounding cannot drift the orbit off the circle.
    pub fn iterate(&self, n: u32, z: C64) -> C64 {
        let mut w = z;
        for _ in 0..n {
            w = self.eval_boundary(w);
        }
        w
    }

    /// `|f'(z)|` on the circle: `Σ_k (1 - |a_k|²) / |1 - conj(a_k) z|²`,
    /// strictly positive for finite products.
    pub fn boundary_derivative_modulus(&self, z: C64) -> f64 {
        debug_assert!((z.norm() - 1.0).abs() < 1e-9);
        self.zeros
            .iter()
            .map(|a| {
                if a.norm() == 0.0 {
                    1.0
                } else {
                    (1.0 - a.norm_sqr()) / (C64::new(1.0, 0.0) - a.conj() * z).norm_sqr()
                }
            })
            .sum()
    }

    /// Exact rational form `P/Q`.
    pub fn to_rational(&self) -> RationalForm {
        let mut num = vec![self.phase];
        let mut den = vec![C64::new(1.0, 0.0)];
        for &a in &self.zeros {
            if a.norm() == 0.0 {
                num.insert(0, C64::new(0.0, 0.0));
            } else {
                let c = a.norm() / a;
                num = poly::mul_trunc(&num, &[c * a, -c], usize::MAX);
                den = poly::mul_trunc(&den, &[C64::new(1.0, 0.0), -a.conj()], usize::MAX);
            }
        }
        RationalForm { numerator: num, denominator: den }
    }

    /// First `order + 1` Maclaurin coefficients by series division of the
    /// rational form. Coefficient 0 is exactly 0.
    pub fn taylor_at_zero(&self, order: usize) -> Vec<C64> {
        assert!(order <= 16, "taylor_at_zero supports order <= 16");
        let r = self.to_rational();
        let mut coeffs = poly::div_series(&r.numerator, &r.denominator, order + 1);
        coeffs[0] = C64::new(0.0, 0.0);
        coeffs
    }
}

impl RationalForm {
    pub fn eval(&self, z: C64) -> C64 {
        poly::eval(&self.numerator, z) / poly::eval(&self.denominator, z)
    }

    /// Degree of the represented map: max of numerator/denominator degrees
    /// after stripping trailing zero coefficients.
    pub fn degree(&self) -> usize {
        let deg = |c: &[C64]| c.iter().rposition(|v| v.norm() > 1e-9).unwrap_or(0);
        deg(&self.numerator).max(deg(&self.denominator))
    }

    /// Rational substitution `self ∘ other`, used to build iterates exactly
    /// at test scale.
    pub fn compose(&self, other: &RationalForm) -> RationalForm {
        let d = self.numerator.len().max(self.denominator.len()) - 1;
        // powers of other's numerator and denominator up to d
        let mut rp = vec![vec![C64::new(1.0, 0.0)]];
        let mut sp = vec![vec![C64::new(1.0, 0.0)]];
        for i in 1..=d {
            rp.push(poly::mul_trunc(&rp[i - 1], &other.numerator, usize::MAX));
            sp.push(poly::mul_trunc(&sp[i - 1], &other.denominator, usize::MAX));
        }
        let blend = |coeffs: &[C64]| {
            let mut acc: Vec<C64> = Vec::new();
            for (i, &c) in coeffs.iter().enumerate() {
                if c.norm() == 0.0 {
                    continue;
                }
                let term = poly::mul_trunc(&rp[i], &sp[d - i], usize::MAX);
                if acc.len() < term.len() {
                    acc.resize(term.len(), C64::new(0.0, 0.0));
                }
                for (dst, &src) in acc.iter_mut().zip(&term) {
                    *dst += c * src;
                }
            }
            if acc.is_empty() {
                acc.push(C64::new(0.0, 0.0));
            }
            acc
        };
        let mut num = blend(&self.numerator);
        let mut den = blend(&self.denominator);
        // normalize so den[0] = 1
        let scale = C64::new(1.0, 0.0) / den[0];
        for v in num.iter_mut() {
            *v *= scale;
        }
        for v in den.iter_mut() {
            *v *= scale;
        }
        RationalForm { numerator: num, denominator: den }
    }
}
