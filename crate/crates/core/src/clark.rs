//! Aleksandrov–Clark measures of finite Blaschke products.
//!
//! For inner f with f(0) = 0 the Clark measure μ_α is the probability
//! measure carried by the preimage set f^{-1}({α}) on the circle. For a
//! finite product of degree d the preimages are the d circle roots of
//! `P(z) - α Q(z) = 0` and the weights are `1/|f'(z_j)|`.
//!
//! The moment identities verified here:
//!
//! ```text
//! ∫ conj(z)   dμ_α = f'(0) conj(α)
//! ∫ conj(z)²  dμ_α = (f''(0)/2) conj(α) + f'(0)² conj(α)²
//! ∫ conj(z)^l dμ_α = Σ_{k=1..l} conj(α)^k ∫ f(z)^k conj(z)^l dm(z)
//! ```
//!
//! and the disintegration `m = ∫ μ_α dm(α)`: averaging `∫ G dμ_α` over an
//! equispaced α-grid reproduces `∫ G dm` exactly, because each moment is a
//! trigonometric polynomial in α of degree at most |l|.

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::quad::{integrate, uniform_grid};
use crate::{poly, C64};

/// Atomic Clark measure at parameter α.
#[derive(Debug, Clone)]
pub struct ClarkMeasure {
    pub alpha: C64,
    /// `(atom, weight)` pairs; weights sum to 1.
    pub atoms: Vec<(C64, f64)>,
}

/// Atom locations must land on the circle within this after polishing.
const ATOM_CIRCLE_TOL: f64 = 1e-6;

/// Minimal arc separation between atoms of a non-rotation product.
const ATOM_SEPARATION: f64 = 1e-8;

/// Construct μ_α: companion-matrix roots of `P - αQ`, three Newton steps
/// projected to the circle, closed-form weights `1/|f'|`.
pub fn clark_measure(f: &BlaschkeProduct, alpha: C64) -> Result<ClarkMeasure> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::NotOnCircle { what: "alpha", modulus: alpha.norm() });
    }
    let r = f.to_rational();
    let d = f.degree();
    let mut coeffs = vec![C64::new(0.0, 0.0); d + 1];
    for (i, &c) in r.numerator.iter().enumerate() {
        coeffs[i] += c;
    }
    for (i, &c) in r.denominator.iter().enumerate() {
        coeffs[i] -= alpha * c;
    }
    let mut roots = poly::roots(&coeffs)?;

    // Newton polish on h = P - αQ, projecting back to the circle each step
    let dnum = poly::derivative(&r.numerator);
    let dden = poly::derivative(&r.denominator);
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let h = poly::eval(&r.numerator, *z) - alpha * poly::eval(&r.denominator, *z);
            let hp = poly::eval(&dnum, *z) - alpha * poly::eval(&dden, *z);
            if hp.norm() > 0.0 {
                *z -= h / hp;
            }
            *z /= z.norm();
        }
    }
    for z in &roots {
        if (z.norm() - 1.0).abs() > ATOM_CIRCLE_TOL {
            return Err(Error::NumericalFailure(format!(
                "clark atom off the circle: |z| = {}",
                z.norm()
            )));
        }
    }
    roots.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
    if !f.is_rotation() {
        for w in roots.windows(2) {
            if (w[1].arg() - w[0].arg()).abs() < ATOM_SEPARATION {
                return Err(Error::NumericalFailure("clark atoms not separated".into()));
            }
        }
    }
    let atoms: Vec<(C64, f64)> =
        roots.into_iter().map(|z| (z, 1.0 / f.boundary_derivative_modulus(z))).collect();
    Ok(ClarkMeasure { alpha, atoms })
}

impl ClarkMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// `Σ_j w_j conj(z_j)^l` (negative l uses `z_j^{|l|}`).
    pub fn moment(&self, l: i32) -> C64 {
        assert!(l.abs() <= 64, "moment order capped at 64");
        self.atoms
            .iter()
            .map(|&(z, w)| {
                let p = z.powi(l.abs());
                w * if l >= 0 { p.conj() } else { p }
            })
            .sum()
    }

    /// `∫ G dμ_α` for a trig polynomial `G(z) = Σ_m c_m z^m`, m in -L..=L.
    pub fn integrate_trig(&self, coeffs: &[C64]) -> C64 {
        let l = (coeffs.len() - 1) / 2;
        let mut acc = C64::new(0.0, 0.0);
        for (i, &c) in coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let m = i as i32 - l as i32;
            // z^m with negative m meaning conj; moment(l) is conj(z)^l
            acc += c * self.moment(-m);
        }
        acc
    }
}

/// Exact value of `∫ f(z)^k conj(z)^l dm(z)`: the l-th Taylor coefficient of
/// the k-th *power* of f, by equispaced quadrature of the power on a grid
/// sized for both the polynomial degree and the geometric coefficient decay
/// of the fixed zero set.
pub fn power_moment(f: &BlaschkeProduct, k: u32, l: u32) -> C64 {
    let r_max = f.zeros().iter().map(|a| a.norm()).fold(0.0f64, f64::max);
    let degree_bound = k as usize * f.degree() + l as usize;
    // coefficients of f^k decay like r_max^m; margin pushes the aliased
    // tail below 1e-15
    let margin = if r_max > 0.0 { (34.5 / -r_max.ln()).ceil() as usize } else { 0 };
    let m = (degree_bound + margin + 1).next_power_of_two();
    let grid = uniform_grid(m, 0.0);
    let vals: Vec<C64> = (0..m)
        .map(|j| {
            let z = grid.point(j);
            f.eval(z).powi(k as i32) * z.conj().powi(l as i32)
        })
        .collect();
    integrate(&vals).expect("nonempty grid")
}

/// Residuals of the moment identities for l = 1..=l_max at the given α.
pub fn verify_moments(f: &BlaschkeProduct, alpha: C64, l_max: u32) -> Result<Vec<f64>> {
    assert!((1..=16).contains(&l_max));
    let mu = clark_measure(f, alpha)?;
    let taylor = f.taylor_at_zero(2);
    let mut out = Vec::with_capacity(l_max as usize);
    for l in 1..=l_max {
        let lhs = mu.moment(l as i32);
        let rhs = match l {
            1 => taylor[1] * alpha.conj(),
            2 => taylor[2] * alpha.conj() + taylor[1] * taylor[1] * alpha.conj().powi(2),
            _ => {
                let mut acc = C64::new(0.0, 0.0);
                for k in 1..=l {
                    acc += alpha.conj().powi(k as i32) * power_moment(f, k, l);
                }
                acc
            }
        };
        out.push((lhs - rhs).norm());
    }
    Ok(out)
}

/// Disintegration residual: `|avg_α ∫ G dμ_α - ∫ G dm|` over an equispaced
/// α-grid of `m_alpha` points; `∫ G dm` is the center coefficient of G.
pub fn verify_disintegration(
    f: &BlaschkeProduct,
    g_coeffs: &[C64],
    m_alpha: usize,
) -> Result<f64> {
    assert!(g_coeffs.len() % 2 == 1, "coefficients must cover -L..=L");
    let l = (g_coeffs.len() - 1) / 2;
    assert!(l <= 32);
    assert!(
        m_alpha >= 2 * l * f.degree() + 1,
        "alpha grid must exceed the moment polynomial degree"
    );
    let alpha_grid = uniform_grid(m_alpha, 0.0);
    let vals: Vec<C64> = (0..m_alpha)
        .map(|j| clark_measure(f, alpha_grid.point(j)).map(|mu| mu.integrate_trig(g_coeffs)))
        .collect::<Result<_>>()?;
    let avg = integrate(&vals)?;
    let rhs = g_coeffs[l];
    Ok((avg - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::angle_at;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn square_map_atoms() {
        let sq = BlaschkeProduct::from_real_zeros(&[0.0, 0.0]).unwrap();
        // alpha = 1: atoms ±1, weights 1/2
        let mu = clark_measure(&sq, c(1.0, 0.0)).unwrap();
        assert_eq!(mu.atoms.len(), 2);
        assert_abs_diff_eq!(mu.total_mass(), 1.0, epsilon = 1e-12);
        for (z, w) in &mu.atoms {
            assert!((z.powi(2) - c(1.0, 0.0)).norm() < 1e-9);
            assert_abs_diff_eq!(*w, 0.5, epsilon = 1e-12);
        }
        assert!(mu.moment(1).norm() < 1e-12);
        assert_abs_diff_eq!(mu.moment(2).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mu.moment(0).re, 1.0, epsilon = 1e-15);

        // alpha = -1: atoms ±i
        let mu = clark_measure(&sq, c(-1.0, 0.0)).unwrap();
        for (z, _) in &mu.atoms {
            assert!(z.re.abs() < 1e-9 && (z.im.abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_single_atom() {
        let rot = crate::blaschke::make_blaschke(C64::from_polar(1.0, 0.8), &[c(0.0, 0.0)]).unwrap();
        let alpha = C64::from_polar(1.0, 2.1);
        let mu = clark_measure(&rot, alpha).unwrap();
        assert_eq!(mu.atoms.len(), 1);
        assert_abs_diff_eq!(mu.atoms[0].1, 1.0, epsilon = 1e-12);
        assert!((rot.eval_boundary(mu.atoms[0].0) - alpha).norm() < 1e-10);
    }

    #[test]
    fn pullback_and_normalization_across_alphas_and_degrees() {
        let products = [
            BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap(),
            BlaschkeProduct::with_zeros(&[c(0.0, 0.0), c(0.3, 0.0), c(0.7, 0.0)]).unwrap(),
            BlaschkeProduct::with_zeros(&[c(0.0, 0.0), c(0.2, 0.3), c(-0.4, 0.1), c(0.0, -0.5)])
                .unwrap(),
            BlaschkeProduct::with_zeros(&[
                c(0.0, 0.0),
                c(0.5, 0.0),
                c(0.1, 0.55),
                c(-0.3, -0.3),
                c(0.62, 0.1),
            ])
            .unwrap(),
        ];
        for f in &products {
            for j in 0..64u64 {
                let alpha = C64::from_polar(1.0, angle_at(17, j));
                let mu = clark_measure(f, alpha).unwrap();
                assert_eq!(mu.atoms.len(), f.degree());
                assert_abs_diff_eq!(mu.total_mass(), 1.0, epsilon = 1e-10);
                for (z, _) in &mu.atoms {
                    assert!((f.eval_boundary(*z) - alpha).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn first_moment_matches_derivative() {
        let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
        let alpha = C64::from_polar(1.0, 0.7);
        let mu = clark_measure(&f, alpha).unwrap();
        let want = f.derivative_at_zero() * alpha.conj();
        assert!((mu.moment(1) - want).norm() < 1e-12);
    }

    #[test]
    fn moment_identities_small_orders() {
        let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
        // l = 1 must equal 0.5, l = 2 must equal -0.75 + 0.25 at alpha = 1
        let mu = clark_measure(&f, c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(mu.moment(1).re, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(mu.moment(2).re, -0.5, epsilon = 1e-10);
        let res = verify_moments(&f, c(1.0, 0.0), 8).unwrap();
        for (l, r) in res.iter().enumerate() {
            assert!(*r < 1e-10, "l = {}: residual {r}", l + 1);
        }
    }

    #[test]
    fn moment_identities_degrees_2_to_4() {
        let products = [
            BlaschkeProduct::from_real_zeros(&[0.0, 0.0]).unwrap(),
            BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap(),
            BlaschkeProduct::with_zeros(&[c(0.0, 0.0), c(0.3, 0.0), c(0.7, 0.0)]).unwrap(),
            BlaschkeProduct::with_zeros(&[c(0.0, 0.0), c(0.2, 0.3), c(-0.4, 0.1), c(0.0, -0.5)])
                .unwrap(),
        ];
        for f in &products {
            for j in 0..8u64 {
                let alpha = C64::from_polar(1.0, angle_at(23, j));
                let res = verify_moments(f, alpha, 8).unwrap();
                for (l, r) in res.iter().enumerate() {
                    assert!(*r < 1e-9, "deg {} l {}: {r}", f.degree(), l + 1);
                }
            }
        }
    }

    #[test]
    fn disintegration_over_monomials() {
        let products = [
            BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap(),
            BlaschkeProduct::with_zeros(&[c(0.0, 0.0), c(0.3, 0.0), c(0.7, 0.0)]).unwrap(),
        ];
        for f in &products {
            for m in -8i32..=8 {
                let l = 8usize;
                let mut g = vec![C64::new(0.0, 0.0); 2 * l + 1];
                g[(m + l as i32) as usize] = C64::new(1.0, 0.0);
                let m_alpha = 2 * l * f.degree() + 1;
                let res = verify_disintegration(f, &g, m_alpha).unwrap();
                assert!(res < 1e-8, "deg {} monomial {m}: residual {res}", f.degree());
            }
        }
    }

    #[test]
    fn disintegration_of_constant_is_exact() {
        let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
        let g = [C64::new(1.0, 0.0)]; // G ≡ 1, L = 0
        let res = verify_disintegration(&f, &g, 1).unwrap();
        assert!(res < 1e-12);
    }

    #[test]
    fn power_moment_matches_series_division() {
        // [z^l] f^k from the rational form, cross-checked by quadrature
        let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
        let r = f.to_rational();
        for (k, l) in [(1u32, 1u32), (1, 3), (2, 3), (3, 5)] {
            let mut num = vec![C64::new(1.0, 0.0)];
            let mut den = vec![C64::new(1.0, 0.0)];
            for _ in 0..k {
                num = poly::mul_trunc(&num, &r.numerator, (l + 1) as usize);
                den = poly::mul_trunc(&den, &r.denominator, (l + 1) as usize);
            }
            let series = poly::div_series(&num, &den, (l + 1) as usize);
            let got = power_moment(&f, k, l);
            assert!((got - series[l as usize]).norm() < 1e-12, "k {k} l {l}");
        }
    }
}
