//! Complex polynomial and power-series arithmetic.
//!
//! Polynomials and truncated power series are coefficient vectors in
//! ascending order. Multiplication switches to FFT convolution past a size
//! threshold; series division uses Newton iteration for the reciprocal.
//! Root finding for Clark measures goes through the companion matrix and a
//! complex Hessenberg QR iteration.

use crate::C64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

const FFT_THRESHOLD: usize = 64;

/// Evaluate a polynomial (ascending coefficients) at `z` by Horner.
pub fn eval(coeffs: &[C64], z: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Derivative coefficients.
pub fn derivative(coeffs: &[C64]) -> Vec<C64> {
    if coeffs.len() <= 1 {
        return vec![C64::new(0.0, 0.0)];
    }
    coeffs[1..]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * (i as f64 + 1.0))
        .collect()
}

fn fft_forward(buf: &mut [C64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

fn fft_inverse(buf: &mut [C64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Product of two coefficient vectors, truncated to `limit` coefficients.
pub fn mul_trunc(a: &[C64], b: &[C64], limit: usize) -> Vec<C64> {
    if a.is_empty() || b.is_empty() || limit == 0 {
        return Vec::new();
    }
    let full = a.len() + b.len() - 1;
    let out_len = full.min(limit);
    if a.len().min(b.len()) < FFT_THRESHOLD {
        let mut out = vec![C64::new(0.0, 0.0); out_len];
        for (i, &ai) in a.iter().enumerate() {
            if i >= out_len {
                break;
            }
            for (j, &bj) in b.iter().enumerate() {
                if i + j >= out_len {
                    break;
                }
                out[i + j] += ai * bj;
            }
        }
        return out;
    }
    let size = full.next_power_of_two();
    let mut fa = vec![C64::new(0.0, 0.0); size];
    fa[..a.len()].copy_from_slice(a);
    let mut fb = vec![C64::new(0.0, 0.0); size];
    fb[..b.len()].copy_from_slice(b);
    fft_forward(&mut fa);
    fft_forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft_inverse(&mut fa);
    fa.truncate(out_len);
    fa
}

/// Reciprocal power series 1/b mod z^limit; requires b[0] != 0.
pub fn recip_series(b: &[C64], limit: usize) -> Vec<C64> {
    assert!(!b.is_empty() && b[0].norm() > 0.0, "reciprocal of series with zero constant term");
    let mut r = vec![C64::new(1.0, 0.0) / b[0]];
    let mut m = 1usize;
    while m < limit {
        m = (2 * m).min(limit);
        let bm = &b[..b.len().min(m)];
        let mut t = mul_trunc(bm, &r, m);
        for v in t.iter_mut() {
            *v = -*v;
        }
        t[0] += 2.0;
        r = mul_trunc(&r, &t, m);
    }
    r.truncate(limit);
    r
}

/// Quotient power series a/b mod z^limit; requires b[0] != 0.
pub fn div_series(a: &[C64], b: &[C64], limit: usize) -> Vec<C64> {
    if limit <= 32 || b.len() <= 4 {
        // direct long division: c_n = (a_n - sum b_k c_{n-k}) / b_0
        let mut out = vec![C64::new(0.0, 0.0); limit];
        let inv = C64::new(1.0, 0.0) / b[0];
        for n in 0..limit {
            let mut s = if n < a.len() { a[n] } else { C64::new(0.0, 0.0) };
            for k in 1..=n.min(b.len() - 1) {
                s -= b[k] * out[n - k];
            }
            out[n] = s * inv;
        }
        return out;
    }
    mul_trunc(a, &recip_series(b, limit), limit)
}

/// Values of a polynomial (ascending coefficients) on the equispaced m-point
/// grid `exp(2πi j/m)`: one unscaled inverse FFT of the padded coefficients.
pub fn values_on_unit_grid(coeffs: &[C64], m: usize) -> Vec<C64> {
    debug_assert!(coeffs.len() <= m);
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[..coeffs.len()].copy_from_slice(coeffs);
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m).process(&mut buf));
    buf
}

/// Polynomial evaluated at a power series with s(0) = 0, mod z^limit (Horner).
///
/// Truncation is exact: coefficients below `limit` of the composition depend
/// only on coefficients below `limit` of `s`.
pub fn compose_poly_series(coeffs: &[C64], s: &[C64], limit: usize) -> Vec<C64> {
    debug_assert!(s.is_empty() || s[0].norm() < 1e-14);
    let mut out = vec![C64::new(0.0, 0.0); 1];
    out[0] = *coeffs.last().expect("nonempty polynomial");
    for &c in coeffs.iter().rev().skip(1) {
        out = mul_trunc(&out, s, limit);
        if out.is_empty() {
            out = vec![C64::new(0.0, 0.0)];
        }
        out[0] += c;
    }
    out
}

/// Roots of a complex polynomial (ascending coefficients, exact degree =
/// len-1, leading coefficient nonzero) via companion-matrix QR iteration.
pub fn roots(coeffs: &[C64]) -> crate::Result<Vec<C64>> {
    let d = coeffs.len() - 1;
    assert!(d >= 1 && coeffs[d].norm() > 0.0, "degenerate polynomial");
    if d == 1 {
        return Ok(vec![-coeffs[0] / coeffs[1]]);
    }
    // monic companion matrix, upper Hessenberg by construction
    let lead = coeffs[d];
    let mut h = vec![vec![C64::new(0.0, 0.0); d]; d];
    for i in 1..d {
        h[i][i - 1] = C64::new(1.0, 0.0);
    }
    for i in 0..d {
        h[i][d - 1] = -coeffs[i] / lead;
    }
    hessenberg_eigenvalues(&mut h)
}

/// Eigenvalues of a complex upper Hessenberg matrix by explicit single-shift
/// QR with Wilkinson shifts and complex Givens rotations.
fn hessenberg_eigenvalues(h: &mut [Vec<C64>]) -> crate::Result<Vec<C64>> {
    let n = h.len();
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is lo..hi
    let mut iters = 0usize;
    let max_iters = 80 * n;
    while hi > 0 {
        if hi == 1 {
            eigs.push(h[0][0]);
            hi = 0;
            continue;
        }
        // find the top of the unreduced block ending at hi
        let mut lo = hi - 1;
        while lo > 0 {
            let small = 1e-15 * (h[lo - 1][lo - 1].norm() + h[lo][lo].norm()).max(1e-300);
            if h[lo][lo - 1].norm() <= small {
                h[lo][lo - 1] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs.push(h[hi - 1][hi - 1]);
            hi -= 1;
            continue;
        }
        iters += 1;
        if iters > max_iters {
            return Err(crate::Error::NumericalFailure(
                "companion-matrix QR iteration did not converge".into(),
            ));
        }
        // Wilkinson shift: trailing 2x2 eigenvalue closest to the corner
        let a = h[hi - 2][hi - 2];
        let b = h[hi - 2][hi - 1];
        let c = h[hi - 1][hi - 2];
        let dd = h[hi - 1][hi - 1];
        let tr = a + dd;
        let disc = (tr * tr - (a * dd - b * c) * 4.0).sqrt();
        let e1 = (tr + disc) * 0.5;
        let e2 = (tr - disc) * 0.5;
        let mut shift = if (e1 - dd).norm() <= (e2 - dd).norm() { e1 } else { e2 };
        if iters % 31 == 0 {
            // exceptional shift breaks rare stalls on symmetric configurations
            shift += C64::new(1.5 * h[hi - 1][hi - 2].norm(), 0.0);
        }
        qr_step(h, lo, hi, shift);
    }
    Ok(eigs)
}

/// One explicit single-shift QR sweep on the block lo..hi.
fn qr_step(h: &mut [Vec<C64>], lo: usize, hi: usize, shift: C64) {
    for i in lo..hi {
        h[i][i] -= shift;
    }
    // Left Givens sweep: G_k zeroes h[k+1][k]; G = [[c*, s*], [-s, c]],
    // c = x/r, s = y/r, r = sqrt(|x|^2 + |y|^2).
    let mut rots: Vec<(C64, C64)> = Vec::with_capacity(hi - lo - 1);
    for k in lo..hi - 1 {
        let x = h[k][k];
        let y = h[k + 1][k];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (C64::new(1.0, 0.0), C64::new(0.0, 0.0))
        } else {
            (x / r, y / r)
        };
        for j in k..hi {
            let a = h[k][j];
            let b = h[k + 1][j];
            h[k][j] = c.conj() * a + s.conj() * b;
            h[k + 1][j] = -s * a + c * b;
        }
        rots.push((c, s));
    }
    // Right sweep by the adjoints restores Hessenberg form: H <- R Q.
    for (idx, &(c, s)) in rots.iter().enumerate() {
        let k = lo + idx;
        let top = (k + 2).min(hi);
        for row in h.iter_mut().take(top).skip(lo) {
            let a = row[k];
            let b = row[k + 1];
            row[k] = a * c + b * s;
            row[k + 1] = -a * s.conj() + b * c.conj();
        }
    }
    for i in lo..hi {
        h[i][i] += shift;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mul_small_and_fft_agree() {
        let a: Vec<C64> = (0..200).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        let b: Vec<C64> = (0..150).map(|i| c((i as f64 * 0.7).cos(), 0.1)).collect();
        let direct = {
            let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    out[i + j] += x * y;
                }
            }
            out
        };
        let fft = mul_trunc(&a, &b, usize::MAX);
        for (x, y) in direct.iter().zip(&fft) {
            assert!((x - y).norm() < 1e-9 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn series_division_inverts_multiplication() {
        let b: Vec<C64> = vec![c(1.0, 0.0), c(-0.5, 0.2), c(0.1, 0.0)];
        let a: Vec<C64> = vec![c(0.0, 0.0), c(2.0, -1.0), c(0.3, 0.3), c(0.0, 0.9)];
        let q = div_series(&a, &b, 40);
        let back = mul_trunc(&q, &b, 40);
        for (i, v) in back.iter().enumerate() {
            let want = if i < a.len() { a[i] } else { c(0.0, 0.0) };
            assert!((v - want).norm() < 1e-12);
        }
    }

    #[test]
    fn roots_of_unity() {
        // z^8 - 1
        let mut p = vec![c(0.0, 0.0); 9];
        p[0] = c(-1.0, 0.0);
        p[8] = c(1.0, 0.0);
        let mut r = roots(&p).unwrap();
        assert_eq!(r.len(), 8);
        r.sort_by(|a, b| a.arg().partial_cmp(&b.arg()).unwrap());
        for root in &r {
            assert_abs_diff_eq!(root.norm(), 1.0, epsilon = 1e-10);
            assert!(eval(&p, *root).norm() < 1e-9);
        }
    }

    #[test]
    fn roots_of_random_polynomials_satisfy_residual() {
        for seed in 0..20u64 {
            let d = 3 + (seed % 9) as usize;
            let coeffs: Vec<C64> = (0..=d)
                .map(|i| {
                    let a = crate::util::angle_at(seed, i as u64);
                    let b = crate::util::angle_at(seed ^ 0xabcd, i as u64);
                    c(a.cos(), b.sin())
                })
                .collect();
            let rs = roots(&coeffs).unwrap();
            assert_eq!(rs.len(), d);
            let dp = derivative(&coeffs);
            for root in rs {
                // Newton-polished residual must be tiny relative to |p'|
                let num = eval(&coeffs, root).norm();
                let den = eval(&dp, root).norm().max(1e-8);
                assert!(num / den < 1e-6, "seed {seed}: residual {num} / {den}");
            }
        }
    }

    #[test]
    fn compose_poly_series_matches_pointwise() {
        // p(w) = 1 + 2w - w^3 at s(z) = z + 0.3 z^2
        let p = vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)];
        let s = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.3, 0.0)];
        let comp = compose_poly_series(&p, &s, 16);
        let z = c(0.05, 0.02);
        let sz = eval(&s, z);
        let want = eval(&p, sz);
        let got = eval(&comp, z);
        assert!((want - got).norm() < 1e-12);
    }
}
