//! The exact-identity verification suite.
//!
//! Enumerates every admissible small index tuple up to a top index for the
//! standard test products and runs the Lemma 3.1 / 3.2 / 4.1 / Theorem 3.3
//! / 4.2 checks. The enumeration per product:
//!
//! * Lemma 3.1(a): monomials z^m, |m| <= 8, plus one mixed polynomial;
//! * Lemma 3.1(b): all pairs k < j <= n_max;
//! * Lemma 3.2: all separated two-pair chains built from 4 distinct indices
//!   (4 orientations each), all three-pair chains from 6 distinct indices
//!   up to 9, plus equal-index pairs;
//! * Theorem 3.3: all splits into 2 or 3 disjoint consecutive ranges of
//!   width <= 3 starting at 1 (plus singleton triples);
//! * Lemma 4.1(a): all quadruples with max(n1,n2) < min(n3,n4), both ε₁;
//! * Lemma 4.1(c) equality: all increasing quadruples, the two
//!   conjugation-independent sign patterns;
//! * Theorem 4.2(a)(b)(c): constant(1) and a seeded random sequence at
//!   N in {4, 8, 12}.

use super::{
    covariance_check, factorization_check, four_factor_check, norm_comparability_check,
    pushforward_check, uncorrelated_squares_check, CorrelationReport, FourFactorCase,
};
use crate::blaschke::BlaschkeProduct;
use crate::error::Result;
use crate::spectral::IterateTable;
use crate::util::angle_at;
use crate::C64;

/// Named products covering degrees 2-3 and a = |f'(0)| in {0, 0.21, 0.35, 0.5}.
pub fn standard_products() -> Vec<(String, BlaschkeProduct)> {
    vec![
        ("z2".into(), BlaschkeProduct::from_real_zeros(&[0.0, 0.0]).unwrap()),
        ("z3".into(), BlaschkeProduct::from_real_zeros(&[0.0, 0.0, 0.0]).unwrap()),
        ("a021".into(), BlaschkeProduct::from_real_zeros(&[0.0, 0.21]).unwrap()),
        ("a035".into(), BlaschkeProduct::from_real_zeros(&[0.0, 0.35]).unwrap()),
        ("a05".into(), BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap()),
    ]
}

/// Degree-3 product with a = 0.21 for the supplementary (weakly certified)
/// checks; its iterate spectra outgrow any certified budget past n ≈ 6.
pub fn supplementary_degree3() -> (String, BlaschkeProduct) {
    ("a021_d3".into(), BlaschkeProduct::from_real_zeros(&[0.0, 0.3, 0.7]).unwrap())
}

/// Run the full identity suite for one product.
pub fn exact_identity_suite(
    name: &str,
    f: &BlaschkeProduct,
    n_max: u32,
    l_cap: usize,
) -> Result<Vec<CorrelationReport>> {
    let table = IterateTable::build(f, n_max, l_cap);
    let mut reports: Vec<CorrelationReport> = Vec::new();
    let tag = |mut r: CorrelationReport| {
        r.name = format!("{name}/{}", r.name);
        r
    };

    // Lemma 3.1(a)
    for m in -8i32..=8 {
        let l = 8usize;
        let mut g = vec![C64::new(0.0, 0.0); 2 * l + 1];
        g[(m + l as i32) as usize] = C64::new(1.0, 0.0);
        reports.push(tag(pushforward_check(f, &g)?));
    }
    {
        // G = z + conj(z) + z²
        let mut g = vec![C64::new(0.0, 0.0); 5];
        g[3] = C64::new(1.0, 0.0);
        g[1] = C64::new(1.0, 0.0);
        g[4] = C64::new(1.0, 0.0);
        reports.push(tag(pushforward_check(f, &g)?));
    }

    // Lemma 3.1(b): all pairs
    for k in 1..n_max {
        for j in (k + 1)..=n_max {
            reports.push(tag(covariance_check(&table, k, j)?));
        }
    }

    // Lemma 3.2: two-pair chains over all 4 distinct indices
    for a in 1..=n_max {
        for b in (a + 1)..=n_max {
            for c in (b + 1)..=n_max {
                for d in (c + 1)..=n_max {
                    for (p1, p2) in [((a, b), (c, d)), ((b, a), (c, d)), ((a, b), (d, c)), ((b, a), (d, c))]
                    {
                        reports.push(tag(factorization_check(&table, &[p1, p2])?));
                    }
                }
            }
        }
    }
    // equal-index pairs degenerate to a factor 1
    for a in 1..=n_max.saturating_sub(2) {
        reports.push(tag(factorization_check(&table, &[(a, a), (a + 1, a + 2)])?));
    }
    // three-pair chains over 6 distinct indices up to min(9, n_max)
    let top3 = n_max.min(9);
    if top3 >= 6 {
        for combo in combinations(top3, 6) {
            let pairs = [(combo[0], combo[1]), (combo[2], combo[3]), (combo[4], combo[5])];
            reports.push(tag(factorization_check(&table, &pairs)?));
            let flipped = [(combo[1], combo[0]), (combo[2], combo[3]), (combo[5], combo[4])];
            reports.push(tag(factorization_check(&table, &flipped)?));
        }
    }

    // Theorem 3.3 over constant(1) coefficients
    let ones = vec![C64::new(1.0, 0.0); n_max as usize];
    for ranges in consecutive_range_splits(n_max) {
        reports.push(tag(uncorrelated_squares_check(&table, &ones, &ranges)?));
    }

    // Lemma 4.1(a): cancellation
    for combo in combinations(n_max, 4) {
        let (n1, n2, n3, n4) = (combo[0], combo[1], combo[2], combo[3]);
        for e1 in [1, -1] {
            reports.push(tag(four_factor_check(
                &table,
                FourFactorCase::Cancellation,
                &[n1, n2, n3, n4],
                &[e1],
            )?));
        }
    }
    // Lemma 4.1(c) equality: two conjugation-independent sign patterns
    for combo in combinations(n_max, 4) {
        for signs in [[1, -1, 1, -1], [1, -1, -1, 1]] {
            reports.push(tag(four_factor_check(
                &table,
                FourFactorCase::Equality,
                &combo,
                &signs,
            )?));
        }
    }
    // Lemma 4.1(b)(c) bound cases: reported fitted constants
    for combo in combinations(n_max.min(9), 3) {
        reports.push(tag(four_factor_check(
            &table,
            FourFactorCase::Squared,
            &combo,
            &[1, -1, 1],
        )?));
    }
    for combo in combinations(n_max.min(8), 4) {
        reports.push(tag(four_factor_check(
            &table,
            FourFactorCase::Generic,
            &combo,
            &[1, 1, -1, -1],
        )?));
    }

    // Theorem 4.2(a)(b)(c)
    let mut norm_ns = vec![4u32.min(n_max), 8.min(n_max), n_max.min(12)];
    norm_ns.dedup();
    for n in norm_ns {
        let ones = vec![C64::new(1.0, 0.0); n as usize];
        for rep in norm_comparability_check(&table, &ones)? {
            reports.push(tag(named_suffix(rep, &format!("const N={n}"))));
        }
        let random: Vec<C64> = (0..n as u64)
            .map(|i| C64::from_polar(0.2 + angle_at(31, i) / 6.0, angle_at(77, i)))
            .collect();
        for rep in norm_comparability_check(&table, &random)? {
            reports.push(tag(named_suffix(rep, &format!("random N={n}"))));
        }
    }

    Ok(reports)
}

fn named_suffix(mut r: CorrelationReport, suffix: &str) -> CorrelationReport {
    r.name = format!("{} [{suffix}]", r.name);
    r
}

/// All strictly increasing index tuples of the given size drawn from 1..=top.
fn combinations(top: u32, size: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: u32, top: u32, size: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        let remaining = size - cur.len();
        for v in start..=(top + 1 - remaining as u32) {
            cur.push(v);
            rec(v + 1, top, size, cur, out);
            cur.pop();
        }
    }
    rec(1, top, size, &mut cur, &mut out);
    out
}

/// Splits of an initial segment into 2 or 3 disjoint consecutive ranges of
/// width <= 3 (gaps allowed), all within 1..=n_max.
fn consecutive_range_splits(n_max: u32) -> Vec<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    let widths = [1u32, 2, 3];
    for &w1 in &widths {
        for &w2 in &widths {
            for gap in 0..=1u32 {
                let r1 = (1, w1);
                let r2 = (w1 + 1 + gap, w1 + gap + w2);
                if r2.1 <= n_max {
                    out.push(vec![r1, r2]);
                }
                for &w3 in &widths {
                    let r3 = (r2.1 + 1, r2.1 + w3);
                    if r3.1 <= n_max {
                        out.push(vec![r1, r2, r3]);
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(12, 4).len(), 495);
        assert_eq!(combinations(9, 6).len(), 84);
    }

    #[test]
    fn range_splits_are_admissible() {
        for split in consecutive_range_splits(12) {
            for w in split.windows(2) {
                assert!(w[0].1 < w[1].0);
            }
        }
    }

    #[test]
    fn small_suite_passes_for_each_product() {
        for (name, f) in standard_products() {
            let reports = exact_identity_suite(&name, &f, 6, 1 << 18).unwrap();
            let failures: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
            assert!(failures.is_empty(), "{name}: {failures:#?}");
        }
    }

    #[test]
    fn conjugation_symmetry_invariant() {
        // flipping every sign conjugates the integral
        let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
        let table = IterateTable::build(&f, 8, 1 << 18);
        for factors in [vec![(1u32, -1i32), (3, 1)], vec![(1, 1), (2, -1), (5, 1), (8, -1)]] {
            let v = table.tuple_value(&factors);
            let flipped: Vec<(u32, i32)> = factors.iter().map(|&(n, e)| (n, -e)).collect();
            let w = table.tuple_value(&flipped);
            assert!((w.value - v.value.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn monotone_decay_of_the_pair_family() {
        // |I(q+1)| / |I(q)| = a for the k = 2 family
        let f = BlaschkeProduct::from_real_zeros(&[0.0, 0.5]).unwrap();
        let table = IterateTable::build(&f, 11, 1 << 20);
        let mags: Vec<f64> = (1..=10)
            .map(|q| table.tuple_value(&[(1, -1), (1 + q, 1)]).value.norm())
            .collect();
        for w in mags.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-9);
        }
    }
}
