//! Deterministic summation and counter-based random angles.
//!
//! Everything here is chosen for bitwise reproducibility: pairwise (tree)
//! reduction with a fixed shape, and index-keyed random points that do not
//! depend on evaluation order or worker count.

use crate::C64;

/// Chunk width for the fixed-shape parallel reduction tree.
pub const REDUCE_CHUNK: usize = 4096;

/// Pairwise (tree) sum of a complex slice.
///
/// Error grows like O(log n)·ulp instead of O(n)·ulp for a left fold, and
/// the reduction shape depends only on the length, never on thread count.
pub fn pairwise_sum(values: &[C64]) -> C64 {
    if values.len() <= 8 {
        let mut acc = C64::new(0.0, 0.0);
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of a real slice.
pub fn pairwise_sum_f64(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_f64(&values[..mid]) + pairwise_sum_f64(&values[mid..])
}

/// Fixed-shape parallel map-reduce over index chunks.
///
/// The slice `0..count` is split into [`REDUCE_CHUNK`]-sized chunks; `map`
/// produces each chunk's partial sum and the partials are combined in index
/// order by a pairwise tree. Output is bitwise independent of worker count.
pub fn par_chunk_sums<F>(count: usize, map: F) -> C64
where
    F: Fn(std::ops::Range<usize>) -> C64 + Sync,
{
    use rayon::prelude::*;
    let n_chunks = count.div_ceil(REDUCE_CHUNK);
    let partials: Vec<C64> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(count);
            map(lo..hi)
        })
        .collect();
    pairwise_sum(&partials)
}

/// Kahan (compensated) accumulator for long sequential sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// SplitMix64 avalanche; `point j` is a pure function of `(seed, j)`.
#[inline]
pub fn splitmix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform angle in [0, 2π) keyed by (seed, index).
#[inline]
pub fn angle_at(seed: u64, index: u64) -> f64 {
    let bits = splitmix64(seed, index) >> 11; // 53 random bits
    (bits as f64 / (1u64 << 53) as f64) * std::f64::consts::TAU
}
