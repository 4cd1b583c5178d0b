//! Seedable, platform-stable random source.
//!
//! Wraps ChaCha8 and draws integers through 64-bit words only, so the same seed
//! produces the same stream on 32- and 64-bit targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.0.gen_range(0..n as u64) as usize
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    /// Inverse-CDF draw from non-negative weights (not necessarily normalized).
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let target = self.unit() * total;
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                return i;
            }
        }
        // Rounding can leave `target` at the very top; fall back to the last
        // symbol with positive weight.
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    /// Inverse-CDF draw from integer counts.
    pub fn categorical_counts(&mut self, counts: &[u64]) -> usize {
        let total: u64 = counts.iter().sum();
        debug_assert!(total > 0);
        let mut target = self.0.gen_range(0..total);
        for (i, &c) in counts.iter().enumerate() {
            if target < c {
                return i;
            }
            target -= c;
        }
        unreachable!("target below total count")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.index(17), b.index(17));
            assert_eq!(a.unit().to_bits(), b.unit().to_bits());
        }
    }

    #[test]
    fn categorical_skips_zero_weights() {
        let mut rng = SeededRng::new(1);
        for _ in 0..1000 {
            let i = rng.categorical(&[0.0, 1.0, 0.0, 2.0]);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn categorical_counts_frequencies() {
        let mut rng = SeededRng::new(3);
        let mut hits = [0usize; 3];
        let n = 60_000;
        for _ in 0..n {
            hits[rng.categorical_counts(&[1, 2, 3])] += 1;
        }
        for (h, p) in hits.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            let f = *h as f64 / n as f64;
            assert!((f - p).abs() < 0.01, "{f} vs {p}");
        }
    }
}
