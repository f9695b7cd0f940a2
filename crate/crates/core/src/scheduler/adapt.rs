//! Chunk sizing arithmetic for the adaptive scheduler.
//!
//! Each worker keeps a divisor `d`; its next chunk is the current queue
//! length divided by `d`. After every completed chunk the worker compares its
//! completed-iteration count `k` against the mean over all workers and moves
//! `d` by a factor of two when it falls outside the band `mean ± ε·mean`.

use super::policy::Polarity;

/// Where a worker's completed-iteration count sits relative to its peers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoadClass {
    Low,
    Normal,
    High,
}

/// Size of the next local chunk: `remaining / d`, clamped to `[1, remaining]`.
///
/// Returns 0 only for an empty queue.
#[inline]
pub fn next_chunk_size(remaining: usize, d: usize) -> usize {
    if remaining == 0 {
        return 0;
    }
    (remaining / d.max(1)).clamp(1, remaining)
}

/// Classify `k_self` against the mean of `k_all` (which includes `k_self`).
///
/// `Low` when `k_self < mean - δ`, `High` when `k_self > mean + δ` with
/// `δ = ε·mean`; ties at either edge are `Normal`. The comparison is carried
/// out as `k_self·p` against `Σk·(1 ± ε)` so it is exact for integer inputs
/// whenever `ε` is a dyadic fraction.
pub fn classify_load(k_self: u64, k_all: &[u64], epsilon: f64) -> LoadClass {
    if k_all.is_empty() {
        return LoadClass::Normal;
    }
    let total: u64 = k_all.iter().sum();
    let total = total as f64;
    let scaled = k_self as f64 * k_all.len() as f64;
    let delta = epsilon * total;
    if scaled < total - delta {
        LoadClass::Low
    } else if scaled > total + delta {
        LoadClass::High
    } else {
        LoadClass::Normal
    }
}

/// New chunk divisor after a classification, clamped to `[1, max_d]`.
pub fn adapt_divisor(d: usize, class: LoadClass, polarity: Polarity, max_d: usize) -> usize {
    let max_d = max_d.max(1);
    let grow = || d.saturating_mul(2).min(max_d);
    let shrink = || (d / 2).max(1);
    let next = match (class, polarity) {
        (LoadClass::Normal, _) => d,
        (LoadClass::Low, Polarity::FastGrows) | (LoadClass::High, Polarity::FastShrinks) => grow(),
        (LoadClass::High, Polarity::FastGrows) | (LoadClass::Low, Polarity::FastShrinks) => shrink(),
    };
    next.clamp(1, max_d)
}

/// Divisor a thief adopts after a successful steal: floor average, at least 1.
#[inline]
pub fn averaged_divisor(d_thief: usize, d_victim: usize) -> usize {
    ((d_thief + d_victim) / 2).max(1)
}

/// Completed count a thief adopts after a successful steal.
#[inline]
pub fn averaged_count(k_thief: u64, k_victim: u64) -> u64 {
    (k_thief + k_victim) / 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chunk_size_examples() {
        assert_eq!(next_chunk_size(36, 3), 12);
        assert_eq!(next_chunk_size(5, 100), 1);
        assert_eq!(next_chunk_size(0, 4), 0);
        // 1,000,000 iterations on 28 threads: ~35,715 per queue, ~1,275 per first chunk.
        let per_queue = 1_000_000usize.div_ceil(28);
        assert_eq!(per_queue, 35_715);
        assert_eq!(next_chunk_size(per_queue, 28), 1_275);
        // three threads with nine iterations each start with chunks of three
        assert_eq!(next_chunk_size(9, 3), 3);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_load(10, &[10, 10, 10, 10], 0.25), LoadClass::Normal);
        // mean 12.5, δ 3.125
        assert_eq!(classify_load(5, &[5, 15, 15, 15], 0.25), LoadClass::Low);
        // mean 11, δ 2.75
        assert_eq!(classify_load(20, &[20, 8, 8, 8], 0.25), LoadClass::High);
    }

    #[test]
    fn boundary_ties_are_normal() {
        // mean 8, δ 2: k = 6 and k = 10 sit exactly on the band edges
        assert_eq!(classify_load(6, &[6, 10, 8, 8], 0.25), LoadClass::Normal);
        assert_eq!(classify_load(10, &[6, 10, 8, 8], 0.25), LoadClass::Normal);
    }

    #[test]
    fn adaptation_examples() {
        let fg = Polarity::FastGrows;
        assert_eq!(adapt_divisor(4, LoadClass::Low, fg, 1000), 8);
        assert_eq!(adapt_divisor(4, LoadClass::High, fg, 1000), 2);
        assert_eq!(adapt_divisor(1, LoadClass::High, fg, 1000), 1);
        assert_eq!(adapt_divisor(4, LoadClass::Normal, fg, 1000), 4);
        assert_eq!(adapt_divisor(4, LoadClass::High, Polarity::FastShrinks, 1000), 8);
        assert_eq!(adapt_divisor(4, LoadClass::Low, Polarity::FastShrinks, 1000), 2);
        // upper clamp at n
        assert_eq!(adapt_divisor(6, LoadClass::Low, fg, 10), 10);
    }

    #[test]
    fn steal_averages() {
        assert_eq!(averaged_divisor(4, 8), 6);
        assert_eq!(averaged_count(100, 200), 150);
        assert_eq!(averaged_divisor(1, 1), 1);
        assert_eq!(averaged_divisor(1, 2), 1);
    }

    proptest! {
        #[test]
        fn classification_partitions(k_self in 0u64..10_000, others in prop::collection::vec(0u64..10_000, 0..15), eps in 0.01f64..0.99) {
            let mut all = others.clone();
            all.push(k_self);
            let total: u64 = all.iter().sum();
            let mean = total as f64 / all.len() as f64;
            let delta = eps * mean;
            let class = classify_load(k_self, &all, eps);
            let k = k_self as f64;
            // exactly one class holds, and it agrees with the band
            match class {
                LoadClass::Low => prop_assert!(k <= mean - delta + 1e-9 * mean.max(1.0)),
                LoadClass::High => prop_assert!(k >= mean + delta - 1e-9 * mean.max(1.0)),
                LoadClass::Normal => prop_assert!(k >= mean - delta - 1e-9 * mean.max(1.0) && k <= mean + delta + 1e-9 * mean.max(1.0)),
            }
        }

        #[test]
        fn classification_is_scale_invariant(k_self in 1u64..5_000, others in prop::collection::vec(0u64..5_000, 1..15), c in 1u64..1000, eps_idx in 0usize..4) {
            let eps = [0.25, 0.5, 0.125, 0.375][eps_idx];
            let mut all = others.clone();
            all.push(k_self);
            let scaled: Vec<u64> = all.iter().map(|k| k * c).collect();
            prop_assert_eq!(classify_load(k_self * c, &scaled, eps), classify_load(k_self, &all, eps));
        }

        #[test]
        fn divisor_stays_clamped(start in 1usize..64, n in 1usize..10_000, steps in prop::collection::vec((0u8..3, any::<bool>(), 1usize..64), 0..64)) {
            let mut d = start.min(n);
            for (class, figure, other_d) in steps {
                let class = [LoadClass::Low, LoadClass::Normal, LoadClass::High][class as usize];
                let polarity = if figure { Polarity::FastShrinks } else { Polarity::FastGrows };
                d = if other_d % 5 == 0 { averaged_divisor(d, other_d.min(n)) } else { adapt_divisor(d, class, polarity, n) };
                prop_assert!(d >= 1 && d <= n);
            }
        }
    }
}
