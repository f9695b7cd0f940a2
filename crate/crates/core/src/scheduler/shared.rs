//! Centralised dispatch used by the static, dynamic and guided baselines.

use super::range::IterationRange;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Block `i` of the standard contiguous partition of `[0, n)` into `p`
/// blocks of `⌈n/p⌉` iterations. Trailing blocks may be short or empty.
pub fn static_partition(n: usize, p: usize, i: usize) -> IterationRange {
    debug_assert!(i < p);
    let block = n.div_ceil(p.max(1));
    let begin = (i * block).min(n);
    let end = ((i + 1) * block).min(n);
    IterationRange::new(begin, end)
}

/// Claim the next `chunk` iterations from a shared counter.
pub fn dynamic_next(counter: &AtomicUsize, chunk: usize, n: usize) -> Option<IterationRange> {
    let old = counter.fetch_add(chunk, Ordering::Relaxed);
    if old >= n {
        return None;
    }
    Some(IterationRange::new(old, (old + chunk).min(n)))
}

/// Claim `max(remaining / p, min_chunk)` iterations (clamped to what is
/// left) from a shared counter.
pub fn guided_next(
    counter: &AtomicUsize,
    min_chunk: usize,
    n: usize,
    p: usize,
) -> Option<IterationRange> {
    let mut current = counter.load(Ordering::Relaxed);
    loop {
        if current >= n {
            return None;
        }
        let remaining = n - current;
        let grant = (remaining / p.max(1)).max(min_chunk).min(remaining);
        match counter.compare_exchange_weak(
            current,
            current + grant,
            Ordering::Relaxed,
            Ordering::Relaxed,
        ) {
            Ok(_) => return Some(IterationRange::new(current, current + grant)),
            Err(actual) => current = actual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn static_examples() {
        assert_eq!(static_partition(10, 3, 0), IterationRange::new(0, 4));
        assert_eq!(static_partition(10, 3, 1), IterationRange::new(4, 8));
        assert_eq!(static_partition(10, 3, 2), IterationRange::new(8, 10));
        assert!(static_partition(0, 4, 3).is_empty());
    }

    #[test]
    fn dynamic_examples() {
        let c = AtomicUsize::new(0);
        assert_eq!(dynamic_next(&c, 3, 10), Some(IterationRange::new(0, 3)));
        c.store(9, Ordering::Relaxed);
        assert_eq!(dynamic_next(&c, 3, 10), Some(IterationRange::new(9, 10)));
        c.store(10, Ordering::Relaxed);
        assert_eq!(dynamic_next(&c, 3, 10), None);
    }

    #[test]
    fn guided_examples() {
        let c = AtomicUsize::new(0);
        assert_eq!(guided_next(&c, 1, 100, 4).map(|r| r.len()), Some(25));
        let c = AtomicUsize::new(97);
        assert_eq!(guided_next(&c, 2, 100, 4).map(|r| r.len()), Some(2));
        let c = AtomicUsize::new(100);
        assert_eq!(guided_next(&c, 1, 100, 4), None);
    }

    #[test]
    fn guided_decays_without_interference() {
        let c = AtomicUsize::new(0);
        let mut last = usize::MAX;
        let mut covered = 0;
        while let Some(r) = guided_next(&c, 1, 10_000, 7) {
            assert!(r.len() <= last);
            last = r.len();
            covered += r.len();
        }
        assert_eq!(covered, 10_000);
    }

    proptest! {
        #[test]
        fn static_blocks_cover_disjointly(n in 0usize..5_000, p in 1usize..40) {
            let mut next = 0;
            for i in 0..p {
                let r = static_partition(n, p, i);
                prop_assert_eq!(r.begin, next);
                next = r.end;
            }
            prop_assert_eq!(next, n);
        }
    }
}
