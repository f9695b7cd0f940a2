//! Calibrated busy work for the synthetic benchmark.

use std::hint::black_box;
use std::sync::OnceLock;
use std::time::Instant;

/// Burn `units` steps of a dependent xorshift chain and return the final
/// state. Each step depends on the previous one, so the loop can neither be
/// vectorised nor removed when the result is observed.
#[inline(never)]
pub fn spin_work(units: u64) -> u64 {
    let mut x = black_box(0x9e37_79b9_7f4a_7c15u64 ^ units);
    for _ in 0..units {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
    }
    black_box(x)
}

/// Nanoseconds per spin unit on this machine, measured once per process.
pub fn ns_per_unit() -> f64 {
    static CALIBRATION: OnceLock<f64> = OnceLock::new();
    *CALIBRATION.get_or_init(|| {
        const UNITS: u64 = 2_000_000;
        spin_work(UNITS / 10);
        (0..5)
            .map(|_| {
                let t = Instant::now();
                black_box(spin_work(UNITS));
                t.elapsed().as_nanos() as f64 / UNITS as f64
            })
            .fold(f64::INFINITY, f64::min)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Duration;

    fn best_of(units: u64, tries: usize) -> Duration {
        (0..tries)
            .map(|_| {
                let t = Instant::now();
                black_box(spin_work(units));
                t.elapsed()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn zero_units_is_free() {
        let t = Instant::now();
        spin_work(0);
        assert!(t.elapsed() < Duration::from_millis(1));
    }

    #[test]
    fn calibration_is_positive_and_stable() {
        let a = ns_per_unit();
        assert!(a > 0.0 && a < 100.0, "{a} ns/unit");
        assert_eq!(a, ns_per_unit());
    }

    #[test]
    fn duration_scales_linearly() {
        // a few milliseconds per sample keeps scheduler noise small
        let u = (3_000_000.0 / ns_per_unit()) as u64;
        let one = best_of(u, 7).as_secs_f64();
        let two = best_of(2 * u, 7).as_secs_f64();
        let ratio = two / one;
        assert!((ratio - 2.0).abs() <= 0.2, "ratio {ratio}");
    }

    #[test]
    fn results_differ_with_units() {
        assert_ne!(spin_work(10), spin_work(11));
    }
}
