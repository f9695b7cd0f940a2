use super::WorkloadError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

/// Sorting order of an exponential cost array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    /// Unsorted draws spread evenly over `[1, 2β - 1]`.
    Linear,
    ExpIncreasing,
    ExpDecreasing,
}

impl Distribution {
    pub fn name(self) -> &'static str {
        match self {
            Distribution::Linear => "linear",
            Distribution::ExpIncreasing => "exp-inc",
            Distribution::ExpDecreasing => "exp-dec",
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Distribution::Linear),
            "exp-inc" => Ok(Distribution::ExpIncreasing),
            "exp-dec" => Ok(Distribution::ExpDecreasing),
            other => Err(WorkloadError::InvalidParameter(format!("unknown distribution `{other}`"))),
        }
    }
}

/// Per-iteration work units for the synthetic benchmark, with the
/// parameters that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub costs: Vec<u64>,
    pub distribution: Distribution,
    pub beta: f64,
    pub seed: u64,
}

/// `n` draws from the exponential distribution with mean `beta` via the
/// inverse CDF `-β·ln(1-u)`, rounded up to at least 1 and sorted.
pub fn gen_exponential_workload(
    n: usize,
    beta: f64,
    order: Order,
    seed: u64,
) -> Result<WorkloadSpec, WorkloadError> {
    check(n, beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut costs: Vec<u64> = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            let x = -beta * (1.0 - u).ln();
            (x.ceil() as u64).max(1)
        })
        .collect();
    costs.sort_unstable();
    let distribution = match order {
        Order::Increasing => Distribution::ExpIncreasing,
        Order::Decreasing => {
            costs.reverse();
            Distribution::ExpDecreasing
        }
    };
    Ok(WorkloadSpec { costs, distribution, beta, seed })
}

/// `n` unsorted draws spread evenly over `[1, 2β - 1]` (mean `β`).
pub fn gen_linear_workload(n: usize, beta: f64, seed: u64) -> Result<WorkloadSpec, WorkloadError> {
    check(n, beta)?;
    let hi = ((2.0 * beta).round() as u64).saturating_sub(1).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs = (0..n).map(|_| rng.gen_range(1..=hi)).collect();
    Ok(WorkloadSpec { costs, distribution: Distribution::Linear, beta, seed })
}

fn check(n: usize, beta: f64) -> Result<(), WorkloadError> {
    if n == 0 {
        return Err(WorkloadError::InvalidParameter("workload needs at least one iteration".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(WorkloadError::InvalidParameter(format!("beta must be positive (got {beta})")));
    }
    Ok(())
}

impl WorkloadSpec {
    pub fn generate(
        distribution: Distribution,
        n: usize,
        beta: f64,
        seed: u64,
    ) -> Result<Self, WorkloadError> {
        match distribution {
            Distribution::Linear => gen_linear_workload(n, beta, seed),
            Distribution::ExpIncreasing => gen_exponential_workload(n, beta, Order::Increasing, seed),
            Distribution::ExpDecreasing => gen_exponential_workload(n, beta, Order::Decreasing, seed),
        }
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.costs.iter().sum()
    }

    /// Multiply every cost by `factor`, rounding up and keeping costs ≥ 1.
    /// Ordering is preserved because the map is monotone.
    pub fn scaled(&self, factor: f64) -> WorkloadSpec {
        let costs = self
            .costs
            .iter()
            .map(|&c| ((c as f64 * factor).ceil() as u64).max(1))
            .collect();
        WorkloadSpec { costs, ..self.clone() }
    }

    /// Summed cost of each static block for `p` threads.
    pub fn block_costs(&self, p: usize) -> Vec<u64> {
        let n = self.costs.len();
        (0..p)
            .map(|i| {
                let r = crate::scheduler::static_partition(n, p, i);
                self.costs[r.begin..r.end].iter().sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(gen_exponential_workload(0, 1.0, Order::Increasing, 1).is_err());
        assert!(gen_exponential_workload(10, 0.0, Order::Increasing, 1).is_err());
        assert!(gen_exponential_workload(10, -3.0, Order::Decreasing, 1).is_err());
        assert!(gen_linear_workload(10, f64::NAN, 1).is_err());
    }

    #[test]
    fn sample_mean_tracks_beta() {
        let spec = gen_exponential_workload(100_000, 100_000.0, Order::Increasing, 42).unwrap();
        let mean = spec.total() as f64 / spec.len() as f64;
        assert!((mean / 100_000.0 - 1.0).abs() < 0.03, "mean {mean}");
    }

    #[test]
    fn million_draws_span_six_decades() {
        let spec = gen_exponential_workload(1_000_000, 1_000_000.0, Order::Decreasing, 3).unwrap();
        let max = spec.costs[0];
        let min = *spec.costs.last().unwrap();
        assert!(min >= 1 && min <= 10, "min {min}");
        assert!(max > 5_000_000 && max < 30_000_000, "max {max}");
        let ratio = max as f64 / min as f64;
        assert!(ratio > 5e5, "ratio {ratio}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = WorkloadSpec::generate(Distribution::ExpDecreasing, 1000, 50.0, 9).unwrap();
        let b = WorkloadSpec::generate(Distribution::ExpDecreasing, 1000, 50.0, 9).unwrap();
        let c = WorkloadSpec::generate(Distribution::ExpDecreasing, 1000, 50.0, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.costs, c.costs);
    }

    #[test]
    fn static_blocks_expose_imbalance() {
        let p = 8;
        let dec = gen_exponential_workload(100_000, 100_000.0, Order::Decreasing, 5).unwrap();
        let blocks = dec.block_costs(p);
        let mean = blocks.iter().sum::<u64>() as f64 / p as f64;
        let max = *blocks.iter().max().unwrap() as f64;
        // the first 1/8 of a sorted exponential sample holds ~ (1 + ln 8)/8 of the mass
        assert!(max / mean > 2.5, "imbalance {}", max / mean);
        assert_eq!(blocks[0] as f64, max);

        let lin = gen_linear_workload(100_000, 100_000.0, 5).unwrap();
        let blocks = lin.block_costs(p);
        let mean = blocks.iter().sum::<u64>() as f64 / p as f64;
        let max = *blocks.iter().max().unwrap() as f64;
        assert!(max / mean < 1.03, "imbalance {}", max / mean);
    }

    #[test]
    fn scaling_keeps_order_and_floor() {
        let spec = gen_exponential_workload(1000, 1000.0, Order::Decreasing, 1).unwrap();
        let s = spec.scaled(0.01);
        assert!(s.costs.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.costs.iter().all(|&c| c >= 1));
    }

    proptest! {
        #[test]
        fn sorted_and_positive(n in 1usize..2000, beta in 0.5f64..1e6, seed in any::<u64>(), inc in any::<bool>()) {
            let order = if inc { Order::Increasing } else { Order::Decreasing };
            let spec = gen_exponential_workload(n, beta, order, seed).unwrap();
            prop_assert_eq!(spec.len(), n);
            prop_assert!(spec.costs.iter().all(|&c| c >= 1));
            if inc {
                prop_assert!(spec.costs.windows(2).all(|w| w[0] <= w[1]));
            } else {
                prop_assert!(spec.costs.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }
}
