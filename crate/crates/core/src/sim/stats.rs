/// Running mean and variance (Welford's update).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fold in one sample: `mean' = mean + (x - mean)/n`, then
    /// `m2' = m2 + (x - mean)(x - mean')`.
    pub fn push(&mut self, x: f64) -> &mut Self {
        self.count += 1;
        let old_mean = self.mean;
        self.mean += (x - old_mean) / self.count as f64;
        self.m2 += (x - old_mean) * (x - self.mean);
        self
    }

    pub fn with_sample(mut self, x: f64) -> Self {
        self.push(x);
        self
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Sample variance `m2 / (n - 1)`; absent for fewer than two samples.
    pub fn variance(&self) -> Option<f64> {
        (self.count > 1).then(|| self.m2 / (self.count - 1) as f64)
    }
}

impl Extend<f64> for RunningStats {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::new();
        s.extend(iter);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_pass(xs: &[f64]) -> f64 {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    }

    #[test]
    fn constant_stream() {
        let s: RunningStats = [2.0, 2.0, 2.0].into_iter().collect();
        assert_eq!(s.mean(), Some(2.0));
        assert_eq!(s.variance(), Some(0.0));
    }

    #[test]
    fn one_to_four() {
        let s: RunningStats = [1.0, 2.0, 3.0, 4.0].into_iter().collect();
        assert_eq!(s.mean(), Some(2.5));
        assert!((s.variance().unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!((two_pass(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn variance_needs_two_samples() {
        assert_eq!(RunningStats::new().variance(), None);
        assert_eq!(RunningStats::new().mean(), None);
        assert_eq!(RunningStats::new().with_sample(3.0).variance(), None);
        assert_eq!(RunningStats::new().with_sample(3.0).mean(), Some(3.0));
    }

    proptest! {
        #[test]
        fn matches_two_pass(xs in prop::collection::vec(0.0f64..1e6, 2..2000)) {
            let s: RunningStats = xs.iter().copied().collect();
            let oracle = two_pass(&xs);
            let got = s.variance().unwrap();
            prop_assert!((got - oracle).abs() <= 1e-9 * oracle.abs().max(1e-300) || (got - oracle).abs() < 1e-6);
            prop_assert!(s.m2() >= 0.0);
        }
    }
}
