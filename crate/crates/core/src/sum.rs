//! Compensated (Neumaier) summation for long probability accumulations.

/// Running Neumaier sum. Accumulation error stays O(eps) regardless of the
/// number of addends, which the index computations rely on when folding
/// hundreds of thousands of joint-state probabilities.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub(crate) fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Accumulator::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_small_addends() {
        // 1 + 1e-16 * 10_000 loses the tail under naive f64 summation.
        let mut acc = Accumulator::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        let expected = 1.0 + 1e-12;
        assert!((acc.value() - expected).abs() < 1e-15);
    }

    #[test]
    fn sums_slice() {
        assert_eq!(sum([0.25, 0.25, 0.5]), 1.0);
    }
}
