//! Compensated (Neumaier) accumulation for long series and matrix reductions.

/// Neumaier variant of Kahan summation. Tracks a running compensation term so
/// that adding many small terms to a large partial sum loses no low-order
/// bits. The summation order is whatever the caller feeds in, so results are
/// reproducible whenever the input order is.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of `f64` terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_tail() {
        // 1e16 + 1 + ... + 1 - 1e16 loses the ones under naive summation.
        let mut acc = NeumaierSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }

    #[test]
    fn matches_naive_on_benign_input() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        let comp = compensated_sum(xs.iter().copied());
        assert!((naive - comp).abs() < 1e-12);
    }
}
