//! Compensated summation helpers shared by the sampler and the simulator.

/// Kahan-compensated accumulator. Good to ~1 ulp over millions of adds,
/// which matters for time integrals over long horizons.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Kahan {
        Kahan::default()
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

/// One compensated-summation step on externally stored state.
#[inline]
pub fn compensated_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Compensated sum of a sequence.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Kahan::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_beats_naive_summation() {
        // 1 + many tiny values: naive summation loses the tail entirely
        let tiny = 1e-16;
        let count = 10_000_000_usize;
        let mut naive = 1.0f64;
        let mut k = Kahan::new();
        k.add(1.0);
        for _ in 0..count {
            naive += tiny;
            k.add(tiny);
        }
        let exact = 1.0 + tiny * count as f64;
        assert_eq!(naive, 1.0);
        assert!((k.value() - exact).abs() < 1e-12);
    }

    #[test]
    fn sums_slices() {
        assert_eq!(kahan_sum([1.0, 2.0, 3.0]), 6.0);
        assert_eq!(kahan_sum([]), 0.0);
    }
}
