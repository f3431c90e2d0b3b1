//! Small numeric helpers shared across the crate.
//!
//! All reductions that feed reported quantities go through `NeumaierSum` so
//! results do not depend on incidental evaluation order and survive meshes
//! with hundreds of thousands of terms without drift.

/// Compensated accumulator (Neumaier's variant of Kahan summation).
#[derive(Clone, Copy, Debug, Default)]
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

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = NeumaierSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

/// Composite Simpson rule with `2 * half_steps` panels. Exact enough for the
/// short smooth integrands used by the blended-metric volume element.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, half_steps: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let n = 2 * half_steps.max(1);
    let h = (b - a) / n as f64;
    let mut acc = NeumaierSum::new();
    acc.add(f(a));
    acc.add(f(b));
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc.add(w * f(a + i as f64 * h));
    }
    acc.value() * h / 3.0
}

/// Least-squares slope of y against x. Used to fit energy growth laws.
pub fn linear_fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / n;
    let my = compensated_sum(ys.iter().copied()) / n;
    let mut num = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    for (&x, &y) in xs.iter().zip(ys) {
        num.add((x - mx) * (y - my));
        den.add((x - mx) * (x - mx));
    }
    num.value() / den.value()
}
