//! Scalar helpers and an error-free accumulator.

/// Logistic function, stable for large |z|.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = 134_217_729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Dekker product: `a * b == p + e` exactly (barring overflow).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

/// Compensated (double-double) sum.
///
/// Products are split error-free before accumulation, so `k * x` added once and
/// `x` added `k` times land on the same rounded total except in vanishingly
/// rare near-halfway cases. Gradient statistics in the tree learner rely on this
/// to make integer weights equivalent to duplicated rows.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExactSum {
    hi: f64,
    lo: f64,
}

impl ExactSum {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    #[inline]
    pub fn add_product(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add(p);
        self.lo += e;
    }

    #[inline]
    pub fn add_sum(&mut self, other: &ExactSum) {
        self.add(other.hi);
        self.lo += other.lo;
    }

    #[inline]
    pub fn sub_sum(&mut self, other: &ExactSum) {
        self.add(-other.hi);
        self.lo -= other.lo;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Sum of `a[i] * b[i]` through [`ExactSum`].
pub fn exact_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = ExactSum::ZERO;
    for (&x, &y) in a.iter().zip(b) {
        acc.add_product(x, y);
    }
    acc.value()
}
