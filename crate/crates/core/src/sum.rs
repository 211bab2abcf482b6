//! Compensated (Kahan–Neumaier) accumulators.
//!
//! Every reduction in this crate goes through these types and always in a
//! fixed, caller-determined order, so results are bit-reproducible.

use std::ops::AddAssign;

use num_complex::Complex64;

#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Componentwise compensated sum of complex values.
#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> Complex64 {
        Complex64::new(self.re.sum(), self.im.sum())
    }
}

impl AddAssign<Complex64> for ComplexSum {
    #[inline]
    fn add_assign(&mut self, z: Complex64) {
        self.re += z.re;
        self.im += z.im;
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for z in iter {
            acc += z;
        }
        acc
    }
}
