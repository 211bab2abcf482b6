//! Fixed workloads shared by the benchmarks.

use eulerzeta_core::Complex64;

/// Evaluation points on and off the real axis, left and right of the strip.
pub const POINTS: [(f64, f64); 4] = [(2.0, 0.0), (0.5, 14.134725), (-2.5, 3.0), (3.0, 20.0)];

pub fn points() -> impl Iterator<Item = (String, Complex64)> {
    POINTS.iter().map(|&(re, im)| (format!("{re},{im}"), Complex64::new(re, im)))
}
