//! `ζ_(c)(s) = (1 - c^{1-s}) ζ(s)` and `ζ(s)` by the depth-`k` continuation,
//! with rigorous truncation bounds over whole blocks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diffcore::{coefficient_a, int_pow_neg, pochhammer, pochhammer_with_derivative, Modulus};
use crate::error::{Error, Result};
use crate::sum::ComplexSum;
use crate::transform::{transform_any_depth, LogPowerSequence, PowerSequence, Sequence};

/// Largest block count the planner will pick.
pub const MAX_BLOCKS: u64 = 1 << 26;

/// Below this `|1 - c^{1-s}|` the other modulus is used.
pub const ETA_FACTOR_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPlan {
    pub c: Modulus,
    pub k: u32,
    /// Block count `N`; the tail is truncated after `n = cN`.
    pub blocks: u64,
    /// Absolute target for `ζ_(c)`.
    pub tol: f64,
}

impl EvalPlan {
    pub fn new(c: Modulus, k: u32, blocks: u64, tol: f64) -> Result<Self> {
        if blocks == 0 {
            return Err(Error::InvalidParameter("block count must be >= 1".into()));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        Ok(EvalPlan { c, k, blocks, tol })
    }
}

/// `Conditional` marks the strip `-k < Re(s) <= 1 - k`, where the transformed
/// series converges only after grouping into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Absolute,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvaluation {
    pub value: Complex64,
    /// `truncation_bound + rounding_estimate`.
    pub est_error: f64,
    pub truncation_bound: f64,
    pub rounding_estimate: f64,
    pub plan: EvalPlan,
    pub terms_used: u64,
    pub regime: Regime,
}

fn check_region(s: Complex64, k: u32) -> Result<Regime> {
    let kf = k as f64;
    let bound = if k == 0 { 0.0 } else { -kf };
    if s.re.is_nan() || s.re <= bound || !s.is_finite() {
        return Err(Error::Region { s, bound, context: "continuation needs Re(s) > -k (Re(s) > 0 at depth 0)" });
    }
    Ok(if s.re > 1.0 - kf { Regime::Absolute } else { Regime::Conditional })
}

/// `Σ_{m>=N} m^{-p}` and `Σ_{m>=N} m^{-p} log m`, bounded above, for `p > 1`.
fn power_tail_sums(blocks: u64, p: f64) -> (f64, f64) {
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut m = blocks;
    // m^{-p} log m decreases from m = 3 on
    while m < 3 {
        let mf = m as f64;
        s0 += mf.powf(-p);
        s1 += mf.powf(-p) * mf.ln();
        m += 1;
    }
    let mf = m as f64;
    let lead = mf.powf(-p);
    let integral = mf.powf(1.0 - p) / (p - 1.0);
    s0 += lead + integral;
    s1 += lead * mf.ln() + integral * (mf.ln() + 1.0 / (p - 1.0));
    (s0, s1)
}

/// Bound on `|ζ_(c)(s) - value|` after `N` blocks at depth `k`.
///
/// Block `m + 1` of the tail telescopes to `Δ_c^{k+1} (cm)^{-s}`, so the
/// remainder is `c^{-k} Σ_{m>=N} |Δ_c^{k+1} (cm)^{-s}|`.
pub fn truncation_bound(c: Modulus, k: u32, s: Complex64, blocks: u64) -> Result<f64> {
    check_region(s, k)?;
    if blocks == 0 {
        return Err(Error::InvalidParameter("block count must be >= 1".into()));
    }
    let big_k = k + 1;
    let p = s.re + big_k as f64;
    let cf = c.as_f64();
    let (s0, _) = power_tail_sums(blocks, p);
    Ok(cf.powi(-(k as i32)) * pochhammer(s, big_k).norm() * c.spread().powi(big_k as i32) * cf.powf(-p) * s0)
}

/// As [`truncation_bound`] for `ζ'_(c)(s)`.
pub fn derivative_truncation_bound(c: Modulus, k: u32, s: Complex64, blocks: u64) -> Result<f64> {
    check_region(s, k)?;
    if blocks == 0 {
        return Err(Error::InvalidParameter("block count must be >= 1".into()));
    }
    let big_k = k + 1;
    let p = s.re + big_k as f64;
    let cf = c.as_f64();
    let (poch, dpoch) = pochhammer_with_derivative(s, big_k);
    let (s0, s1) = power_tail_sums(blocks, p);
    // log(cm + cK) <= log(c(1 + K)) + log m
    let log_shift = (cf * (1.0 + big_k as f64)).ln();
    let sum = (dpoch.norm() + poch.norm() * log_shift) * s0 + poch.norm() * s1;
    Ok(cf.powi(-(k as i32)) * c.spread().powi(big_k as i32) * cf.powf(-p) * sum)
}

fn evaluate<S: Sequence>(s: Complex64, plan: EvalPlan, seq: S, bound: f64) -> Result<SeriesEvaluation> {
    let regime = check_region(s, plan.k)?;
    let ts = transform_any_depth(plan.c, plan.k, seq)?;
    let partial = ts.sum_blocked(plan.blocks)?;
    let rounding = partial.round_err + 4.0 * f64::EPSILON * partial.value.norm();
    Ok(SeriesEvaluation {
        value: partial.value,
        est_error: bound + rounding,
        truncation_bound: bound,
        rounding_estimate: rounding,
        plan,
        terms_used: partial.terms_used,
        regime,
    })
}

/// `ζ_(c)(s)` by the depth-`k` continuation, valid for `Re(s) > -k`
/// (`Re(s) > 0` at `k = 0`). Analytic at `s = 1`, where it equals `log c`.
pub fn zeta_c(s: Complex64, plan: EvalPlan) -> Result<SeriesEvaluation> {
    let bound = truncation_bound(plan.c, plan.k, s, plan.blocks)?;
    evaluate(s, plan, PowerSequence { s }, bound)
}

/// `ζ'_(c)(s)` by the same continuation applied to `b_n = -n^{-s} log n`.
pub fn zeta_c_derivative(s: Complex64, plan: EvalPlan) -> Result<SeriesEvaluation> {
    let bound = derivative_truncation_bound(plan.c, plan.k, s, plan.blocks)?;
    evaluate(s, plan, LogPowerSequence { s }, bound)
}

fn smallest_blocks(tol: f64, bound: impl Fn(u64) -> Result<f64>) -> Result<u64> {
    let target = tol / 2.0;
    if bound(1)? <= target {
        return Ok(1);
    }
    let mut hi = 2;
    while bound(hi)? > target {
        if hi >= MAX_BLOCKS {
            return Err(Error::InvalidParameter(format!("tolerance {tol:e} needs more than {MAX_BLOCKS} blocks")));
        }
        hi = (hi * 2).min(MAX_BLOCKS);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid)? <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Plan with the smallest `N` whose truncation bound is below `tol / 2`
/// (`tol` in units of `ζ_(c)`).
pub fn plan_for(s: Complex64, c: Modulus, k: u32, tol: f64) -> Result<EvalPlan> {
    EvalPlan::new(c, k, 1, tol)?;
    check_region(s, k)?;
    let blocks = smallest_blocks(tol, |n| truncation_bound(c, k, s, n))?;
    EvalPlan::new(c, k, blocks, tol)
}

/// As [`plan_for`] for [`zeta_c_derivative`].
pub fn plan_derivative(s: Complex64, c: Modulus, k: u32, tol: f64) -> Result<EvalPlan> {
    EvalPlan::new(c, k, 1, tol)?;
    check_region(s, k)?;
    let blocks = smallest_blocks(tol, |n| derivative_truncation_bound(c, k, s, n))?;
    EvalPlan::new(c, k, blocks, tol)
}

/// `1 - c^{1-s}`.
pub fn eta_factor(c: Modulus, s: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0) - (Complex64::new(1.0, 0.0) - s).expf(c.as_f64())
}

/// Modulus for `ζ(s)`: 2, or 3 where `1 - 2^{1-s}` is nearly zero.
pub fn choose_modulus(s: Complex64) -> Modulus {
    if eta_factor(Modulus::TWO, s).norm() < ETA_FACTOR_FLOOR {
        Modulus::THREE
    } else {
        Modulus::TWO
    }
}

/// Default depth: two above the smallest `k` with `Re(s) > 1 - k`.
pub fn default_depth(s: Complex64) -> u32 {
    let least = ((1.0 - s.re).floor() + 1.0).max(1.0);
    least as u32 + 2
}

/// Plan for [`zeta`] at absolute tolerance `tol` on `ζ(s)`.
pub fn plan_heuristic(s: Complex64, tol: f64) -> Result<EvalPlan> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole);
    }
    let c = choose_modulus(s);
    plan_for(s, c, default_depth(s), tol * eta_factor(c, s).norm())
}

/// `ζ(s)` with modulus `c` and depth `k` chosen by the caller.
pub fn zeta_with(s: Complex64, c: Modulus, k: u32, tol: f64) -> Result<SeriesEvaluation> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole);
    }
    let factor = eta_factor(c, s);
    if factor.norm() == 0.0 {
        return Err(Error::Domain(format!("1 - {c}^(1-s) vanishes at s = {s}")));
    }
    let plan = plan_for(s, c, k, tol * factor.norm())?;
    let eval = zeta_c(s, plan)?;
    Ok(divide(eval, factor))
}

/// `ζ(s)` from an explicit plan for `ζ_(c)`.
pub fn zeta_planned(s: Complex64, plan: EvalPlan) -> Result<SeriesEvaluation> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole);
    }
    let factor = eta_factor(plan.c, s);
    if factor.norm() == 0.0 {
        return Err(Error::Domain(format!("1 - {}^(1-s) vanishes at s = {s}", plan.c)));
    }
    Ok(divide(zeta_c(s, plan)?, factor))
}

/// `ζ(s)` to absolute tolerance `tol`.
pub fn zeta(s: Complex64, tol: f64) -> Result<SeriesEvaluation> {
    let plan = plan_heuristic(s, tol)?;
    let factor = eta_factor(plan.c, s);
    let eval = zeta_c(s, plan)?;
    Ok(divide(eval, factor))
}

fn divide(eval: SeriesEvaluation, factor: Complex64) -> SeriesEvaluation {
    let scale = factor.norm().recip();
    let value = eval.value / factor;
    let rounding = eval.rounding_estimate * scale + 4.0 * f64::EPSILON * value.norm();
    let truncation = eval.truncation_bound * scale;
    SeriesEvaluation {
        value,
        est_error: truncation + rounding,
        truncation_bound: truncation,
        rounding_estimate: rounding,
        ..eval
    }
}

/// `-Σ_{n<=cN} a_{c,n} n^{-s} log n`, the untransformed derivative series.
pub fn zeta_c_derivative_series(s: Complex64, c: Modulus, blocks: u64) -> Result<Complex64> {
    if s.re.is_nan() || s.re <= 0.0 {
        return Err(Error::Region { s, bound: 0.0, context: "derivative series needs Re(s) > 0" });
    }
    if blocks == 0 {
        return Err(Error::InvalidParameter("block count must be >= 1".into()));
    }
    let mut acc = ComplexSum::new();
    for n in 2..=c.get() as u64 * blocks {
        let nf = n as f64;
        acc += int_pow_neg(n, s) * (-(coefficient_a(c, n) as f64) * nf.ln());
    }
    Ok(acc.sum())
}

/// Derivative of the `k = 1` continuation, written out term by term:
/// `-(1/c)[Σ_{i=2}^{c-1} (c+i-1) i^{-s} log i - (c-1)^2 c^{-s} log c]
///  + (1/c) Σ_{n<=cN} a_{c,n} Σ_{i=1}^{c} a_{c,i} (n+i)^{-s} log(n+i)`.
pub fn zeta_c_derivative_k1(s: Complex64, c: Modulus, blocks: u64) -> Result<Complex64> {
    if s.re.is_nan() || s.re <= -1.0 {
        return Err(Error::Region { s, bound: -1.0, context: "k = 1 derivative continuation needs Re(s) > -1" });
    }
    if blocks == 0 {
        return Err(Error::InvalidParameter("block count must be >= 1".into()));
    }
    let cu = c.get() as u64;
    let cf = cu as f64;
    let log_term = |m: u64| int_pow_neg(m, s) * (m as f64).ln();

    let mut prefix = ComplexSum::new();
    for i in 2..cu {
        prefix += log_term(i) * (cu + i - 1) as f64;
    }
    prefix += log_term(cu) * -(((cu - 1) * (cu - 1)) as f64);

    let mut tail = ComplexSum::new();
    for n in 1..=cu * blocks {
        let mut inner = ComplexSum::new();
        for i in 1..=cu {
            inner += log_term(n + i) * coefficient_a(c, i) as f64;
        }
        tail += inner.sum() * coefficient_a(c, n) as f64;
    }
    Ok((tail.sum() - prefix.sum()) / cf)
}
