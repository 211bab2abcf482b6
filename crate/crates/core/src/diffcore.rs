//! Coefficients `a_{c,n}`, the generalized difference operator `Δ_c^k` as an
//! exact integer stencil, rising factorials and the per-term magnitude bound.
//!
//! `Δ_c^k b_n = Σ_j w_j b_{n+j}` where the weights `w_j` come from the k-fold
//! convolution of the base stencil `(a_{c,1}, …, a_{c,c})` placed at offsets
//! `1..=c`. Weights are kept as big integers; an `f64` copy is cached next to
//! them for the floating evaluation paths.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::ComplexSum;

/// Integer modulus `c >= 2` of the coefficient pattern `a_{c,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Modulus(u32);

impl Modulus {
    pub const TWO: Modulus = Modulus(2);
    pub const THREE: Modulus = Modulus(3);

    pub fn new(c: u32) -> Result<Self> {
        if c < 2 {
            return Err(Error::InvalidModulus(c));
        }
        Ok(Modulus(c))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub(crate) fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// `c(c-1)/2`, the per-application growth factor of the magnitude bound.
    #[inline]
    pub(crate) fn spread(self) -> f64 {
        let c = self.as_f64();
        c * (c - 1.0) / 2.0
    }
}

impl TryFrom<u32> for Modulus {
    type Error = Error;

    fn try_from(c: u32) -> Result<Self> {
        Modulus::new(c)
    }
}

impl From<Modulus> for u32 {
    fn from(c: Modulus) -> u32 {
        c.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `a_{c,n}`: `1 - c` when `c | n`, otherwise `1`.
#[inline]
pub fn coefficient_a(c: Modulus, n: u64) -> i64 {
    debug_assert!(n >= 1, "coefficient index starts at 1");
    if n.is_multiple_of(c.0 as u64) {
        1 - c.0 as i64
    } else {
        1
    }
}

const MOMENT_TERMS: usize = 256;

/// Scaled central moments of a stencil about the midpoint `x̄` of its support.
#[derive(Debug)]
struct Moments {
    /// `Σ_j w_j (j - x̄)^r / r!`, rounded once from the exact rational.
    signed: Vec<f64>,
    /// `Σ_j |w_j| |j - x̄|^r / r!`, the envelope used for truncation control.
    envelope: Vec<f64>,
}

/// A finite linear difference stencil with exact integer weights at
/// consecutive offsets `first ..= first + len - 1`.
#[derive(Debug)]
pub struct Stencil {
    first: u64,
    weights: Vec<BigInt>,
    approx: Vec<f64>,
    /// Number of leading moments `Σ w_j j^r` that vanish identically.
    order: u32,
    moments: OnceLock<Moments>,
}

impl Stencil {
    pub(crate) fn new(first: u64, weights: Vec<BigInt>, order: u32) -> Self {
        let approx = weights.iter().map(|w| w.to_f64().unwrap_or(f64::NAN)).collect();
        Stencil { first, weights, approx, order, moments: OnceLock::new() }
    }

    pub(crate) fn identity() -> Self {
        Stencil::new(0, vec![BigInt::one()], 0)
    }

    /// Smallest offset carrying a weight.
    pub fn first_offset(&self) -> u64 {
        self.first
    }

    /// Largest offset carrying a weight.
    pub fn last_offset(&self) -> u64 {
        self.first + self.weights.len() as u64 - 1
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// `(offset, weight)` pairs in ascending offset order, zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigInt)> + '_ {
        self.weights.iter().enumerate().map(move |(i, w)| (self.first + i as u64, w))
    }

    pub(crate) fn iter_f64(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.approx.iter().enumerate().map(move |(i, &w)| (self.first + i as u64, w))
    }

    pub fn weight(&self, offset: u64) -> BigInt {
        offset.checked_sub(self.first).and_then(|i| self.weights.get(i as usize)).cloned().unwrap_or_default()
    }

    pub fn sum(&self) -> BigInt {
        self.weights.iter().sum()
    }

    pub fn abs_sum(&self) -> BigInt {
        self.weights.iter().map(|w| w.abs()).sum()
    }

    /// Exact convolution: the stencil of applying `other` and then `self`.
    pub fn convolve(&self, other: &Stencil) -> Stencil {
        let mut out = vec![BigInt::zero(); self.weights.len() + other.weights.len() - 1];
        for (i, a) in self.weights.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.weights.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Stencil::new(self.first + other.first, out, self.order + other.order)
    }

    /// Midpoint of the support.
    fn center(&self) -> f64 {
        (self.first + self.last_offset()) as f64 / 2.0
    }

    fn half_width(&self) -> f64 {
        (self.last_offset() - self.first) as f64 / 2.0
    }

    fn moments(&self) -> &Moments {
        self.moments.get_or_init(|| {
            // doubled offsets 2j - (first + last) keep the centre integral
            let mid = self.first + self.last_offset();
            let offsets: Vec<BigInt> = (0..self.weights.len() as u64)
                .map(|i| BigInt::from(2 * (self.first + i)) - BigInt::from(mid))
                .collect();
            let mut powers: Vec<BigInt> = vec![BigInt::one(); self.weights.len()];
            let mut denom = BigInt::one();
            let mut signed = Vec::with_capacity(MOMENT_TERMS);

            let mut scaled: Vec<f64> = vec![1.0; self.weights.len()];
            let mut envelope = Vec::with_capacity(MOMENT_TERMS);

            for r in 0..MOMENT_TERMS {
                if r > 0 {
                    denom *= 2 * r;
                    for (p, j) in powers.iter_mut().zip(&offsets) {
                        *p *= j;
                    }
                    for (t, j) in scaled.iter_mut().zip(&offsets) {
                        *t *= j.to_f64().unwrap_or(f64::NAN).abs() / (2 * r) as f64;
                    }
                }
                let m: BigInt = self.weights.iter().zip(&powers).map(|(w, p)| w * p).sum();
                let mu =
                    if m.is_zero() { 0.0 } else { BigRational::new(m, denom.clone()).to_f64().unwrap_or(f64::NAN) };
                signed.push(mu);
                envelope.push(self.approx.iter().zip(&scaled).map(|(w, t)| w.abs() * t).sum());
            }
            Moments { signed, envelope }
        })
    }
}

/// Exact weights of `Δ_c^k`.
#[derive(Debug)]
pub struct WeightVector {
    c: Modulus,
    k: u32,
    stencil: Stencil,
}

impl WeightVector {
    pub fn modulus(&self) -> Modulus {
        self.c
    }

    pub fn depth(&self) -> u32 {
        self.k
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn weight(&self, offset: u64) -> BigInt {
        self.stencil.weight(offset)
    }

    /// Nonzero weights keyed by offset.
    pub fn to_map(&self) -> BTreeMap<u64, BigInt> {
        self.stencil.iter().filter(|(_, w)| !w.is_zero()).map(|(j, w)| (j, w.clone())).collect()
    }

    pub fn sum(&self) -> BigInt {
        self.stencil.sum()
    }

    pub fn abs_sum(&self) -> BigInt {
        self.stencil.abs_sum()
    }
}

fn base_stencil(c: Modulus) -> Stencil {
    let weights = (1..=c.0 as u64).map(|i| BigInt::from(coefficient_a(c, i))).collect();
    Stencil::new(1, weights, 1)
}

type WeightCache = RwLock<HashMap<(u32, u32), Arc<WeightVector>>>;

fn cache() -> &'static WeightCache {
    static CACHE: OnceLock<WeightCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Weights of `Δ_c^k`, memoized per `(c, k)` and shared across threads.
pub fn weight_vector(c: Modulus, k: u32) -> Arc<WeightVector> {
    if let Some(wv) = cache().read().expect("weight cache poisoned").get(&(c.0, k)) {
        return Arc::clone(wv);
    }
    let stencil = if k == 0 {
        Stencil::identity()
    } else {
        let prev = weight_vector(c, k - 1);
        prev.stencil.convolve(&base_stencil(c))
    };
    let wv = Arc::new(WeightVector { c, k, stencil });
    let mut guard = cache().write().expect("weight cache poisoned");
    Arc::clone(guard.entry((c.0, k)).or_insert(wv))
}

/// `Δ_c^k b_n` for an arbitrary accessor, summed in ascending offset order.
pub fn apply_delta<F, E>(c: Modulus, k: u32, b: F, n: u64) -> std::result::Result<Complex64, E>
where
    F: Fn(u64) -> std::result::Result<Complex64, E>,
{
    let wv = weight_vector(c, k);
    let mut acc = ComplexSum::new();
    for (j, w) in wv.stencil.iter_f64() {
        if w != 0.0 {
            acc += b(n + j)? * w;
        }
    }
    Ok(acc.sum())
}

/// `m^{-s}` on the principal branch (real logarithm of the positive integer).
#[inline]
pub(crate) fn int_pow_neg(m: u64, s: Complex64) -> Complex64 {
    // Integer exponents stay on the exact path so polynomial cases cancel to 0.
    if s.im == 0.0 && s.re.fract() == 0.0 && s.re.abs() <= 64.0 {
        return Complex64::new((m as f64).powi(-(s.re as i32)), 0.0);
    }
    (-s * (m as f64).ln()).exp()
}

/// Result of applying a stencil to `m ↦ m^{-s}` (and optionally to its
/// `s`-derivative `m ↦ -m^{-s} log m`), with first-order rounding estimates.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PowerDelta {
    pub value: Complex64,
    pub deriv: Complex64,
    pub value_err: f64,
    pub deriv_err: f64,
}

/// Evaluates `Σ_j w_j (n+j)^{-s}` and its `s`-derivative.
///
/// The direct sum cancels badly when `Re(s) < 0` or `s` is close to a
/// non-positive integer, so the stencil is also expanded around the midpoint
/// `x0 = n + x̄` of its support:
/// `Δ f(n) = x0^{-s} Σ_r (-1)^r μ_r (s)_r x0^{-r}` with exact central moments
/// `μ_r`, the first `order` of which vanish identically. The expansion
/// converges for every `n >= 1` because the half-width is below `x0`.
/// Close to the origin both are computed and the smaller error estimate wins.
pub(crate) fn power_delta(stencil: &Stencil, n: u64, s: Complex64, with_deriv: bool) -> PowerDelta {
    if stencil.order == 0 {
        return power_delta_direct(stencil, n, s, with_deriv);
    }
    let series = power_delta_series(stencil, n, s, with_deriv);
    let far = stencil.half_width() <= 0.25 * (n as f64 + stencil.center());
    match series {
        Some(pd) if far => pd,
        Some(pd) => {
            let direct = power_delta_direct(stencil, n, s, with_deriv);
            if pd.value_err + pd.deriv_err <= direct.value_err + direct.deriv_err {
                pd
            } else {
                direct
            }
        }
        None => power_delta_direct(stencil, n, s, with_deriv),
    }
}

pub(crate) fn power_delta_direct(stencil: &Stencil, n: u64, s: Complex64, with_deriv: bool) -> PowerDelta {
    let mut value = ComplexSum::new();
    let mut deriv = ComplexSum::new();
    let mut value_err = 0.0;
    let mut deriv_err = 0.0;
    let s_abs = s.norm();
    for (j, w) in stencil.iter_f64() {
        if w == 0.0 {
            continue;
        }
        let m = n + j;
        let log_m = (m as f64).ln();
        let p = int_pow_neg(m, s);
        let term = p * w;
        value += term;
        let rel = f64::EPSILON * (s_abs * log_m + 4.0);
        value_err += rel * term.norm();
        if with_deriv {
            let dterm = -term * log_m;
            deriv += dterm;
            deriv_err += rel * dterm.norm();
        }
    }
    PowerDelta { value: value.sum(), deriv: deriv.sum(), value_err, deriv_err }
}

fn power_delta_series(stencil: &Stencil, n: u64, s: Complex64, with_deriv: bool) -> Option<PowerDelta> {
    let moments = stencil.moments();
    let x0 = n as f64 + stencil.center();
    let half = stencil.half_width();
    let s_abs = s.norm();

    let mut p = Complex64::one();
    let mut d = Complex64::zero();
    let mut acc_v = ComplexSum::new();
    let mut acc_d = ComplexSum::new();
    let mut mass_v = 0.0;
    let mut mass_d = 0.0;
    let mut remainder = None;

    for r in 0..MOMENT_TERMS {
        let mu = moments.signed[r];
        if mu != 0.0 {
            let signed_mu = if r % 2 == 0 { mu } else { -mu };
            let tv = p * signed_mu;
            acc_v += tv;
            mass_v += tv.norm();
            if with_deriv {
                let td = d * signed_mu;
                acc_d += td;
                mass_d += td.norm();
            }
        }
        let envelope = moments.envelope[r] * (p.norm() + if with_deriv { d.norm() } else { 0.0 });
        // bounds the ratio of consecutive envelope terms from r on
        let ratio = half * (s_abs + r as f64 + 1.0) / ((r as f64 + 1.0) * x0);
        if r as u32 >= stencil.order && ratio < 1.0 {
            let tail = envelope * ratio / (1.0 - ratio);
            let scale = acc_v.sum().norm() + acc_d.sum().norm();
            if tail == 0.0 || tail <= 1e-18 * scale {
                remainder = Some(tail);
                break;
            }
        }
        if r + 1 == MOMENT_TERMS {
            if ratio >= 0.5 {
                return None;
            }
            remainder = Some(2.0 * envelope);
        }
        let shifted = s + r as f64;
        if with_deriv {
            d = (d * shifted + p) / x0;
        }
        p = p * shifted / x0;
    }
    let remainder = remainder?;

    let log_x0 = x0.ln();
    let base = (-s * log_x0).exp();
    let base_abs = base.norm();
    let rel = f64::EPSILON * (s_abs * log_x0 + 4.0);

    let value = base * acc_v.sum();
    let value_err = rel * value.norm() + 8.0 * f64::EPSILON * base_abs * mass_v + base_abs * remainder;
    let (deriv, deriv_err) = if with_deriv {
        let dv = base * (acc_d.sum() - acc_v.sum() * log_x0);
        let err = rel * dv.norm()
            + 8.0 * f64::EPSILON * base_abs * (mass_d + log_x0 * mass_v)
            + base_abs * remainder * (1.0 + log_x0);
        (dv, err)
    } else {
        (Complex64::zero(), 0.0)
    };
    Some(PowerDelta { value, deriv, value_err, deriv_err })
}

/// `Δ_c^k n^{-s}`.
pub fn delta_power(c: Modulus, k: u32, n: u64, s: Complex64) -> Complex64 {
    debug_assert!(n >= 1);
    power_delta(weight_vector(c, k).stencil(), n, s, false).value
}

/// Rising factorial `(s)_k = s(s+1)⋯(s+k-1)`, with `(s)_0 = 1`.
pub fn pochhammer(s: Complex64, k: u32) -> Complex64 {
    (0..k).fold(Complex64::one(), |acc, i| acc * (s + i as f64))
}

/// `(s)_k` together with its derivative in `s`.
pub(crate) fn pochhammer_with_derivative(s: Complex64, k: u32) -> (Complex64, Complex64) {
    let mut value = Complex64::one();
    let mut deriv = Complex64::zero();
    for i in 0..k {
        let factor = s + i as f64;
        deriv = deriv * factor + value;
        value *= factor;
    }
    (value, deriv)
}

/// Upper bound `|(s)_k| (c(c-1)/2)^k / n^{Re(s)+k}` for `|Δ_c^k n^{-s}|`,
/// valid when `Re(s) + k >= 0`.
pub fn tail_bound(c: Modulus, k: u32, n: u64, s: Complex64) -> Result<f64> {
    let exponent = s.re + k as f64;
    if exponent < 0.0 {
        return Err(Error::Domain(format!("magnitude bound needs Re(s) + k >= 0, got Re(s) = {}, k = {k}", s.re)));
    }
    Ok(pochhammer(s, k).norm() * c.spread().powi(k as i32) / (n as f64).powf(exponent))
}
