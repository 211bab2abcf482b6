//! Exact values of `ζ(-m)` in rational arithmetic, by three independent routes.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diffcore::Modulus;
use crate::error::{Error, Result};
use crate::transform::{classic_head_exact, head_exact};

/// A reduced fraction with positive denominator. Displays as `p/q`, or `p`
/// when the denominator is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        Ok(ExactRational(BigRational::new(numerator, denominator)))
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.0).unwrap_or(f64::NAN)
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        // BigRational keeps itself reduced with a positive denominator
        ExactRational(r)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("not a rational: {text:?}"));
        let (p, q) = text.split_once('/').unwrap_or((text, "1"));
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        ExactRational::new(p, q)
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn monomial(m: u32) -> impl Fn(u64) -> BigRational {
    move |n| BigRational::from_integer(num_traits::pow(BigInt::from(n), m as usize))
}

/// `1 / (1 - c^{m+1})`.
fn eta_inverse(c: u64, m: u32) -> BigRational {
    let power = num_traits::pow(BigInt::from(c), m as usize + 1);
    BigRational::new(BigInt::one(), BigInt::one() - power)
}

/// `ζ(-m)` as `(1 - c^{m+1})^{-1} ζ_(c)(-m)`, where the depth `m + 1`
/// transform of `n^m` has no tail.
pub fn zeta_neg_int(m: u32, c: Modulus) -> ExactRational {
    let head = head_exact(c, m + 1, monomial(m));
    (head * eta_inverse(c.get() as u64, m)).into()
}

/// `ζ(-m)` via Euler's classic transformation of the alternating series.
pub fn sondow_neg_int(m: u32) -> ExactRational {
    let head = classic_head_exact(m + 1, monomial(m));
    (head * eta_inverse(2, m)).into()
}

/// `B_0..=B_n` from `Σ_{j=0}^{n} C(n+1, j) B_j = 0`, so `B_1 = -1/2`.
pub fn bernoulli_numbers(n: u32) -> Vec<ExactRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n as usize + 1);
    b.push(BigRational::one());
    for k in 1..=n as usize {
        // row C(k+1, j) for j = 0..k
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += bj * BigRational::from_integer(binom.clone());
            binom = binom * (k + 1 - j) / (j + 1);
        }
        // binom is now C(k+1, k)
        b.push(-acc / BigRational::from_integer(binom));
    }
    b.into_iter().map(ExactRational).collect()
}

/// `ζ(-m) = (-1)^m B_{m+1} / (m + 1)` from the Bernoulli recurrence.
pub fn bernoulli_oracle(m: u32) -> ExactRational {
    let b = bernoulli_numbers(m + 1).pop().expect("nonempty").0;
    let value = b / BigRational::from_integer(BigInt::from(m + 1));
    if m.is_multiple_of(2) { value } else { -value }.into()
}
