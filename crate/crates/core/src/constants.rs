//! Reference constants and the Laurent-slope check of `ζ_(c)` at `s = 1`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diffcore::Modulus;
use crate::error::{Error, Result};
use crate::zeta::{plan_for, zeta_c};

pub const PI_DIGITS: &str = "3.14159265358979323846264338327950288";
pub const EULER_GAMMA_DIGITS: &str = "0.57721566490153286060651209008240243104215933593992";
pub const GLAISHER_A_DIGITS: &str = "1.28242712910062263687534256886979172776768892732500";
pub const LOG_2PI_DIGITS: &str = "1.83787706640934548356065947281123527972279494727556";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub pi: f64,
    pub euler_gamma: f64,
    pub glaisher_a: f64,
    pub log_2pi: f64,
    /// Significant digits of the shortest stored literal.
    pub precision_digits: u32,
}

static TABLE: ConstantsTable = ConstantsTable {
    pi: std::f64::consts::PI,
    euler_gamma: 0.577_215_664_901_532_9,
    glaisher_a: 1.282_427_129_100_622_6,
    log_2pi: 1.837_877_066_409_345_5,
    precision_digits: 36,
};

pub fn table() -> &'static ConstantsTable {
    &TABLE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstantId {
    #[serde(rename = "pi")]
    Pi,
    #[serde(rename = "gamma")]
    EulerGamma,
    #[serde(rename = "A")]
    GlaisherA,
    #[serde(rename = "log2pi")]
    Log2Pi,
}

impl ConstantId {
    pub const ALL: [ConstantId; 4] =
        [ConstantId::Pi, ConstantId::EulerGamma, ConstantId::GlaisherA, ConstantId::Log2Pi];

    pub fn name(self) -> &'static str {
        match self {
            ConstantId::Pi => "pi",
            ConstantId::EulerGamma => "gamma",
            ConstantId::GlaisherA => "A",
            ConstantId::Log2Pi => "log2pi",
        }
    }

    pub fn digits(self) -> &'static str {
        match self {
            ConstantId::Pi => PI_DIGITS,
            ConstantId::EulerGamma => EULER_GAMMA_DIGITS,
            ConstantId::GlaisherA => GLAISHER_A_DIGITS,
            ConstantId::Log2Pi => LOG_2PI_DIGITS,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            ConstantId::Pi => TABLE.pi,
            ConstantId::EulerGamma => TABLE.euler_gamma,
            ConstantId::GlaisherA => TABLE.glaisher_a,
            ConstantId::Log2Pi => TABLE.log_2pi,
        }
    }
}

impl fmt::Display for ConstantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstantId {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        ConstantId::ALL.into_iter().find(|id| id.name() == name).ok_or_else(|| Error::UnknownConstant(name.to_string()))
    }
}

/// Stored value of `pi`, `gamma`, `A` or `log2pi`.
pub fn get(name: &str) -> Result<f64> {
    name.parse::<ConstantId>().map(ConstantId::value)
}

/// Stieltjes constant `γ_n`; only `γ_0 = γ` is tabulated.
pub fn stieltjes(n: u32) -> Option<f64> {
    (n == 0).then_some(TABLE.euler_gamma)
}

/// `ζ'_(c)(1) = log c (γ - log c / 2)`.
pub fn derivative_at_one(c: Modulus) -> f64 {
    let l = (c.get() as f64).ln();
    l * (TABLE.euler_gamma - l / 2.0)
}

/// Slope of the least-squares line through `(h, ζ_(c)(1+h))`,
/// `h ∈ {±r, ±r/2}`, pinned at `(0, log c)`. The symmetric nodes cancel the
/// quadratic term.
pub fn laurent_check(c: Modulus, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius < 0.5) {
        return Err(Error::InvalidParameter(format!("radius must lie in (0, 1/2), got {radius}")));
    }
    let log_c = (c.get() as f64).ln();
    let mut num = 0.0;
    let mut den = 0.0;
    for h in [-radius, -radius / 2.0, radius / 2.0, radius] {
        let s = Complex64::new(1.0 + h, 0.0);
        let y = zeta_c(s, plan_for(s, c, 3, 1e-15)?)?.value.re;
        num += h * (y - log_c);
        den += h * h;
    }
    Ok(num / den)
}
