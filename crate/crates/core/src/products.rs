//! Wallis-type products `e^{ζ'_(c)(s)} = Π n^{-a_{c,n}/n^s}`, accumulated in
//! the log domain and reported only at whole blocks.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::table;
use crate::diffcore::{coefficient_a, Modulus};
use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use crate::zeta::{derivative_truncation_bound, plan_derivative, zeta_c_derivative};

/// Absolute tolerance of the reference `ζ'_(c)(s)`.
pub const TARGET_TOL: f64 = 1e-13;

/// Required agreement between a closed form and the reference derivative.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Blocks at the end of a stream over which the gap must shrink.
pub const MONOTONE_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdentityId {
    Wallis,
    First,
    Second,
    Gen1,
    Gen2,
    Gen3,
    Gen4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// `Σ -a_{c,n} n^{-s} log n`, for `s > 0`.
    Raw,
    /// The differentiated depth-one continuation, for `s > -1`.
    Continued,
}

impl IdentityId {
    pub const ALL: [IdentityId; 7] = [
        IdentityId::Wallis,
        IdentityId::First,
        IdentityId::Second,
        IdentityId::Gen1,
        IdentityId::Gen2,
        IdentityId::Gen3,
        IdentityId::Gen4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IdentityId::Wallis => "wallis",
            IdentityId::First => "first",
            IdentityId::Second => "second",
            IdentityId::Gen1 => "gen1",
            IdentityId::Gen2 => "gen2",
            IdentityId::Gen3 => "gen3",
            IdentityId::Gen4 => "gen4",
        }
    }

    /// `(c, s)` of the product.
    pub fn parameters(self) -> (Modulus, f64) {
        let m = |c| Modulus::new(c).expect("catalogue modulus");
        match self {
            IdentityId::Wallis => (m(2), 0.0),
            IdentityId::First => (m(2), 1.0),
            IdentityId::Second => (m(2), 2.0),
            IdentityId::Gen1 => (m(3), 0.0),
            IdentityId::Gen2 => (m(3), 1.0),
            IdentityId::Gen3 => (m(3), 2.0),
            IdentityId::Gen4 => (m(4), 0.0),
        }
    }

    pub fn route(self) -> Route {
        if self.parameters().1 > 0.0 {
            Route::Raw
        } else {
            Route::Continued
        }
    }

    /// Default gap tolerance at `N = 10^5`.
    pub fn default_tol(self) -> f64 {
        if self.parameters().1 == 2.0 {
            1e-4
        } else {
            1e-3
        }
    }

    /// Closed form of `ζ'_(c)(s)`.
    pub fn closed_form_log(self) -> f64 {
        let t = table();
        let (pi, gamma, a) = (t.pi, t.euler_gamma, t.glaisher_a);
        let ln2 = 2f64.ln();
        let ln3 = 3f64.ln();
        match self {
            IdentityId::Wallis => 0.5 * (pi / 2.0).ln(),
            // e^{2η'(1)} = 2^{2γ - log 2}
            IdentityId::First => 0.5 * (2.0 * gamma - ln2) * ln2,
            // e^{2η'(2)} = (4π e^γ / A^12)^{π²/6}
            IdentityId::Second => 0.5 * (pi * pi / 6.0) * ((4.0 * pi).ln() + gamma - 12.0 * a.ln()),
            IdentityId::Gen1 => (2.0 * pi).ln() - 1.5 * ln3,
            IdentityId::Gen2 => ln3 * (gamma - ln3 / 2.0),
            IdentityId::Gen3 => (pi * pi / 18.0) * (ln3 + 2.0 * ((2.0 * pi).ln() + gamma - 12.0 * a.ln())),
            IdentityId::Gen4 => 1.5 * t.log_2pi - 4.0 * ln2,
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    /// Accepts the short names and `huylebrouck_<s>` / `gen_<c>_<s>`.
    fn from_str(name: &str) -> Result<Self> {
        let id = match name.to_ascii_lowercase().as_str() {
            "wallis" | "huylebrouck_0" | "gen_2_0" => IdentityId::Wallis,
            "first" | "huylebrouck_1" | "gen_2_1" => IdentityId::First,
            "second" | "huylebrouck_2" | "gen_2_2" => IdentityId::Second,
            "gen1" | "gen_3_0" => IdentityId::Gen1,
            "gen2" | "gen_3_1" => IdentityId::Gen2,
            "gen3" | "gen_3_2" => IdentityId::Gen3,
            "gen4" | "gen_4_0" => IdentityId::Gen4,
            _ => return Err(Error::UnknownIdentity(name.to_string())),
        };
        Ok(id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    /// `None` for ad-hoc `(c, s)` streams.
    pub identity: Option<IdentityId>,
    pub c: Modulus,
    pub s: f64,
    pub route: Route,
    pub blocks: u64,
    /// Log of the partial product after blocks `1..=N`.
    pub log_partial: Vec<f64>,
    /// `ζ'_(c)(s)` from the continuation, to [`TARGET_TOL`].
    pub target_log: f64,
    pub abs_gap: f64,
    /// Bound on the remaining tail after `N` blocks.
    pub tail_bound: f64,
    /// Observed order `p` in `gap ~ N^{-p}` over the last decade of blocks.
    pub rate: Option<f64>,
}

impl ProductReport {
    pub fn gap_at(&self, block: u64) -> f64 {
        (self.log_partial[block as usize - 1] - self.target_log).abs()
    }

    /// Gap strictly decreasing over the last [`MONOTONE_WINDOW`] blocks.
    pub fn gap_shrinking(&self) -> bool {
        let n = self.log_partial.len();
        let start = n.saturating_sub(MONOTONE_WINDOW);
        let gaps: Vec<f64> = self.log_partial[start..].iter().map(|v| (v - self.target_log).abs()).collect();
        gaps.windows(2).all(|w| w[1] < w[0])
    }
}

fn target(c: Modulus, s: f64) -> Result<f64> {
    let s = Complex64::new(s, 0.0);
    let plan = plan_derivative(s, c, 3, TARGET_TOL)?;
    Ok(zeta_c_derivative(s, plan)?.value.re)
}

fn observed_rate(log_partial: &[f64], target: f64) -> Option<f64> {
    let n = log_partial.len();
    if n < 10 {
        return None;
    }
    let gap_end = (log_partial[n - 1] - target).abs();
    let gap_mid = (log_partial[n / 10 - 1] - target).abs();
    (gap_end > 0.0 && gap_mid > 0.0).then(|| (gap_mid / gap_end).ln() / 10f64.ln())
}

fn report(c: Modulus, s: f64, route: Route, log_partial: Vec<f64>) -> Result<ProductReport> {
    let blocks = log_partial.len() as u64;
    let target_log = target(c, s)?;
    let k = match route {
        Route::Raw => 0,
        Route::Continued => 1,
    };
    let tail_bound = derivative_truncation_bound(c, k, Complex64::new(s, 0.0), blocks)?;
    Ok(ProductReport {
        identity: None,
        c,
        s,
        route,
        blocks,
        abs_gap: (log_partial[blocks as usize - 1] - target_log).abs(),
        rate: observed_rate(&log_partial, target_log),
        log_partial,
        target_log,
        tail_bound,
    })
}

/// `n^{-s} log n` for real `s`.
fn log_weight(n: u64, s: f64) -> f64 {
    let nf = n as f64;
    nf.powf(-s) * nf.ln()
}

fn check_blocks(blocks: u64) -> Result<()> {
    if blocks == 0 {
        return Err(Error::InvalidParameter("block count must be >= 1".into()));
    }
    Ok(())
}

/// Log partial products of `Π n^{-a_{c,n}/n^s}` after each block, `s > 0`.
pub fn product_log_stream(c: Modulus, s: f64, blocks: u64) -> Result<ProductReport> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::Region {
            s: Complex64::new(s, 0.0),
            bound: 0.0,
            context: "product needs s > 0; use the continued product",
        });
    }
    check_blocks(blocks)?;
    let cu = c.get() as u64;
    let mut acc = NeumaierSum::new();
    let mut log_partial = Vec::with_capacity(blocks as usize);
    for block in 0..blocks {
        for n in block * cu + 1..=(block + 1) * cu {
            acc += -(coefficient_a(c, n) as f64) * log_weight(n, s);
        }
        log_partial.push(acc.sum());
    }
    report(c, s, Route::Raw, log_partial)
}

/// Log partial products of the continued product, `s > -1`:
/// prefix `-Σ_{i=2}^{c-1} ((c+i-1)/c) i^{-s} log i + ((c-1)^2/c^{s+1}) log c`
/// plus `(1/c) Σ_{n<=cN} a_{c,n} Σ_{i=1}^{c} a_{c,i} (n+i)^{-s} log(n+i)`.
pub fn product_log_stream_continued(c: Modulus, s: f64, blocks: u64) -> Result<ProductReport> {
    if s.is_nan() || s <= -1.0 {
        return Err(Error::Region {
            s: Complex64::new(s, 0.0),
            bound: -1.0,
            context: "continued product needs s > -1",
        });
    }
    check_blocks(blocks)?;
    let cu = c.get() as u64;
    let cf = cu as f64;
    let mut acc = NeumaierSum::new();
    for i in 2..cu {
        acc += -((cu + i - 1) as f64 / cf) * log_weight(i, s);
    }
    acc += ((cu - 1) * (cu - 1)) as f64 / cf * log_weight(cu, s);

    let mut log_partial = Vec::with_capacity(blocks as usize);
    for block in 0..blocks {
        for n in block * cu + 1..=(block + 1) * cu {
            let a_n = coefficient_a(c, n) as f64 / cf;
            for i in 1..=cu {
                acc += a_n * coefficient_a(c, i) as f64 * log_weight(n + i, s);
            }
        }
        log_partial.push(acc.sum());
    }
    report(c, s, Route::Continued, log_partial)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub pass: bool,
    pub tol: f64,
    pub gap_within_tol: bool,
    pub gap_shrinking: bool,
    pub closed_form_log: f64,
    /// `|closed_form_log - target_log|`.
    pub closed_form_gap: f64,
    pub closed_form_ok: bool,
    pub report: ProductReport,
}

/// Passes when the final gap is below `tol`, the gap shrinks over the last
/// blocks, and the closed form agrees with the reference derivative.
pub fn verify_identity(id: IdentityId, blocks: u64, tol: f64) -> Result<Verification> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let (c, s) = id.parameters();
    let mut report = match id.route() {
        Route::Raw => product_log_stream(c, s, blocks)?,
        Route::Continued => product_log_stream_continued(c, s, blocks)?,
    };
    report.identity = Some(id);
    let closed_form_log = id.closed_form_log();
    let closed_form_gap = (closed_form_log - report.target_log).abs();
    let gap_within_tol = report.abs_gap < tol;
    let gap_shrinking = report.gap_shrinking();
    let closed_form_ok = closed_form_gap < CLOSED_FORM_TOL;
    Ok(Verification {
        pass: gap_within_tol && gap_shrinking && closed_form_ok,
        tol,
        gap_within_tol,
        gap_shrinking,
        closed_form_log,
        closed_form_gap,
        closed_form_ok,
        report,
    })
}
