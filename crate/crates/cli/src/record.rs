//! Output records and their JSON-lines, CSV and text renderings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Fixed CSV column order.
pub const CSV_COLUMNS: [&str; 12] = [
    "command",
    "s_re",
    "s_im",
    "c",
    "k",
    "N",
    "value_re",
    "value_im",
    "est_error",
    "elapsed_ms",
    "actual_error",
    "status",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub c: Option<u32>,
    pub k: Option<u32>,
    #[serde(rename = "N")]
    pub blocks: Option<u64>,
    /// Present only when timing is requested, so default output is reproducible.
    pub elapsed_ms: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    /// `re`, `re,im` or an exact `p/q`.
    pub value: String,
    pub value_re: String,
    pub value_im: String,
    pub est_error: Option<String>,
    pub actual_error: Option<String>,
    pub reference: Option<String>,
    pub status: Option<String>,
    pub regime: Option<String>,
    pub details: BTreeMap<String, String>,
    pub metadata: Metadata,
}

impl OutputRecord {
    pub fn new(command: &str) -> Self {
        OutputRecord { command: command.to_string(), ..Default::default() }
    }

    pub fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn detail(mut self, key: &str, value: impl ToString) -> Self {
        self.details.insert(key.to_string(), value.to_string());
        self
    }

    /// Sets `value`, `value_re` and `value_im` from a complex number.
    pub fn complex_value(mut self, re: f64, im: f64, digits: usize) -> Self {
        self.value_re = format_sig(re, digits);
        self.value_im = format_sig(im, digits);
        self.value = if im == 0.0 { self.value_re.clone() } else { format!("{},{}", self.value_re, self.value_im) };
        self
    }

    fn csv_row(&self) -> [String; 12] {
        let get = |key: &str| self.inputs.get(key).cloned().unwrap_or_default();
        let opt = |v: &Option<String>| v.clone().unwrap_or_default();
        let num = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.command.clone(),
            get("s_re"),
            get("s_im"),
            num(self.metadata.c.map(u64::from)),
            num(self.metadata.k.map(u64::from)),
            num(self.metadata.blocks),
            self.value_re.clone(),
            self.value_im.clone(),
            opt(&self.est_error),
            self.metadata.elapsed_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
            opt(&self.actual_error),
            opt(&self.status),
        ]
    }

    fn text_line(&self) -> String {
        let mut parts = vec![self.value.clone()];
        if let Some(s) = &self.status {
            parts.push(s.clone());
        }
        if let Some(e) = &self.est_error {
            parts.push(format!("est_error={e}"));
        }
        if let Some(e) = &self.actual_error {
            parts.push(format!("actual_error={e}"));
        }
        if let Some(r) = &self.reference {
            parts.push(format!("reference={r}"));
        }
        let m = &self.metadata;
        if let Some(c) = m.c {
            parts.push(format!("c={c}"));
        }
        if let Some(k) = m.k {
            parts.push(format!("k={k}"));
        }
        if let Some(n) = m.blocks {
            parts.push(format!("N={n}"));
        }
        if let Some(t) = m.elapsed_ms {
            parts.push(format!("elapsed_ms={t:.3}"));
        }
        for (key, v) in &self.details {
            parts.push(format!("{key}={v}"));
        }
        if let Some(r) = &self.regime {
            parts.push(format!("regime={r}"));
        }
        parts.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn render(records: &[OutputRecord], format: Format) -> String {
    match format {
        Format::Json => records.iter().map(|r| serde_json::to_string(r).expect("records serialize") + "\n").collect(),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_COLUMNS).expect("in-memory write");
            for r in records {
                w.write_record(r.csv_row()).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
        }
        Format::Text => records.iter().map(|r| r.text_line() + "\n").collect(),
    }
}

/// `x` to `digits` significant digits, rounding half to even on the exact
/// binary value. Positional for exponents in `-5..digits`, otherwise
/// scientific.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return if digits == 1 { "0".into() } else { format!("0.{}", "0".repeat(digits - 1)) };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..digits as i32).contains(&exp) {
        return sci;
    }
    let negative = mantissa.starts_with('-');
    let body: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let sign = if negative { "-" } else { "" };
    let out = if exp < 0 {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), body)
    } else {
        let point = exp as usize + 1;
        if point >= body.len() {
            format!("{}{}", body, "0".repeat(point - body.len()))
        } else {
            format!("{}.{}", &body[..point], &body[point..])
        }
    };
    format!("{sign}{out}")
}

/// Error magnitudes: three significant digits, always scientific.
pub fn format_err(x: f64) -> String {
    format!("{x:.2e}")
}
