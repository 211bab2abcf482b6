//! Command-line front end: `zeta`, `exact`, `verify` and `study`.
//!
//! [`run`] returns the rendered output and exit code instead of printing, so
//! the binary is a thin shell around it.

pub mod record;

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use eulerzeta_core::zeta::{
    choose_modulus, default_depth, derivative_truncation_bound, eta_factor, zeta_planned, zeta_with,
};
use eulerzeta_core::{
    bernoulli_oracle, verify_identity, zeta, zeta_neg_int, Complex64, Error, EvalPlan, IdentityId, Modulus, Regime,
    Route, SeriesEvaluation,
};

pub use record::{format_err, format_sig, render, Format, Metadata, OutputRecord, CSV_COLUMNS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MATH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "eulerzeta", version, about = "Zeta continuation, exact zeta(-m) and Wallis-type products")]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Shorthand for `--format csv`.
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Significant digits of decimal values.
    #[arg(long, default_value_t = 15, value_parser = clap::value_parser!(u8).range(1..=17), global = true)]
    pub digits: u8,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
    /// Record wall-clock time per record.
    #[arg(long, global = true)]
    pub timing: bool,
}

impl OutputArgs {
    fn format(&self) -> Format {
        if self.csv {
            Format::Csv
        } else if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate ζ(s).
    Zeta(ZetaArgs),
    /// Exact ζ(-m) as a reduced fraction.
    Exact(ExactArgs),
    /// Check a product identity by blocked partial products.
    Verify(VerifyArgs),
    /// Error grid over moduli, depths and block counts.
    Study(StudyArgs),
}

#[derive(Debug, Args)]
pub struct ZetaArgs {
    /// `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub s: Complex64,
    #[arg(long, default_value_t = 1e-10, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long, value_parser = parse_modulus)]
    pub c: Option<Modulus>,
    #[arg(long)]
    pub k: Option<u32>,
    /// Block count; skips the planner.
    #[arg(long = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub blocks: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long, default_value = "2", value_parser = parse_modulus)]
    pub c: Modulus,
    /// Compare with the Bernoulli-number value.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub identity: String,
    #[arg(long = "N", default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub blocks: u64,
    /// Defaults to 1e-4 for s = 2 and 1e-3 otherwise.
    #[arg(long, value_parser = parse_tol)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub s: Complex64,
    /// List `2,3` or inclusive range `2..4`.
    #[arg(long, default_value = "2")]
    pub c: String,
    #[arg(long)]
    pub k: String,
    #[arg(long = "N")]
    pub blocks: String,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let mut parts = text.split(',');
    let re = parts.next().unwrap_or_default();
    let im = parts.next();
    if parts.next().is_some() {
        return Err(format!("expected `re` or `re,im`, got `{text}`"));
    }
    let num = |t: &str| {
        t.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| format!("not a finite number: `{t}`"))
    };
    Ok(Complex64::new(num(re)?, im.map(num).transpose()?.unwrap_or(0.0)))
}

fn parse_tol(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance must be a positive number, got `{text}`")),
    }
}

fn parse_modulus(text: &str) -> Result<Modulus, String> {
    let c: u32 = text.parse().map_err(|_| format!("not an integer: `{text}`"))?;
    Modulus::new(c).map_err(|e| e.to_string())
}

/// `2,3,5` or the inclusive range `2..5`.
pub fn parse_list(text: &str) -> Result<Vec<u64>, String> {
    let item = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad list item `{t}` in `{text}`"));
    let values: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (item(a)?, item(b.trim_start_matches('='))?);
        (a..=b).collect()
    } else {
        text.split(',').map(item).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(format!("empty list `{text}`"));
    }
    Ok(values)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Pole | Error::Region { .. } | Error::Domain(_) | Error::Sequence { .. } => EXIT_MATH,
        Error::InvalidModulus(_)
        | Error::InvalidParameter(_)
        | Error::UnknownIdentity(_)
        | Error::UnknownConstant(_) => EXIT_USAGE,
    }
}

fn s_inputs(record: OutputRecord, s: Complex64) -> OutputRecord {
    record.input("s_re", s.re).input("s_im", s.im)
}

struct Ctx {
    digits: usize,
    timing: bool,
}

impl Ctx {
    fn elapsed(&self, start: Instant) -> Option<f64> {
        self.timing.then(|| start.elapsed().as_secs_f64() * 1e3)
    }
}

fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::Absolute => "absolute",
        Regime::Conditional => "conditional",
    }
}

fn series_record(mut record: OutputRecord, eval: &SeriesEvaluation, ctx: &Ctx) -> OutputRecord {
    record = record
        .complex_value(eval.value.re, eval.value.im, ctx.digits)
        .detail("truncation_bound", format_err(eval.truncation_bound))
        .detail("rounding_estimate", format_err(eval.rounding_estimate))
        .detail("terms_used", eval.terms_used);
    record.est_error = Some(format_err(eval.est_error));
    record.regime = Some(regime_name(eval.regime).to_string());
    record.metadata.c = Some(eval.plan.c.get());
    record.metadata.k = Some(eval.plan.k);
    record.metadata.blocks = Some(eval.plan.blocks);
    record
}

fn cmd_zeta(args: &ZetaArgs, ctx: &Ctx) -> Result<Vec<OutputRecord>, Error> {
    let start = Instant::now();
    let s = args.s;
    let eval = match (args.c, args.k, args.blocks) {
        (None, None, None) => zeta(s, args.tol)?,
        (c, k, None) => {
            zeta_with(s, c.unwrap_or_else(|| choose_modulus(s)), k.unwrap_or_else(|| default_depth(s)), args.tol)?
        }
        (c, k, Some(blocks)) => {
            let c = c.unwrap_or_else(|| choose_modulus(s));
            let k = k.unwrap_or_else(|| default_depth(s));
            let scaled = args.tol * eta_factor(c, s).norm();
            let tol = if scaled > 0.0 { scaled } else { args.tol };
            zeta_planned(s, EvalPlan::new(c, k, blocks, tol)?)?
        }
    };
    let plan = if args.blocks.is_some() { "explicit" } else { "planned" };
    let record = s_inputs(OutputRecord::new("zeta"), s).input("tol", format!("{:e}", args.tol));
    let mut record = series_record(record, &eval, ctx).detail("plan", plan);
    record.status = Some(if eval.est_error <= args.tol { "ok" } else { "above tol" }.to_string());
    record.metadata.elapsed_ms = ctx.elapsed(start);
    Ok(vec![record])
}

fn cmd_exact(args: &ExactArgs, ctx: &Ctx) -> Result<(Vec<OutputRecord>, i32), Error> {
    let start = Instant::now();
    let value = zeta_neg_int(args.m, args.c);
    let mut record = OutputRecord::new("exact").input("m", args.m).input("c", args.c.get());
    record.value = value.to_string();
    record.value_re = format_sig(value.to_f64(), ctx.digits);
    record.value_im = format_sig(0.0, ctx.digits);
    record.metadata.c = Some(args.c.get());
    let mut code = EXIT_OK;
    if args.check {
        let oracle = bernoulli_oracle(args.m);
        let matched = oracle == value;
        record.reference = Some(oracle.to_string());
        record.status = Some(if matched { "MATCH" } else { "MISMATCH" }.to_string());
        if !matched {
            code = EXIT_FAIL;
        }
    }
    record.metadata.elapsed_ms = ctx.elapsed(start);
    Ok((vec![record], code))
}

fn target_expression(id: IdentityId) -> &'static str {
    match id {
        IdentityId::Wallis => "log(pi/2)/2",
        IdentityId::First => "(2 gamma - log 2) log(2)/2",
        IdentityId::Second => "(pi^2/12) log(4 pi e^gamma / A^12)",
        IdentityId::Gen1 => "log(2 pi / 3^1.5)",
        IdentityId::Gen2 => "log(3) (gamma - log(3)/2)",
        IdentityId::Gen3 => "(pi^2/18) log(3 (2 pi e^gamma / A^12)^2)",
        IdentityId::Gen4 => "1.5 log(2 pi) - 4 log 2",
    }
}

/// Blocks `1, 2, 5, 10, 20, 50, ...` up to `N`, then the last ten.
pub fn table_blocks(blocks: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut decade = 1u64;
    'outer: loop {
        for step in [1, 2, 5] {
            match decade.checked_mul(step) {
                Some(b) if b <= blocks => out.push(b),
                _ => break 'outer,
            }
        }
        decade = match decade.checked_mul(10) {
            Some(d) => d,
            None => break,
        };
    }
    out.extend(blocks.saturating_sub(9).max(1)..=blocks);
    out.sort_unstable();
    out.dedup();
    out
}

fn cmd_verify(args: &VerifyArgs, ctx: &Ctx) -> Result<(Vec<OutputRecord>, i32), Error> {
    let start = Instant::now();
    let id: IdentityId = args.identity.parse()?;
    let tol = args.tol.unwrap_or_else(|| id.default_tol());
    let v = verify_identity(id, args.blocks, tol)?;
    let report = &v.report;
    let (c, s) = id.parameters();
    let k = derivative_depth(report.route);
    let base = OutputRecord::new("verify")
        .input("identity", id.name())
        .input("N", args.blocks)
        .input("tol", format!("{tol:e}"))
        .input("s_re", s)
        .input("s_im", 0.0);
    let block_record = |block: u64| -> Result<OutputRecord, Error> {
        let mut r = base.clone().complex_value(report.log_partial[block as usize - 1], 0.0, ctx.digits);
        r.est_error = Some(format_err(derivative_truncation_bound(c, k, Complex64::new(s, 0.0), block)?));
        r.actual_error = Some(format_err(report.gap_at(block)));
        r.status = Some("block".into());
        r.metadata = Metadata { c: Some(c.get()), k: Some(k), blocks: Some(block), elapsed_ms: None };
        Ok(r)
    };
    let mut records: Vec<OutputRecord> =
        table_blocks(args.blocks).into_iter().map(block_record).collect::<Result<_, _>>()?;

    let mut summary = base
        .clone()
        .complex_value(report.log_partial[args.blocks as usize - 1], 0.0, ctx.digits)
        .detail("route", format!("{:?}", report.route).to_lowercase())
        .detail("target", target_expression(id))
        .detail("closed_form_log", format_sig(v.closed_form_log, ctx.digits))
        .detail("closed_form_gap", format_err(v.closed_form_gap))
        .detail("gap_shrinking", v.gap_shrinking)
        .detail("rate", report.rate.map(|r| format!("{r:.3}")).unwrap_or_else(|| "n/a".into()));
    summary.est_error = Some(format_err(report.tail_bound));
    summary.actual_error = Some(format_err(report.abs_gap));
    summary.reference = Some(format_sig(report.target_log, ctx.digits));
    summary.status = Some(if v.pass { "PASS" } else { "FAIL" }.to_string());
    summary.metadata =
        Metadata { c: Some(c.get()), k: Some(k), blocks: Some(args.blocks), elapsed_ms: ctx.elapsed(start) };
    records.push(summary);
    Ok((records, if v.pass { EXIT_OK } else { EXIT_FAIL }))
}

fn derivative_depth(route: Route) -> u32 {
    match route {
        Route::Raw => 0,
        Route::Continued => 1,
    }
}

struct Cell {
    c: Modulus,
    k: u32,
    blocks: u64,
    result: Result<SeriesEvaluation, Error>,
    elapsed_ms: Option<f64>,
}

/// Highest-accuracy value available for the study reference: an independent
/// run two levels deeper than the default at `1e-14`, or else the deepest
/// successful cell.
fn study_reference(s: Complex64, cells: &[Cell]) -> Option<Complex64> {
    let c = choose_modulus(s);
    if let Ok(eval) = zeta_with(s, c, default_depth(s) + 2, 1e-14) {
        return Some(eval.value);
    }
    cells
        .iter()
        .filter_map(|cell| cell.result.as_ref().ok().map(|e| ((cell.k, cell.blocks), e.value)))
        .max_by(|a, b| a.0.cmp(&b.0))
        .map(|(_, v)| v)
}

fn cmd_study(args: &StudyArgs, ctx: &Ctx) -> Result<Vec<OutputRecord>, Error> {
    let s = args.s;
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole);
    }
    let usage = Error::InvalidParameter;
    let small = |v: u64| u32::try_from(v).map_err(|_| Error::InvalidParameter(format!("{v} is too large")));
    let moduli: Vec<Modulus> =
        parse_list(&args.c).map_err(usage)?.into_iter().map(|c| Modulus::new(small(c)?)).collect::<Result<_, _>>()?;
    let ks: Vec<u32> = parse_list(&args.k).map_err(usage)?.into_iter().map(small).collect::<Result<_, _>>()?;
    let ns: Vec<u64> = parse_list(&args.blocks).map_err(usage)?;
    if let Some(&n) = ns.iter().find(|&&n| n == 0) {
        return Err(Error::InvalidParameter(format!("block count must be >= 1, got {n}")));
    }

    let mut grid: Vec<(Modulus, u32, u64)> = Vec::with_capacity(moduli.len() * ks.len() * ns.len());
    for &c in &moduli {
        for &k in &ks {
            grid.extend(ns.iter().map(|&n| (c, k, n)));
        }
    }
    let timing = ctx.timing;
    let cells: Vec<Cell> = grid
        .into_par_iter()
        .map(|(c, k, blocks)| {
            let start = Instant::now();
            // the plan tolerance is informational when N is given
            let result = EvalPlan::new(c, k, blocks, 1.0).and_then(|plan| zeta_planned(s, plan));
            Cell { c, k, blocks, result, elapsed_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3) }
        })
        .collect();

    let reference = study_reference(s, &cells);
    let records = cells
        .iter()
        .map(|cell| {
            let base = s_inputs(OutputRecord::new("study"), s);
            let mut record = match &cell.result {
                Ok(eval) => {
                    let mut r = series_record(base, eval, ctx);
                    r.actual_error = reference.map(|v| format_err((eval.value - v).norm()));
                    r.status = Some(match eval.regime {
                        Regime::Absolute => "ok".to_string(),
                        Regime::Conditional => "conditional regime".to_string(),
                    });
                    r
                }
                Err(err) => {
                    let mut r = base;
                    r.status = Some(format!("error: {err}"));
                    r
                }
            };
            record.reference = reference.map(|v| {
                if v.im == 0.0 {
                    format_sig(v.re, ctx.digits)
                } else {
                    format!("{},{}", format_sig(v.re, ctx.digits), format_sig(v.im, ctx.digits))
                }
            });
            record.metadata = Metadata {
                c: Some(cell.c.get()),
                k: Some(cell.k),
                blocks: Some(cell.blocks),
                elapsed_ms: cell.elapsed_ms,
            };
            record
        })
        .collect();
    Ok(records)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let text = err.render().to_string();
            return match err.exit_code() {
                0 => Outcome { stdout: text, stderr: String::new(), code: EXIT_OK },
                _ => Outcome { stdout: String::new(), stderr: text, code: EXIT_USAGE },
            };
        }
    };
    let ctx = Ctx { digits: cli.output.digits as usize, timing: cli.output.timing };
    let result = match &cli.command {
        Command::Zeta(a) => cmd_zeta(a, &ctx).map(|r| (r, EXIT_OK)),
        Command::Exact(a) => cmd_exact(a, &ctx),
        Command::Verify(a) => cmd_verify(a, &ctx),
        Command::Study(a) => cmd_study(a, &ctx).map(|r| (r, EXIT_OK)),
    };
    let (records, code) = match result {
        Ok(ok) => ok,
        Err(err) => {
            return Outcome { stdout: String::new(), stderr: format!("error: {err}\n"), code: exit_code(&err) };
        }
    };
    let text = render(&records, cli.output.format());
    match &cli.output.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { stdout: String::new(), stderr: String::new(), code },
            Err(err) => Outcome {
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {err}\n", path.display()),
                code: EXIT_FAIL,
            },
        },
        None => Outcome { stdout: text, stderr: String::new(), code },
    }
}
