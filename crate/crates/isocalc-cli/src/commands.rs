//! The subcommands. Each validates its arguments, drives the library,
//! and returns a [`Report`] of preformatted cells plus an exit code.

use std::time::Instant;

use isocalc::constants::{self, ConstantId};
use isocalc::log_power_derivatives as lpd;
use isocalc::scale_grid::{extreme_convergence_probe, Domain, RealFunction};
use isocalc::{Error, PrecisionCtx, PrecisionReal, SeriesResult};

use crate::cache::{Cache, CacheEntry};
use crate::config::Settings;
use crate::error::CliError;
use crate::output::{Report, DOMAIN_MARK, EMPTY_MARK};

pub const DEFAULT_CONSTANT_DIGITS: u32 = 30;
pub const DEFAULT_TABLE_DIGITS: u32 = 12;

/// Row cap for the derivatives table.
const MAX_TABLE_ROWS: u64 = 10_000;
/// Gap cap for the grid probe; far beyond any step the working precision
/// can resolve, but keeps `b^-m` construction cheap.
const MAX_GRID_GAP: u32 = 4_000;

/// Error columns print at this many significant digits.
const ERROR_DIGITS: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum GridFn {
    Ln,
    Ln2,
    Ln3,
}

impl GridFn {
    fn exponent(self) -> u32 {
        match self {
            GridFn::Ln => 1,
            GridFn::Ln2 => 2,
            GridFn::Ln3 => 3,
        }
    }

    fn flag_name(self) -> &'static str {
        match self {
            GridFn::Ln => "ln",
            GridFn::Ln2 => "ln2",
            GridFn::Ln3 => "ln3",
        }
    }
}

fn now_rfc3339() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_else(|_| "unknown".into())
}

fn finish(mut report: Report, started: Instant, settings: &Settings) -> Report {
    if !settings.no_timestamp {
        report.generated = Some(now_rfc3339());
        report.wall_ms = Some(format!("{:.1}", started.elapsed().as_secs_f64() * 1e3));
    }
    report
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn cmd_constants(
    ks: &[u32],
    lambda1: bool,
    e_threshold: Option<&str>,
    settings: &Settings,
) -> Result<(Report, i32), CliError> {
    if ks.is_empty() && !lambda1 && e_threshold.is_none() {
        return Err(usage(
            "nothing to compute: pass --k, --lambda1, or --e-threshold",
        ));
    }
    let started = Instant::now();
    let digits = settings.digits_or(DEFAULT_CONSTANT_DIGITS);
    let mut cache = settings.cache.as_deref().map(Cache::open);

    let mut rows = Vec::new();
    for &k in ks {
        rows.push(constant_row(
            ConstantId::Gamma(k),
            digits,
            &mut cache,
            || constants::gamma(k, digits),
        )?);
        rows.push(constant_row(
            ConstantId::GammaPrime(k),
            digits,
            &mut cache,
            || constants::gamma_prime(k, digits),
        )?);
    }
    if lambda1 {
        rows.push(constant_row(
            ConstantId::Lambda1,
            digits,
            &mut cache,
            || constants::lambda1(digits),
        )?);
    }
    if let Some(eps_text) = e_threshold {
        rows.push(threshold_row(eps_text, digits, settings, &mut cache)?);
    }
    if let Some(c) = &cache {
        c.save()?;
    }

    let mut inputs = Vec::new();
    if !ks.is_empty() {
        inputs.push(("k".into(), join_u32(ks)));
    }
    if lambda1 {
        inputs.push(("lambda1".into(), "true".into()));
    }
    if let Some(eps) = e_threshold {
        inputs.push(("e_threshold".into(), eps.to_string()));
    }
    inputs.push(("digits".into(), digits.to_string()));

    let report = Report {
        command: "constants".into(),
        inputs,
        columns: vec![
            "constant",
            "digits",
            "value",
            "error_bound",
            "method",
            "terms",
            "cached",
        ],
        truncated: vec!["value"],
        rows,
        generated: None,
        wall_ms: None,
    };
    Ok((finish(report, started, settings), 0))
}

/// Cache key for a constant: the kind tag and the k-or-epsilon field.
fn cache_key(id: &ConstantId) -> (&'static str, String) {
    match id {
        ConstantId::Gamma(k) => ("gamma", k.to_string()),
        ConstantId::GammaPrime(k) => ("gamma_prime", k.to_string()),
        ConstantId::Lambda1 => ("lambda1", EMPTY_MARK.into()),
        ConstantId::EThreshold(eps) => ("e_threshold", eps.clone()),
    }
}

fn constant_row(
    id: ConstantId,
    digits: u32,
    cache: &mut Option<Cache>,
    compute: impl FnOnce() -> isocalc::Result<SeriesResult>,
) -> Result<Vec<String>, CliError> {
    let (kind, param) = cache_key(&id);
    if let Some(hit) = cache.as_ref().and_then(|c| c.get(kind, &param, digits)) {
        return Ok(vec![
            id.label(),
            digits.to_string(),
            hit.value.clone(),
            hit.bound.clone(),
            hit.method.clone(),
            EMPTY_MARK.into(),
            "true".into(),
        ]);
    }
    let r = compute()?;
    let value = r.value.to_decimal(digits);
    let bound = r.error_bound.to_sci(3);
    let method = r.method.as_str().to_string();
    if let Some(c) = cache.as_mut() {
        c.put(CacheEntry {
            kind: kind.into(),
            param,
            digits,
            value: value.clone(),
            bound: bound.clone(),
            method: method.clone(),
            stamp: now_rfc3339(),
        });
    }
    Ok(vec![
        id.label(),
        digits.to_string(),
        value,
        bound,
        method,
        r.terms_used.to_string(),
        "false".into(),
    ])
}

fn threshold_row(
    eps_text: &str,
    digits: u32,
    settings: &Settings,
    cache: &mut Option<Cache>,
) -> Result<Vec<String>, CliError> {
    let id = ConstantId::EThreshold(eps_text.to_string());
    let (kind, param) = cache_key(&id);
    if let Some(hit) = cache.as_ref().and_then(|c| c.get(kind, &param, digits)) {
        return Ok(vec![
            id.label(),
            digits.to_string(),
            hit.value.clone(),
            hit.bound.clone(),
            hit.method.clone(),
            EMPTY_MARK.into(),
            "true".into(),
        ]);
    }
    let ctx = PrecisionCtx::new(digits)?;
    let eps = PrecisionReal::parse(eps_text, &ctx).map_err(|_| {
        usage(format!(
            "--e-threshold: `{eps_text}` is not a decimal tolerance"
        ))
    })?;
    let t = constants::e_threshold_with_cap(&eps, settings.threshold_cap(), &ctx)?;
    // The achieved gap doubles as the bound column; it certifies the hit.
    let gap = constants::e_gap(t, &ctx)?;
    let value = t.to_string();
    let bound = gap.to_sci(3);
    if let Some(c) = cache.as_mut() {
        c.put(CacheEntry {
            kind: kind.into(),
            param,
            digits,
            value: value.clone(),
            bound: bound.clone(),
            method: "search".into(),
            stamp: now_rfc3339(),
        });
    }
    Ok(vec![
        id.label(),
        digits.to_string(),
        value,
        bound,
        "search".into(),
        EMPTY_MARK.into(),
        "false".into(),
    ])
}

pub fn cmd_verify(settings: &Settings) -> Result<(Report, i32), CliError> {
    let started = Instant::now();
    let digits = settings.digits_or(DEFAULT_TABLE_DIGITS);
    let reports = constants::verify_identities(digits)?;
    let all_pass = reports.iter().all(|r| r.pass);
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.name.clone(),
                r.lhs.to_decimal(digits),
                r.rhs.to_decimal(digits),
                r.residual.to_sci(3),
                r.tolerance.to_sci(3),
                r.pass.to_string(),
            ]
        })
        .collect();
    let report = Report {
        command: "verify".into(),
        inputs: vec![("digits".into(), digits.to_string())],
        columns: vec!["identity", "lhs", "rhs", "residual", "tolerance", "pass"],
        truncated: vec!["lhs", "rhs"],
        rows,
        generated: None,
        wall_ms: None,
    };
    let code = if all_pass { 0 } else { 1 };
    Ok((finish(report, started, settings), code))
}

/// A table cell that tolerates out-of-domain points: backward derivatives
/// fail at x = 1, and the row must say so rather than abort.
fn domain_cell(
    value: isocalc::Result<PrecisionReal>,
    render: impl Fn(&PrecisionReal) -> String,
) -> Result<String, CliError> {
    match value {
        Ok(v) => Ok(render(&v)),
        Err(Error::Domain(_)) => Ok(DOMAIN_MARK.into()),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_derivatives(
    k: u32,
    x_start: u64,
    x_end: u64,
    settings: &Settings,
) -> Result<(Report, i32), CliError> {
    if x_start < 1 {
        return Err(usage("--x-start must be >= 1"));
    }
    if x_end < x_start {
        return Err(usage("--x-end must be >= --x-start"));
    }
    if x_end - x_start + 1 > MAX_TABLE_ROWS {
        return Err(usage(format!(
            "range holds {} rows; the table caps at {MAX_TABLE_ROWS}",
            x_end - x_start + 1
        )));
    }
    let started = Instant::now();
    let digits = settings.digits_or(DEFAULT_TABLE_DIGITS);
    let ctx = PrecisionCtx::new(digits)?;
    let dec = |v: &PrecisionReal| v.to_decimal(digits);
    let sci = |v: &PrecisionReal| v.to_sci(ERROR_DIGITS);

    let mut rows = Vec::new();
    for x in x_start..=x_end {
        rows.push(vec![
            x.to_string(),
            lpd::exact_forward(k, x, &ctx)?.to_decimal(digits),
            lpd::approx_forward(k, x, &ctx)?.to_decimal(digits),
            lpd::forward_term_error(k, x, &ctx)?.to_sci(ERROR_DIGITS),
            domain_cell(lpd::exact_backward(k, x, &ctx), dec)?,
            domain_cell(lpd::approx_backward(k, x, &ctx), dec)?,
            domain_cell(lpd::backward_term_error(k, x, &ctx), sci)?,
        ]);
    }
    let report = Report {
        command: "derivatives".into(),
        inputs: vec![
            ("k".into(), k.to_string()),
            ("x_start".into(), x_start.to_string()),
            ("x_end".into(), x_end.to_string()),
            ("digits".into(), digits.to_string()),
        ],
        columns: vec![
            "x",
            "exact_fwd",
            "approx_fwd",
            "fwd_error",
            "exact_bwd",
            "approx_bwd",
            "bwd_error",
        ],
        truncated: vec!["exact_fwd", "approx_fwd", "exact_bwd", "approx_bwd"],
        rows,
        generated: None,
        wall_ms: None,
    };
    Ok((finish(report, started, settings), 0))
}

pub fn cmd_grid(
    function: GridFn,
    x: u64,
    base: u32,
    m_list: &[u32],
    settings: &Settings,
) -> Result<(Report, i32), CliError> {
    if x < 1 {
        return Err(usage("--x must be >= 1"));
    }
    if base < 2 {
        return Err(usage("--base must be >= 2"));
    }
    if let Some(m) = m_list.iter().find(|m| **m > MAX_GRID_GAP) {
        return Err(usage(format!(
            "--m-list entry {m} exceeds the cap {MAX_GRID_GAP}"
        )));
    }
    let started = Instant::now();
    let digits = settings.digits_or(DEFAULT_TABLE_DIGITS);
    let ctx = PrecisionCtx::new(digits)?;
    let k = function.exponent();

    let f = RealFunction::ln_power(k);
    let derivative = RealFunction::new(
        format!("{k}*ln^{}(x)/x", k - 1),
        Domain::GreaterThan(0),
        move |v, c| {
            let ln = v.ln(c)?;
            Ok(ln.powi((k - 1) as u64, c).mul_u64(k as u64, c).div(v, c))
        },
    );
    let x_real = PrecisionReal::from_u64(x, &ctx);
    let reference = derivative.eval(&x_real, &ctx)?.to_decimal(digits);
    let probe = extreme_convergence_probe(&f, &derivative, &x_real, base, m_list, &ctx)?;

    let mut rows = Vec::new();
    let mut prev: Option<PrecisionReal> = None;
    for row in probe {
        let ratio = match &prev {
            Some(p) if !p.is_zero() => row.abs_error.div(p, &ctx).to_decimal(6),
            _ => EMPTY_MARK.into(),
        };
        rows.push(vec![
            row.gap.to_string(),
            row.quotient.to_decimal(digits),
            reference.clone(),
            row.abs_error.to_sci(ERROR_DIGITS),
            ratio,
        ]);
        prev = Some(row.abs_error);
    }
    let report = Report {
        command: "grid".into(),
        inputs: vec![
            ("function".into(), function.flag_name().into()),
            ("x".into(), x.to_string()),
            ("base".into(), base.to_string()),
            ("m_list".into(), join_u32(m_list)),
            ("digits".into(), digits.to_string()),
        ],
        columns: vec!["m", "quotient", "derivative", "abs_error", "error_ratio"],
        truncated: vec!["quotient", "derivative"],
        rows,
        generated: None,
        wall_ms: None,
    };
    Ok((finish(report, started, settings), 0))
}

pub fn cmd_residuals(k: u32, n_max: u64, settings: &Settings) -> Result<(Report, i32), CliError> {
    if n_max < 1 {
        return Err(usage("--n-max must be >= 1"));
    }
    let cap = settings.residual_cap();
    if n_max > cap {
        return Err(usage(format!(
            "--n-max {n_max} exceeds the sweep budget {cap}; raise max_terms in the config"
        )));
    }
    let started = Instant::now();
    let digits = settings.digits_or(DEFAULT_TABLE_DIGITS);
    let rows = constants::barrow_residual_table(k, n_max, digits)?
        .into_iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                r.approx_partial.to_decimal(digits),
                r.normalizer.to_decimal(digits),
                r.residual.to_decimal(digits),
            ]
        })
        .collect();
    let report = Report {
        command: "residuals".into(),
        inputs: vec![
            ("k".into(), k.to_string()),
            ("n_max".into(), n_max.to_string()),
            ("digits".into(), digits.to_string()),
        ],
        columns: vec!["n", "approx_partial", "normalizer", "residual"],
        truncated: vec!["approx_partial", "normalizer", "residual"],
        rows,
        generated: None,
        wall_ms: None,
    };
    Ok((finish(report, started, settings), 0))
}

fn join_u32(values: &[u32]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
