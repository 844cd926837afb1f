//! Summation engine: direct partial sums with a doubling-window stopping
//! rule, Richardson extrapolation of telescoped sequences, and
//! Euler-Maclaurin tail correction for log-moment series.
//!
//! Every entry point returns a [`SeriesResult`] carrying the value, an
//! error bound, the number of terms consumed and the method that produced
//! it. Bounds are estimates backed by tests against independently known
//! limits, not interval arithmetic.

mod bernoulli;
mod logpoly;
mod parallel;

pub use bernoulli::bernoulli;
pub(crate) use parallel::blocked_try_sum;

use std::fmt;

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::precision::{PrecisionCtx, PrecisionReal};

use logpoly::{EvalPoint, LogPoly};

/// How a series value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumMethod {
    Direct,
    Richardson,
    EulerMaclaurin,
    /// Two independent routes agreed; the better-bounded value is returned.
    Composite,
}

impl SumMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SumMethod::Direct => "direct",
            SumMethod::Richardson => "richardson",
            SumMethod::EulerMaclaurin => "euler_maclaurin",
            SumMethod::Composite => "composite",
        }
    }
}

impl fmt::Display for SumMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of an infinite-sum evaluation.
#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub value: PrecisionReal,
    /// Claimed bound on |value - true limit|; always >= 0.
    pub error_bound: PrecisionReal,
    pub terms_used: u64,
    pub method: SumMethod,
}

impl fmt::Display for SeriesResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ± {} ({}, {} terms)",
            self.value,
            self.error_bound.to_sci(3),
            self.method,
            self.terms_used
        )
    }
}

/// Knobs for the summation strategies.
#[derive(Clone, Copy, Debug)]
pub struct TailPolicy {
    /// Decimal digits the stopping estimate must reach.
    pub target_digits: u32,
    /// Cap on consumed terms (for Richardson: on the largest sample index).
    pub max_terms: u64,
    /// Euler-Maclaurin order: twice the number of Bernoulli correction
    /// terms. Must be even and >= 2.
    pub euler_maclaurin_order: u32,
}

impl TailPolicy {
    /// Defaults sized for a `digits`-digit result.
    pub fn for_digits(digits: u32) -> Self {
        Self {
            target_digits: digits,
            max_terms: 50_000_000,
            euler_maclaurin_order: (digits / 2 + 10).next_multiple_of(2).min(120),
        }
    }

    pub fn with_max_terms(mut self, max_terms: u64) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn with_em_order(mut self, order: u32) -> Self {
        assert!(order >= 2 && order % 2 == 0, "order must be even and >= 2");
        self.euler_maclaurin_order = order;
        self
    }

    fn validate(&self, ctx: &PrecisionCtx) -> Result<()> {
        if self.target_digits == 0
            || self.target_digits > ctx.digits() + crate::precision::GUARD_DIGITS
        {
            return Err(Error::InvalidParameter(format!(
                "target_digits {} incompatible with a {}-digit context",
                self.target_digits,
                ctx.digits()
            )));
        }
        if self.euler_maclaurin_order < 2 || self.euler_maclaurin_order % 2 != 0 {
            return Err(Error::InvalidParameter(
                "euler_maclaurin_order must be even and >= 2".into(),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// direct summation
// ---------------------------------------------------------------------------

/// Sums `term(x)` for `x >= start` until the doubling-window Cauchy
/// estimate `|sum_{x=N+1}^{2N} term(x)|` drops below `10^-target_digits`.
///
/// The returned value is the partial sum to `N`; the window that satisfied
/// the estimate contributes only to the error bound. Windows are evaluated
/// with the deterministic blocked reduction, so results do not depend on
/// the thread count.
pub fn direct_sum<F>(
    term: F,
    start: u64,
    policy: &TailPolicy,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult>
where
    F: Fn(u64, &PrecisionCtx) -> Result<PrecisionReal> + Sync,
{
    policy.validate(ctx)?;
    let tol = PrecisionReal::pow10(-(policy.target_digits as i64), ctx);
    let floor_bound = PrecisionReal::pow10(-((ctx.digits() + 8) as i64), ctx);

    let sum_range = |a: u64, b: u64| -> Result<PrecisionReal> {
        blocked_try_sum(a, b, ctx, |lo, hi, c| {
            let mut acc = PrecisionReal::zero(c);
            for x in lo..=hi {
                acc = acc.add(&term(x, c)?, c);
            }
            Ok(acc)
        })
    };

    // minimum term count before the estimate may stop the sum
    let mut n_end = start.max(1) + 15;
    let mut total = sum_range(start, n_end)?;
    loop {
        let next_end = n_end
            .checked_mul(2)
            .ok_or_else(|| Error::InvalidParameter("window end overflows u64".into()))?;
        let window = sum_range(n_end + 1, next_end)?;
        let consumed = next_end - start + 1;
        if window.abs().lt(&tol) {
            let bound = window.abs().mul_u64(4, ctx).add(&floor_bound, ctx);
            return Ok(SeriesResult {
                value: total,
                error_bound: bound,
                terms_used: consumed,
                method: SumMethod::Direct,
            });
        }
        total = total.add(&window, ctx);
        n_end = next_end;
        if consumed > policy.max_terms {
            let bound = window.abs().mul_u64(4, ctx).add(&floor_bound, ctx);
            let best = SeriesResult {
                value: total.clone(),
                error_bound: bound.clone(),
                terms_used: consumed,
                method: SumMethod::Direct,
            };
            return Err(Error::NonConvergence {
                max_terms: policy.max_terms,
                value: best.value.to_sci(best.value.digits().min(20)),
                bound: bound.to_sci(3),
                best: Box::new(best),
            });
        }
    }
}

// ---------------------------------------------------------------------------
// Euler-Maclaurin summation
// ---------------------------------------------------------------------------

// Stirling's approximation, good to ~1e-3 for z >= 2. Only used to pick a
// head length, never in the value or the bound.
fn lgamma(z: f64) -> f64 {
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * z)
}

// log10 of the estimated first omitted correction term for
// sum ln^a x / x^j truncated after `pairs` Bernoulli pairs at head N.
fn em_omitted_log10(a: u32, j: u32, pairs: u32, n: f64) -> f64 {
    let m = (pairs + 1) as f64;
    let jf = j as f64;
    let af = a as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let lnn = n.ln();
    let ln_lnn = lnn.max(1.0).ln();
    let lg_ratio = lgamma(jf + 2.0 * m - 1.0) - lgamma(jf.max(1.0));
    (2f64.ln() - 2.0 * m * two_pi.ln() + lg_ratio + af * ln_lnn - (jf + 2.0 * m - 1.0) * lnn)
        / std::f64::consts::LN_10
}

fn choose_em_head(a: u32, j: u32, pairs: u32, target: u32, max_terms: u64) -> u64 {
    let mut n = 24f64;
    while em_omitted_log10(a, j, pairs, n) > -((target + 4) as f64) && (n as u64) < max_terms {
        n *= 1.3;
    }
    (n as u64).clamp(16, max_terms.max(16))
}

// f(N)/2 - sum_{m=1..pairs} B_2m/(2m)! f^(2m-1)(N), plus the magnitude of
// the first omitted term.
fn em_correction(
    f: &LogPoly,
    at: &EvalPoint,
    pairs: u32,
    ctx: &PrecisionCtx,
) -> (PrecisionReal, PrecisionReal) {
    let mut corr = f.eval(at, ctx).div_u64(2, ctx);
    let mut deriv = f.clone();
    let mut fact = BigInt::one();
    for m in 1..=pairs {
        deriv = deriv.derivative();
        fact *= BigInt::from(2 * m - 1) * BigInt::from(2 * m);
        let coeff = bernoulli(2 * m as usize) / BigRational::from(fact.clone());
        let term = PrecisionReal::from_ratio(&coeff, ctx).mul(&deriv.eval(at, ctx), ctx);
        corr = corr.sub(&term, ctx);
        deriv = deriv.derivative();
    }
    deriv = deriv.derivative();
    fact *= BigInt::from(2 * pairs + 1) * BigInt::from(2 * pairs + 2);
    let coeff = bernoulli(2 * (pairs + 1) as usize) / BigRational::from(fact);
    let omitted = PrecisionReal::from_ratio(&coeff, ctx)
        .mul(&deriv.eval(at, ctx), ctx)
        .abs();
    (corr, omitted)
}

fn head_sum(a: u32, j: u32, n_end: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    // x = 1 contributes 1 when a = 0, otherwise ln(1) kills it
    let x1 = if a == 0 {
        PrecisionReal::one(ctx)
    } else {
        PrecisionReal::zero(ctx)
    };
    let rest = blocked_try_sum(2, n_end, ctx, |lo, hi, c| {
        let mut acc = PrecisionReal::zero(c);
        for x in lo..=hi {
            let xf = PrecisionReal::from_u64(x, c);
            let num = xf.ln(c)?.powi(a as u64, c);
            acc = acc.add(&num.div(&xf.powi(j as u64, c), c), c);
        }
        Ok(acc)
    })?;
    Ok(x1.add(&rest, ctx))
}

/// `sum_{x=1}^inf ln^a(x) / x^j` for `j >= 2`: direct head plus
/// Euler-Maclaurin tail, error bounded by first omitted correction term.
pub fn log_moment_sum(
    a: u32,
    j: u32,
    policy: &TailPolicy,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    policy.validate(ctx)?;
    if j < 2 {
        return Err(Error::Divergence(format!(
            "sum of ln^{a}(x)/x^{j} needs j >= 2"
        )));
    }
    let pairs = policy.euler_maclaurin_order / 2;
    let mut n = choose_em_head(a, j, pairs, policy.target_digits, policy.max_terms);
    let mut last: Option<SeriesResult> = None;
    for _ in 0..6 {
        let r = log_moment_sum_at(a, j, n, policy, ctx)?;
        let ok = r
            .error_bound
            .lt(&PrecisionReal::pow10(-(policy.target_digits as i64), ctx));
        last = Some(r);
        if ok {
            return Ok(last.expect("just set"));
        }
        if n >= policy.max_terms {
            break;
        }
        n = (n * 2).min(policy.max_terms);
    }
    let best = last.expect("at least one attempt");
    Err(Error::NonConvergence {
        max_terms: policy.max_terms,
        value: best.value.to_sci(best.value.digits().min(20)),
        bound: best.error_bound.to_sci(3),
        best: Box::new(best),
    })
}

/// Same as [`log_moment_sum`] with the head length pinned. Exposed for
/// calibration and the order-monotonicity tests.
pub fn log_moment_sum_at(
    a: u32,
    j: u32,
    head_n: u64,
    policy: &TailPolicy,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    policy.validate(ctx)?;
    if j < 2 {
        return Err(Error::Divergence(format!(
            "sum of ln^{a}(x)/x^{j} needs j >= 2"
        )));
    }
    let pairs = policy.euler_maclaurin_order / 2;
    let n = head_n.max(4);
    let head = head_sum(a, j, n - 1, ctx)?;
    let f = LogPoly::monomial(a, j);
    let at = EvalPoint::new(n, a, j + 2 * pairs + 1, ctx)?;
    let integral = f.integral_to_infinity()?.eval(&at, ctx);
    let (corr, omitted) = em_correction(&f, &at, pairs, ctx);
    let value = head.add(&integral, ctx).add(&corr, ctx);
    let floor_bound = PrecisionReal::pow10(-((ctx.digits() + 8) as i64), ctx);
    let bound = omitted.mul_u64(2, ctx).add(&floor_bound, ctx);
    Ok(SeriesResult {
        value,
        error_bound: bound,
        terms_used: n - 1 + pairs as u64,
        method: SumMethod::EulerMaclaurin,
    })
}

/// `lim_{N->inf} [sum_{x=1}^N ln^a(x)/x - ln^(a+1)(N)/(a+1)]` via
/// Euler-Maclaurin on the partial sums. `a = 0` is the classical Euler
/// constant.
pub fn stieltjes_like_limit(
    a: u32,
    policy: &TailPolicy,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    policy.validate(ctx)?;
    let pairs = policy.euler_maclaurin_order / 2;
    let mut n = choose_em_head(a, 1, pairs, policy.target_digits, policy.max_terms);
    let mut last: Option<SeriesResult> = None;
    for _ in 0..6 {
        let r = stieltjes_like_limit_at(a, n, policy, ctx)?;
        let ok = r
            .error_bound
            .lt(&PrecisionReal::pow10(-(policy.target_digits as i64), ctx));
        last = Some(r);
        if ok {
            return Ok(last.expect("just set"));
        }
        if n >= policy.max_terms {
            break;
        }
        n = (n * 2).min(policy.max_terms);
    }
    let best = last.expect("at least one attempt");
    Err(Error::NonConvergence {
        max_terms: policy.max_terms,
        value: best.value.to_sci(best.value.digits().min(20)),
        bound: best.error_bound.to_sci(3),
        best: Box::new(best),
    })
}

/// [`stieltjes_like_limit`] with the head length pinned.
pub fn stieltjes_like_limit_at(
    a: u32,
    head_n: u64,
    policy: &TailPolicy,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    policy.validate(ctx)?;
    let pairs = policy.euler_maclaurin_order / 2;
    let n = head_n.max(4);
    let head = head_sum(a, 1, n - 1, ctx)?;
    let f = LogPoly::monomial(a, 1);
    let at = EvalPoint::new(n, a + 1, 2 * pairs + 2, ctx)?;
    // the normalizer ln^(a+1)(N)/(a+1) replaces the divergent integral
    let normalizer = at.ln_power(a + 1).div_u64((a + 1) as u64, ctx);
    let (corr, omitted) = em_correction(&f, &at, pairs, ctx);
    let value = head.sub(&normalizer, ctx).add(&corr, ctx);
    let floor_bound = PrecisionReal::pow10(-((ctx.digits() + 8) as i64), ctx);
    let bound = omitted.mul_u64(2, ctx).add(&floor_bound, ctx);
    Ok(SeriesResult {
        value,
        error_bound: bound,
        terms_used: n - 1 + pairs as u64,
        method: SumMethod::EulerMaclaurin,
    })
}

// ---------------------------------------------------------------------------
// Richardson extrapolation
// ---------------------------------------------------------------------------

/// One asymptotic basis function `ln^log_pow(N) / N^inv_pow`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisTerm {
    pub inv_pow: u32,
    pub log_pow: u32,
}

impl BasisTerm {
    /// `1/N, 1/N^2, ..., 1/N^depth`.
    pub fn inverse_powers(depth: u32) -> Vec<Self> {
        (1..=depth)
            .map(|i| Self {
                inv_pow: i,
                log_pow: 0,
            })
            .collect()
    }

    /// `ln^j(N)/N^i` for `i = 1..=depth`, `j = 0..=max_log`.
    pub fn log_family(depth: u32, max_log: u32) -> Vec<Self> {
        let mut v = Vec::new();
        for i in 1..=depth {
            for j in 0..=max_log {
                v.push(Self {
                    inv_pow: i,
                    log_pow: j,
                });
            }
        }
        v
    }
}

const RICHARDSON_WINDOW: u64 = 64;

/// Geometric sample schedule ending exactly at `n_max`.
pub(crate) fn sample_points(n_max: u64, count: usize) -> Result<Vec<u64>> {
    let n_min = (n_max / RICHARDSON_WINDOW).max(8);
    if count < 2 || n_min + count as u64 >= n_max {
        return Err(Error::InvalidParameter(format!(
            "cannot place {count} distinct samples in [{n_min}, {n_max}]"
        )));
    }
    let ratio = (n_max as f64 / n_min as f64).powf(1.0 / (count as f64 - 1.0));
    let mut pts = Vec::with_capacity(count);
    let mut prev = 0u64;
    for i in 0..count {
        let ideal = (n_min as f64 * ratio.powi(i as i32)).round() as u64;
        let p = ideal.max(prev + 1).min(n_max);
        pts.push(p);
        prev = p;
    }
    *pts.last_mut().expect("count >= 2") = n_max;
    if pts[count - 1] <= pts[count - 2] {
        return Err(Error::InvalidParameter(
            "sample schedule collapsed at the top end".into(),
        ));
    }
    Ok(pts)
}

// Gaussian elimination with partial pivoting over raw BigFloat at `bits`.
fn solve_dense(mut m: Vec<Vec<BigFloat>>, bits: usize) -> Result<Vec<BigFloat>> {
    let rm = astro_float::RoundingMode::ToEven;
    let n = m.len();
    for col in 0..n {
        let mut pivot = col;
        for row in (col + 1)..n {
            if m[row][col].abs().partial_cmp(&m[pivot][col].abs())
                == Some(std::cmp::Ordering::Greater)
            {
                pivot = row;
            }
        }
        if m[pivot][col].is_zero() {
            return Err(Error::Extrapolation("singular sample matrix".into()));
        }
        m.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = m[row][col].div(&m[col][col], bits, rm);
            for k in col..=n {
                let adj = factor.mul(&m[col][k], bits, rm);
                m[row][k] = m[row][k].sub(&adj, bits, rm);
            }
        }
    }
    let mut sol = vec![BigFloat::from_u64(0, bits); n];
    for col in (0..n).rev() {
        let mut acc = m[col][n].clone();
        for k in (col + 1)..n {
            acc = acc.sub(&m[col][k].mul(&sol[k], bits, rm), bits, rm);
        }
        sol[col] = acc.div(&m[col][col], bits, rm);
    }
    Ok(sol)
}

// Fit limit + coefficients for `basis[..depth]` using the `depth + 1`
// largest samples; returns the limit. depth = 0 returns the top sample.
fn fit_limit(
    samples: &[(u64, PrecisionReal)],
    basis: &[BasisTerm],
    depth: usize,
    solve_ctx: &PrecisionCtx,
) -> Result<PrecisionReal> {
    if depth == 0 {
        return Ok(samples.last().expect("samples nonempty").1.clone());
    }
    let rows = &samples[samples.len() - (depth + 1)..];
    let bits = solve_ctx.bits();
    let max_log = basis[..depth].iter().map(|b| b.log_pow).max().unwrap_or(0);
    let max_inv = basis[..depth].iter().map(|b| b.inv_pow).max().unwrap_or(0);
    let mut matrix = Vec::with_capacity(depth + 1);
    for (n, y) in rows {
        let at = EvalPoint::new(*n, max_log, max_inv, solve_ctx)?;
        let mut row = Vec::with_capacity(depth + 2);
        row.push(BigFloat::from_u64(1, bits));
        for b in &basis[..depth] {
            let v = at
                .ln_power(b.log_pow)
                .mul(&at.inv_power(b.inv_pow), solve_ctx);
            row.push(v.raw().clone());
        }
        row.push(y.raw().clone());
        matrix.push(row);
    }
    let sol = solve_dense(matrix, bits)?;
    Ok(PrecisionReal::from_raw(sol[0].clone(), solve_ctx.digits()))
}

/// Extrapolates a prepared sample set. The error estimate is the delta
/// between the full-basis fit and fits with the weakest basis terms
/// removed; a growing delta above the target is rejected.
pub(crate) fn richardson_from_samples(
    samples: &[(u64, PrecisionReal)],
    basis: &[BasisTerm],
    policy: &TailPolicy,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    let len = basis.len();
    if len == 0 {
        return Err(Error::InvalidParameter("empty extrapolation basis".into()));
    }
    if samples.len() < len + 1 {
        return Err(Error::InvalidParameter(format!(
            "{} samples cannot determine {len} basis coefficients plus a limit",
            samples.len()
        )));
    }
    let solve_ctx = ctx.boost(24 + 2 * len as u32);
    let l_full = fit_limit(samples, basis, len, &solve_ctx)?;
    let l_m1 = fit_limit(samples, basis, len - 1, &solve_ctx)?;
    let l_m2 = fit_limit(samples, basis, len.saturating_sub(2), &solve_ctx)?;
    let d1 = l_m1.sub(&l_m2, &solve_ctx).abs();
    let d2 = l_full.sub(&l_m1, &solve_ctx).abs();
    let tol = PrecisionReal::pow10(-(policy.target_digits as i64), ctx);
    if d2.gt(&d1) && d2.gt(&tol) {
        return Err(Error::Extrapolation(format!(
            "deltas grew from {} to {} while above the 1e-{} target",
            d1.to_sci(3),
            d2.to_sci(3),
            policy.target_digits
        )));
    }
    let floor_bound = PrecisionReal::pow10(-((ctx.digits() + 8) as i64), ctx);
    let bound = d2.mul_u64(2, ctx).add(&floor_bound, ctx).retag(ctx);
    Ok(SeriesResult {
        value: l_full.retag(ctx),
        error_bound: bound,
        terms_used: samples.last().expect("nonempty").0,
        method: SumMethod::Richardson,
    })
}

/// Extrapolates `sequence(N)` to its limit over the supplied asymptotic
/// basis. Samples are taken on a geometric schedule up to
/// `policy.max_terms`, in ascending order, so a stateful sequence closure
/// can extend a running partial sum instead of recomputing it.
pub fn richardson_limit<F>(
    mut sequence: F,
    basis: &[BasisTerm],
    policy: &TailPolicy,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult>
where
    F: FnMut(u64, &PrecisionCtx) -> Result<PrecisionReal>,
{
    policy.validate(ctx)?;
    if basis.is_empty() {
        return Err(Error::InvalidParameter("empty extrapolation basis".into()));
    }
    let pts = sample_points(policy.max_terms, basis.len() + 1)?;
    let mut samples = Vec::with_capacity(pts.len());
    for n in pts {
        samples.push((n, sequence(n, ctx)?));
    }
    richardson_from_samples(&samples, basis, policy, ctx)
}
