//! The Euler constant family and the identities connecting it.
//!
//! `gamma_k` is the total forward term error of `ln^k`, `gamma'_k` the
//! backward one. Each constant is computed twice: a production path that
//! Richardson-extrapolates telescoped partial sums, and an oracle path
//! that rebuilds the constant from Stieltjes-like limits and log-moment
//! sums. The two must agree within their combined error bounds or the
//! computation is rejected.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;

use crate::error::{Error, Result};
use crate::log_power_derivatives::{
    backward_term_error_with_gap, forward_term_error_with_gap, GapSeries,
};
use crate::precision::{PrecisionCtx, PrecisionReal};
use crate::series_engine::{
    log_moment_sum, richardson_from_samples, sample_points, stieltjes_like_limit, BasisTerm,
    SeriesResult, SumMethod, TailPolicy,
};

/// Extra digits targeted internally so the requested digits survive
/// truncation when printed.
const EXTRA_TARGET: u32 = 2;

/// The running logarithm in a sweep is rebuilt from scratch this often,
/// so additive rounding drift stays bounded by a few ulps regardless of
/// the sweep length.
const LN_REFRESH: u64 = 4096;

/// Default search cap for [`e_threshold`]. The gap behaves like `e/(2t)`,
/// so this covers requests down to roughly `1e-12`.
pub const E_THRESHOLD_CAP: u64 = 1 << 41;

/// Names a member of the constant family, for caching and reporting.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstantId {
    Gamma(u32),
    GammaPrime(u32),
    Lambda1,
    /// The tolerance is kept as the decimal text it was requested with,
    /// so ids stay exact and hashable.
    EThreshold(String),
}

impl ConstantId {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConstantId::Gamma(k) | ConstantId::GammaPrime(k) if *k == 0 => Err(
                Error::InvalidParameter("constant family index k must be >= 1".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ConstantId::Gamma(k) => format!("gamma({k})"),
            ConstantId::GammaPrime(k) => format!("gamma_prime({k})"),
            ConstantId::Lambda1 => "lambda1".into(),
            ConstantId::EThreshold(eps) => format!("e_threshold({eps})"),
        }
    }
}

impl fmt::Display for ConstantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One checked identity; `pass` holds exactly when
/// `residual <= tolerance`.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: PrecisionReal,
    pub rhs: PrecisionReal,
    pub residual: PrecisionReal,
    pub tolerance: PrecisionReal,
    pub pass: bool,
}

/// One row of [`barrow_residual_table`]: the partial sum of approximate
/// forward derivatives, the telescoped exact endpoint `ln^k(n+1)`, and
/// their difference, which accumulates toward `gamma_k`.
#[derive(Clone, Debug)]
pub struct ResidualRow {
    pub n: u64,
    pub approx_partial: PrecisionReal,
    pub normalizer: PrecisionReal,
    pub residual: PrecisionReal,
}

fn check_family_index(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "constant family index k must be >= 1".into(),
        ));
    }
    Ok(())
}

// Extrapolation depth and sweep length for a decimal target. The basis
// truncation scales like (n_max/64)^-(depth+1) up to log factors, the
// sweep cost linearly in n_max; deeper bases buy shorter sweeps at high
// precision.
fn production_schedule(target: u32) -> (u32, u64) {
    let depth = match target {
        0..=20 => 6,
        21..=36 => 8,
        _ => 12,
    };
    let n_max = (64.0 * 10f64.powf((target as f64 + 6.0) / 9.0)).ceil() as u64;
    (depth, n_max.clamp(1 << 13, 50_000_000))
}

// Sweep precision: the term errors cancel ~log10(2x) leading digits, and
// the extrapolation solve amplifies sample noise, so both get headroom.
fn sweep_ctx(ctx: &PrecisionCtx, n_max: u64) -> PrecisionCtx {
    ctx.boost((2 * n_max).max(2).ilog10() + 19)
}

// Partial sums A_N = sum_{x=1}^{N} (approx_forward - exact_forward) at the
// requested sample points, by one ascending sweep with an incrementally
// advanced logarithm.
fn forward_partials(k: u32, pts: &[u64], fine: &PrecisionCtx) -> Result<Vec<(u64, PrecisionReal)>> {
    let gaps = GapSeries::new(fine);
    let mut want = pts.iter().copied();
    let mut next_pt = want.next();
    let last = *pts.last().expect("nonempty sample schedule");
    let mut lnx = PrecisionReal::zero(fine);
    let mut acc = PrecisionReal::zero(fine);
    let mut out = Vec::with_capacity(pts.len());
    for x in 1..=last {
        if x % LN_REFRESH == 0 {
            lnx = PrecisionReal::from_u64(x, fine).ln(fine)?;
        }
        let gap = gaps.gap(x, fine);
        acc = acc.add(&forward_term_error_with_gap(k, x, &lnx, &gap, fine), fine);
        lnx = lnx.add(&gap, fine);
        if next_pt == Some(x) {
            out.push((x, acc.clone()));
            next_pt = want.next();
        }
    }
    Ok(out)
}

// Partial sums B_N = sum_{x=2}^{N} (exact_backward - approx_backward),
// same sweep discipline with the logarithm tracking ln(x-1).
fn backward_partials(
    k: u32,
    pts: &[u64],
    fine: &PrecisionCtx,
) -> Result<Vec<(u64, PrecisionReal)>> {
    let gaps = GapSeries::new(fine);
    let mut want = pts.iter().copied();
    let mut next_pt = want.next();
    let last = *pts.last().expect("nonempty sample schedule");
    let mut lnxm1 = PrecisionReal::zero(fine);
    let mut acc = PrecisionReal::zero(fine);
    let mut out = Vec::with_capacity(pts.len());
    for x in 2..=last {
        if (x - 1) % LN_REFRESH == 0 {
            lnxm1 = PrecisionReal::from_u64(x - 1, fine).ln(fine)?;
        }
        let gap = gaps.gap(x - 1, fine);
        acc = acc.add(
            &backward_term_error_with_gap(k, x, &lnxm1, &gap, fine),
            fine,
        );
        lnxm1 = lnxm1.add(&gap, fine);
        if next_pt == Some(x) {
            out.push((x, acc.clone()));
            next_pt = want.next();
        }
    }
    Ok(out)
}

fn production_limit(k: u32, digits: u32, backward: bool) -> Result<SeriesResult> {
    check_family_index(k)?;
    let ctx = PrecisionCtx::new(digits)?;
    let target = digits.saturating_add(EXTRA_TARGET);
    let (depth, n_max) = production_schedule(target);
    let basis = BasisTerm::log_family(depth, k - 1);
    let pts = sample_points(n_max, basis.len() + 1)?;
    let fine = sweep_ctx(&ctx, n_max);
    let samples = if backward {
        backward_partials(k, &pts, &fine)?
    } else {
        forward_partials(k, &pts, &fine)?
    };
    let policy = TailPolicy::for_digits(target);
    richardson_from_samples(&samples, &basis, &policy, &ctx)
}

// Independent reconstruction from series_engine building blocks:
//   gamma_k  =  k st(k-1) + sum_{j=2}^{k} C(k,j) lm(k-j, j)
//   gamma'_k = -k st(k-1) + sum_{j=2}^{k} C(k,j) (-1)^j lm(k-j, j) + (-1)^(k+1)
// with st the Stieltjes-like limit and lm the log-moment sum. The j = 1
// slice of the binomial tail diverges like a harmonic sum; regrouping it
// against the telescoped normalizer is exactly what st absorbs.
fn oracle_combination(k: u32, digits: u32, backward: bool) -> Result<SeriesResult> {
    check_family_index(k)?;
    let ctx = PrecisionCtx::new(digits)?;
    let policy = TailPolicy::for_digits(digits.saturating_add(EXTRA_TARGET));
    let st = stieltjes_like_limit(k - 1, &policy, &ctx)?;
    let k_real = PrecisionReal::from_u64(u64::from(k), &ctx);
    let mut value = st.value.mul(&k_real, &ctx);
    if backward {
        value = value.neg();
    }
    let mut bound = st.error_bound.mul(&k_real, &ctx);
    let mut terms = st.terms_used;
    for j in 2..=k {
        let lm = log_moment_sum(k - j, j, &policy, &ctx)?;
        let c = PrecisionReal::from_bigint(&binomial(BigInt::from(k), BigInt::from(j)), &ctx);
        let signed = if backward && j % 2 == 1 {
            c.neg()
        } else {
            c.clone()
        };
        value = value.add(&lm.value.mul(&signed, &ctx), &ctx);
        bound = bound.add(&lm.error_bound.mul(&c, &ctx), &ctx);
        terms += lm.terms_used;
    }
    if backward {
        let one = PrecisionReal::one(&ctx);
        value = if k % 2 == 1 {
            value.add(&one, &ctx)
        } else {
            value.sub(&one, &ctx)
        };
    }
    Ok(SeriesResult {
        value,
        error_bound: bound,
        terms_used: terms,
        method: SumMethod::EulerMaclaurin,
    })
}

// Rejects two routes that disagree beyond their combined bounds;
// otherwise returns the better-bounded value, never an average.
fn cross_checked(
    what: String,
    a: SeriesResult,
    b: SeriesResult,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    let delta = a.value.sub(&b.value, ctx).abs();
    let combined = a.error_bound.add(&b.error_bound, ctx);
    if delta.gt(&combined) {
        return Err(Error::Consistency {
            what,
            a: a.value.to_sci(24),
            a_method: a.method.as_str().into(),
            b: b.value.to_sci(24),
            b_method: b.method.as_str().into(),
            delta: delta.to_sci(3),
            bound: combined.to_sci(3),
        });
    }
    let (keep, other) = if a.error_bound.le(&b.error_bound) {
        (a, b)
    } else {
        (b, a)
    };
    Ok(SeriesResult {
        value: keep.value,
        error_bound: keep.error_bound,
        terms_used: keep.terms_used + other.terms_used,
        method: SumMethod::Composite,
    })
}

/// `gamma_k = sum_{x>=1} forward_term_error(k, x)`, computed by the
/// telescoped Richardson path and cross-checked against
/// [`gamma_oracle`].
pub fn gamma(k: u32, digits: u32) -> Result<SeriesResult> {
    let ctx = PrecisionCtx::new(digits)?;
    let production = production_limit(k, digits, false)?;
    let oracle = gamma_oracle(k, digits)?;
    cross_checked(format!("gamma({k})"), production, oracle, &ctx)
}

/// `gamma'_k = sum_{x>=2} backward_term_error(k, x)`, cross-checked the
/// same way as [`gamma`].
pub fn gamma_prime(k: u32, digits: u32) -> Result<SeriesResult> {
    let ctx = PrecisionCtx::new(digits)?;
    let production = production_limit(k, digits, true)?;
    let oracle = gamma_prime_oracle(k, digits)?;
    cross_checked(format!("gamma_prime({k})"), production, oracle, &ctx)
}

/// Decomposition oracle for `gamma_k`.
pub fn gamma_oracle(k: u32, digits: u32) -> Result<SeriesResult> {
    oracle_combination(k, digits, false)
}

/// Decomposition oracle for `gamma'_k`.
pub fn gamma_prime_oracle(k: u32, digits: u32) -> Result<SeriesResult> {
    oracle_combination(k, digits, true)
}

/// `lambda_1 = 3 (1 - sum ln x / x^2)`, the unit integral minus the log
/// moment, scaled by three. Cross-checked against
/// `(7 - (gamma_3 + gamma'_3)) / 2` with the family terms taken from the
/// production path, so the two routes share no machinery.
pub fn lambda1(digits: u32) -> Result<SeriesResult> {
    let ctx = PrecisionCtx::new(digits)?;
    let policy = TailPolicy::for_digits(digits.saturating_add(EXTRA_TARGET));
    let lm = log_moment_sum(1, 2, &policy, &ctx)?;
    let moment_path = SeriesResult {
        value: PrecisionReal::one(&ctx)
            .sub(&lm.value, &ctx)
            .mul_u64(3, &ctx),
        error_bound: lm.error_bound.mul_u64(3, &ctx),
        terms_used: lm.terms_used,
        method: SumMethod::EulerMaclaurin,
    };
    let g3 = production_limit(3, digits, false)?;
    let gp3 = production_limit(3, digits, true)?;
    let family_path = SeriesResult {
        value: PrecisionReal::from_u64(7, &ctx)
            .sub(&g3.value.add(&gp3.value, &ctx), &ctx)
            .div_u64(2, &ctx),
        error_bound: g3.error_bound.add(&gp3.error_bound, &ctx).div_u64(2, &ctx),
        terms_used: g3.terms_used + gp3.terms_used,
        method: SumMethod::Richardson,
    };
    cross_checked("lambda1".into(), family_path, moment_path, &ctx)
}

/// `e - (1 + 1/t)^t`, evaluated with enough extra precision to absorb
/// the ~log10(t) digits the subtraction cancels.
pub fn e_gap(t: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    if t == 0 {
        return Err(Error::Domain("e_gap needs t >= 1".into()));
    }
    let fine = ctx.boost(t.ilog10() + 8);
    let power = PrecisionReal::ln1p_recip(t, &fine)
        .mul_u64(t, &fine)
        .exp(&fine);
    Ok(PrecisionReal::e(&fine).sub(&power, &fine).retag(ctx))
}

/// [`e_threshold_with_cap`] under the default [`E_THRESHOLD_CAP`].
pub fn e_threshold(epsilon: &PrecisionReal, ctx: &PrecisionCtx) -> Result<u64> {
    e_threshold_with_cap(epsilon, E_THRESHOLD_CAP, ctx)
}

/// Smallest integer `t` with `e - (1 + 1/t)^t < epsilon`, by exponential
/// then binary search on the strictly decreasing gap. An epsilon above
/// the whole gap range returns 1.
pub fn e_threshold_with_cap(epsilon: &PrecisionReal, cap: u64, ctx: &PrecisionCtx) -> Result<u64> {
    if !epsilon.is_finite() || epsilon.is_zero() || epsilon.is_negative() {
        return Err(Error::Domain("e_threshold needs epsilon > 0".into()));
    }
    if cap == 0 {
        return Err(Error::InvalidParameter(
            "e_threshold cap must be >= 1".into(),
        ));
    }
    let below = |t: u64| -> Result<bool> { Ok(e_gap(t, ctx)?.lt(epsilon)) };
    if below(1)? {
        return Ok(1);
    }
    let mut hi = 1u64;
    loop {
        hi = hi.saturating_mul(2);
        if hi > cap {
            return Err(Error::CapExceeded { cap });
        }
        if below(hi)? {
            break;
        }
    }
    // invariant: gap(lo) >= epsilon > gap(hi)
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn identity_report(
    name: &str,
    lhs: PrecisionReal,
    rhs: PrecisionReal,
    tolerance: &PrecisionReal,
    ctx: &PrecisionCtx,
) -> IdentityReport {
    let residual = lhs.sub(&rhs, ctx).abs();
    IdentityReport {
        name: name.into(),
        pass: residual.le(tolerance),
        lhs,
        rhs,
        residual,
        tolerance: tolerance.clone(),
    }
}

/// Checks the identity suite tying the family together, each side by an
/// independent route. Failures are reported, not raised.
pub fn verify_identities(digits: u32) -> Result<Vec<IdentityReport>> {
    let ctx = PrecisionCtx::new(digits)?;
    let tolerance = PrecisionReal::pow10(2 - i64::from(digits), &ctx);
    let policy = TailPolicy::for_digits(digits.saturating_add(EXTRA_TARGET));
    let one = PrecisionReal::one(&ctx);
    let pi = PrecisionReal::pi(&ctx);
    let pi_sq = pi.mul(&pi, &ctx);
    let mut reports = Vec::with_capacity(5);

    let g1 = gamma(1, digits)?;
    let gp1 = gamma_prime(1, digits)?;
    reports.push(identity_report(
        "gamma_plus_gamma_prime",
        g1.value.add(&gp1.value, &ctx),
        one.clone(),
        &tolerance,
        &ctx,
    ));

    let g2 = gamma(2, digits)?;
    let gp2 = gamma_prime(2, digits)?;
    reports.push(identity_report(
        "gamma2_pair_pi_squared",
        g2.value.add(&gp2.value, &ctx),
        pi_sq.div_u64(3, &ctx).sub(&one, &ctx),
        &tolerance,
        &ctx,
    ));

    let g3 = gamma(3, digits)?;
    let gp3 = gamma_prime(3, digits)?;
    let pair3 = g3.value.add(&gp3.value, &ctx);
    let lm12 = log_moment_sum(1, 2, &policy, &ctx)?;
    reports.push(identity_report(
        "gamma3_pair_log_moment",
        pair3.clone(),
        lm12.value.mul_u64(6, &ctx).add(&one, &ctx),
        &tolerance,
        &ctx,
    ));

    let l1 = lambda1(digits)?;
    reports.push(identity_report(
        "gamma3_pair_lambda1",
        pair3,
        PrecisionReal::from_u64(7, &ctx).sub(&l1.value.mul_u64(2, &ctx), &ctx),
        &tolerance,
        &ctx,
    ));

    let basel = log_moment_sum(0, 2, &policy, &ctx)?;
    reports.push(identity_report(
        "basel_sum",
        basel.value,
        pi_sq.div_u64(6, &ctx),
        &tolerance,
        &ctx,
    ));

    Ok(reports)
}

/// Partial sums of approximate forward derivatives against the
/// telescoped endpoint `ln^k(n+1)`, tabulated at doubling n plus the
/// final `n_max`. The residual column accumulates toward `gamma_k`.
pub fn barrow_residual_table(k: u32, n_max: u64, digits: u32) -> Result<Vec<ResidualRow>> {
    check_family_index(k)?;
    if n_max == 0 {
        return Err(Error::InvalidParameter(
            "residual table needs n_max >= 1".into(),
        ));
    }
    let ctx = PrecisionCtx::new(digits)?;
    let fine = sweep_ctx(&ctx, n_max);
    let gaps = GapSeries::new(&fine);
    let mut marks = Vec::new();
    let mut m = 1u64;
    while m < n_max {
        marks.push(m);
        m = m.saturating_mul(2);
    }
    marks.push(n_max);

    let mut want = marks.iter().copied();
    let mut next_mark = want.next();
    let mut lnx = PrecisionReal::zero(&fine);
    let mut acc = PrecisionReal::zero(&fine);
    let mut rows = Vec::with_capacity(marks.len());
    for x in 1..=n_max {
        if x % LN_REFRESH == 0 {
            lnx = PrecisionReal::from_u64(x, &fine).ln(&fine)?;
        }
        let gap = gaps.gap(x, &fine);
        acc = acc.add(&forward_term_error_with_gap(k, x, &lnx, &gap, &fine), &fine);
        lnx = lnx.add(&gap, &fine);
        if next_mark == Some(x) {
            let normalizer = lnx.powi(u64::from(k), &fine);
            rows.push(ResidualRow {
                n: x,
                approx_partial: acc.add(&normalizer, &fine).retag(&ctx),
                normalizer: normalizer.retag(&ctx),
                residual: acc.clone().retag(&ctx),
            });
            next_mark = want.next();
        }
    }
    Ok(rows)
}
