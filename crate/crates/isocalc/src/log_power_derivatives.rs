//! Exact and approximate unit-step derivatives of `F(x) = (ln x)^k` and
//! the per-term errors whose infinite sums define the Euler-constant
//! family.
//!
//! Exact differences are always evaluated in the factored form
//! `(ln(x+1) - ln x) * sum_i ln^i(x+1) ln^(k-1-i)(x)`; the raw difference
//! of two k-th powers loses about `log10(x k / ln x)` digits. Approximate
//! derivatives are the binomial expansions of `(ln x ± 1/x)^k - (± ln^k x)`
//! truncated to the printed low-order cases for `k <= 3` and generalized
//! beyond.

use num_bigint::BigInt;
use num_integer::binomial;

use crate::error::{Error, Result};
use crate::precision::{PrecisionCtx, PrecisionReal};

/// The function family `F(x) = (ln x)^k`, `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LogPowerFamily {
    k: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fidelity {
    Exact,
    Approximate,
}

/// Which of the four unit-step derivatives to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivativeKind {
    pub direction: Direction,
    pub fidelity: Fidelity,
}

impl LogPowerFamily {
    pub fn new(k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidParameter(
                "log-power exponent k must be >= 1".into(),
            ));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn function(&self) -> crate::scale_grid::RealFunction {
        crate::scale_grid::RealFunction::ln_power(self.k)
    }

    pub fn derivative(
        &self,
        kind: DerivativeKind,
        x: u64,
        ctx: &PrecisionCtx,
    ) -> Result<PrecisionReal> {
        match (kind.direction, kind.fidelity) {
            (Direction::Forward, Fidelity::Exact) => exact_forward(self.k, x, ctx),
            (Direction::Forward, Fidelity::Approximate) => approx_forward(self.k, x, ctx),
            (Direction::Backward, Fidelity::Exact) => exact_backward(self.k, x, ctx),
            (Direction::Backward, Fidelity::Approximate) => approx_backward(self.k, x, ctx),
        }
    }
}

fn check_k(k: u32) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParameter(
            "log-power exponent k must be >= 1".into(),
        ));
    }
    Ok(())
}

fn check_x(x: u64, min: u64, what: &str) -> Result<()> {
    if x < min {
        return Err(Error::Domain(format!("{what} needs x >= {min}, got {x}")));
    }
    Ok(())
}

// ln^0 .. ln^max as a reusable ladder.
fn powers(base: &PrecisionReal, max: u32, ctx: &PrecisionCtx) -> Vec<PrecisionReal> {
    let mut v = Vec::with_capacity(max as usize + 1);
    v.push(PrecisionReal::one(ctx));
    for _ in 1..=max {
        v.push(v.last().expect("nonempty").mul(base, ctx));
    }
    v
}

// (a - b) * sum_{i=0}^{k-1} a^i b^(k-1-i), with the difference `gap = a - b`
// supplied exactly by the caller.
fn factored_difference(
    gap: &PrecisionReal,
    a: &PrecisionReal,
    b: &PrecisionReal,
    k: u32,
    ctx: &PrecisionCtx,
) -> PrecisionReal {
    let pa = powers(a, k - 1, ctx);
    let pb = powers(b, k - 1, ctx);
    let mut s = PrecisionReal::zero(ctx);
    for i in 0..k as usize {
        s = s.add(&pa[i].mul(&pb[k as usize - 1 - i], ctx), ctx);
    }
    gap.mul(&s, ctx)
}

/// `ln^k(x+1) - ln^k(x)` for `x >= 1`, in factored form.
pub fn exact_forward(k: u32, x: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    check_k(k)?;
    check_x(x, 1, "exact forward derivative")?;
    let lnx = PrecisionReal::from_u64(x, ctx).ln(ctx)?;
    let gap = PrecisionReal::ln1p_recip(x, ctx);
    let lnx1 = lnx.add(&gap, ctx);
    Ok(factored_difference(&gap, &lnx1, &lnx, k, ctx))
}

/// `ln^k(x) - ln^k(x-1)` for `x >= 2`, in factored form.
pub fn exact_backward(k: u32, x: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    check_k(k)?;
    check_x(x, 2, "exact backward derivative")?;
    let lnx1 = PrecisionReal::from_u64(x - 1, ctx).ln(ctx)?;
    let gap = PrecisionReal::ln1p_recip(x - 1, ctx);
    let lnx = lnx1.add(&gap, ctx);
    Ok(factored_difference(&gap, &lnx, &lnx1, k, ctx))
}

// sum_{j=1}^{k} C(k,j) (sign)^(j+1) ln^(k-j)(x) / x^j by Horner in 1/x.
fn binomial_tail(
    k: u32,
    lnx: &PrecisionReal,
    x: u64,
    alternating: bool,
    ctx: &PrecisionCtx,
) -> PrecisionReal {
    let ln_pows = powers(lnx, k - 1, ctx);
    let mut acc = PrecisionReal::zero(ctx);
    for j in (1..=k).rev() {
        let c = binomial(BigInt::from(k), BigInt::from(j));
        let mut coeff = PrecisionReal::from_bigint(&c, ctx);
        if alternating && j % 2 == 0 {
            coeff = coeff.neg();
        }
        let term = coeff.mul(&ln_pows[(k - j) as usize], ctx);
        acc = acc.add(&term, ctx).div_u64(x, ctx);
    }
    acc
}

/// Approximate forward derivative
/// `sum_{j=1}^{k} C(k,j) ln^(k-j)(x) / x^j = (ln x + 1/x)^k - ln^k(x)`,
/// for `x >= 1`.
pub fn approx_forward(k: u32, x: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    check_k(k)?;
    check_x(x, 1, "approximate forward derivative")?;
    let lnx = PrecisionReal::from_u64(x, ctx).ln(ctx)?;
    Ok(binomial_tail(k, &lnx, x, false, ctx))
}

/// Approximate backward derivative
/// `sum_{j=1}^{k} C(k,j) (-1)^(j+1) ln^(k-j)(x) / x^j = ln^k(x) - (ln x - 1/x)^k`.
///
/// `x = 1` is allowed only for `k = 1` (value `1/x = 1`); for `k >= 2` the
/// defining series starts at `x = 2`.
pub fn approx_backward(k: u32, x: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    check_k(k)?;
    check_x(
        x,
        if k == 1 { 1 } else { 2 },
        "approximate backward derivative",
    )?;
    let lnx = PrecisionReal::from_u64(x, ctx).ln(ctx)?;
    Ok(binomial_tail(k, &lnx, x, true, ctx))
}

// digits lost to cancellation in approx - exact, plus a margin
fn cancellation_boost(x: u64) -> u32 {
    (2 * x).max(2).ilog10() + 3
}

/// `approx_forward(k, x) - exact_forward(k, x)`, the x-th term of the
/// gamma_k series; evaluated with enough extra precision to absorb the
/// ~log10(2x) digits the subtraction cancels.
pub fn forward_term_error(k: u32, x: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    check_k(k)?;
    check_x(x, 1, "forward term error")?;
    let fine = ctx.boost(cancellation_boost(x));
    let lnx = PrecisionReal::from_u64(x, &fine).ln(&fine)?;
    let (value, _) = forward_term_error_given(k, x, &lnx, &fine)?;
    Ok(value.retag(ctx))
}

/// `exact_backward(k, x) - approx_backward(k, x)`, the x-th term of the
/// gamma'_k series; `x >= 2` always, matching the series' start.
pub fn backward_term_error(k: u32, x: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    check_k(k)?;
    check_x(x, 2, "backward term error")?;
    let fine = ctx.boost(cancellation_boost(x));
    let lnxm1 = PrecisionReal::from_u64(x - 1, &fine).ln(&fine)?;
    let (value, _) = backward_term_error_given(k, x, &lnxm1, &fine)?;
    Ok(value.retag(ctx))
}

/// [`forward_term_error`] with `ln x` supplied. Returns the term and the
/// exact step `ln(x+1) - ln(x)`, so a sweep can advance its running
/// logarithm with one step evaluation per x. The caller owns the precision
/// boost.
pub(crate) fn forward_term_error_given(
    k: u32,
    x: u64,
    lnx: &PrecisionReal,
    ctx: &PrecisionCtx,
) -> Result<(PrecisionReal, PrecisionReal)> {
    let gap = PrecisionReal::ln1p_recip(x, ctx);
    Ok((forward_term_error_with_gap(k, x, lnx, &gap, ctx), gap))
}

/// [`backward_term_error`] with `ln(x-1)` supplied; returns the term and
/// the step `ln(x) - ln(x-1)`.
pub(crate) fn backward_term_error_given(
    k: u32,
    x: u64,
    lnxm1: &PrecisionReal,
    ctx: &PrecisionCtx,
) -> Result<(PrecisionReal, PrecisionReal)> {
    let gap = PrecisionReal::ln1p_recip(x - 1, ctx);
    Ok((backward_term_error_with_gap(k, x, lnxm1, &gap, ctx), gap))
}

/// Forward term error from a caller-supplied `ln x` and step
/// `gap = ln(x+1) - ln(x)`.
pub(crate) fn forward_term_error_with_gap(
    k: u32,
    x: u64,
    lnx: &PrecisionReal,
    gap: &PrecisionReal,
    ctx: &PrecisionCtx,
) -> PrecisionReal {
    let lnx1 = lnx.add(gap, ctx);
    let exact = factored_difference(gap, &lnx1, lnx, k, ctx);
    let approx = binomial_tail(k, lnx, x, false, ctx);
    approx.sub(&exact, ctx)
}

/// Backward term error from a caller-supplied `ln(x-1)` and step
/// `gap = ln(x) - ln(x-1)`.
pub(crate) fn backward_term_error_with_gap(
    k: u32,
    x: u64,
    lnxm1: &PrecisionReal,
    gap: &PrecisionReal,
    ctx: &PrecisionCtx,
) -> PrecisionReal {
    let lnx = lnxm1.add(gap, ctx);
    let exact = factored_difference(gap, &lnx, lnxm1, k, ctx);
    let approx = binomial_tail(k, &lnx, x, true, ctx);
    exact.sub(&approx, ctx)
}

/// Evaluator for the log step `ln(x+1) - ln(x) = 2 atanh(1/(2x+1))` as the
/// odd power series in `t = 1/(2x+1)`, with the odd reciprocals
/// precomputed once per sweep. All series terms are positive, so stopping
/// once a power drops below `t * eps` leaves a truncation under
/// `9/8 * t * eps` (geometric tail, `t <= 1/3`); `eps` sits at the ulp of
/// the context's mantissa width.
pub(crate) struct GapSeries {
    odd_recips: Vec<PrecisionReal>,
    eps: PrecisionReal,
}

impl GapSeries {
    pub(crate) fn new(ctx: &PrecisionCtx) -> Self {
        let odd_recips = (0..128u64)
            .map(|i| PrecisionReal::from_u64(2 * i + 1, ctx).recip(ctx))
            .collect();
        let mantissa_digits = (ctx.bits() as f64 * std::f64::consts::LOG10_2).floor() as i64;
        Self {
            odd_recips,
            eps: PrecisionReal::pow10(-mantissa_digits, ctx),
        }
    }

    pub(crate) fn gap(&self, x: u64, ctx: &PrecisionCtx) -> PrecisionReal {
        let t = PrecisionReal::from_u64(2 * x + 1, ctx).recip(ctx);
        let t2 = t.mul(&t, ctx);
        let cutoff = t.mul(&self.eps, ctx);
        let mut pow = t.clone();
        let mut sum = t.clone();
        for r in &self.odd_recips[1..] {
            pow = pow.mul(&t2, ctx);
            if pow.le(&cutoff) {
                return sum.mul_u64(2, ctx);
            }
            sum = sum.add(&pow.mul(r, ctx), ctx);
        }
        // precision beyond the precomputed ladder: take the general route
        PrecisionReal::ln1p_recip(x, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(64).unwrap()
    }

    fn assert_within(got: &PrecisionReal, want: &PrecisionReal, pow: i64, c: &PrecisionCtx) {
        let diff = got.sub(want, c).abs();
        assert!(
            diff.lt(&PrecisionReal::pow10(pow, c)),
            "|{} - {}| = {} exceeds 1e{pow}",
            got.to_sci(8),
            want.to_sci(8),
            diff.to_sci(3)
        );
    }

    fn ratio(n: i64, d: i64, c: &PrecisionCtx) -> PrecisionReal {
        PrecisionReal::from_ratio(&BigRational::new(n.into(), d.into()), c)
    }

    #[test]
    fn exact_forward_matches_hand_values() {
        let c = ctx();
        let ln2 = PrecisionReal::from_u64(2, &c).ln(&c).unwrap();
        assert_within(&exact_forward(1, 1, &c).unwrap(), &ln2, -60, &c);
        assert_within(&exact_forward(2, 1, &c).unwrap(), &ln2.powi(2, &c), -60, &c);

        let fd = exact_forward(3, 4, &c).unwrap();
        let direct = PrecisionReal::from_u64(5, &c)
            .ln(&c)
            .unwrap()
            .powi(3, &c)
            .sub(
                &PrecisionReal::from_u64(4, &c).ln(&c).unwrap().powi(3, &c),
                &c,
            );
        assert_within(&fd, &direct, -55, &c);
    }

    #[test]
    fn exact_backward_matches_hand_values_and_guards_domain() {
        let c = ctx();
        let ln2 = PrecisionReal::from_u64(2, &c).ln(&c).unwrap();
        assert_within(&exact_backward(1, 2, &c).unwrap(), &ln2, -60, &c);
        assert_within(
            &exact_backward(2, 2, &c).unwrap(),
            &ln2.powi(2, &c),
            -60,
            &c,
        );

        // ln^2(3) - ln^2(2) = ln 6 * ln(3/2)
        let bd = exact_backward(2, 3, &c).unwrap();
        let product = PrecisionReal::from_u64(6, &c)
            .ln(&c)
            .unwrap()
            .mul(&ratio(3, 2, &c).ln(&c).unwrap(), &c);
        assert_within(&bd, &product, -60, &c);
        assert!(bd.to_decimal(8).starts_with("0.726495"));

        assert!(matches!(exact_backward(2, 1, &c), Err(Error::Domain(_))));
        assert!(matches!(exact_forward(1, 0, &c), Err(Error::Domain(_))));
        assert!(matches!(
            exact_forward(0, 3, &c),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn approx_forward_reproduces_printed_low_k_formulas() {
        let c = ctx();
        for x in [1u64, 2, 3, 10, 1000] {
            let lnx = PrecisionReal::from_u64(x, &c).ln(&c).unwrap();
            let inv = PrecisionReal::from_u64(x, &c).recip(&c);

            assert_within(&approx_forward(1, x, &c).unwrap(), &inv, -60, &c);

            // k = 2: 1/x^2 + 2 ln x / x
            let want = inv.powi(2, &c).add(&lnx.mul_u64(2, &c).div_u64(x, &c), &c);
            assert_within(&approx_forward(2, x, &c).unwrap(), &want, -58, &c);

            // k = 3: 1/x^3 + 3 ln x / x^2 + 3 ln^2 x / x
            let want = inv
                .powi(3, &c)
                .add(&lnx.mul_u64(3, &c).div(&inv.recip(&c).powi(2, &c), &c), &c)
                .add(&lnx.powi(2, &c).mul_u64(3, &c).div_u64(x, &c), &c);
            assert_within(&approx_forward(3, x, &c).unwrap(), &want, -57, &c);
        }
        assert_within(
            &approx_forward(1, 4, &c).unwrap(),
            &ratio(1, 4, &c),
            -60,
            &c,
        );
        assert_within(
            &approx_forward(2, 1, &c).unwrap(),
            &PrecisionReal::one(&c),
            -60,
            &c,
        );
        assert!(approx_forward(3, 2, &c)
            .unwrap()
            .to_decimal(8)
            .starts_with("1.365539"));
    }

    #[test]
    fn approx_backward_reproduces_printed_low_k_formulas() {
        let c = ctx();
        for x in [2u64, 3, 10, 1000] {
            let lnx = PrecisionReal::from_u64(x, &c).ln(&c).unwrap();
            let inv = PrecisionReal::from_u64(x, &c).recip(&c);

            assert_within(&approx_backward(1, x, &c).unwrap(), &inv, -60, &c);

            // k = 2: 2 ln x / x - 1/x^2
            let want = lnx.mul_u64(2, &c).div_u64(x, &c).sub(&inv.powi(2, &c), &c);
            assert_within(&approx_backward(2, x, &c).unwrap(), &want, -58, &c);

            // k = 3: 3 ln^2 x / x - 3 ln x / x^2 + 1/x^3
            let want = lnx
                .powi(2, &c)
                .mul_u64(3, &c)
                .div_u64(x, &c)
                .sub(&lnx.mul_u64(3, &c).div_u64(x * x, &c), &c)
                .add(&inv.powi(3, &c), &c);
            assert_within(&approx_backward(3, x, &c).unwrap(), &want, -57, &c);
        }

        let ln2 = PrecisionReal::from_u64(2, &c).ln(&c).unwrap();
        let want = ln2.sub(&ratio(1, 4, &c), &c);
        let got = approx_backward(2, 2, &c).unwrap();
        assert_within(&got, &want, -60, &c);
        assert!(got.to_decimal(8).starts_with("0.443147"));
        assert!(approx_backward(3, 2, &c)
            .unwrap()
            .to_decimal(8)
            .starts_with("0.325819"));
    }

    #[test]
    fn backward_variants_enforce_the_x_one_convention() {
        let c = ctx();
        assert_within(
            &approx_backward(1, 1, &c).unwrap(),
            &PrecisionReal::one(&c),
            -60,
            &c,
        );
        assert!(matches!(approx_backward(2, 1, &c), Err(Error::Domain(_))));
        assert!(matches!(approx_backward(3, 1, &c), Err(Error::Domain(_))));
        assert!(matches!(
            backward_term_error(1, 1, &c),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            backward_term_error(2, 0, &c),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn term_errors_match_hand_values() {
        let c = ctx();
        let ln2 = PrecisionReal::from_u64(2, &c).ln(&c).unwrap();

        // 1 - ln 2
        let want = PrecisionReal::one(&c).sub(&ln2, &c);
        let got = forward_term_error(1, 1, &c).unwrap();
        assert_within(&got, &want, -58, &c);
        assert!(got.to_decimal(8).starts_with("0.306852"));

        // 1 - ln^2 2
        let want = PrecisionReal::one(&c).sub(&ln2.powi(2, &c), &c);
        let got = forward_term_error(2, 1, &c).unwrap();
        assert_within(&got, &want, -58, &c);
        assert!(got.to_decimal(8).starts_with("0.519546"));

        // ln 2 - 1/2
        let want = ln2.sub(&ratio(1, 2, &c), &c);
        let got = backward_term_error(1, 2, &c).unwrap();
        assert_within(&got, &want, -58, &c);
        assert!(got.to_decimal(8).starts_with("0.193147"));

        // exact_backward(2,3) - approx_backward(2,3), both by hand
        let want = exact_backward(2, 3, &c)
            .unwrap()
            .sub(&approx_backward(2, 3, &c).unwrap(), &c);
        let got = backward_term_error(2, 3, &c).unwrap();
        assert_within(&got, &want, -55, &c);
        assert!(got.to_decimal(8).starts_with("0.105198"));
    }

    #[test]
    fn k_one_forward_term_at_a_million_sits_in_the_classical_bracket() {
        let c = ctx();
        let x = 1_000_000u64;
        let got = forward_term_error(1, x, &c).unwrap();
        assert!(got.gt(&PrecisionReal::zero(&c)));
        assert!(got.lt(&ratio(1, 2 * (x as i64) * (x as i64), &c)));
    }

    #[test]
    fn factored_form_agrees_with_high_precision_naive_difference() {
        let fine = PrecisionCtx::new(120).unwrap();
        let c = PrecisionCtx::new(40).unwrap();
        for (k, x) in [
            (1u32, 1_000_000_007u64),
            (3, 1_000_000_007),
            (5, 123_456_789),
        ] {
            let factored = exact_forward(k, x, &c).unwrap();
            let naive = PrecisionReal::from_u64(x + 1, &fine)
                .ln(&fine)
                .unwrap()
                .powi(k as u64, &fine)
                .sub(
                    &PrecisionReal::from_u64(x, &fine)
                        .ln(&fine)
                        .unwrap()
                        .powi(k as u64, &fine),
                    &fine,
                );
            let naive = PrecisionReal::parse(&naive.to_sci(45), &c).unwrap();
            assert_within(&factored, &naive, -44, &c);
        }
    }

    #[test]
    fn sweep_helpers_agree_with_the_public_entry_points() {
        let c = ctx();
        let fine = c.boost(8);
        let mut lnx = PrecisionReal::zero(&fine);
        for x in 1u64..=40 {
            let (fte, step) = forward_term_error_given(3, x, &lnx, &fine).unwrap();
            assert_within(&fte, &forward_term_error(3, x, &c).unwrap(), -55, &c);
            if x >= 2 {
                let lnxm1 = lnx.sub(&PrecisionReal::ln1p_recip(x - 1, &fine), &fine);
                let (bte, _) = backward_term_error_given(3, x, &lnxm1, &fine).unwrap();
                assert_within(&bte, &backward_term_error(3, x, &c).unwrap(), -55, &c);
            }
            lnx = lnx.add(&step, &fine);
        }
    }

    #[test]
    fn gap_series_matches_the_general_log_step() {
        for digits in [20u32, 45, 80] {
            let c = PrecisionCtx::new(digits).unwrap();
            let series = GapSeries::new(&c);
            let tol = PrecisionReal::pow10(-i64::from(digits + 6), &c);
            for x in [1u64, 2, 3, 9, 100, 4_097, 250_000, 7_000_000_000] {
                let got = series.gap(x, &c);
                let want = PrecisionReal::ln1p_recip(x, &c);
                let rel = got.sub(&want, &c).abs().div(&want, &c);
                assert!(
                    rel.lt(&tol),
                    "x = {x}, digits {digits}: relative gap {}",
                    rel.to_sci(3)
                );
            }
        }
    }

    #[test]
    fn derivative_kind_dispatch_covers_all_four() {
        let c = ctx();
        let fam = LogPowerFamily::new(2).unwrap();
        assert!(LogPowerFamily::new(0).is_err());
        for (dir, fid, want) in [
            (
                Direction::Forward,
                Fidelity::Exact,
                exact_forward(2, 5, &c).unwrap(),
            ),
            (
                Direction::Forward,
                Fidelity::Approximate,
                approx_forward(2, 5, &c).unwrap(),
            ),
            (
                Direction::Backward,
                Fidelity::Exact,
                exact_backward(2, 5, &c).unwrap(),
            ),
            (
                Direction::Backward,
                Fidelity::Approximate,
                approx_backward(2, 5, &c).unwrap(),
            ),
        ] {
            let kind = DerivativeKind {
                direction: dir,
                fidelity: fid,
            };
            let got = fam.derivative(kind, 5, &c).unwrap();
            assert_within(&got, &want, -60, &c);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn dual_forms_agree(k in 1u32..=8, x in 1u64..=10_000) {
            let c = PrecisionCtx::new(30).unwrap();
            let lnx = PrecisionReal::from_u64(x, &c).ln(&c).unwrap();
            let inv = PrecisionReal::from_u64(x, &c).recip(&c);
            let tol = PrecisionReal::pow10(5 - 30, &c);

            let power_form = lnx.add(&inv, &c).powi(k as u64, &c).sub(&lnx.powi(k as u64, &c), &c);
            let diff = approx_forward(k, x, &c).unwrap().sub(&power_form, &c).abs();
            prop_assert!(diff.lt(&tol), "forward gap {}", diff.to_sci(3));

            if x >= 2 {
                let power_form = lnx
                    .powi(k as u64, &c)
                    .sub(&lnx.sub(&inv, &c).powi(k as u64, &c), &c);
                let diff = approx_backward(k, x, &c).unwrap().sub(&power_form, &c).abs();
                prop_assert!(diff.lt(&tol), "backward gap {}", diff.to_sci(3));
            }
        }

        #[test]
        fn k_one_bracket_holds(x in 1u64..=100_000) {
            let c = PrecisionCtx::new(40).unwrap();
            let fte = forward_term_error(1, x, &c).unwrap();
            prop_assert!(fte.gt(&PrecisionReal::zero(&c)));
            let cap = PrecisionReal::from_u64(2 * x * x, &c).recip(&c);
            prop_assert!(fte.lt(&cap), "fte {} above 1/(2x^2) at x={x}", fte.to_sci(3));
        }

        #[test]
        fn decay_envelope_is_positive_and_bounded(k in 2u32..=3, x in 2u64..=10_000) {
            let c = PrecisionCtx::new(40).unwrap();
            let fte = forward_term_error(k, x, &c).unwrap();
            let scale = PrecisionReal::from_u64(x * x, &c);
            let denom = PrecisionReal::one(&c).add(
                &PrecisionReal::from_u64(x + 1, &c).ln(&c).unwrap().powi((k - 1) as u64, &c),
                &c,
            );
            let ratio = fte.mul(&scale, &c).div(&denom, &c);
            prop_assert!(ratio.gt(&PrecisionReal::zero(&c)));
            prop_assert!(
                ratio.lt(&PrecisionReal::from_u64((k * k) as u64, &c)),
                "envelope {} at k={k} x={x}",
                ratio.to_sci(3)
            );
        }

        #[test]
        fn approx_forward_splits_off_the_extreme_derivative(k in 1u32..=6, x in 2u64..=500) {
            let c = PrecisionCtx::new(50).unwrap();
            let lnx = PrecisionReal::from_u64(x, &c).ln(&c).unwrap();
            // k ln^(k-1) x / x is the standard-calculus derivative of ln^k
            let extreme = lnx
                .powi((k - 1) as u64, &c)
                .mul_u64(k as u64, &c)
                .div_u64(x, &c);
            let mut rest = PrecisionReal::zero(&c);
            for j in 2..=k {
                let coeff = binomial(BigInt::from(k), BigInt::from(j));
                let term = PrecisionReal::from_bigint(&coeff, &c)
                    .mul(&lnx.powi((k - j) as u64, &c), &c)
                    .div(&PrecisionReal::from_u64(x, &c).powi(j as u64, &c), &c);
                rest = rest.add(&term, &c);
            }
            let got = approx_forward(k, x, &c).unwrap().sub(&extreme, &c);
            let diff = got.sub(&rest, &c).abs();
            prop_assert!(diff.lt(&PrecisionReal::pow10(-45, &c)), "gap {}", diff.to_sci(3));
        }
    }
}
