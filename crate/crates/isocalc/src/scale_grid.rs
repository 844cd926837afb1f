//! Scalar-level grids and the limit-free calculus on them: difference
//! quotients with an exact rational step, local forward/backward unit-step
//! derivatives, and the telescoping (Barrow) sum rules.
//!
//! A grid is `(b, m, u)` with step `h = b^(-m)` held as an exact rational;
//! `m = 0, u = 1` is the local calculus with increment 1, growing `m`
//! approaches the classical derivative. The increment is materialized as a
//! big float only at evaluation time.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::precision::{PrecisionCtx, PrecisionReal};
use crate::series_engine::blocked_try_sum;

/// Valid inputs of a [`RealFunction`], as a lower bound on the argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    AllReals,
    /// x > bound.
    GreaterThan(i64),
    /// x >= bound.
    AtLeast(i64),
}

impl Domain {
    pub fn contains(&self, x: &PrecisionReal, ctx: &PrecisionCtx) -> bool {
        match self {
            Domain::AllReals => true,
            Domain::GreaterThan(b) => x.gt(&PrecisionReal::from_i64(*b, ctx)),
            Domain::AtLeast(b) => !x.lt(&PrecisionReal::from_i64(*b, ctx)),
        }
    }

    pub fn contains_int(&self, x: i64) -> bool {
        match self {
            Domain::AllReals => true,
            Domain::GreaterThan(b) => x > *b,
            Domain::AtLeast(b) => x >= *b,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::AllReals => write!(f, "all reals"),
            Domain::GreaterThan(b) => write!(f, "x > {b}"),
            Domain::AtLeast(b) => write!(f, "x >= {b}"),
        }
    }
}

type EvalFn = dyn Fn(&PrecisionReal, &PrecisionCtx) -> Result<PrecisionReal> + Send + Sync;

/// An evaluable real function with a declared domain. Providers promise
/// values correct to the context's digits at in-domain points.
#[derive(Clone)]
pub struct RealFunction {
    name: String,
    domain: Domain,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for RealFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFunction")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl RealFunction {
    pub fn new<F>(name: impl Into<String>, domain: Domain, eval: F) -> Self
    where
        F: Fn(&PrecisionReal, &PrecisionCtx) -> Result<PrecisionReal> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            domain,
            eval: Arc::new(eval),
        }
    }

    pub fn ln() -> Self {
        Self::new("ln", Domain::GreaterThan(0), |x, c| x.ln(c))
    }

    /// `(ln x)^k` for `k >= 1`.
    pub fn ln_power(k: u32) -> Self {
        Self::new(format!("ln^{k}"), Domain::GreaterThan(0), move |x, c| {
            Ok(x.ln(c)?.powi(k as u64, c))
        })
    }

    pub fn identity() -> Self {
        Self::new("x", Domain::AllReals, |x, c| Ok(x.clone().retag(c)))
    }

    /// `slope * x + intercept`.
    pub fn affine(slope: i64, intercept: i64) -> Self {
        Self::new(
            format!("{slope}*x + {intercept}"),
            Domain::AllReals,
            move |x, c| {
                let s = PrecisionReal::from_i64(slope, c);
                let b = PrecisionReal::from_i64(intercept, c);
                Ok(s.mul(x, c).add(&b, c))
            },
        )
    }

    /// `x^p`.
    pub fn power(p: u32) -> Self {
        Self::new(format!("x^{p}"), Domain::AllReals, move |x, c| {
            Ok(x.powi(p as u64, c))
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn eval(&self, x: &PrecisionReal, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
        if !self.domain.contains(x, ctx) {
            return Err(Error::Domain(format!(
                "{} is outside the domain of {} ({})",
                x.to_sci(6),
                self.name,
                self.domain
            )));
        }
        (self.eval)(x, ctx)
    }

    pub fn eval_int(&self, x: i64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
        if !self.domain.contains_int(x) {
            return Err(Error::Domain(format!(
                "{x} is outside the domain of {} ({})",
                self.name, self.domain
            )));
        }
        (self.eval)(&PrecisionReal::from_i64(x, ctx), ctx)
    }
}

/// A scalar-level grid `(b, m, u)` with exact step `h = b^(-m)` and
/// increment `dx = u * h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleGrid {
    base: u32,
    gap: u32,
    multiplier: u32,
}

impl ScaleGrid {
    /// Grid with base `b >= 2`, gap `m >= 0` and `u = 1`.
    pub fn new(base: u32, gap: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid base must be >= 2, got {base}"
            )));
        }
        Ok(Self {
            base,
            gap,
            multiplier: 1,
        })
    }

    pub fn with_multiplier(mut self, u: u32) -> Result<Self> {
        if u == 0 {
            return Err(Error::InvalidParameter(
                "grid multiplier must be >= 1".into(),
            ));
        }
        self.multiplier = u;
        Ok(self)
    }

    /// The local unit grid: `b = 2`, `m = 0`, `u = 1`, increment 1.
    pub fn unit() -> Self {
        Self {
            base: 2,
            gap: 0,
            multiplier: 1,
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn gap(&self) -> u32 {
        self.gap
    }

    pub fn multiplier(&self) -> u32 {
        self.multiplier
    }

    /// `h = b^(-m)` exactly.
    pub fn step_rational(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.base).pow(self.gap))
    }

    /// `dx = u * h` exactly.
    pub fn increment_rational(&self) -> BigRational {
        self.step_rational() * BigInt::from(self.multiplier)
    }

    /// `dx` materialized at working precision.
    pub fn increment(&self, ctx: &PrecisionCtx) -> PrecisionReal {
        PrecisionReal::from_ratio(&self.increment_rational(), ctx)
    }
}

impl fmt::Display for ScaleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "grid(b={}, m={}, u={})",
            self.base, self.gap, self.multiplier
        )
    }
}

/// `(F(x + dx) - F(x)) / dx` on `grid`, with no limit taken.
///
/// Errors with [`Error::Precision`] when `dx` underflows the working
/// precision at `x` (`x + dx` rounds back to `x`), since the quotient
/// would then be pure rounding noise.
pub fn difference_quotient(
    f: &RealFunction,
    x: &PrecisionReal,
    grid: &ScaleGrid,
    ctx: &PrecisionCtx,
) -> Result<PrecisionReal> {
    let dx = grid.increment(ctx);
    let x_next = x.add(&dx, ctx);
    if x_next.cmp(x) == std::cmp::Ordering::Equal {
        return Err(Error::Precision(format!(
            "increment {} of {grid} underflows {} working digits at x = {}",
            dx.to_sci(3),
            ctx.digits(),
            x.to_sci(6)
        )));
    }
    let rise = f.eval(&x_next, ctx)?.sub(&f.eval(x, ctx)?, ctx);
    Ok(rise.div(&dx, ctx))
}

/// Local forward derivative `F(x + 1) - F(x)`.
pub fn forward_derivative(f: &RealFunction, x: i64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    let hi = f.eval_int(x + 1, ctx)?;
    let lo = f.eval_int(x, ctx)?;
    Ok(hi.sub(&lo, ctx))
}

/// Local backward derivative `F(x) - F(x - 1)`.
pub fn backward_derivative(f: &RealFunction, x: i64, ctx: &PrecisionCtx) -> Result<PrecisionReal> {
    let hi = f.eval_int(x, ctx)?;
    let lo = f.eval_int(x - 1, ctx)?;
    Ok(hi.sub(&lo, ctx))
}

/// Barrow's forward rule: `sum_{i=0}^{n-1} term(x0 + i)` for `n >= 1`.
/// When `term` is the exact forward derivative of `F`, the sum telescopes
/// to `F(x0 + n) - F(x0)`.
pub fn barrow_forward_sum<F>(term: F, x0: u64, n: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal>
where
    F: Fn(u64, &PrecisionCtx) -> Result<PrecisionReal> + Sync,
{
    if n < 1 {
        return Err(Error::InvalidParameter(
            "forward Barrow sum needs n >= 1".into(),
        ));
    }
    sum_consecutive(&term, x0, x0 + n - 1, ctx)
}

/// Barrow's backward rule: `sum_{i=0}^{n} term(x0 + i)` for `n >= 0`;
/// telescopes to `F(x0 + n) - F(x0 - 1)` for exact backward derivatives.
pub fn barrow_backward_sum<F>(term: F, x0: u64, n: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal>
where
    F: Fn(u64, &PrecisionCtx) -> Result<PrecisionReal> + Sync,
{
    sum_consecutive(&term, x0, x0 + n, ctx)
}

fn sum_consecutive<F>(term: &F, lo: u64, hi: u64, ctx: &PrecisionCtx) -> Result<PrecisionReal>
where
    F: Fn(u64, &PrecisionCtx) -> Result<PrecisionReal> + Sync,
{
    blocked_try_sum(lo, hi, ctx, |a, b, c| {
        let mut acc = PrecisionReal::zero(c);
        for x in a..=b {
            acc = acc.add(&term(x, c)?, c);
        }
        Ok(acc)
    })
}

/// One row of [`extreme_convergence_probe`].
#[derive(Clone, Debug)]
pub struct ProbeRow {
    pub gap: u32,
    pub quotient: PrecisionReal,
    /// |quotient - analytic derivative at x|.
    pub abs_error: PrecisionReal,
}

/// Difference quotients of `f` at `x` for each gap in `gaps` (same `base`,
/// `u = 1`), each compared against the caller-supplied analytic
/// `derivative`. Larger gaps approach the extreme calculus.
pub fn extreme_convergence_probe(
    f: &RealFunction,
    derivative: &RealFunction,
    x: &PrecisionReal,
    base: u32,
    gaps: &[u32],
    ctx: &PrecisionCtx,
) -> Result<Vec<ProbeRow>> {
    let reference = derivative.eval(x, ctx)?;
    let mut rows = Vec::with_capacity(gaps.len());
    for &m in gaps {
        let grid = ScaleGrid::new(base, m)?;
        let quotient = difference_quotient(f, x, &grid, ctx)?;
        let abs_error = quotient.sub(&reference, ctx).abs();
        rows.push(ProbeRow {
            gap: m,
            quotient,
            abs_error,
        });
    }
    Ok(rows)
}
