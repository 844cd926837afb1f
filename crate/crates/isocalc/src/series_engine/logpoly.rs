//! Exact-coefficient linear combinations of `ln^p(x) / x^q`.
//!
//! The family is closed under d/dx, which is what makes Euler-Maclaurin
//! tails for log-moment series exact up to the truncation term: every
//! needed derivative and the tail integral stay inside the family with
//! rational coefficients.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::precision::{PrecisionCtx, PrecisionReal};

/// Keys are `(p, q)` for the monomial `ln^p(x) / x^q`.
#[derive(Clone, Debug, Default)]
pub(crate) struct LogPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl LogPoly {
    pub fn monomial(p: u32, q: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((p, q), BigRational::from(BigInt::from(1)));
        Self { terms }
    }

    fn insert(&mut self, key: (u32, u32), coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// d/dx of `c·ln^p/x^q` is `c·p·ln^(p-1)/x^(q+1) - c·q·ln^p/x^(q+1)`.
    pub fn derivative(&self) -> Self {
        let mut out = Self::default();
        for (&(p, q), c) in &self.terms {
            if p > 0 {
                out.insert((p - 1, q + 1), c * BigRational::from(BigInt::from(p)));
            }
            out.insert((p, q + 1), -(c * BigRational::from(BigInt::from(q))));
        }
        out
    }

    #[cfg(test)]
    pub fn max_log_pow(&self) -> u32 {
        self.terms.keys().map(|&(p, _)| p).max().unwrap_or(0)
    }

    #[cfg(test)]
    pub fn max_inv_pow(&self) -> u32 {
        self.terms.keys().map(|&(_, q)| q).max().unwrap_or(0)
    }

    /// `∫_N^∞ ln^p t / t^q dt` summed over all terms, returned as a
    /// function of N inside the same family. Requires every `q >= 2`.
    pub fn integral_to_infinity(&self) -> Result<Self> {
        let mut out = Self::default();
        for (&(p, q), c) in &self.terms {
            if q < 2 {
                return Err(Error::Divergence(format!(
                    "integral of ln^{p}(t)/t^{q} over [N, inf) diverges"
                )));
            }
            // N^(1-q) * sum_i p!/(p-i)! / (q-1)^(i+1) * ln^(p-i) N
            let mut falling = BigRational::from(BigInt::from(1));
            let qm1 = BigInt::from(q - 1);
            let mut denom = qm1.clone();
            for i in 0..=p {
                out.insert(
                    (p - i, q - 1),
                    c * &falling / BigRational::from(denom.clone()),
                );
                if i < p {
                    falling *= BigRational::from(BigInt::from(p - i));
                    denom *= &qm1;
                }
            }
        }
        Ok(out)
    }

    /// Evaluation with shared powers of `ln x` and `1/x`.
    pub fn eval(&self, at: &EvalPoint, ctx: &PrecisionCtx) -> PrecisionReal {
        let mut acc = PrecisionReal::zero(ctx);
        for (&(p, q), c) in &self.terms {
            let coeff = PrecisionReal::from_ratio(c, ctx);
            let term = coeff
                .mul(at.ln_power_ref(p), ctx)
                .mul(at.inv_power_ref(q), ctx);
            acc = acc.add(&term, ctx);
        }
        acc
    }
}

/// Precomputed `ln^i(x)` and `x^(-i)` ladders for repeated evaluations at
/// one point.
pub(crate) struct EvalPoint {
    ln_pows: Vec<PrecisionReal>,
    inv_pows: Vec<PrecisionReal>,
}

impl EvalPoint {
    pub fn new(x: u64, max_log: u32, max_inv: u32, ctx: &PrecisionCtx) -> Result<Self> {
        let xf = PrecisionReal::from_u64(x, ctx);
        let lnx = xf.ln(ctx)?;
        let invx = xf.recip(ctx);
        let mut ln_pows = vec![PrecisionReal::one(ctx)];
        for _ in 0..max_log {
            let next = ln_pows.last().expect("nonempty").mul(&lnx, ctx);
            ln_pows.push(next);
        }
        let mut inv_pows = vec![PrecisionReal::one(ctx)];
        for _ in 0..max_inv {
            let next = inv_pows.last().expect("nonempty").mul(&invx, ctx);
            inv_pows.push(next);
        }
        Ok(Self { ln_pows, inv_pows })
    }

    pub fn ln_power(&self, p: u32) -> PrecisionReal {
        self.ln_pows[p as usize].clone()
    }

    pub fn inv_power(&self, q: u32) -> PrecisionReal {
        self.inv_pows[q as usize].clone()
    }

    fn ln_power_ref(&self, p: u32) -> &PrecisionReal {
        &self.ln_pows[p as usize]
    }

    fn inv_power_ref(&self, q: u32) -> &PrecisionReal {
        &self.inv_pows[q as usize]
    }
}
