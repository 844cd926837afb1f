//! Deterministic parallel reduction over integer ranges.
//!
//! Work is split into fixed-size blocks whose boundaries depend only on the
//! range, never on the thread count; partial results are reduced strictly
//! in ascending block order. Two runs with different rayon pools therefore
//! produce bit-identical sums.

use rayon::prelude::*;

use crate::error::Result;
use crate::precision::{PrecisionCtx, PrecisionReal};

pub(crate) const BLOCK: u64 = 4096;

fn block_ranges(start: u64, end: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut a = start;
    while a <= end {
        let b = end.min(a + (BLOCK - 1));
        out.push((a, b));
        a = b + 1;
    }
    out
}

/// Sum of `block_fn` over the inclusive range `[start, end]`.
///
/// `block_fn(a, b, ctx)` must return the sequential sum of its block
/// `[a, b]`; any error aborts the reduction.
pub(crate) fn blocked_try_sum<F>(
    start: u64,
    end: u64,
    ctx: &PrecisionCtx,
    block_fn: F,
) -> Result<PrecisionReal>
where
    F: Fn(u64, u64, &PrecisionCtx) -> Result<PrecisionReal> + Sync,
{
    if end < start {
        return Ok(PrecisionReal::zero(ctx));
    }
    let partials: Vec<Result<PrecisionReal>> = block_ranges(start, end)
        .into_par_iter()
        .map(|(a, b)| block_fn(a, b, ctx))
        .collect();
    let mut acc = PrecisionReal::zero(ctx);
    for p in partials {
        acc = acc.add(&p?, ctx);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_range_once() {
        let ranges = block_ranges(1, 3 * BLOCK + 17);
        assert_eq!(ranges.len(), 4);
        assert_eq!(ranges[0], (1, BLOCK));
        assert_eq!(ranges.last().copied().unwrap().1, 3 * BLOCK + 17);
        let total: u64 = ranges.iter().map(|(a, b)| b - a + 1).sum();
        assert_eq!(total, 3 * BLOCK + 17);
    }

    #[test]
    fn sums_integers() {
        let ctx = PrecisionCtx::new(20).unwrap();
        let got = blocked_try_sum(1, 10_000, &ctx, |a, b, c| {
            let mut acc = PrecisionReal::zero(c);
            for x in a..=b {
                acc = acc.add(&PrecisionReal::from_u64(x, c), c);
            }
            Ok(acc)
        })
        .unwrap();
        let want = PrecisionReal::from_u64(10_000 * 10_001 / 2, &ctx);
        assert!(got.sub(&want, &ctx).is_zero());
    }
}
