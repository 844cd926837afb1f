//! Limit-free discrete calculus over scale grids, unit-step derivatives
//! of logarithm powers, and high-precision evaluation of the associated
//! family of Euler constants.
//!
//! The crate is layered:
//!
//! * [`scale_grid`]: grids with exact rational step `b^(-m)`, difference
//!   quotients, local forward/backward derivatives and the telescoping
//!   (Barrow) sum rules,
//! * [`log_power_derivatives`]: exact and approximate unit-step derivatives
//!   of `(ln x)^k` and the per-term gaps whose sums define the constants,
//! * [`series_engine`]: direct, Richardson and Euler-Maclaurin summation
//!   with reported error bounds and a deterministic parallel reduction,
//! * [`constants`]: `gamma_k`, `gamma'_k`, `lambda_1` and the e-threshold,
//!   each computed by two independent routes that must agree.

pub mod constants;
pub mod error;
pub mod log_power_derivatives;
pub mod precision;
pub mod scale_grid;
pub mod series_engine;

pub use constants::{ConstantId, IdentityReport, ResidualRow};
pub use error::{Error, Result};
pub use precision::{PrecisionCtx, PrecisionReal, DEFAULT_DIGITS, GUARD_DIGITS};
pub use series_engine::{SeriesResult, SumMethod, TailPolicy};
