//! Exact arithmetic: rationals, polynomials, rational functions, Laurent
//! series, log elements, ℏ-series and 2×2 matrices.

pub mod eps;
pub mod frac;
pub mod hbar;
pub mod integrate;
pub mod logelem;
pub mod matrix;
pub mod mpoly;
pub mod poly;
pub mod ratfunc;
pub mod scalar;
pub mod series;
pub mod splitfrac;

pub use eps::{BeyondPrecision, EpsSeries};
pub use frac::Frac;
pub use hbar::HbarSeries;
pub use integrate::{antiderivative, integrate_log, IntegrationError};
pub use logelem::LogElement;
pub use matrix::Mat2;
pub use mpoly::MPoly;
pub use poly::Poly;
pub use ratfunc::{RatError, RatFunc, RatFuncJson, Var};
pub use scalar::{binomial, factorial, fmt_q, parse_q, q, qi, Ring, Q};
pub use series::{LaurentSeries, Point, SeriesError};
pub use splitfrac::SplitFrac;
