//! Exact scalar, series and determinant arithmetic.

pub mod cyclo;
pub mod det;
pub mod gcd;
pub mod laurent;
pub mod parse;
pub mod poly;
pub mod scalar;
pub mod series;

pub use laurent::LaurentSeriesZ;
pub use poly::Poly;
pub use scalar::ExactScalar;
pub use series::{Bank, Mono, TruncSeries};
