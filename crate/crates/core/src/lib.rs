pub mod algebra;
pub mod cli;
pub mod error;
pub mod factorization;
pub mod fock;
pub mod hirota;
pub mod matrixrep;
pub mod partitions;
pub mod report;
pub mod schur;
pub mod tau;

pub use algebra::{Bank, ExactScalar, LaurentSeriesZ, Mono, Poly, TruncSeries};
pub use error::{Error, Result};
pub use partitions::{Partition, PlanePartition};
