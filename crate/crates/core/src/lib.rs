//! Exact and numerical tools for theta decompositions of Jacobi forms,
//! quadratic Gauss sums and the associated half-integral weight sieve.

pub mod arith;
pub mod cyclotomic;
pub mod gauss;
pub mod halfint;
pub mod jacobi;
pub mod qseries;
pub mod theta_matrix;

pub use arith::ArithError;
pub use cyclotomic::CycloError;
pub use halfint::HalfIntError;
pub use jacobi::JacobiError;
pub use qseries::SeriesError;
pub use theta_matrix::ThetaError;

/// Any error raised by this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Cyclo(#[from] CycloError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
    #[error(transparent)]
    HalfInt(#[from] HalfIntError),
}
