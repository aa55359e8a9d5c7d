//! Arbitrary-precision arithmetic and the shared numerical kernels:
//! cyclic tridiagonal solve, simultaneous polynomial root finding,
//! ordinary least squares and Levenberg-Marquardt.

mod cyclic;
mod dense;
mod fit;
mod real;
mod roots;

pub use cyclic::{solve_cyclic_tridiagonal, CyclicTridiagonalSystem};
pub use dense::solve_dense;
pub use fit::{levenberg_marquardt, linear_fit, LinearFit, LmFit};
pub use real::{BigComplex, BigReal, PrecisionContext};
pub use roots::polynomial_roots;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    /// A pivot (or the cyclic correction denominator) fell below the
    /// singularity threshold `10^(-digits+5)`.
    #[error("singular linear system: |pivot| = {pivot_magnitude:e} at row {row}")]
    SingularSystem { row: usize, pivot_magnitude: f64 },
    /// Iteration budget exhausted without meeting the convergence test.
    /// Carries the best parameters seen so far.
    #[error("no convergence after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        best: Vec<BigReal>,
    },
    /// All abscissae coincide; a line fit is undetermined.
    #[error("degenerate abscissae: all x values equal")]
    DegenerateAbscissae,
    #[error("working precision must be at least 17 digits, got {0}")]
    InvalidPrecision(u32),
}
