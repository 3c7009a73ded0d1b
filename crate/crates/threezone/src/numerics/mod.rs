//! Small self-contained numerical kernels: bracketing root finder,
//! adaptive Gauss-Kronrod quadrature, Dormand-Prince integration and a
//! Jacobi eigensolver for the tiny symmetric systems used by the design
//! routines.

mod brent;
mod eigen;
mod quadrature;
mod rk45;

pub use brent::{brent, BrentResult};
pub use eigen::jacobi_symmetric_4;
pub use quadrature::integrate_adaptive;
pub use rk45::{DenseStep, Dopri5, Flow, StepControl};
