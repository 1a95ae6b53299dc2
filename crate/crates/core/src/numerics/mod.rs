//! Small numerical kernels shared by the solvers: dense linear algebra on
//! tiny systems, damped Newton iteration, adaptive Runge-Kutta integration
//! and quadrature.

pub mod linalg;
pub mod newton;
pub mod ode;
pub mod quad;

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
