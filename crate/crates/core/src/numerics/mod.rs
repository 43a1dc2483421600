//! Numerical kernels shared by the statistical modules: special functions,
//! adaptive quadrature, and a damped Newton root finder.

mod quadrature;
mod solver;
mod special;

pub use quadrature::adaptive_quadrature;
pub use solver::{damped_newton_root, damped_newton_root_with_jacobian, SolverConfig};
pub use special::{digamma, log_beta, log_gamma, regularized_gamma_q};

pub(crate) use special::{digamma_raw, log_beta_raw};
