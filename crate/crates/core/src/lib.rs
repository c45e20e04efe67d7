//! Optimal interpolation formulas in the Hilbert space `W2^(m,m-1)(0,1)`.
//!
//! The space consists of functions on `[0, 1]` whose `(m-1)`-th derivative is
//! absolutely continuous, equipped with the semi-norm
//! `|| phi || = ( int_0^1 (phi^(m) + phi^(m-1))^2 dx )^(1/2)`.
//! For equally spaced nodes `x_b = b h`, `h = 1/N`, the crate constructs the
//! coefficients `C_b(z)` of the interpolation formula
//! `phi(z) ~ sum_b C_b(z) phi(x_b)` that minimise the norm of the error
//! functional, by two independent routes:
//!
//! * [`direct_system`] assembles and solves the dense Lagrange system;
//! * [`explicit_coeffs`] evaluates the closed-form coefficients built on the
//!   discrete analogue of `d^2m/dx^2m - d^(2m-2)/dx^(2m-2)` from
//!   [`discrete_operator`].
//!
//! [`interpolator`] applies coefficient vectors to sampled data and runs error
//! sweeps; [`checks`] bundles the invariant suite used by the CLI `selftest`.

pub mod checks;
pub mod direct_system;
pub mod discrete_operator;
mod error;
pub mod explicit_coeffs;
pub mod interpolator;
pub mod kernel;
pub mod linalg;
pub mod quadrature;

pub use direct_system::{CoefficientVector, GridSpec};
pub use discrete_operator::OperatorData;
pub use error::{Error, Result};
pub use interpolator::{OptimalInterpolator, SampleSet, SampleSource, TestFunction};
pub use kernel::SpaceOrder;
