//! Bernstein polynomial spectral tools and a Petrov-Galerkin solver for the
//! time-fractional advection-dispersion equation
//!
//! ```text
//!     D_t^α u = κ₁ u_xx − κ₂ u_x + S,   u(a,t) = u(b,t) = 0,   u(x,0) = g(x)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`bernstein`]: basis evaluation, degree elevation, derivative expansions.
//! * [`dual`]: the dual (biorthogonal) Bernstein basis, exact and Legendre forms.
//! * [`opmatrix`]: banded operational matrices `D_p` and their interior slices.
//! * [`linalg`]: banded LU, Gauss-Legendre rules and condition numbers.
//! * [`caputo`]: L1 weights, Caputo derivatives and manufactured solutions.
//! * [`solver`]: assembly, time marching and evaluation.
//! * [`harness`]: error norms, sweeps, the conditioning study and `verify`.
//! * [`verify`]: the named property suite behind `bernfad verify`.
//! * [`oracle`]: independent reference computations used by the checks.

pub mod bernstein;
pub mod caputo;
pub mod dual;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod opmatrix;
pub mod oracle;
pub mod solver;
pub mod verify;

pub use bernstein::{BernsteinBasis, Interval};
pub use error::{Error, Result};
