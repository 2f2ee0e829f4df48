//! Exact rational calculus of double vector bundles in the linear model.
//!
//! Every "manifold" here is a finite-dimensional `ℚ`-vector space and every
//! smooth map a linear one, so bundles, double bundles, normal bundles and
//! their flips are plain linear-algebra data that can be checked for exact
//! equality. The crate builds iterated normal bundles of regular immersion
//! squares and machine-checks the flip isomorphism exchanging the two
//! iteration orders, together with the supporting lemma chain.
//!
//! Organization:
//! * [`matrix`], [`linalg`] — exact matrices, canonical subspaces, quotient
//!   presentations with chosen sections, fiber products.
//! * [`homog`] — scaling actions as weight-graded projection families and the
//!   vector bundles they encode.
//! * [`dvb`] — double vector spaces, side-pullbacks, quotients as cokernels,
//!   flip maps.
//! * [`normal`] — tangent functor, sharp differentials, normal bundles and
//!   the flip isomorphisms `Φ` and `Υ`.
//! * [`symmetry`] — regular immersion squares, `Ψ`/`Θ`, the lemma suite and
//!   the symmetry isomorphism `Λ`.
//! * [`dblcat`] — strict double categories with law checking, instantiated on
//!   commutative squares of linear maps.
//! * [`poly`] — polynomial maps with exact Jacobians for linearizing
//!   nonlinear squares at rational points.
//! * [`json`] — the wire formats used by the CLI.

pub mod dblcat;
pub mod dvb;
pub mod error;
pub mod homog;
pub mod json;
pub mod linalg;
pub mod matrix;
pub mod normal;
pub mod poly;
pub mod rat;
pub mod symmetry;

pub use error::Error;
pub use matrix::Matrix;
pub use rat::Rat;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
