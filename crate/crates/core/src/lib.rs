//! Exact and approximate orthogonality relations in finite-dimensional real
//! normed spaces, with the machinery to check when linear maps preserve
//! approximate bisectrix orthogonality.
//!
//! - [`normed_space`]: vectors, the norm menu and unit-sphere sampling.
//! - [`ortho_core`]: Birkhoff, Pythagorean, isosceles, Roberts, ρ and
//!   bisectrix orthogonality, plus the one-sided norm derivatives.
//! - [`approx_ortho`]: ε-approximate bisectrix and isosceles relations.
//! - [`operator_analysis`]: `‖T‖`, `[T]`, similarity fits and the bound θ.
//! - [`search`]: planar orthogonality sets, pair samplers, counterexamples.

pub mod approx_ortho;
pub mod error;
pub mod minimize;
pub mod normed_space;
pub mod operator_analysis;
pub mod ortho_core;
pub mod search;

pub use approx_ortho::{ApproxRelation, ApproxRelationKind, Epsilon, Relation};
pub use error::{Error, Result};
pub use normed_space::{euclid_dot, norm, sample_unit_sphere, unit, NormSpec, Vector, DEFAULT_TOL};
pub use operator_analysis::{LinearMapSpec, OperatorBounds, VerificationReport};
pub use ortho_core::{check_relation, RelationKind, Verdict};
