//! Emergent quantum dynamics under coarse-graining.
//!
//! Given a microscopic unitary `U` on a `D`-dimensional system and a
//! coarse-graining channel `Λ` onto a `d`-dimensional system, this crate
//! decides whether there is a CPTP map `Γ` with `Γ ∘ Λ = Λ ∘ U`, and builds
//! it when there is. Four independent routes are implemented in [`compat`]:
//! kernel (fiber) invariance, the algebraic association map and intertwiner
//! condition, Choi-matrix feasibility with a guessing-probability witness,
//! and Kraus-set unitary equivalence.
//!
//! [`classical`] holds the classical-inference counterpart on small causal
//! graphs, and [`scenarios`] the built-in and random test scenarios.

pub mod channel;
pub mod classical;
pub mod compat;
mod error;
pub mod linalg;
pub mod random;
pub mod scenarios;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
