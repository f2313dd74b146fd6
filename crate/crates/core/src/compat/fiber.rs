//! Fiber preservation as kernel invariance.
//!
//! `Λ(ρ) = Λ(ρ')` exactly when `ρ − ρ'` lies in `ker T_Λ`, so the dynamics
//! respects the fibers of `Λ` iff `T_Λ·T_U` vanishes on that kernel.

use super::Scenario;
use crate::linalg::{null_space, spectral_norm, CMatrix, DEFAULT_RANK_TOL};
use crate::Result;

/// Largest residual still counted as preserving the fibers.
pub const FIBER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FiberCheck {
    pub preserved: bool,
    /// `max ‖T_Λ·T_U·v‖₂` over unit vectors `v ∈ ker T_Λ`.
    pub residual: f64,
    pub kernel_dim: usize,
}

pub fn check_fiber_preservation(s: &Scenario) -> Result<FiberCheck> {
    let t_lambda = s.coarse_graining().transfer().mat();
    let kernel = null_space(t_lambda, DEFAULT_RANK_TOL)?;
    if kernel.is_empty() {
        return Ok(FiberCheck {
            preserved: true,
            residual: 0.0,
            kernel_dim: 0,
        });
    }
    let basis = CMatrix::from_columns(&kernel);
    let image = t_lambda.matmul(s.unitary_transfer()).matmul(&basis);
    let residual = spectral_norm(&image)?;
    Ok(FiberCheck {
        preserved: residual <= FIBER_TOL,
        residual,
        kernel_dim: kernel.len(),
    })
}
