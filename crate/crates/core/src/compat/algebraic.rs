//! Intertwiner condition `M_k·U = V·M_k` and its dual form
//! `U = Σ_k M_k*·V·M_k`.

use super::Scenario;
use crate::linalg::{kron, pinv, CMatrix, DEFAULT_RANK_TOL};
use crate::{Error, Result};

/// Relative least-squares residual below which `V` counts as found.
pub const ALGEBRAIC_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct AlgebraicSolution {
    /// Present only when the least-squares residual is within tolerance.
    pub v: Option<CMatrix>,
    /// Minimal-norm least-squares minimizer, always available.
    pub least_squares_v: CMatrix,
    /// `sqrt(Σ_k ‖M_k·U − V·M_k‖_F²)` at the minimizer.
    pub residual: f64,
    /// `sqrt(Σ_k ‖M_k·U‖_F²)`, the scale the residual is judged against.
    pub scale: f64,
}

/// Solves `min_V Σ_k ‖M_k·U − V·M_k‖_F²`.
///
/// `vec(V·M_k) = (M_kᵀ ⊗ I_d)·vec(V)`, so all `k` stack into one linear
/// least-squares problem in `vec(V)`, solved by pseudoinverse.
pub fn solve_algebraic_v(s: &Scenario) -> Result<AlgebraicSolution> {
    let d = s.macro_dim();
    let id = CMatrix::identity(d);
    let kraus = s.coarse_graining().kraus();
    let blocks: Vec<CMatrix> = kraus.iter().map(|m| kron(&m.transpose(), &id)).collect();
    let system = CMatrix::vstack(&blocks);
    let rhs: Vec<_> = kraus
        .iter()
        .flat_map(|m| m.matmul(s.unitary()).vec())
        .collect();

    let x = pinv(&system, DEFAULT_RANK_TOL)?.matvec(&rhs);
    let fitted = system.matvec(&x);
    let residual = fitted
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = rhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let least_squares_v = CMatrix::unvec(d, d, &x);
    let v = (residual <= ALGEBRAIC_REL_TOL * scale).then(|| least_squares_v.clone());
    Ok(AlgebraicSolution {
        v,
        least_squares_v,
        residual,
        scale,
    })
}

/// `‖U − Σ_k M_k*·V·M_k‖_F`.
pub fn verify_dual_identity(s: &Scenario, v: &CMatrix) -> Result<f64> {
    let d = s.macro_dim();
    if v.shape() != (d, d) {
        return Err(Error::dims(format!(
            "V of shape {:?}, expected {d}x{d}",
            v.shape()
        )));
    }
    let mut acc = CMatrix::zeros(s.micro_dim(), s.micro_dim());
    for m in s.coarse_graining().kraus() {
        acc = &acc + &m.adjoint().matmul(v).matmul(m);
    }
    Ok(acc.distance(s.unitary()))
}
