//! Construction of the emergent map.
//!
//! The association map sends `σ = Λ(ρ)` to `Λ(UρU*)`; on transfer matrices
//! this is `T_Γ = T_Λ·T_U·T_Λ⁺`, the pseudoinverse picking one preimage of
//! each `σ` in the image of `Λ` and extending by zero off it. When that
//! candidate closes the diagram but is not CPTP, a Choi-feasibility search
//! looks for a CPTP completion.

use super::sdp::{sdp_feasibility, SdpResult, SdpStatus, DEFAULT_MAX_ITER, DEFAULT_SDP_TOL};
use super::Scenario;
use crate::channel::{
    choi_to_kraus_normalized, compose, unitary_channel, KrausChannel, TransferMatrix, CP_TOL,
};
use crate::linalg::{pinv, DEFAULT_RANK_TOL};
use crate::Result;

/// Diagram residual below which the association map counts as well defined.
pub const ASSOCIATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmergentSource {
    /// CPTP as built from the association map.
    AssociationMap,
    /// Completed by the Choi feasibility search.
    Sdp,
}

impl EmergentSource {
    pub fn as_str(self) -> &'static str {
        match self {
            EmergentSource::AssociationMap => "association-map",
            EmergentSource::Sdp => "sdp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Emergent {
    pub channel: KrausChannel,
    pub source: EmergentSource,
    /// `‖Choi(Γ∘Λ) − Choi(Λ∘U)‖_F`.
    pub diagram_residual: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct AssociationCandidate {
    pub transfer: TransferMatrix,
    /// `‖T_Γ·T_Λ − T_Λ·T_U‖_F`.
    pub diagram_residual: f64,
}

/// `T_Λ·T_U·T_Λ⁺`. Not necessarily CP, TP, or even consistent with the
/// diagram; see [`construct_emergent`].
pub fn association_map(s: &Scenario) -> Result<TransferMatrix> {
    Ok(association_candidate(s)?.transfer)
}

pub(crate) fn association_candidate(s: &Scenario) -> Result<AssociationCandidate> {
    let t_lambda = s.coarse_graining().transfer().mat();
    let lifted = t_lambda.matmul(s.unitary_transfer());
    let t_gamma = lifted.matmul(&pinv(t_lambda, DEFAULT_RANK_TOL)?);
    let diagram_residual = t_gamma.matmul(t_lambda).distance(&lifted);
    let d = s.macro_dim();
    Ok(AssociationCandidate {
        transfer: TransferMatrix::new(d, d, t_gamma)?,
        diagram_residual,
    })
}

/// `‖Choi(Γ∘Λ) − Choi(Λ∘U)‖_F`.
pub fn diagram_residual(s: &Scenario, gamma: &KrausChannel) -> Result<f64> {
    let left = compose(gamma, s.coarse_graining())?;
    let right = compose(s.coarse_graining(), &unitary_channel(s.unitary())?)?;
    Ok(left.choi().mat().distance(right.choi().mat()))
}

pub(crate) fn from_association(
    s: &Scenario,
    cand: &AssociationCandidate,
) -> Result<Option<Emergent>> {
    if cand.diagram_residual > ASSOCIATION_TOL {
        return Ok(None);
    }
    let choi = cand.transfer.to_choi();
    if choi.mat().hermitian_defect() > CP_TOL
        || choi.min_eigenvalue()? < -CP_TOL
        || choi.tp_defect() > CP_TOL
    {
        return Ok(None);
    }
    let channel = choi_to_kraus_normalized(&choi, DEFAULT_RANK_TOL)?;
    let diagram_residual = diagram_residual(s, &channel)?;
    Ok(Some(Emergent {
        channel,
        source: EmergentSource::AssociationMap,
        diagram_residual,
    }))
}

pub(crate) fn from_sdp(s: &Scenario, res: &SdpResult) -> Result<Option<Emergent>> {
    let choi = match (&res.status, &res.choi) {
        (SdpStatus::Feasible, Some(c)) => c,
        _ => return Ok(None),
    };
    let channel = choi_to_kraus_normalized(choi, DEFAULT_RANK_TOL)?;
    let diagram_residual = diagram_residual(s, &channel)?;
    Ok(Some(Emergent {
        channel,
        source: EmergentSource::Sdp,
        diagram_residual,
    }))
}

/// Builds a CPTP `Γ` with `Γ∘Λ = Λ∘U`, or returns `None` when neither the
/// association map nor the feasibility search yields one.
pub fn construct_emergent(s: &Scenario) -> Result<Option<Emergent>> {
    let cand = association_candidate(s)?;
    if let Some(e) = from_association(s, &cand)? {
        return Ok(Some(e));
    }
    if cand.diagram_residual > ASSOCIATION_TOL {
        return Ok(None);
    }
    from_sdp(s, &sdp_feasibility(s, DEFAULT_MAX_ITER, DEFAULT_SDP_TOL)?)
}
