//! Kraus-level form of the diagram: `{K_i·M_j}` and `{M_k·U}` are two Kraus
//! lists of the same channel exactly when they differ by a unitary mixing.

use super::Scenario;
use crate::channel::{
    channels_equal, compose, connecting_unitary, mixing_residual, unitary_channel, KrausChannel,
    CHANNEL_EQ_TOL,
};
use crate::{Error, Result};

/// Largest mixing residual accepted as equivalence.
pub const MIXING_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct KrausEquivalence {
    pub equivalent: bool,
    /// `W` with `K_i·M_j = Σ_k W_{(i,j),k}·M_k·U`, rows indexed `i`-major.
    pub mixing: Option<crate::CMatrix>,
    /// `max ‖K_i·M_j − Σ_k W_{(i,j),k}·M_k·U‖_F`, or the Choi distance of the
    /// two sides when no mixing matrix was constructed.
    pub residual: f64,
}

pub fn verify_kraus_equivalence(s: &Scenario, gamma: &KrausChannel) -> Result<KrausEquivalence> {
    let d = s.macro_dim();
    if (gamma.din(), gamma.dout()) != (d, d) {
        return Err(Error::dims(format!(
            "emergent map {}->{} for macroscopic dimension {d}",
            gamma.din(),
            gamma.dout()
        )));
    }
    let lhs = compose(gamma, s.coarse_graining())?;
    let rhs = compose(s.coarse_graining(), &unitary_channel(s.unitary())?)?;
    if !channels_equal(&lhs, &rhs, CHANNEL_EQ_TOL)? {
        return Ok(KrausEquivalence {
            equivalent: false,
            mixing: None,
            residual: lhs.choi().mat().distance(rhs.choi().mat()),
        });
    }
    let w = match connecting_unitary(&lhs, &rhs, CHANNEL_EQ_TOL) {
        Ok(w) => w,
        Err(Error::NumericalFailure(_)) | Err(Error::NotEquivalent { .. }) => {
            return Ok(KrausEquivalence {
                equivalent: false,
                mixing: None,
                residual: lhs.choi().mat().distance(rhs.choi().mat()),
            })
        }
        Err(e) => return Err(e),
    };
    let residual = mixing_residual(&lhs, &rhs, &w);
    Ok(KrausEquivalence {
        equivalent: residual <= MIXING_TOL,
        mixing: Some(w),
        residual,
    })
}
