//! Guessing-probability witnesses.
//!
//! If an emergent CPTP map exists, every binary ensemble is at least as
//! distinguishable after `Λ` as after `Λ ∘ U`, since `Λ∘U = Γ∘Λ` is a further
//! processing of `Λ`. An ensemble with `pg_after > pg_before` therefore
//! certifies that no such map exists. Failing to find one proves nothing.

use rayon::prelude::*;

use super::Scenario;
use crate::channel::DensityMatrix;
use crate::linalg::{kron, trace_norm, CMatrix};
use crate::random::{derive_seed, random_mixed_state, random_pure_state, rng_from_seed};
use crate::{Error, Result};
use rand::Rng;

/// Margin by which `pg_after` must exceed `pg_before`.
pub const WITNESS_MARGIN: f64 = 1e-9;

/// A binary ensemble `{p_x, ρ_x}` on `C^D ⊗ C^N` whose coarse-grained
/// distinguishability increases under the dynamics.
#[derive(Debug, Clone)]
pub struct EnsembleWitness {
    pub p0: f64,
    pub p1: f64,
    pub rho0: DensityMatrix,
    pub rho1: DensityMatrix,
    pub ancilla_dim: usize,
    /// Guessing probability on `(Λ⊗id)(ρ_x)`.
    pub pg_before: f64,
    /// Guessing probability on `(Λ⊗id)((U⊗I)ρ_x(U⊗I)*)`.
    pub pg_after: f64,
}

impl EnsembleWitness {
    pub fn gap(&self) -> f64 {
        self.pg_after - self.pg_before
    }
}

/// Helstrom bound `½(1 + ‖p0·ρ0 − (1−p0)·ρ1‖₁)`.
pub fn helstrom_pguess(p0: f64, rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidArgument(format!("prior {p0} outside [0, 1]")));
    }
    helstrom_ops(p0, rho0.mat(), rho1.mat())
}

fn helstrom_ops(p0: f64, rho0: &CMatrix, rho1: &CMatrix) -> Result<f64> {
    if rho0.shape() != rho1.shape() {
        return Err(Error::dims(format!(
            "states of dimension {} and {}",
            rho0.rows(),
            rho1.rows()
        )));
    }
    let diff = &rho0.scale_real(p0) - &rho1.scale_real(1.0 - p0);
    Ok(0.5 * (1.0 + trace_norm(&diff.hermitian_part())?))
}

fn random_state<R: Rng + ?Sized>(dim: usize, pure: bool, rng: &mut R) -> CMatrix {
    if pure || dim < 2 {
        random_pure_state(dim, rng)
    } else {
        random_mixed_state(dim, 2, rng)
    }
}

/// Samples `trials` random binary ensembles on `C^D ⊗ C^ancilla_dim` and
/// returns the first, in trial order, that witnesses incompatibility.
///
/// Trial `t` draws from its own stream seeded by `derive_seed(seed, t)`, so
/// the result does not depend on how trials are scheduled across threads.
pub fn search_witness(
    s: &Scenario,
    trials: usize,
    ancilla_dim: usize,
    seed: u64,
) -> Result<Option<EnsembleWitness>> {
    if trials == 0 || ancilla_dim == 0 {
        return Err(Error::InvalidArgument(
            "trials and ancilla dimension must be at least 1".into(),
        ));
    }
    let dim = s.micro_dim() * ancilla_dim;
    let lifted_u = kron(s.unitary(), &CMatrix::identity(ancilla_dim));
    let cg = s.coarse_graining();

    let trial = |t: usize| -> Result<Option<EnsembleWitness>> {
        let mut rng = rng_from_seed(derive_seed(seed, t as u64));
        // pure/pure, mixed/mixed, pure/mixed in rotation
        let (pure0, pure1) = match t % 3 {
            0 => (true, true),
            1 => (false, false),
            _ => (true, false),
        };
        let p0 = rng.random_range(0.25..=0.75);
        let rho0 = random_state(dim, pure0, &mut rng);
        let rho1 = random_state(dim, pure1, &mut rng);

        let before0 = cg.apply_with_ancilla(&rho0, ancilla_dim)?;
        let before1 = cg.apply_with_ancilla(&rho1, ancilla_dim)?;
        let evolve = |r: &CMatrix| lifted_u.matmul(r).matmul(&lifted_u.adjoint());
        let after0 = cg.apply_with_ancilla(&evolve(&rho0), ancilla_dim)?;
        let after1 = cg.apply_with_ancilla(&evolve(&rho1), ancilla_dim)?;

        let pg_before = helstrom_ops(p0, &before0, &before1)?;
        let pg_after = helstrom_ops(p0, &after0, &after1)?;
        if pg_after > pg_before + WITNESS_MARGIN {
            Ok(Some(EnsembleWitness {
                p0,
                p1: 1.0 - p0,
                rho0: DensityMatrix::from_channel_output(rho0),
                rho1: DensityMatrix::from_channel_output(rho1),
                ancilla_dim,
                pg_before,
                pg_after,
            }))
        } else {
            Ok(None)
        }
    };

    (0..trials)
        .into_par_iter()
        .find_map_first(|t| trial(t).transpose())
        .transpose()
}
