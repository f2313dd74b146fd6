//! Compatibility of a coarse-graining `Λ: D → d` with unitary dynamics `U`.
//!
//! An emergent map is a CPTP `Γ: d → d` with `Γ ∘ Λ = Λ ∘ U`. Four routes are
//! implemented and cross-checked by [`run_all`]:
//!
//! * [`fiber`]: `T_Λ·T_U` must vanish on `ker T_Λ`;
//! * [`algebraic`] and [`emergent`]: the intertwiner `V` with `M_k·U = V·M_k`,
//!   and the association map `T_Γ = T_Λ·T_U·T_Λ⁺`;
//! * [`sdp`] and [`witness`]: Choi feasibility, plus a randomized search for
//!   an ensemble whose guessing probability grows under the dynamics;
//! * [`equivalence`]: the Kraus sets of `Γ ∘ Λ` and `Λ ∘ U` are related by a
//!   unitary mixing matrix.

pub mod algebraic;
pub mod emergent;
pub mod equivalence;
pub mod fiber;
pub mod sdp;
pub mod witness;

pub use algebraic::{solve_algebraic_v, verify_dual_identity, AlgebraicSolution};
pub use emergent::{association_map, construct_emergent, Emergent, EmergentSource};
pub use equivalence::{verify_kraus_equivalence, KrausEquivalence};
pub use fiber::{check_fiber_preservation, FiberCheck};
pub use sdp::{sdp_feasibility, SdpResult, SdpStatus, DEFAULT_MAX_ITER, DEFAULT_SDP_TOL};
pub use witness::{helstrom_pguess, search_witness, EnsembleWitness};

use crate::channel::KrausChannel;
use crate::linalg::{kron, CMatrix};
use crate::random::derive_seed;
use crate::{Error, Result};

/// Largest `‖Choi(Γ∘Λ) − Choi(Λ∘U)‖_F` accepted for a reported emergent map.
pub const DIAGRAM_TOL: f64 = 1e-6;
const UNITARY_TOL: f64 = 1e-9;

/// A coarse-graining channel together with microscopic unitary dynamics.
#[derive(Debug, Clone)]
pub struct Scenario {
    cg: KrausChannel,
    u: CMatrix,
    u_transfer: CMatrix,
}

impl Scenario {
    pub fn new(cg: KrausChannel, u: CMatrix) -> Result<Self> {
        if !u.is_square() || u.rows() != cg.din() {
            return Err(Error::dims(format!(
                "unitary {:?} for a coarse-graining with input dimension {}",
                u.shape(),
                cg.din()
            )));
        }
        if cg.dout() > cg.din() {
            return Err(Error::dims(format!(
                "macroscopic dimension {} exceeds microscopic dimension {}",
                cg.dout(),
                cg.din()
            )));
        }
        let deviation = u.unitary_defect();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        let u_transfer = kron(&u.conj(), &u);
        Ok(Self { cg, u, u_transfer })
    }

    /// `D`.
    pub fn micro_dim(&self) -> usize {
        self.cg.din()
    }

    /// `d`.
    pub fn macro_dim(&self) -> usize {
        self.cg.dout()
    }

    pub fn coarse_graining(&self) -> &KrausChannel {
        &self.cg
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    /// `conj(U) ⊗ U`.
    pub fn unitary_transfer(&self) -> &CMatrix {
        &self.u_transfer
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub sdp_tol: f64,
    pub max_iter: usize,
    pub trials: usize,
    /// Restrict the witness search to one ancilla dimension. When absent the
    /// search runs over `N ∈ {1, d, D}`.
    pub ancilla: Option<usize>,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            sdp_tol: sdp::DEFAULT_SDP_TOL,
            max_iter: sdp::DEFAULT_MAX_ITER,
            trials: 1000,
            ancilla: None,
            seed: 0,
        }
    }
}

impl CheckConfig {
    pub fn ancilla_dims(&self, s: &Scenario) -> Vec<usize> {
        match self.ancilla {
            Some(n) => vec![n],
            None => {
                let mut dims = vec![1, s.macro_dim(), s.micro_dim()];
                dims.dedup();
                dims
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Compatible,
    Incompatible,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Compatible => "compatible",
            Verdict::Incompatible => "incompatible",
            Verdict::Undecided => "undecided",
        }
    }
}

/// Per-method verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodAgreement {
    pub geometric: Verdict,
    pub algebraic: Verdict,
    pub sdp: Verdict,
    pub equivalence: Verdict,
}

impl MethodAgreement {
    pub fn all(&self, v: Verdict) -> bool {
        [self.geometric, self.algebraic, self.sdp, self.equivalence]
            .iter()
            .all(|&m| m == v)
    }
}

#[derive(Debug, Clone)]
pub struct CompatReport {
    pub fiber: FiberCheck,
    pub algebraic: AlgebraicSolution,
    /// `‖T_Γ·T_Λ − T_Λ·T_U‖_F` for the association map.
    pub association_residual: f64,
    /// Dual identity residual at `V`, or at the least-squares minimizer when
    /// no exact `V` exists.
    pub dual_identity_residual: f64,
    pub sdp: SdpResult,
    pub witness: Option<EnsembleWitness>,
    pub emergent: Option<Emergent>,
    pub equivalence: Option<KrausEquivalence>,
    pub methods: MethodAgreement,
    pub verdict: Verdict,
}

/// Runs every check and cross-validates their verdicts.
///
/// Fails with [`Error::MethodDisagreement`] when the results contradict one
/// another: an intertwiner or a feasible Choi matrix without fiber
/// preservation, a witness next to a feasible Choi matrix, or an emergent map
/// that does not close the diagram.
pub fn run_all(s: &Scenario, cfg: &CheckConfig) -> Result<CompatReport> {
    let ((fiber, algebraic), (sdp_res, witness)) = rayon::join(
        || rayon::join(|| check_fiber_preservation(s), || solve_algebraic_v(s)),
        || {
            rayon::join(
                || sdp_feasibility(s, cfg.max_iter, cfg.sdp_tol),
                || find_witness(s, cfg),
            )
        },
    );
    let (fiber, algebraic, sdp_res, witness) = (fiber?, algebraic?, sdp_res?, witness?);

    let v_for_dual = algebraic.v.as_ref().unwrap_or(&algebraic.least_squares_v);
    let dual_identity_residual = verify_dual_identity(s, v_for_dual)?;
    let assoc = emergent::association_candidate(s)?;
    let association_residual = assoc.diagram_residual;

    let emergent = match emergent::from_association(s, &assoc)? {
        Some(e) => Some(e),
        None if assoc.diagram_residual <= emergent::ASSOCIATION_TOL => {
            emergent::from_sdp(s, &sdp_res)?
        }
        None => None,
    };
    let equivalence = match &emergent {
        Some(e) => Some(verify_kraus_equivalence(s, &e.channel)?),
        None => None,
    };

    let geometric = if fiber.preserved {
        Verdict::Compatible
    } else {
        Verdict::Incompatible
    };
    let algebraic_ok = algebraic.v.is_some() || association_residual <= emergent::ASSOCIATION_TOL;
    let algebraic_verdict = if algebraic_ok {
        Verdict::Compatible
    } else {
        Verdict::Incompatible
    };
    let sdp_verdict = match (sdp_res.status, &witness) {
        (_, Some(_)) | (SdpStatus::Infeasible, _) => Verdict::Incompatible,
        (SdpStatus::Feasible, None) => Verdict::Compatible,
        (SdpStatus::Undecided, None) => Verdict::Undecided,
    };
    let equivalence_verdict = match &equivalence {
        Some(eq) if eq.equivalent => Verdict::Compatible,
        Some(_) => Verdict::Incompatible,
        None => Verdict::Undecided,
    };
    let methods = MethodAgreement {
        geometric,
        algebraic: algebraic_verdict,
        sdp: sdp_verdict,
        equivalence: equivalence_verdict,
    };

    let mut problems = Vec::new();
    if algebraic.v.is_some() && !fiber.preserved {
        problems.push(format!(
            "intertwiner found but fiber residual is {:.3e}",
            fiber.residual
        ));
    }
    if sdp_res.status == SdpStatus::Feasible && !fiber.preserved {
        problems.push(format!(
            "Choi matrix feasible but fiber residual is {:.3e}",
            fiber.residual
        ));
    }
    if sdp_res.status == SdpStatus::Feasible && witness.is_some() {
        problems.push("guessing-probability witness found for a feasible Choi matrix".into());
    }
    if let Some(e) = &emergent {
        if e.diagram_residual > DIAGRAM_TOL {
            problems.push(format!(
                "emergent map leaves diagram residual {:.3e}",
                e.diagram_residual
            ));
        }
        if !fiber.preserved {
            problems.push("emergent map found but fibers are not preserved".into());
        }
    }
    if !problems.is_empty() {
        return Err(Error::MethodDisagreement(problems.join("; ")));
    }

    let verdict = if emergent.is_some() {
        Verdict::Compatible
    } else if !fiber.preserved || sdp_res.status == SdpStatus::Infeasible || witness.is_some() {
        Verdict::Incompatible
    } else {
        Verdict::Undecided
    };

    Ok(CompatReport {
        fiber,
        algebraic,
        association_residual,
        dual_identity_residual,
        sdp: sdp_res,
        witness,
        emergent,
        equivalence,
        methods,
        verdict,
    })
}

fn find_witness(s: &Scenario, cfg: &CheckConfig) -> Result<Option<EnsembleWitness>> {
    for n in cfg.ancilla_dims(s) {
        let seed = derive_seed(cfg.seed, n as u64);
        if let Some(w) = search_witness(s, cfg.trials, n, seed)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}
