//! JSON file formats. Complex numbers are `[re, im]`, matrices are row-major
//! nested arrays, and every file carries `"version": 1`.

use coarsekit::channel::KrausChannel;
use coarsekit::classical::{ChainModel, CondTable, DoModel};
use coarsekit::compat::{CheckConfig, CompatReport, Scenario};
use coarsekit::{CMatrix, Complex64};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_json(m: &JsonMatrix) -> Result<CMatrix, String> {
    let cols = m.first().map_or(0, Vec::len);
    if m.is_empty() || cols == 0 {
        return Err("empty matrix".into());
    }
    if m.iter().any(|r| r.len() != cols) {
        return Err("ragged matrix rows".into());
    }
    let data = m
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    CMatrix::new(m.len(), cols, data).map_err(|e| e.to_string())
}

/// Overrides for [`CheckConfig`]; absent fields keep their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdp_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub p_a: Vec<f64>,
    pub b_given_a: Vec<Vec<f64>>,
    pub x_given_a: Vec<Vec<f64>>,
    pub y_given_b: Vec<Vec<f64>>,
}

/// `b_given_ax` has one column per parent pair, flattened as `a·n_x + x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoFile {
    pub p_a: Vec<f64>,
    pub x_given_a: Vec<Vec<f64>>,
    pub b_given_ax: Vec<Vec<f64>>,
    pub y_given_b: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainFile>,
    #[serde(default, rename = "do", skip_serializing_if = "Option::is_none")]
    pub do_model: Option<DoFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub micro_dim: Option<usize>,
    #[serde(rename = "d", default, skip_serializing_if = "Option::is_none")]
    pub macro_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigFile>,
}

/// Why a scenario file could not be turned into a model.
#[derive(Debug)]
pub enum LoadError {
    /// Structurally wrong: missing fields, wrong version, ragged matrices.
    Format(String),
    /// Well formed, but violates a channel, unitary or table invariant.
    Invariant(coarsekit::Error),
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            version: FORMAT_VERSION,
            micro_dim: Some(s.micro_dim()),
            macro_dim: Some(s.macro_dim()),
            kraus: Some(
                s.coarse_graining()
                    .kraus()
                    .iter()
                    .map(matrix_to_json)
                    .collect(),
            ),
            unitary: Some(matrix_to_json(s.unitary())),
            classical: None,
            config: None,
        }
    }

    pub fn check_version(&self) -> Result<(), LoadError> {
        if self.version != FORMAT_VERSION {
            return Err(LoadError::Format(format!(
                "unsupported format version {} (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Result<Scenario, LoadError> {
        self.check_version()?;
        let (Some(kraus), Some(unitary)) = (&self.kraus, &self.unitary) else {
            return Err(LoadError::Format(
                "file has no quantum scenario (kraus, unitary)".into(),
            ));
        };
        let kraus = kraus
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>, _>>()
            .map_err(LoadError::Format)?;
        let u = matrix_from_json(unitary).map_err(LoadError::Format)?;
        let cg = KrausChannel::new(kraus).map_err(LoadError::Invariant)?;
        if let Some(dm) = self.micro_dim {
            if dm != cg.din() {
                return Err(LoadError::Invariant(coarsekit::Error::DimensionMismatch(
                    format!("D = {dm} but Kraus operators act on dimension {}", cg.din()),
                )));
            }
        }
        if let Some(d) = self.macro_dim {
            if d != cg.dout() {
                return Err(LoadError::Invariant(coarsekit::Error::DimensionMismatch(
                    format!("d = {d} but Kraus operators map to dimension {}", cg.dout()),
                )));
            }
        }
        Scenario::new(cg, u).map_err(LoadError::Invariant)
    }

    pub fn chain_model(&self) -> Result<ChainModel, LoadError> {
        self.check_version()?;
        let c = self
            .classical
            .as_ref()
            .and_then(|c| c.chain.as_ref())
            .ok_or_else(|| LoadError::Format("file has no classical.chain block".into()))?;
        let t = |rows: &Vec<Vec<f64>>| CondTable::from_rows(rows).map_err(LoadError::Invariant);
        ChainModel::new(
            c.p_a.clone(),
            t(&c.b_given_a)?,
            t(&c.x_given_a)?,
            t(&c.y_given_b)?,
        )
        .map_err(LoadError::Invariant)
    }

    pub fn do_model(&self) -> Result<DoModel, LoadError> {
        self.check_version()?;
        let c = self
            .classical
            .as_ref()
            .and_then(|c| c.do_model.as_ref())
            .ok_or_else(|| LoadError::Format("file has no classical.do block".into()))?;
        let t = |rows: &Vec<Vec<f64>>| CondTable::from_rows(rows).map_err(LoadError::Invariant);
        DoModel::new(
            c.p_a.clone(),
            t(&c.x_given_a)?,
            t(&c.b_given_ax)?,
            t(&c.y_given_b)?,
        )
        .map_err(LoadError::Invariant)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub name: String,
    #[serde(rename = "D")]
    pub micro_dim: usize,
    #[serde(rename = "d")]
    pub macro_dim: usize,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub sdp_tol: f64,
    pub max_iter: usize,
    pub trials: usize,
    pub ancilla: Vec<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodsReport {
    pub geometric: String,
    pub algebraic: String,
    pub sdp: String,
    pub equivalence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberReport {
    pub preserved: bool,
    pub residual: f64,
    pub kernel_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicReport {
    pub v: Option<JsonMatrix>,
    pub residual: f64,
    pub scale: f64,
    pub dual_identity_residual: f64,
    pub association_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpReport {
    pub status: String,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub p0: f64,
    pub p1: f64,
    pub ancilla_dim: usize,
    pub pg_before: f64,
    pub pg_after: f64,
    pub rho0: JsonMatrix,
    pub rho1: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergentReport {
    pub source: String,
    pub diagram_residual: f64,
    pub kraus: Vec<JsonMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub residual: f64,
    pub mixing: Option<JsonMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub version: u32,
    pub tool: String,
    pub scenario: ScenarioInfo,
    pub config: ConfigEcho,
    pub verdict: String,
    pub methods: MethodsReport,
    pub fiber: FiberReport,
    pub algebraic: AlgebraicReport,
    pub sdp: SdpReport,
    pub witness: Option<WitnessReport>,
    pub emergent: Option<EmergentReport>,
    pub equivalence: Option<EquivalenceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

pub fn tool_version() -> String {
    format!("coarsekit {}", env!("CARGO_PKG_VERSION"))
}

impl ReportFile {
    pub fn new(info: ScenarioInfo, s: &Scenario, cfg: &CheckConfig, r: &CompatReport) -> Self {
        Self {
            version: FORMAT_VERSION,
            tool: tool_version(),
            scenario: info,
            config: ConfigEcho {
                sdp_tol: cfg.sdp_tol,
                max_iter: cfg.max_iter,
                trials: cfg.trials,
                ancilla: cfg.ancilla_dims(s),
                seed: cfg.seed,
            },
            verdict: r.verdict.as_str().into(),
            methods: MethodsReport {
                geometric: r.methods.geometric.as_str().into(),
                algebraic: r.methods.algebraic.as_str().into(),
                sdp: r.methods.sdp.as_str().into(),
                equivalence: r.methods.equivalence.as_str().into(),
            },
            fiber: FiberReport {
                preserved: r.fiber.preserved,
                residual: r.fiber.residual,
                kernel_dim: r.fiber.kernel_dim,
            },
            algebraic: AlgebraicReport {
                v: r.algebraic.v.as_ref().map(matrix_to_json),
                residual: r.algebraic.residual,
                scale: r.algebraic.scale,
                dual_identity_residual: r.dual_identity_residual,
                association_residual: r.association_residual,
            },
            sdp: SdpReport {
                status: r.sdp.status.as_str().into(),
                residual: r.sdp.residual,
                iterations: r.sdp.iterations,
            },
            witness: r.witness.as_ref().map(|w| WitnessReport {
                p0: w.p0,
                p1: w.p1,
                ancilla_dim: w.ancilla_dim,
                pg_before: w.pg_before,
                pg_after: w.pg_after,
                rho0: matrix_to_json(w.rho0.mat()),
                rho1: matrix_to_json(w.rho1.mat()),
            }),
            emergent: r.emergent.as_ref().map(|e| EmergentReport {
                source: e.source.as_str().into(),
                diagram_residual: e.diagram_residual,
                kraus: e.channel.kraus().iter().map(matrix_to_json).collect(),
            }),
            equivalence: r.equivalence.as_ref().map(|e| EquivalenceReport {
                equivalent: e.equivalent,
                residual: e.residual,
                mixing: e.mixing.as_ref().map(matrix_to_json),
            }),
            timing_ms: None,
        }
    }
}

/// Output of `construct`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub version: u32,
    pub dim: usize,
    pub source: String,
    pub diagram_residual: f64,
    pub kraus: Vec<JsonMatrix>,
}

/// Output of `classical`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "query", rename_all = "lowercase")]
pub enum ClassicalReport {
    Emergent {
        /// Rows indexed by `y`, columns by `x`.
        table: Vec<Vec<f64>>,
        total_probability_residual: f64,
    },
    Do {
        x: usize,
        interventional: Vec<f64>,
        observational: Vec<f64>,
        l1_gap: f64,
        differ: bool,
    },
}
