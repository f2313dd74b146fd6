//! Quantum states and CPTP maps in Kraus, Choi and transfer-matrix form.
//!
//! Channels are stored as Kraus lists. The Choi matrix uses the
//! input ⊗ output ordering `J = Σ_k vec(K_k)·vec(K_k)*`, which under
//! column-stacking equals `Σ_{jj'} |j⟩⟨j'| ⊗ Λ(|j⟩⟨j'|)`. The transfer matrix
//! is `T = Σ_k conj(K_k) ⊗ K_k`, so `T·vec(ρ) = vec(Λ(ρ))`.

mod equivalence;

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::linalg::{hermitian_eig, kron, partial_trace, CMatrix, Subsystem, ZERO};
use crate::{Error, Result};

pub(crate) use equivalence::mixing_residual;
pub use equivalence::{channels_equal, connecting_unitary, remix};

/// Tolerance on `‖Σ K*K − I‖_F` for a Kraus list to count as trace preserving.
pub const TP_TOL: f64 = 1e-9;
/// Default Frobenius tolerance when comparing Choi matrices.
pub const CHANNEL_EQ_TOL: f64 = 1e-8;
/// Most negative Choi eigenvalue still accepted as completely positive.
pub const CP_TOL: f64 = 1e-8;

const STATE_TOL: f64 = 1e-10;

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState(format!("shape {:?}", mat.shape())));
        }
        let herm = mat.hermitian_defect();
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min = hermitian_eig(&mat)?.values[0];
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self {
            mat: mat.hermitian_part(),
        })
    }

    /// `|ψ⟩⟨ψ|` for a vector normalized here.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let n = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v: Vec<Complex64> = psi.iter().map(|z| z / n).collect();
        Ok(Self {
            mat: CMatrix::outer(&v, &v),
        })
    }

    /// `|i⟩⟨i|` in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        Self { mat: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: CMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Output of a channel applied to a valid state; positivity and trace hold
    /// up to the channel's own tolerance, so no re-validation is done.
    pub(crate) fn from_channel_output(mat: CMatrix) -> Self {
        Self {
            mat: mat.hermitian_part(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }
}

/// CPTP map `ρ ↦ Σ_k K_k ρ K_k*` with `K_k: C^din → C^dout`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    din: usize,
    dout: usize,
    kraus: Vec<CMatrix>,
    choi: OnceLock<ChoiMatrix>,
    transfer: OnceLock<TransferMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::from_parts(kraus)?;
        let deviation = ch.tp_defect();
        if deviation > TP_TOL {
            return Err(Error::NotTp { deviation });
        }
        Ok(ch)
    }

    fn from_parts(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::dims("empty Kraus list"))?;
        let (dout, din) = first.shape();
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (dout, din)) {
            return Err(Error::dims(format!(
                "Kraus operator of shape {:?}, expected {:?}",
                bad.shape(),
                (dout, din)
            )));
        }
        Ok(Self {
            din,
            dout,
            kraus,
            choi: OnceLock::new(),
            transfer: OnceLock::new(),
        })
    }

    /// Rescales `K_k ← K_k·S^{-1/2}` with `S = Σ K*K`, which removes small
    /// trace-preservation defects left by iterative solvers.
    pub(crate) fn normalized(kraus: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::from_parts(kraus)?;
        let s = ch.kraus_gram();
        let eig = hermitian_eig(&s)?;
        if eig.values[0] <= 1e-12 {
            return Err(Error::NotTp {
                deviation: ch.tp_defect(),
            });
        }
        let inv_sqrt = eig.reconstruct_with(|l| Complex64::new(l.powf(-0.5), 0.0));
        Self::new(ch.kraus.iter().map(|k| k.matmul(&inv_sqrt)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![CMatrix::identity(dim)]).expect("identity is TP")
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    fn kraus_gram(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.din, self.din);
        for k in &self.kraus {
            s = &s + &k.adjoint().matmul(k);
        }
        s
    }

    /// `‖Σ K*K − I‖_F`.
    pub fn tp_defect(&self) -> f64 {
        self.kraus_gram().distance(&CMatrix::identity(self.din))
    }

    /// Same channel with zero Kraus operators appended up to `n` entries.
    pub fn padded(&self, n: usize) -> Self {
        let mut kraus = self.kraus.clone();
        while kraus.len() < n {
            kraus.push(CMatrix::zeros(self.dout, self.din));
        }
        Self::from_parts(kraus).expect("padding keeps shapes")
    }

    /// `Σ_k K_k X K_k*` for an arbitrary operator `X`.
    pub fn apply_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.din, self.din) {
            return Err(Error::dims(format!(
                "operator {:?} into channel with input dimension {}",
                x.shape(),
                self.din
            )));
        }
        let mut out = CMatrix::zeros(self.dout, self.dout);
        for k in &self.kraus {
            out = &out + &k.matmul(x).matmul(&k.adjoint());
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_channel_output(
            self.apply_operator(rho.mat())?,
        ))
    }

    /// `(Λ ⊗ id_N)(X)` for `X` on `C^din ⊗ C^N`.
    pub fn apply_with_ancilla(&self, x: &CMatrix, ancilla: usize) -> Result<CMatrix> {
        if x.shape() != (self.din * ancilla, self.din * ancilla) {
            return Err(Error::dims(format!(
                "operator {:?} on {}⊗{}",
                x.shape(),
                self.din,
                ancilla
            )));
        }
        let id = CMatrix::identity(ancilla);
        let mut out = CMatrix::zeros(self.dout * ancilla, self.dout * ancilla);
        for k in &self.kraus {
            let kk = kron(k, &id);
            out = &out + &kk.matmul(x).matmul(&kk.adjoint());
        }
        Ok(out)
    }

    pub fn choi(&self) -> &ChoiMatrix {
        self.choi.get_or_init(|| kraus_to_choi(self))
    }

    pub fn transfer(&self) -> &TransferMatrix {
        self.transfer.get_or_init(|| transfer(self))
    }

    pub fn dual(&self) -> DualMap {
        dual(self)
    }
}

/// Choi matrix in input ⊗ output ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    din: usize,
    dout: usize,
    mat: CMatrix,
}

impl ChoiMatrix {
    /// Validates shape, Hermiticity, complete positivity and trace
    /// preservation.
    pub fn new(din: usize, dout: usize, mat: CMatrix) -> Result<Self> {
        let choi = Self::unchecked(din, dout, mat)?;
        let asymmetry = choi.mat.hermitian_defect();
        if asymmetry > 1e-10 * choi.mat.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { asymmetry });
        }
        let min_eigenvalue = choi.min_eigenvalue()?;
        if min_eigenvalue < -CP_TOL {
            return Err(Error::NotCp { min_eigenvalue });
        }
        let deviation = choi.tp_defect();
        if deviation > CP_TOL {
            return Err(Error::NotTp { deviation });
        }
        Ok(choi)
    }

    pub(crate) fn unchecked(din: usize, dout: usize, mat: CMatrix) -> Result<Self> {
        let n = din * dout;
        if mat.shape() != (n, n) {
            return Err(Error::dims(format!(
                "Choi matrix {:?} for {din}->{dout}",
                mat.shape()
            )));
        }
        Ok(Self { din, dout, mat })
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eig(&self.mat.hermitian_part())?.values[0])
    }

    /// `‖tr_out J − I_din‖_F`.
    pub fn tp_defect(&self) -> f64 {
        partial_trace(&self.mat, (self.din, self.dout), Subsystem::A)
            .expect("shape checked on construction")
            .distance(&CMatrix::identity(self.din))
    }

    /// `Λ(X)[a,b] = Σ_{jj'} X[j,j']·J[j·dout+a, j'·dout+b]`.
    pub fn apply_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.din, self.din) {
            return Err(Error::dims("operator does not match Choi input dimension"));
        }
        let (din, dout) = (self.din, self.dout);
        Ok(CMatrix::from_fn(dout, dout, |a, b| {
            let mut acc = ZERO;
            for j in 0..din {
                for jp in 0..din {
                    acc += x[(j, jp)] * self.mat[(j * dout + a, jp * dout + b)];
                }
            }
            acc
        }))
    }

    /// Reshuffles into the transfer matrix of the same map.
    pub fn to_transfer(&self) -> TransferMatrix {
        let (din, dout) = (self.din, self.dout);
        let mat = CMatrix::from_fn(dout * dout, din * din, |r, s| {
            let (a, b) = (r % dout, r / dout);
            let (j, jp) = (s % din, s / din);
            self.mat[(j * dout + a, jp * dout + b)]
        });
        TransferMatrix { din, dout, mat }
    }
}

/// Matrix of a linear map on column-stacked operators.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    din: usize,
    dout: usize,
    mat: CMatrix,
}

impl TransferMatrix {
    pub fn new(din: usize, dout: usize, mat: CMatrix) -> Result<Self> {
        if mat.shape() != (dout * dout, din * din) {
            return Err(Error::dims(format!(
                "transfer matrix {:?} for {din}->{dout}",
                mat.shape()
            )));
        }
        Ok(Self { din, dout, mat })
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn apply_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.din, self.din) {
            return Err(Error::dims(
                "operator does not match transfer input dimension",
            ));
        }
        Ok(CMatrix::unvec(
            self.dout,
            self.dout,
            &self.mat.matvec(&x.vec()),
        ))
    }

    /// Inverse reshuffle of [`ChoiMatrix::to_transfer`]. The result is not
    /// validated: the map need not be CP or TP.
    pub fn to_choi(&self) -> ChoiMatrix {
        let (din, dout) = (self.din, self.dout);
        let mat = CMatrix::from_fn(din * dout, din * dout, |r, s| {
            let (j, a) = (r / dout, r % dout);
            let (jp, b) = (s / dout, s % dout);
            self.mat[(b * dout + a, jp * din + j)]
        });
        ChoiMatrix { din, dout, mat }
    }
}

/// Heisenberg-picture map `A ↦ Σ_k K_k* A K_k`; unital when the original
/// channel is trace preserving.
#[derive(Debug, Clone)]
pub struct DualMap {
    din: usize,
    dout: usize,
    kraus: Vec<CMatrix>,
}

impl DualMap {
    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    /// Kraus operators `K_k*` of the dual.
    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        if a.shape() != (self.din, self.din) {
            return Err(Error::dims("operator does not match dual input dimension"));
        }
        let mut out = CMatrix::zeros(self.dout, self.dout);
        for k in &self.kraus {
            out = &out + &k.matmul(a).matmul(&k.adjoint());
        }
        Ok(out)
    }
}

pub fn apply(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

pub fn unitary_channel(u: &CMatrix) -> Result<KrausChannel> {
    let deviation = u.unitary_defect();
    if deviation > TP_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    KrausChannel::new(vec![u.clone()])
}

pub fn kraus_to_choi(ch: &KrausChannel) -> ChoiMatrix {
    let n = ch.din * ch.dout;
    let mut mat = CMatrix::zeros(n, n);
    for k in &ch.kraus {
        let v = k.vec();
        mat = &mat + &CMatrix::outer(&v, &v);
    }
    ChoiMatrix {
        din: ch.din,
        dout: ch.dout,
        mat,
    }
}

/// Kraus operators from the spectral decomposition of the Choi matrix, one
/// per eigenvalue above `rank_tol · λ_max`, in descending eigenvalue order.
/// Each operator's largest-modulus entry is made real and nonnegative.
pub fn choi_to_kraus(c: &ChoiMatrix, rank_tol: f64) -> Result<KrausChannel> {
    KrausChannel::new(kraus_operators(c, rank_tol)?)
}

/// As [`choi_to_kraus`], then rescaled by `S^{-1/2}` to absorb the small
/// trace-preservation error of an approximately feasible Choi matrix.
pub(crate) fn choi_to_kraus_normalized(c: &ChoiMatrix, rank_tol: f64) -> Result<KrausChannel> {
    KrausChannel::normalized(kraus_operators(c, rank_tol)?)
}

fn kraus_operators(c: &ChoiMatrix, rank_tol: f64) -> Result<Vec<CMatrix>> {
    let eig = hermitian_eig(&c.mat.hermitian_part())?;
    let min_eigenvalue = eig.values[0];
    if min_eigenvalue < -CP_TOL {
        return Err(Error::NotCp { min_eigenvalue });
    }
    let lmax = *eig.values.last().expect("nonempty spectrum");
    let mut kraus = Vec::new();
    for k in (0..eig.values.len()).rev() {
        let l = eig.values[k];
        if l <= rank_tol * lmax || l <= 0.0 {
            break;
        }
        let col: Vec<Complex64> = eig.vectors.column(k).iter().map(|z| z * l.sqrt()).collect();
        let mut op = CMatrix::unvec(c.dout, c.din, &col);
        let pivot = op.as_slice().iter().copied().fold(ZERO, |best, z| {
            if z.norm() > best.norm() + 1e-12 {
                z
            } else {
                best
            }
        });
        if pivot.norm() > 0.0 {
            op = op.scale(pivot.conj() / pivot.norm());
        }
        kraus.push(op);
    }
    if kraus.is_empty() {
        return Err(Error::NotTp {
            deviation: c.tp_defect(),
        });
    }
    Ok(kraus)
}

pub fn transfer(ch: &KrausChannel) -> TransferMatrix {
    let (din, dout) = (ch.din, ch.dout);
    let mut mat = CMatrix::zeros(dout * dout, din * din);
    for k in &ch.kraus {
        mat = &mat + &kron(&k.conj(), k);
    }
    TransferMatrix { din, dout, mat }
}

/// `later ∘ earlier`, with Kraus set `{L_i·E_j}` ordered `i`-major.
pub fn compose(later: &KrausChannel, earlier: &KrausChannel) -> Result<KrausChannel> {
    if earlier.dout != later.din {
        return Err(Error::dims(format!(
            "composing {}->{} after {}->{}",
            later.din, later.dout, earlier.din, earlier.dout
        )));
    }
    let kraus = later
        .kraus
        .iter()
        .flat_map(|l| earlier.kraus.iter().map(move |e| l.matmul(e)))
        .collect();
    KrausChannel::new(kraus)
}

pub fn dual(ch: &KrausChannel) -> DualMap {
    DualMap {
        din: ch.dout,
        dout: ch.din,
        kraus: ch.kraus.iter().map(CMatrix::adjoint).collect(),
    }
}
