//! Choi-matrix feasibility for the emergent map.
//!
//! Searches for a Hermitian `J ⪰ 0` (the Choi matrix of `Γ: d → d`) with
//! `tr_out J = I_d` and `T_Γ(J)·T_Λ = T_Λ·T_U`, by Dykstra alternating
//! projections between the PSD cone and the affine solution set of the
//! linear constraints.

use num_complex::Complex64;

use super::Scenario;
use crate::channel::ChoiMatrix;
use crate::linalg::{hermitian_eig, pinv, CMatrix, DEFAULT_RANK_TOL, ZERO};
use crate::Result;

pub const DEFAULT_MAX_ITER: usize = 20_000;
pub const DEFAULT_SDP_TOL: f64 = 1e-7;
/// Iterations over which a stalled residual is measured.
pub const STALL_WINDOW: usize = 200;
const STALL_REL_CHANGE: f64 = 1e-12;
/// Eigenvalues below this fraction of the largest span no face direction.
const FACE_REL_TOL: f64 = 1e-6;
const POLISH_STEPS: usize = 8;
const POLISH_TARGET: f64 = 1e-13;
/// Size cap on the refinement Jacobian (complex entries of `B`).
const POLISH_MAX_UNKNOWNS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Feasible,
    /// The residual stalled above `100·tol`. Alternating projections give no
    /// exact certificate, so this means "infeasible up to tolerance".
    Infeasible,
    Undecided,
}

impl SdpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SdpStatus::Feasible => "feasible",
            SdpStatus::Infeasible => "infeasible",
            SdpStatus::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpResult {
    pub status: SdpStatus,
    /// `‖A·vec(J) − b‖₂` at the last PSD iterate.
    pub residual: f64,
    pub iterations: usize,
    /// Last PSD iterate when feasible. It satisfies the linear constraints to
    /// `tol`, so it is not re-validated as a [`ChoiMatrix`].
    pub choi: Option<ChoiMatrix>,
}

/// Linear constraints `A·x = b` on `x = vec_row(J)`, `J` of size `d² × d²`.
struct Constraints {
    a: CMatrix,
    b: Vec<Complex64>,
}

impl Constraints {
    fn build(s: &Scenario) -> Self {
        let d = s.macro_dim();
        let dd = d * d;
        let n = dd * dd;
        let t_lambda = s.coarse_graining().transfer().mat();
        let target = t_lambda.matmul(s.unitary_transfer());
        let cols = target.cols();

        // T_Γ[b·d + a, j'·d + j] = J[j·d + a, j'·d + b]
        let j_index = |r: usize, sidx: usize| {
            let (a, b) = (r % d, r / d);
            let (j, jp) = (sidx % d, sidx / d);
            (j * d + a) * dd + (jp * d + b)
        };

        let rows = dd * cols + dd;
        let mut a = CMatrix::zeros(rows, n);
        let mut rhs = Vec::with_capacity(rows);
        for r in 0..dd {
            for col in 0..cols {
                let row = r * cols + col;
                for sidx in 0..dd {
                    a[(row, j_index(r, sidx))] += t_lambda[(sidx, col)];
                }
                rhs.push(target[(r, col)]);
            }
        }
        // Σ_a J[j·d + a, j'·d + a] = δ_{jj'}
        for j in 0..d {
            for jp in 0..d {
                let row = dd * cols + j * d + jp;
                for aa in 0..d {
                    a[(row, (j * d + aa) * dd + (jp * d + aa))] = Complex64::new(1.0, 0.0);
                }
                rhs.push(if j == jp {
                    Complex64::new(1.0, 0.0)
                } else {
                    ZERO
                });
            }
        }
        Self { a, b: rhs }
    }

    fn violation(&self, x: &[Complex64]) -> f64 {
        self.a
            .matvec(x)
            .iter()
            .zip(&self.b)
            .map(|(p, q)| (p - q).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Orthogonal projection onto `{x : A⁺A·x = A⁺b}`, which is the solution set
/// when the system is consistent and the least-squares set otherwise.
struct AffineProjector {
    null_proj: CMatrix,
    offset: Vec<Complex64>,
}

impl AffineProjector {
    fn new(c: &Constraints) -> Result<Self> {
        let a_pinv = pinv(&c.a, DEFAULT_RANK_TOL)?;
        let n = c.a.cols();
        let null_proj = &CMatrix::identity(n) - &a_pinv.matmul(&c.a);
        let offset = a_pinv.matvec(&c.b);
        Ok(Self { null_proj, offset })
    }

    fn project(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.null_proj
            .matvec(x)
            .into_iter()
            .zip(&self.offset)
            .map(|(p, o)| p + o)
            .collect()
    }
}

fn as_matrix(x: &[Complex64], dd: usize) -> CMatrix {
    CMatrix::from_fn(dd, dd, |i, j| x[i * dd + j])
}

fn project_psd(x: &[Complex64], dd: usize) -> Result<Vec<Complex64>> {
    let m = as_matrix(x, dd).hermitian_part();
    let eig = hermitian_eig(&m)?;
    let clipped = eig.reconstruct_with(|l| Complex64::new(l.max(0.0), 0.0));
    Ok(clipped.as_slice().to_vec())
}

fn hermitize(x: Vec<Complex64>, dd: usize) -> Vec<Complex64> {
    as_matrix(&x, dd).hermitian_part().as_slice().to_vec()
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

fn add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(p, q)| p + q).collect()
}

/// Gauss-Newton refinement of `J = B·B†`, with `B` the dominant part of the
/// square root of `z`. `J` stays PSD by construction. `None` if the residual
/// does not improve.
fn polish(c: &Constraints, z: &[Complex64], dd: usize) -> Result<Option<(Vec<Complex64>, f64)>> {
    let eig = hermitian_eig(&as_matrix(z, dd).hermitian_part())?;
    let top = eig.values.last().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..dd)
        .filter(|&k| eig.values[k] > FACE_REL_TOL * top)
        .collect();
    let r = keep.len();
    if r == 0 || dd * r > POLISH_MAX_UNKNOWNS {
        return Ok(None);
    }
    let mut b = CMatrix::from_fn(dd, r, |i, k| {
        eig.vectors[(i, keep[k])] * eig.values[keep[k]].sqrt()
    });
    let gram = |b: &CMatrix| b.matmul(&b.adjoint()).hermitian_part().as_slice().to_vec();
    let start = c.violation(z);
    let mut best: Option<(Vec<Complex64>, f64)> = None;
    let mut current = start;
    for _ in 0..POLISH_STEPS {
        // real Jacobian of B ↦ A·vec(B·B†), unknowns (Re B, Im B)
        let m = c.a.rows();
        let mut jac = CMatrix::zeros(2 * m, 2 * dd * r);
        for idx in 0..2 * dd * r {
            let (i, k, unit) = (
                idx / 2 / r,
                idx / 2 % r,
                if idx % 2 == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 1.0)
                },
            );
            let mut e = CMatrix::zeros(dd, r);
            e[(i, k)] = unit;
            let db = e.matmul(&b.adjoint());
            let dj = (&db + &db.adjoint()).as_slice().to_vec();
            for (row, v) in c.a.matvec(&dj).into_iter().enumerate() {
                jac[(2 * row, idx)] = Complex64::new(v.re, 0.0);
                jac[(2 * row + 1, idx)] = Complex64::new(v.im, 0.0);
            }
        }
        let ax = c.a.matvec(&gram(&b));
        let defect: Vec<Complex64> =
            c.b.iter()
                .zip(&ax)
                .flat_map(|(t, v)| {
                    let e = t - v;
                    [Complex64::new(e.re, 0.0), Complex64::new(e.im, 0.0)]
                })
                .collect();
        let step = pinv(&jac, DEFAULT_RANK_TOL)?.matvec(&defect);
        b = CMatrix::from_fn(dd, r, |i, k| {
            let idx = 2 * (i * r + k);
            b[(i, k)] + Complex64::new(step[idx].re, step[idx + 1].re)
        });
        let x = gram(&b);
        let res = c.violation(&x);
        if res >= current {
            break;
        }
        current = res;
        best = Some((x, res));
        if res <= POLISH_TARGET {
            break;
        }
    }
    Ok(best.filter(|(_, res)| *res < start))
}

/// Decides existence of a CPTP `Γ` with `Γ ∘ Λ = Λ ∘ U`.
pub fn sdp_feasibility(s: &Scenario, max_iter: usize, tol: f64) -> Result<SdpResult> {
    let max_iter = max_iter.max(1);
    let d = s.macro_dim();
    let dd = d * d;
    let constraints = Constraints::build(s);
    let affine = AffineProjector::new(&constraints)?;

    // start from the completely depolarizing channel, interior to the cone
    let mut z = CMatrix::identity(dd)
        .scale_real(1.0 / d as f64)
        .as_slice()
        .to_vec();
    let mut p = vec![ZERO; dd * dd];
    let mut q = vec![ZERO; dd * dd];
    let mut history: Vec<f64> = Vec::with_capacity(max_iter.min(100_000));
    let mut residual = f64::INFINITY;

    for it in 1..=max_iter {
        let zp = add(&z, &p);
        let y = hermitize(affine.project(&zp), dd);
        p = sub(&zp, &y);

        let yq = add(&y, &q);
        z = project_psd(&yq, dd)?;
        q = sub(&yq, &z);

        residual = constraints.violation(&z);
        if residual <= tol {
            if let Some((x, r)) = polish(&constraints, &z, dd)? {
                z = x;
                residual = r;
            }
            let choi = ChoiMatrix::unchecked(d, d, as_matrix(&z, dd))?;
            return Ok(SdpResult {
                status: SdpStatus::Feasible,
                residual,
                iterations: it,
                choi: Some(choi),
            });
        }
        history.push(residual);
        if it > STALL_WINDOW {
            let old = history[it - 1 - STALL_WINDOW];
            if residual > 100.0 * tol && (old - residual).abs() <= STALL_REL_CHANGE * old {
                return Ok(SdpResult {
                    status: SdpStatus::Infeasible,
                    residual,
                    iterations: it,
                    choi: None,
                });
            }
        }
    }
    Ok(SdpResult {
        status: SdpStatus::Undecided,
        residual,
        iterations: max_iter,
        choi: None,
    })
}
