use num_complex::Complex64;

use super::{c, CMatrix};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    /// `V·f(Λ)·V*` for a real function of the spectrum.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<Complex64> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|l| c(l, 0.0))
    }
}

/// 2×2 unitary `G` that diagonalizes `[[app, apq], [conj(apq), aqq]]` by
/// `G*·H·G`, stored as its four entries `[[g00, g01], [g10, g11]]`.
#[derive(Debug, Clone, Copy)]
pub(super) struct Rotation {
    pub g00: Complex64,
    pub g01: Complex64,
    pub g10: Complex64,
    pub g11: Complex64,
}

impl Rotation {
    pub fn new(app: f64, aqq: f64, apq: Complex64) -> Self {
        let r = apq.norm();
        let phase = apq / r;
        let zeta = (aqq - app) / (2.0 * r);
        let t = if zeta >= 0.0 {
            1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
        } else {
            -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
        };
        let cs = 1.0 / (1.0 + t * t).sqrt();
        let sn = t * cs;
        let ph = phase.conj();
        Self {
            g00: c(cs, 0.0),
            g01: c(sn, 0.0),
            g10: ph * (-sn),
            g11: ph * cs,
        }
    }

    /// Replaces columns `p`, `q` of `m` by `[m_p, m_q]·G`.
    pub fn apply_right(&self, m: &mut CMatrix, p: usize, q: usize) {
        for i in 0..m.rows() {
            let (xp, xq) = (m[(i, p)], m[(i, q)]);
            m[(i, p)] = xp * self.g00 + xq * self.g10;
            m[(i, q)] = xp * self.g01 + xq * self.g11;
        }
    }

    /// Replaces rows `p`, `q` of `m` by `G*·[m_p; m_q]`.
    pub fn apply_left_adjoint(&self, m: &mut CMatrix, p: usize, q: usize) {
        for j in 0..m.cols() {
            let (xp, xq) = (m[(p, j)], m[(q, j)]);
            m[(p, j)] = self.g00.conj() * xp + self.g10.conj() * xq;
            m[(q, j)] = self.g01.conj() * xp + self.g11.conj() * xq;
        }
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(a: &CMatrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::dims(format!(
            "eigendecomposition of {:?} matrix",
            a.shape()
        )));
    }
    let scale = a.frobenius_norm();
    let asymmetry = a.hermitian_defect();
    if asymmetry > 1e-10 * scale {
        return Err(Error::NotHermitian { asymmetry });
    }
    let n = a.rows();
    let mut work = a.hermitian_part();
    let mut vectors = CMatrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&work) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = work[(p, q)];
                if apq.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                let rot = Rotation::new(work[(p, p)].re, work[(q, q)].re, apq);
                rot.apply_right(&mut work, p, q);
                rot.apply_left_adjoint(&mut work, p, q);
                rot.apply_right(&mut vectors, p, q);
                work[(p, q)] = c(0.0, 0.0);
                work[(q, p)] = c(0.0, 0.0);
                work[(p, p)].im = 0.0;
                work[(q, q)].im = 0.0;
            }
        }
    }
    if !converged && off_diagonal_norm(&work) > threshold {
        return Err(Error::NoConvergence {
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(i, i)].re.total_cmp(&work[(j, j)].re));
    let values = order.iter().map(|&i| work[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| vectors[(i, order[k])]);
    Ok(EigenDecomposition { values, vectors })
}

/// `exp(−i·t·H)` for Hermitian `H`.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.reconstruct_with(|l| Complex64::from_polar(1.0, -t * l)))
}
