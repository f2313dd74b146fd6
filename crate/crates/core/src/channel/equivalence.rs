//! Unitary freedom of Kraus representations.
//!
//! Two Kraus lists of equal length `N` describe the same channel exactly when
//! `K_i = Σ_j W_ij·K̃_j` for some `N × N` unitary `W`. Shorter lists are padded
//! with zero operators first.

use num_complex::Complex64;

use super::KrausChannel;
use crate::linalg::{null_space, pinv, CMatrix, DEFAULT_RANK_TOL};
use crate::{Error, Result};

/// `‖Choi(a) − Choi(b)‖_F ≤ tol`.
pub fn channels_equal(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<bool> {
    check_dims(a, b)?;
    Ok(a.choi().mat().distance(b.choi().mat()) <= tol)
}

fn check_dims(a: &KrausChannel, b: &KrausChannel) -> Result<()> {
    if (a.din(), a.dout()) != (b.din(), b.dout()) {
        return Err(Error::dims(format!(
            "channels {}->{} and {}->{}",
            a.din(),
            a.dout(),
            b.din(),
            b.dout()
        )));
    }
    Ok(())
}

/// Columns `vec(K_i)` of a padded Kraus list.
fn stacked(ch: &KrausChannel, n: usize) -> CMatrix {
    let cols: Vec<Vec<Complex64>> = ch.padded(n).kraus().iter().map(CMatrix::vec).collect();
    CMatrix::from_columns(&cols)
}

/// Unitary `W` with `K_i^{(a)} = Σ_j W_ij·K_j^{(b)}`, both lists padded to a
/// common length `N`.
///
/// With `A`, `B` the matrices of stacked `vec(K)` columns, `A = B·Wᵀ`. The
/// partial isometry `B⁺A` already maps the row space of `A` onto that of `B`;
/// it is completed to a unitary by pairing the two orthogonal complements.
pub fn connecting_unitary(a: &KrausChannel, b: &KrausChannel, tol: f64) -> Result<CMatrix> {
    check_dims(a, b)?;
    let distance = a.choi().mat().distance(b.choi().mat());
    if distance > tol {
        return Err(Error::NotEquivalent { distance });
    }
    let n = a.kraus().len().max(b.kraus().len());
    let va = stacked(a, n);
    let vb = stacked(b, n);

    let partial = pinv(&vb, DEFAULT_RANK_TOL)?.matmul(&va);
    let ker_a = null_space(&va, DEFAULT_RANK_TOL)?;
    let ker_b = null_space(&vb, DEFAULT_RANK_TOL)?;
    if ker_a.len() != ker_b.len() {
        return Err(Error::NumericalFailure(format!(
            "Kraus spans have different ranks ({} vs {})",
            n - ker_a.len(),
            n - ker_b.len()
        )));
    }
    let mut x = partial;
    for (qa, qb) in ker_a.iter().zip(&ker_b) {
        x = &x + &CMatrix::outer(qb, qa);
    }
    let w = x.transpose();

    let bound = 10.0 * tol;
    let residual = mixing_residual(a, b, &w);
    if residual > bound || w.unitary_defect() > bound.max(1e-8) {
        return Err(Error::NumericalFailure(format!(
            "connecting unitary residual {residual:.3e} exceeds {bound:.3e}"
        )));
    }
    Ok(w)
}

/// `max_i ‖K_i^{(a)} − Σ_j W_ij·K_j^{(b)}‖_F` over padded lists.
pub(crate) fn mixing_residual(a: &KrausChannel, b: &KrausChannel, w: &CMatrix) -> f64 {
    let n = w.rows();
    let pa = a.padded(n);
    let pb = b.padded(n);
    (0..n)
        .map(|i| {
            let mut acc = CMatrix::zeros(a.dout(), a.din());
            for (j, kb) in pb.kraus().iter().enumerate() {
                acc = &acc + &kb.scale(w[(i, j)]);
            }
            acc.distance(&pa.kraus()[i])
        })
        .fold(0.0, f64::max)
}

/// Kraus list `{Σ_j W_ij·K_j}` of a channel mixed by a unitary `W`.
pub fn remix(ch: &KrausChannel, w: &CMatrix) -> Result<KrausChannel> {
    let n = w.rows();
    if !w.is_square() || n < ch.kraus().len() {
        return Err(Error::dims(format!(
            "mixing matrix {:?} for {} Kraus operators",
            w.shape(),
            ch.kraus().len()
        )));
    }
    let p = ch.padded(n);
    let kraus = (0..n)
        .map(|i| {
            let mut acc = CMatrix::zeros(ch.dout(), ch.din());
            for (j, k) in p.kraus().iter().enumerate() {
                acc = &acc + &k.scale(w[(i, j)]);
            }
            acc
        })
        .collect();
    KrausChannel::new(kraus)
}
