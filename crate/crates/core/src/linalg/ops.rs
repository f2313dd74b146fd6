use super::{hermitian_eig, CMatrix};
use crate::{Error, Result};

/// Kronecker product: `(a⊗b)[i·rb + k, j·cb + l] = a[i,j]·b[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    CMatrix::from_fn(ra * rb, ca * cb, |r, s| {
        a[(r / rb, s / cb)] * b[(r % rb, s % cb)]
    })
}

/// Which tensor factor survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of an operator on `C^dA ⊗ C^dB`, keeping `keep`.
pub fn partial_trace(a: &CMatrix, dims: (usize, usize), keep: Subsystem) -> Result<CMatrix> {
    let (da, db) = dims;
    if !a.is_square() || a.rows() != da * db {
        return Err(Error::dims(format!(
            "partial trace over {da}x{db} of a {:?} matrix",
            a.shape()
        )));
    }
    Ok(match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| a[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| a[(i * db + k, i * db + l)]).sum()
        }),
    })
}

/// Trace norm `Σ|λ_i|` of a Hermitian matrix.
pub fn trace_norm(a: &CMatrix) -> Result<f64> {
    Ok(hermitian_eig(a)?.values.iter().map(|l| l.abs()).sum())
}
