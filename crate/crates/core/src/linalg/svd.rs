use num_complex::Complex64;

use super::eigen::Rotation;
use super::{inner, norm2, CMatrix, ZERO};
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Thin singular value decomposition `a = u·diag(s)·v*` with
/// `k = min(rows, cols)` singular values in descending order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let (m, n, k) = (self.u.rows(), self.v.rows(), self.s.len());
        CMatrix::from_fn(m, n, |i, j| {
            (0..k)
                .map(|l| self.u[(i, l)] * self.s[l] * self.v[(j, l)].conj())
                .sum()
        })
    }

    /// Number of singular values above `rel_tol · s_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let smax = self.s.first().copied().unwrap_or(0.0);
        self.s
            .iter()
            .filter(|&&x| x > rel_tol * smax && x > 0.0)
            .count()
    }
}

/// One-sided (Hestenes) Jacobi on the columns of a tall matrix. Returns the
/// orthogonalized columns and the accumulated right rotation, unsorted.
fn hestenes(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut v = CMatrix::identity(n);
    let tol = f64::EPSILON * m as f64;
    // columns at rounding level carry no information and are left alone
    let floor = (f64::EPSILON * a.frobenius_norm()).powi(2);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    alpha += wp.norm_sqr();
                    beta += wq.norm_sqr();
                    gamma += wp.conj() * wq;
                }
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() || alpha <= floor || beta <= floor {
                    continue;
                }
                rotated = true;
                let rot = Rotation::new(alpha, beta, gamma);
                rot.apply_right(&mut w, p, q);
                rot.apply_right(&mut v, p, q);
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_SWEEPS,
    })
}

/// Extends `basis` (orthonormal vectors of length `dim`) with unit vectors
/// orthogonal to everything already present until it holds `target` vectors.
fn complete_basis(basis: &mut Vec<Vec<Complex64>>, dim: usize, target: usize) {
    let mut e = 0;
    while basis.len() < target && e < dim {
        let mut cand = vec![ZERO; dim];
        cand[e] = Complex64::new(1.0, 0.0);
        e += 1;
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = inner(b, &cand);
                for (x, y) in cand.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let nrm = norm2(&cand);
        if nrm > 1e-6 {
            basis.push(cand.into_iter().map(|z| z / nrm).collect());
        }
    }
}

fn svd_tall(a: &CMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let (w, v) = hestenes(a)?;
    let norms: Vec<f64> = (0..n).map(|j| norm2(&w.column(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let floor = f64::EPSILON * a.frobenius_norm();
    let mut ucols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for &j in &order {
        if norms[j] > floor && norms[j] > f64::MIN_POSITIVE {
            ucols.push(w.column(j).into_iter().map(|z| z / norms[j]).collect());
        } else {
            break;
        }
    }
    complete_basis(&mut ucols, m, n);
    let u = CMatrix::from_columns(&ucols);
    let v = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(Svd { u, s, v })
}

/// Thin SVD of an arbitrary matrix.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    if a.rows() >= a.cols() {
        svd_tall(a)
    } else {
        let t = svd_tall(&a.adjoint())?;
        Ok(Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        })
    }
}

/// Orthonormal basis of `ker(a)` as column vectors. Singular values at or
/// below `rel_tol · s_max` count as zero.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> Result<Vec<Vec<Complex64>>> {
    let n = a.cols();
    let padded;
    let tall = if a.rows() < n {
        padded = a.pad_rows(n);
        &padded
    } else {
        a
    };
    let dec = svd_tall(tall)?;
    let smax = dec.s[0];
    Ok((0..n)
        .filter(|&j| dec.s[j] <= rel_tol * smax || dec.s[j] == 0.0)
        .map(|j| dec.v.column(j))
        .collect())
}

/// Moore–Penrose pseudoinverse; singular values at or below
/// `rank_tol · s_max` are treated as zero.
pub fn pinv(a: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    if rank_tol.is_nan() || rank_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "rank tolerance {rank_tol} must be positive"
        )));
    }
    let dec = svd(a)?;
    let (m, n) = a.shape();
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..dec.s.len())
        .filter(|&k| dec.s[k] > rank_tol * smax && dec.s[k] > 0.0)
        .collect();
    Ok(CMatrix::from_fn(n, m, |i, j| {
        keep.iter()
            .map(|&k| dec.v[(i, k)] * dec.u[(j, k)].conj() / dec.s[k])
            .sum()
    }))
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    Ok(svd(a)?.s.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::random::{ginibre, rng_from_seed};

    fn check_svd(a: &CMatrix) {
        let dec = svd(a).unwrap();
        let k = a.rows().min(a.cols());
        assert_eq!(dec.s.len(), k);
        assert!(dec.reconstruct().distance(a) <= 1e-9 * a.frobenius_norm().max(1.0));
        assert!(
            dec.u
                .adjoint()
                .matmul(&dec.u)
                .distance(&CMatrix::identity(k))
                < 1e-10
        );
        assert!(
            dec.v
                .adjoint()
                .matmul(&dec.v)
                .distance(&CMatrix::identity(k))
                < 1e-10
        );
        assert!(dec.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(dec.s.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn identity_has_unit_singular_values() {
        let dec = svd(&CMatrix::identity(3)).unwrap();
        assert_eq!(dec.s, vec![1.0; 3]);
    }

    #[test]
    fn rank_one_outer_product() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = [c(s, 0.0), c(0.0, s), c(0.0, 0.0)];
        let y = [c(0.6, 0.0), c(0.0, 0.8)];
        let a = CMatrix::outer(&x, &y);
        let dec = svd(&a).unwrap();
        assert!((dec.s[0] - 1.0).abs() < 1e-14);
        assert!(dec.s[1].abs() < 1e-14);
        check_svd(&a);
    }

    #[test]
    fn random_shapes() {
        let mut rng = rng_from_seed(3);
        for (m, n) in [(4, 6), (6, 4), (1, 5), (5, 1), (7, 7), (12, 3)] {
            let a = ginibre(m, n, &mut rng);
            check_svd(&a);
            let dec = svd(&a).unwrap();
            let fro2: f64 = dec.s.iter().map(|x| x * x).sum();
            assert!((fro2 - a.frobenius_norm().powi(2)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_matrix_svd() {
        let a = CMatrix::zeros(3, 2);
        let dec = svd(&a).unwrap();
        assert_eq!(dec.s, vec![0.0, 0.0]);
        check_svd(&a);
    }

    #[test]
    fn pinv_of_invertible_is_inverse() {
        let a = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, 1.0)],
            vec![c(0.0, -1.0), c(3.0, 0.0)],
        ]);
        let ai = pinv(&a, 1e-10).unwrap();
        assert!(a.matmul(&ai).distance(&CMatrix::identity(2)) < 1e-10);
    }

    #[test]
    fn pinv_of_zero_is_zero() {
        let ai = pinv(&CMatrix::zeros(2, 3), 1e-10).unwrap();
        assert_eq!(ai, CMatrix::zeros(3, 2));
    }

    #[test]
    fn pinv_rank_deficient_penrose() {
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0], &[-1.0, -2.0]]);
        let ai = pinv(&a, 1e-10).unwrap();
        assert!(a.matmul(&ai).matmul(&a).distance(&a) < 1e-8);
        assert!(ai.matmul(&a).matmul(&ai).distance(&ai) < 1e-8);
    }

    #[test]
    fn pinv_rejects_nonpositive_tolerance() {
        assert!(pinv(&CMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn rank_deficient_products() {
        let mut rng = rng_from_seed(8);
        for trial in 0..200 {
            let (m, n, r) = (2 + trial % 7, 2 + trial % 5, 1 + trial % 3);
            let a = ginibre(m, r, &mut rng).matmul(&ginibre(r, n, &mut rng));
            check_svd(&a);
            let ker = null_space(&a, 1e-10).unwrap();
            assert_eq!(ker.len(), n - r.min(m).min(n));
            for v in &ker {
                assert!(norm2(&a.matvec(v)) < 1e-10 * a.frobenius_norm());
            }
        }
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let a = CMatrix::from_real_rows(&[&[1.0, 1.0, 0.0]]);
        let ker = null_space(&a, 1e-10).unwrap();
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert!(norm2(&a.matvec(v)) < 1e-14);
            assert!((norm2(v) - 1.0).abs() < 1e-14);
        }
        assert!(null_space(&CMatrix::identity(3), 1e-10).unwrap().is_empty());
    }
}
