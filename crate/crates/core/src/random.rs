//! Seeded random matrices, states and channels.
//!
//! All generators take an explicit RNG so results are reproducible from a
//! `u64` seed via [`rng_from_seed`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::KrausChannel;
use crate::linalg::{inner, norm2, CMatrix};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Decorrelated child seed, used to give independent trials their own stream.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    ginibre(n, n, rng).hermitian_part()
}

/// Haar-distributed `rows × cols` isometry (`rows ≥ cols`) from Gram–Schmidt
/// QR of a Ginibre matrix. Gram–Schmidt yields a positive real diagonal in R,
/// which is the phase fix that makes Q Haar distributed.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = ginibre(rows, cols, rng);
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = g.column(j);
        for _ in 0..2 {
            for b in &q {
                let p = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= p * y;
                }
            }
        }
        let n = norm2(&v);
        q.push(v.into_iter().map(|z| z / n).collect());
    }
    CMatrix::from_columns(&q)
}

pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    haar_isometry(n, n, rng)
}

/// Haar-random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    let n = norm2(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// `|ψ⟩⟨ψ|` for Haar-random `ψ`.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let v = random_pure_vector(dim, rng);
    CMatrix::outer(&v, &v)
}

/// `G·G*/tr(G·G*)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_mixed_state<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, rank, rng);
    let w = g.matmul(&g.adjoint());
    let t = w.trace().re;
    w.scale_real(1.0 / t).hermitian_part()
}

/// Random CPTP map from a Haar isometry `C^din → C^dout ⊗ C^env`
/// (Stinespring), with Kraus operators `K_e = (I ⊗ ⟨e|)·W`.
///
/// The environment is enlarged to `⌈din/dout⌉` if `kraus_count` is too small
/// for an isometry to exist.
pub fn random_channel<R: Rng + ?Sized>(
    din: usize,
    dout: usize,
    kraus_count: usize,
    rng: &mut R,
) -> KrausChannel {
    let env = kraus_count.max(din.div_ceil(dout)).max(1);
    let w = haar_isometry(dout * env, din, rng);
    let kraus = (0..env)
        .map(|e| CMatrix::from_fn(dout, din, |o, i| w[(o * env + e, i)]))
        .collect();
    KrausChannel::new(kraus).expect("Stinespring Kraus operators are trace preserving")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_from_seed(1);
        for n in [1, 2, 3, 6] {
            assert!(haar_unitary(n, &mut rng).unitary_defect() < 1e-12);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = haar_unitary(4, &mut rng_from_seed(42));
        let b = haar_unitary(4, &mut rng_from_seed(42));
        assert_eq!(a, b);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }

    #[test]
    fn random_channel_is_cptp() {
        let mut rng = rng_from_seed(8);
        let ch = random_channel(6, 2, 1, &mut rng);
        assert_eq!(ch.kraus().len(), 3);
        assert!(ch.tp_defect() < 1e-12);
    }

    #[test]
    fn mixed_state_has_unit_trace() {
        let rho = random_mixed_state(5, 2, &mut rng_from_seed(4));
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        assert!(rho.is_hermitian(1e-14));
    }
}
