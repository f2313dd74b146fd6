//! Built-in scenarios and seeded random ones.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::channel::{choi_to_kraus, ChoiMatrix, KrausChannel};
use crate::compat::Scenario;
use crate::linalg::{c, expm_i_hermitian, CMatrix, DEFAULT_RANK_TOL, ONE, ZERO};
use crate::random::{haar_unitary, random_channel, rng_from_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Compatible,
    Incompatible,
    Unknown,
}

impl Expectation {
    pub fn as_str(self) -> &'static str {
        match self {
            Expectation::Compatible => "compatible",
            Expectation::Incompatible => "incompatible",
            Expectation::Unknown => "unknown",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Expectation::Compatible
        } else {
            Expectation::Incompatible
        }
    }
}

#[derive(Debug, Clone)]
pub struct NamedScenario {
    pub name: String,
    pub scenario: Scenario,
    pub expected: Expectation,
    pub notes: String,
}

const EIGVEC_TOL: f64 = 1e-9;

/// `|±⟩ = (|0⟩ ± |1⟩)/√2` in a two-dimensional block.
fn pm_vectors() -> [[Complex64; 2]; 2] {
    let h = c(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

fn hadamard() -> CMatrix {
    CMatrix::from_real_rows(&[
        &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
    ])
}

/// `e^{iθ₁}|+⟩⟨+| + e^{iθ₂}|−⟩⟨−|`.
pub fn pm_diagonal(theta1: f64, theta2: f64) -> CMatrix {
    let h = hadamard();
    h.matmul(&CMatrix::diag(&[
        Complex64::from_polar(1.0, theta1),
        Complex64::from_polar(1.0, theta2),
    ]))
    .matmul(&h)
}

/// Real rotation by `angle` written in the `{|+⟩, |−⟩}` basis.
pub fn pm_rotation(angle: f64) -> CMatrix {
    let (s, co) = angle.sin_cos();
    let h = hadamard();
    h.matmul(&CMatrix::from_real_rows(&[&[co, -s], &[s, co]]))
        .matmul(&h)
}

fn check_unitary(u: &CMatrix, n: usize) -> Result<()> {
    if u.shape() != (n, n) {
        return Err(Error::dims(format!(
            "expected a {n}x{n} unitary, got {:?}",
            u.shape()
        )));
    }
    let deviation = u.unitary_defect();
    if deviation > EIGVEC_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Qutrit collapsed to a qubit by `K₀ = |0⟩⟨0| + |1⟩⟨+|`, `K₁ = |1⟩⟨−|`
/// (`|±⟩` on `span{|1⟩, |2⟩}`), with dynamics `U = 1 ⊕ u2`.
///
/// Compatible exactly when `|±⟩` are eigenvectors of `u2`.
pub fn example1(u2: &CMatrix) -> Result<NamedScenario> {
    check_unitary(u2, 2)?;
    let [plus, minus] = pm_vectors();
    let k0 = CMatrix::from_rows(&[vec![ONE, ZERO, ZERO], vec![ZERO, plus[0], plus[1]]]);
    let k1 = CMatrix::from_rows(&[vec![ZERO, ZERO, ZERO], vec![ZERO, minus[0], minus[1]]]);
    let cg = KrausChannel::new(vec![k0, k1])?;
    let u = CMatrix::block_diag(&[CMatrix::identity(1), u2.clone()]);

    let eigvec_residual = [plus, minus]
        .iter()
        .map(|v| {
            let w = u2.matvec(v);
            let lambda = v[0].conj() * w[0] + v[1].conj() * w[1];
            ((w[0] - lambda * v[0]).norm_sqr() + (w[1] - lambda * v[1]).norm_sqr()).sqrt()
        })
        .fold(0.0, f64::max);
    let compatible = eigvec_residual <= EIGVEC_TOL;
    Ok(NamedScenario {
        name: "example1".into(),
        scenario: Scenario::new(cg, u)?,
        expected: Expectation::from_bool(compatible),
        notes: format!("qutrit to qubit; |±⟩ eigenvector residual of U₂ is {eigvec_residual:.3e}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceMode {
    /// Coherences between blocks survive: `K_i = Σ_j |j⟩⟨u_ij|`.
    Full,
    /// Only block populations survive: `K_ij = |j⟩⟨u_ij|`.
    None,
}

/// `|u_ij⟩`: Fourier vector `i` of `C^k`, placed in block `j` of `C^{kd}`.
fn fourier_in_block(k: usize, d: usize, i: usize, j: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; k * d];
    let norm = 1.0 / (k as f64).sqrt();
    for m in 0..k {
        v[j * k + m] = Complex64::from_polar(norm, 2.0 * PI * (i * m) as f64 / k as f64);
    }
    v
}

/// `kd`-dimensional system made of `d` blocks of size `k`, coarse-grained to
/// the block label. Dynamics `U = ⊕_j blocks[j]`.
///
/// With full coherence the image entry `(j, j')` is the trace of the `(j, j')`
/// block of `ρ`, so compatibility requires `B_{j'}*·B_j ∝ I` for every pair.
/// Without coherence only block populations are kept and any block-diagonal
/// `U` is compatible.
pub fn example2(
    k: usize,
    d: usize,
    blocks: &[CMatrix],
    mode: CoherenceMode,
) -> Result<NamedScenario> {
    if k == 0 || d == 0 || blocks.len() != d {
        return Err(Error::dims(format!(
            "{} blocks for k={k}, d={d}",
            blocks.len()
        )));
    }
    for b in blocks {
        check_unitary(b, k)?;
    }
    let bra = |i: usize, j: usize| -> CMatrix {
        let v = fourier_in_block(k, d, i, j);
        let mut m = CMatrix::zeros(d, k * d);
        for (col, z) in v.iter().enumerate() {
            m[(j, col)] = z.conj();
        }
        m
    };
    let kraus: Vec<CMatrix> = match mode {
        CoherenceMode::Full => (0..k)
            .map(|i| (0..d).fold(CMatrix::zeros(d, k * d), |acc, j| &acc + &bra(i, j)))
            .collect(),
        CoherenceMode::None => (0..d)
            .flat_map(|j| (0..k).map(move |i| (i, j)))
            .map(|(i, j)| bra(i, j))
            .collect(),
    };
    let cg = KrausChannel::new(kraus)?;
    let u = CMatrix::block_diag(blocks);

    let compatible = match mode {
        CoherenceMode::None => true,
        CoherenceMode::Full => blocks.iter().all(|bj| {
            blocks.iter().all(|bjp| {
                let m = bjp.adjoint().matmul(bj);
                let scale = m.trace() / k as f64;
                m.distance(&CMatrix::identity(k).scale(scale)) <= EIGVEC_TOL
            })
        }),
    };
    let mode_name = match mode {
        CoherenceMode::Full => "full",
        CoherenceMode::None => "none",
    };
    Ok(NamedScenario {
        name: "example2".into(),
        scenario: Scenario::new(cg, u)?,
        expected: Expectation::from_bool(compatible),
        notes: format!(
            "{d} blocks of size {k}, {mode_name} coherence; image entry (j, j') is the trace of block (j, j') of ρ, \
             so for k=d=2 the lower-right entry is ρ₂₂ + ρ₃₃"
        ),
    })
}

/// `(J_x, J_y, J_z)` for spin `j = (dim−1)/2` in the `J_z` eigenbasis,
/// ordered `m = j, j−1, …, −j`.
pub fn spin_matrices(dim: usize) -> [CMatrix; 3] {
    let j = (dim as f64 - 1.0) / 2.0;
    let m = |idx: usize| j - idx as f64;
    let mut raise = CMatrix::zeros(dim, dim);
    for idx in 1..dim {
        let mi = m(idx);
        raise[(idx - 1, idx)] = c((j * (j + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let jx = (&raise + &lower).scale_real(0.5);
    let jy = (&raise - &lower).scale(c(0.0, -0.5));
    let jz = CMatrix::diag_real(&(0..dim).map(m).collect::<Vec<_>>());
    [jx, jy, jz]
}

fn check_axis(n: [f64; 3]) -> Result<()> {
    let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "rotation axis has norm {norm}"
        )));
    }
    Ok(())
}

fn along(ops: &[CMatrix; 3], n: [f64; 3]) -> CMatrix {
    let mut acc = CMatrix::zeros(ops[0].rows(), ops[0].cols());
    for (op, w) in ops.iter().zip(n) {
        acc = &acc + &op.scale_real(w);
    }
    acc
}

/// `exp(−iα⟨σ,n⟩/2)`, the qubit image of a rotation by `α` about `n`.
pub fn spin_half_rotation(alpha: f64, n: [f64; 3]) -> CMatrix {
    expm_i_hermitian(&along(&spin_matrices(2), n), alpha).expect("spin matrices are Hermitian")
}

/// Spin-`j` system (`D = 2j + 1`) coarse-grained to a qubit through its
/// expectation vector:
///
/// ```text
/// Λ(ρ) = ½(tr ρ·I + 2/(D−1)·Σ_i tr(ρJ_i)·σ_i)
/// ```
///
/// and rotated by `U = exp(−iα⟨J,n⟩)`. The map is built from its Choi matrix,
/// so a `D` for which it is not completely positive fails with `NotCp`.
pub fn spin_dichotomization(dim: usize, alpha: f64, n: [f64; 3]) -> Result<NamedScenario> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("spin dimension {dim} < 2")));
    }
    check_axis(n)?;
    let spins = spin_matrices(dim);
    let paulis = spin_matrices(2).map(|s| s.scale_real(2.0));
    let factor = 2.0 / (dim as f64 - 1.0);

    let image = |x: &CMatrix| -> CMatrix {
        let mut out = CMatrix::identity(2).scale(x.trace());
        for (j, s) in spins.iter().zip(&paulis) {
            out = &out + &s.scale(x.matmul(j).trace() * factor);
        }
        out.scale_real(0.5)
    };
    let mut choi = CMatrix::zeros(2 * dim, 2 * dim);
    for r in 0..dim {
        for s in 0..dim {
            let mut e = CMatrix::zeros(dim, dim);
            e[(r, s)] = ONE;
            let out = image(&e);
            for a in 0..2 {
                for b in 0..2 {
                    choi[(r * 2 + a, s * 2 + b)] = out[(a, b)];
                }
            }
        }
    }
    let cg = choi_to_kraus(&ChoiMatrix::new(dim, 2, choi)?, DEFAULT_RANK_TOL)?;
    let u = expm_i_hermitian(&along(&spins, n), alpha)?;
    Ok(NamedScenario {
        name: format!("spin-d{dim}"),
        scenario: Scenario::new(cg, u)?,
        expected: Expectation::Compatible,
        notes: format!(
            "spin-{}/2 to qubit via the expectation vector; rotation α={alpha} about ({}, {}, {}); \
             emergent map is conjugation by exp(−iα⟨σ,n⟩/2)",
            dim - 1,
            n[0],
            n[1],
            n[2]
        ),
    })
}

/// Stinespring-random `Λ` and Haar-random `U`.
pub fn random_scenario(
    micro: usize,
    macro_dim: usize,
    kraus_count: usize,
    seed: u64,
) -> Result<NamedScenario> {
    if macro_dim == 0 || macro_dim > micro || kraus_count == 0 {
        return Err(Error::InvalidArgument(format!(
            "random scenario needs 1 <= d <= D and at least one Kraus operator (D={micro}, d={macro_dim}, k={kraus_count})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let cg = random_channel(micro, macro_dim, kraus_count, &mut rng);
    let u = haar_unitary(micro, &mut rng);
    Ok(NamedScenario {
        name: format!("random-{micro}-{macro_dim}-{kraus_count}-{seed}"),
        scenario: Scenario::new(cg, u)?,
        expected: Expectation::Unknown,
        notes: format!("seed {seed}"),
    })
}

fn renamed(mut s: NamedScenario, name: &str) -> NamedScenario {
    s.name = name.into();
    s
}

/// Registered scenarios in a fixed order.
pub fn registry() -> Result<Vec<NamedScenario>> {
    let shared = pm_diagonal(0.4, -0.9);
    Ok(vec![
        renamed(example1(&pm_diagonal(0.3, 1.2))?, "example1-compatible"),
        renamed(example1(&pm_rotation(FRAC_PI_4))?, "example1-incompatible"),
        renamed(
            example2(2, 2, &[shared.clone(), shared.clone()], CoherenceMode::Full)?,
            "example2-compatible",
        ),
        renamed(
            example2(
                2,
                2,
                &[shared.clone(), shared.matmul(&pm_rotation(FRAC_PI_3))],
                CoherenceMode::Full,
            )?,
            "example2-incompatible",
        ),
        renamed(
            spin_dichotomization(3, FRAC_PI_2, [0.0, 0.0, 1.0])?,
            "spin-d3",
        ),
    ])
}

pub fn registry_names() -> Vec<&'static str> {
    vec![
        "example1-compatible",
        "example1-incompatible",
        "example2-compatible",
        "example2-incompatible",
        "spin-d3",
    ]
}

pub fn lookup(name: &str) -> Result<Option<NamedScenario>> {
    Ok(registry()?.into_iter().find(|s| s.name == name))
}
