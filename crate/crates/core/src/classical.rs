//! Classical counterpart on two fixed causal graphs.
//!
//! The chain model has `A → B → Y` and `A → X`; the effective channel from
//! `X` to `Y` goes backwards through `A` by Bayes' rule:
//!
//! ```text
//! P̃(y|x) = Σ_{a,b} P(y|b)·P(b|a)·P(a|x)
//! ```
//!
//! The intervention model lets `X` act on `B` directly, with `A` confounding
//! both. `P(y|do(x)) = Σ_a P(a) Σ_b P(b|a,x)·P(y|b)` by truncated
//! factorization, which in general differs from conditioning on `X = x`.

use rand::Rng;

use crate::{Error, Result};

/// Column sums of a [`CondTable`] and entries of a distribution must be within
/// this of 1.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Conditional probability table `P(out | in)`, stored `n_out × n_in` with
/// one column per parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CondTable {
    n_out: usize,
    n_in: usize,
    p: Vec<f64>,
}

impl CondTable {
    /// `p` is row-major, `p[o·n_in + i] = P(o | i)`.
    pub fn new(n_out: usize, n_in: usize, p: Vec<f64>) -> Result<Self> {
        if n_out == 0 || n_in == 0 || p.len() != n_out * n_in {
            return Err(Error::InvalidTable(format!(
                "{} entries for a {n_out}x{n_in} table",
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidTable(format!("entry {bad} outside [0, 1]")));
        }
        let t = Self { n_out, n_in, p };
        for i in 0..n_in {
            let sum: f64 = t.column(i).iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidTable(format!("column {i} sums to {sum}")));
            }
        }
        Ok(t)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_out = rows.len();
        let n_in = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_in) {
            return Err(Error::InvalidTable("ragged rows".into()));
        }
        Self::new(n_out, n_in, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let p = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
            .collect();
        Self {
            n_out: n,
            n_in: n,
            p,
        }
    }

    pub fn uniform(n_out: usize, n_in: usize) -> Self {
        Self {
            n_out,
            n_in,
            p: vec![1.0 / n_out as f64; n_out * n_in],
        }
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    /// `P(out | in)`.
    pub fn get(&self, out: usize, input: usize) -> f64 {
        self.p[out * self.n_in + input]
    }

    pub fn column(&self, input: usize) -> Vec<f64> {
        (0..self.n_out).map(|o| self.get(o, input)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.n_in).map(<[f64]>::to_vec).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidTable(format!("{what} is not a distribution")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidTable(format!("{what} sums to {sum}")));
    }
    Ok(())
}

fn check_parent(t: &CondTable, n: usize, what: &str) -> Result<()> {
    if t.n_in != n {
        return Err(Error::InvalidTable(format!(
            "{what} has {} parent configurations, expected {n}",
            t.n_in
        )));
    }
    Ok(())
}

/// `A → B → Y` with `A → X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    p_a: Vec<f64>,
    b_given_a: CondTable,
    x_given_a: CondTable,
    y_given_b: CondTable,
}

impl ChainModel {
    pub fn new(
        p_a: Vec<f64>,
        b_given_a: CondTable,
        x_given_a: CondTable,
        y_given_b: CondTable,
    ) -> Result<Self> {
        check_distribution(&p_a, "P(A)")?;
        check_parent(&b_given_a, p_a.len(), "P(B|A)")?;
        check_parent(&x_given_a, p_a.len(), "P(X|A)")?;
        check_parent(&y_given_b, b_given_a.n_out, "P(Y|B)")?;
        Ok(Self {
            p_a,
            b_given_a,
            x_given_a,
            y_given_b,
        })
    }

    pub fn p_a(&self) -> &[f64] {
        &self.p_a
    }

    pub fn b_given_a(&self) -> &CondTable {
        &self.b_given_a
    }

    pub fn x_given_a(&self) -> &CondTable {
        &self.x_given_a
    }

    pub fn y_given_b(&self) -> &CondTable {
        &self.y_given_b
    }

    /// `P(X = x)`.
    pub fn p_x(&self) -> Vec<f64> {
        marginal(&self.x_given_a, &self.p_a)
    }
}

fn marginal(t: &CondTable, prior: &[f64]) -> Vec<f64> {
    (0..t.n_out)
        .map(|o| prior.iter().enumerate().map(|(i, p)| t.get(o, i) * p).sum())
        .collect()
}

/// `P̃(Y | X)` through Bayes inversion of `P(X | A)`.
pub fn emergent_channel(m: &ChainModel) -> Result<CondTable> {
    let p_x = m.p_x();
    if let Some(outcome) = p_x.iter().position(|&p| p == 0.0) {
        return Err(Error::ZeroMarginal { outcome });
    }
    let (n_y, n_x) = (m.y_given_b.n_out, m.x_given_a.n_out);
    let mut p = vec![0.0; n_y * n_x];
    for (x, px) in p_x.iter().enumerate() {
        for (a, pa) in m.p_a.iter().enumerate() {
            let a_given_x = m.x_given_a.get(x, a) * pa / px;
            for b in 0..m.b_given_a.n_out {
                let w = m.b_given_a.get(b, a) * a_given_x;
                for y in 0..n_y {
                    p[y * n_x + x] += m.y_given_b.get(y, b) * w;
                }
            }
        }
    }
    Ok(CondTable {
        n_out: n_y,
        n_in: n_x,
        p,
    })
}

/// `max_y |P(y) − Σ_x P̃(y|x)·P(x)|` with `P(y)` from the full joint.
pub fn verify_total_probability(m: &ChainModel) -> Result<f64> {
    let emergent = emergent_channel(m)?;
    let p_x = m.p_x();
    let n_y = m.y_given_b.n_out;
    let mut joint_y = vec![0.0; n_y];
    for (a, pa) in m.p_a.iter().enumerate() {
        for b in 0..m.b_given_a.n_out {
            for x in 0..m.x_given_a.n_out {
                let w = pa * m.b_given_a.get(b, a) * m.x_given_a.get(x, a);
                for (y, acc) in joint_y.iter_mut().enumerate() {
                    *acc += w * m.y_given_b.get(y, b);
                }
            }
        }
    }
    Ok(joint_y
        .iter()
        .enumerate()
        .map(|(y, py)| {
            let via: f64 = p_x
                .iter()
                .enumerate()
                .map(|(x, px)| emergent.get(y, x) * px)
                .sum();
            (py - via).abs()
        })
        .fold(0.0, f64::max))
}

/// `A → X`, `(A, X) → B → Y`. `P(B | A, X)` flattens its parents as
/// `a·n_x + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoModel {
    p_a: Vec<f64>,
    x_given_a: CondTable,
    b_given_ax: CondTable,
    y_given_b: CondTable,
}

impl DoModel {
    pub fn new(
        p_a: Vec<f64>,
        x_given_a: CondTable,
        b_given_ax: CondTable,
        y_given_b: CondTable,
    ) -> Result<Self> {
        check_distribution(&p_a, "P(A)")?;
        check_parent(&x_given_a, p_a.len(), "P(X|A)")?;
        check_parent(&b_given_ax, p_a.len() * x_given_a.n_out, "P(B|A,X)")?;
        check_parent(&y_given_b, b_given_ax.n_out, "P(Y|B)")?;
        Ok(Self {
            p_a,
            x_given_a,
            b_given_ax,
            y_given_b,
        })
    }

    pub fn p_a(&self) -> &[f64] {
        &self.p_a
    }

    pub fn x_given_a(&self) -> &CondTable {
        &self.x_given_a
    }

    pub fn b_given_ax(&self) -> &CondTable {
        &self.b_given_ax
    }

    pub fn y_given_b(&self) -> &CondTable {
        &self.y_given_b
    }

    pub fn n_x(&self) -> usize {
        self.x_given_a.n_out
    }

    /// Same model with `P(X | A)` replaced.
    pub fn with_x_given_a(&self, x_given_a: CondTable) -> Result<Self> {
        Self::new(
            self.p_a.clone(),
            x_given_a,
            self.b_given_ax.clone(),
            self.y_given_b.clone(),
        )
    }

    fn check_x(&self, x: usize) -> Result<()> {
        if x >= self.n_x() {
            return Err(Error::IndexOutOfRange {
                index: x,
                size: self.n_x(),
            });
        }
        Ok(())
    }

    /// `Σ_a w(a) Σ_b P(b|a,x)·P(y|b)` for weights `w` over `A`.
    fn propagate(&self, x: usize, w: impl Fn(usize) -> f64) -> Vec<f64> {
        let n_x = self.n_x();
        let mut out = vec![0.0; self.y_given_b.n_out];
        for a in 0..self.p_a.len() {
            let wa = w(a);
            for b in 0..self.b_given_ax.n_out {
                let wb = wa * self.b_given_ax.get(b, a * n_x + x);
                for (y, acc) in out.iter_mut().enumerate() {
                    *acc += wb * self.y_given_b.get(y, b);
                }
            }
        }
        out
    }
}

/// `P(Y | do(X = x))`.
pub fn do_intervention(m: &DoModel, x: usize) -> Result<Vec<f64>> {
    m.check_x(x)?;
    Ok(m.propagate(x, |a| m.p_a[a]))
}

/// `(P(Y | X = x), P(Y | do(X = x)))`.
pub fn observational_vs_do(m: &DoModel, x: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    m.check_x(x)?;
    let px: f64 = (0..m.p_a.len())
        .map(|a| m.p_a[a] * m.x_given_a.get(x, a))
        .sum();
    if px == 0.0 {
        return Err(Error::ZeroMarginal { outcome: x });
    }
    let obs = m.propagate(x, |a| m.p_a[a] * m.x_given_a.get(x, a) / px);
    Ok((obs, do_intervention(m, x)?))
}

/// Table with columns drawn uniformly from the simplex.
pub fn random_table<R: Rng + ?Sized>(n_out: usize, n_in: usize, rng: &mut R) -> CondTable {
    let mut p = vec![0.0; n_out * n_in];
    for i in 0..n_in {
        let col = random_distribution(n_out, rng);
        for (o, v) in col.into_iter().enumerate() {
            p[o * n_in + i] = v;
        }
    }
    CondTable { n_out, n_in, p }
}

/// Uniform point of the probability simplex, renormalized so it sums to 1
/// up to rounding.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Chain model with alphabet sizes `(|A|, |B|, |X|, |Y|)`.
pub fn random_chain_model<R: Rng + ?Sized>(
    sizes: (usize, usize, usize, usize),
    rng: &mut R,
) -> ChainModel {
    let (na, nb, nx, ny) = sizes;
    ChainModel {
        p_a: random_distribution(na, rng),
        b_given_a: random_table(nb, na, rng),
        x_given_a: random_table(nx, na, rng),
        y_given_b: random_table(ny, nb, rng),
    }
}

/// Intervention model with alphabet sizes `(|A|, |B|, |X|, |Y|)`.
pub fn random_do_model<R: Rng + ?Sized>(
    sizes: (usize, usize, usize, usize),
    rng: &mut R,
) -> DoModel {
    let (na, nb, nx, ny) = sizes;
    DoModel {
        p_a: random_distribution(na, rng),
        x_given_a: random_table(nx, na, rng),
        b_given_ax: random_table(nb, na * nx, rng),
        y_given_b: random_table(ny, nb, rng),
    }
}
