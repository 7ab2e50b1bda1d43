//! Correlator tables of cohomological field theories and their conformal data.

mod checks;
mod io;
mod wk;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::Q;
use crate::jetform::{Space, TSeries};

pub use checks::{check_axiom_residuals, check_homogeneity, AxiomReport, Violation, Window};
pub use wk::gen_trivial;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohftError {
    #[error("bounds exceeded: {0}")]
    BoundsExceeded(String),
    #[error("series order {order} needs correlators with {order} insertions, table stops at nmax={nmax}")]
    TruncationInsufficient { order: u32, nmax: usize },
    #[error("metric is singular")]
    SingularMetric,
    #[error("conformal constraint violated: {0}")]
    ConformalViolation(String),
    #[error("table format, line {line}: {msg}")]
    Format { line: usize, msg: String },
}

impl CohftError {
    /// The failure is cured by a larger table or series order.
    pub fn is_truncation(&self) -> bool {
        matches!(self, CohftError::BoundsExceeded(_) | CohftError::TruncationInsufficient { .. })
    }
}

/// Insertion `τ_d(e_α)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Insertion {
    pub alpha: u8,
    pub d: u8,
}

impl Insertion {
    pub const fn new(alpha: u8, d: u8) -> Insertion {
        Insertion { alpha, d }
    }
}

pub type Matrix = Vec<Vec<Q>>;

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    (0..a[0].len()).map(|j| (0..a.len()).map(|i| a[i][j].clone()).collect()).collect()
}

/// Exact Gauss-Jordan inverse.
pub fn mat_inv(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> = a.iter().zip(identity(n)).map(|(r, e)| r.iter().cloned().chain(e).collect()).collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                let row = m[c].clone();
                for (x, y) in m[r].iter_mut().zip(row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

/// Finite store of correlators `⟨Π τ_{d_i}(e_{α_i})⟩_g`. Missing entries
/// within the bounds are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelatorTable {
    n: u8,
    eta: Matrix,
    eta_inv: Matrix,
    entries: BTreeMap<(u8, Vec<Insertion>), Q>,
    pub gmax: u8,
    pub nmax: usize,
    pub dmax: u8,
}

impl CorrelatorTable {
    pub fn new(eta: Matrix, gmax: u8, nmax: usize, dmax: u8) -> Result<CorrelatorTable, CohftError> {
        let n = eta.len() as u8;
        let eta_inv = mat_inv(&eta).ok_or(CohftError::SingularMetric)?;
        Ok(CorrelatorTable { n, eta, eta_inv, entries: BTreeMap::new(), gmax, nmax, dmax })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn eta(&self) -> &Matrix {
        &self.eta
    }

    pub fn eta_inv(&self) -> &Matrix {
        &self.eta_inv
    }

    /// Stores a value; the key is sorted, so permuted keys coincide.
    pub fn insert(&mut self, g: u8, mut ins: Vec<Insertion>, v: Q) {
        ins.sort();
        if v.is_zero() {
            self.entries.remove(&(g, ins));
        } else {
            self.entries.insert((g, ins), v);
        }
    }

    pub fn get(&self, g: u8, ins: &[Insertion]) -> Q {
        let mut k = ins.to_vec();
        k.sort();
        self.entries.get(&(g, k)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u8, &[Insertion], &Q)> {
        self.entries.iter().map(|((g, k), v)| (*g, k.as_slice(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `⟨τ₀(e_α)τ₀(e_β)τ₀(e_γ)⟩₀`.
    pub fn c3(&self, a: u8, b: u8, c: u8) -> Q {
        self.get(0, &[Insertion::new(a, 0), Insertion::new(b, 0), Insertion::new(c, 0)])
    }

    /// Series of `F_g` in the given alphabet, exact through degree `order`.
    pub fn potential(&self, g: u8, space: Space, order: u32) -> Result<TSeries, CohftError> {
        if order as usize > self.nmax {
            return Err(CohftError::TruncationInsufficient { order, nmax: self.nmax });
        }
        if g > self.gmax {
            return Err(CohftError::BoundsExceeded(format!("genus {g} > gmax {}", self.gmax)));
        }
        let mut s = TSeries::zero(space, order);
        'entries: for ((h, ins), v) in &self.entries {
            if *h != g || ins.len() > order as usize {
                continue;
            }
            let mut key = [0u8; crate::jetform::series::MAX_VARS];
            for i in ins {
                match space.index(i.alpha, i.d) {
                    Some(x) => key[x] += 1,
                    None => continue 'entries,
                }
            }
            let denom: BigInt = key.iter().map(|&e| factorial(e as usize)).product();
            s.add_term(key, v / Q::from_integer(denom));
        }
        Ok(s)
    }

    /// `F^Frob = F₀` restricted to the small phase space, as a polynomial in `t^α_0`.
    pub fn frobenius_potential(&self, order: u32) -> Result<TSeries, CohftError> {
        self.potential(0, Space::new(self.n, 0), order)
    }
}

/// Homogeneity data `(𝗊, 𝖻, 𝖽)` of a conformal CohFT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformalData {
    pub q: Matrix,
    pub b: Vec<Q>,
    pub charge: Q,
}

impl ConformalData {
    /// Data of the trivial CohFT: `𝗊 = 1`, `𝖻 = 0`, `𝖽 = 0`.
    pub fn kdv() -> ConformalData {
        ConformalData { q: vec![vec![Q::one()]], b: vec![Q::zero()], charge: Q::zero() }
    }

    /// `𝗊^α_1 = δ^α_1` and `𝗊 + η⁻¹𝗊ᵀη = (2−𝖽)·1`.
    pub fn validate(&self, eta: &Matrix) -> Result<(), CohftError> {
        let n = eta.len();
        if self.q.len() != n || self.b.len() != n {
            return Err(CohftError::ConformalViolation("dimension mismatch".into()));
        }
        for a in 0..n {
            let want = if a == 0 { Q::one() } else { Q::zero() };
            if self.q[a][0] != want {
                return Err(CohftError::ConformalViolation(format!("q^{}_1 must be {}", a + 1, want)));
            }
        }
        let eta_inv = mat_inv(eta).ok_or(CohftError::SingularMetric)?;
        let lhs = mat_mul(&mat_mul(&eta_inv, &transpose(&self.q)), eta);
        let two_minus_d = Q::from_integer(2.into()) - &self.charge;
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { two_minus_d.clone() } else { Q::zero() };
                if &self.q[a][b] + &lhs[a][b] != want {
                    return Err(CohftError::ConformalViolation(format!("q + eta^-1 q^T eta != (2-d) at ({},{})", a + 1, b + 1)));
                }
            }
        }
        Ok(())
    }

    /// `R̃ = (𝖽−1)/2 + 𝗊`.
    pub fn tilde_r(&self) -> Matrix {
        let half = (&self.charge - Q::one()) / Q::from_integer(2.into());
        let n = self.q.len();
        (0..n).map(|a| (0..n).map(|b| if a == b { &self.q[a][b] + &half } else { self.q[a][b].clone() }).collect()).collect()
    }

    /// `M^α_β = η^{αμ} 𝖻^γ ⟨τ₀(e_μ)τ₀(e_β)τ₀(e_γ)⟩₀`.
    pub fn m_matrix(&self, t: &CorrelatorTable) -> Matrix {
        let n = t.n() as usize;
        let mut m = vec![vec![Q::zero(); n]; n];
        for a in 0..n {
            for b in 0..n {
                for mu in 0..n {
                    for g in 0..n {
                        let e = &t.eta_inv()[a][mu];
                        if e.is_zero() || self.b[g].is_zero() {
                            continue;
                        }
                        m[a][b] += e * &self.b[g] * t.c3(mu as u8 + 1, b as u8 + 1, g as u8 + 1);
                    }
                }
            }
        }
        m
    }

    /// Applies `Ẽ = Σ(𝗊−d)t∂_t + 𝖻∂_{t₀} − Σ η𝖻⟨τ₀τ₀τ₀⟩ t_{d+1}∂_{t_d}`.
    pub fn apply_e(&self, t: &CorrelatorTable, f: &TSeries) -> TSeries {
        let sp = f.space();
        let n = sp.n;
        let mut r = TSeries::zero(sp, f.order());
        for gam in 1..=n {
            for d in 0..=sp.dmax {
                let df = f.deriv(gam, d);
                if df.is_zero() {
                    continue;
                }
                for mu in 1..=n {
                    let mut c = self.q[gam as usize - 1][mu as usize - 1].clone();
                    if gam == mu {
                        c -= Q::from_integer(d.into());
                    }
                    if !c.is_zero() {
                        r.add_assign_scaled(&df.mul_var(mu, d), &c);
                    }
                }
            }
            let b = &self.b[gam as usize - 1];
            if !b.is_zero() {
                r.add_assign_scaled(&f.deriv(gam, 0), b);
            }
        }
        let m = self.m_matrix(t);
        // −Σ_d M^μ_γ t^γ_{d+1} ∂/∂t^μ_d
        for mu in 1..=n {
            for gam in 1..=n {
                let c = &m[mu as usize - 1][gam as usize - 1];
                if c.is_zero() {
                    continue;
                }
                for d in 0..sp.dmax {
                    r.add_assign_scaled(&f.deriv(mu, d).mul_var(gam, d + 1), &-c.clone());
                }
            }
        }
        r
    }
}

/// `R̃ η⁻¹ + η⁻¹ R̃ᵀ = η⁻¹`, the compatibility used by the recursion.
pub fn eta_compatible(r: &Matrix, eta_inv: &Matrix) -> bool {
    let a = mat_mul(r, eta_inv);
    let b = transpose(&a);
    let n = r.len();
    (0..n).all(|i| (0..n).all(|j| &a[i][j] + &b[i][j] == eta_inv[i][j]))
}

pub use io::{read_table, write_table};

#[cfg(test)]
mod tests;
