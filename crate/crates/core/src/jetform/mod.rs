//! Bridge between t-series and jet expressions: `v(t)`, the two-point
//! functions `Ω`, the vector field `Ẽ`, and jetification.

mod jetify;
mod quasi;
pub mod series;

use std::collections::HashMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{DiffExpr, Q};
use crate::cohft::{CohftError, ConformalData, CorrelatorTable};

pub use jetify::{jetify, jetify_omega, Certificate, JetBounds, Jetified};
pub use quasi::{quasi_miura_w, QuasiMiuraW, QuasiSettings};
pub use series::{Space, TSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error(transparent)]
    Cohft(#[from] CohftError),
    #[error("no solution within the ansatz bounds ({unknowns} unknowns, {equations} equations)")]
    Inconsistent { unknowns: usize, equations: usize },
    #[error("series order too low: null space of dimension {nullity} ({unknowns} unknowns, {equations} equations)")]
    Underdetermined { nullity: usize, unknowns: usize, equations: usize },
    #[error("only {equations} equations for {unknowns} unknowns, need {required}")]
    InsufficientSurplus { unknowns: usize, equations: usize, required: usize },
    #[error("expression has odd variables or ε-dependence")]
    NotEvenJet,
    #[error("jet v[{alpha},{s}] needs series variables up to d = {s}")]
    AlphabetTooSmall { alpha: u8, s: u8 },
}

impl JetError {
    pub fn is_truncation(&self) -> bool {
        match self {
            JetError::Cohft(e) => e.is_truncation(),
            JetError::Underdetermined { .. } | JetError::InsufficientSurplus { .. } | JetError::AlphabetTooSmall { .. } => true,
            _ => false,
        }
    }
}

/// `v^α = η^{αβ}∂²F₀/∂t^β_0∂t^1_0`, exact through `order − 2`.
pub fn v_of_t(t: &CorrelatorTable, space: Space, order: u32) -> Result<Vec<TSeries>, CohftError> {
    let f0 = t.potential(0, space, order)?;
    let n = t.n();
    let lower: Vec<TSeries> = (1..=n).map(|b| f0.deriv(b, 0).deriv(1, 0)).collect();
    Ok((0..n as usize)
        .map(|a| {
            let mut v = TSeries::zero(space, order.saturating_sub(2));
            for (b, s) in lower.iter().enumerate() {
                let e = &t.eta_inv()[a][b];
                if !e.is_zero() {
                    v.add_assign_scaled(s, e);
                }
            }
            v
        })
        .collect())
}

/// `Ω^{[g]}_{α,p;β,q} = ∂²F_g/∂t^α_p∂t^β_q`, exact through `order − 2`.
pub fn omega_series(
    t: &CorrelatorTable,
    g: u8,
    (a, p): (u8, u8),
    (b, q): (u8, u8),
    space: Space,
    order: u32,
) -> Result<TSeries, CohftError> {
    Ok(t.potential(g, space, order)?.deriv(a, p).deriv(b, q))
}

/// `Ω^{[g]}_{α,0;β,p}` with the convention `Ω^{[g]}_{α,0;β,−1} = η_{αβ}δ_{g0}`.
pub fn omega_0p(t: &CorrelatorTable, g: u8, a: u8, b: u8, p: i32, space: Space, order: u32) -> Result<TSeries, CohftError> {
    if p < 0 {
        let c = if g == 0 { t.eta()[a as usize - 1][b as usize - 1].clone() } else { Q::zero() };
        return Ok(TSeries::constant(space, order.saturating_sub(2), c));
    }
    omega_series(t, g, (a, 0), (b, p as u8), space, order)
}

/// The vector field `Ẽ` applied to a series.
pub fn apply_e(f: &TSeries, c: &ConformalData, t: &CorrelatorTable) -> TSeries {
    c.apply_e(t, f)
}

/// Residual of `ẼΩ + (g(3−𝖽)−1)Ω + R̃^γ_αΩ_{γ,0;β,p} − (p+1−R̃)^γ_βΩ_{α,0;γ,p} − M^γ_βΩ_{α,0;γ,p−1}`
/// for `Ω = Ω^{[g]}_{α,0;β,p}`.
#[allow(clippy::too_many_arguments)]
pub fn e_lemma_residual(
    t: &CorrelatorTable,
    c: &ConformalData,
    g: u8,
    a: u8,
    b: u8,
    p: u8,
    space: Space,
    order: u32,
) -> Result<TSeries, CohftError> {
    let n = t.n();
    let r = c.tilde_r();
    let m = c.m_matrix(t);
    let om = |x: u8, y: u8, pp: i32| omega_0p(t, g, x, y, pp, space, order);
    let base = om(a, b, p as i32)?;
    let mut res = c.apply_e(t, &base);
    res.add_assign_scaled(&base, &(Q::from_integer(g.into()) * (Q::from_integer(3.into()) - &c.charge) - Q::one()));
    for gam in 1..=n {
        let (gi, ai, bi) = (gam as usize - 1, a as usize - 1, b as usize - 1);
        if !r[gi][ai].is_zero() {
            res.add_assign_scaled(&om(gam, b, p as i32)?, &r[gi][ai]);
        }
        let mut k = -r[gi][bi].clone();
        if gi == bi {
            k += Q::from_integer((p as i64 + 1).into());
        }
        if !k.is_zero() {
            res.add_assign_scaled(&om(a, gam, p as i32)?, &-k);
        }
        if !m[gi][bi].is_zero() {
            res.add_assign_scaled(&om(a, gam, p as i32 - 1)?, &-m[gi][bi].clone());
        }
    }
    Ok(res)
}

/// Series of the jets `v^α_k = ∂ₓ^k v^α` with cached powers, used to
/// evaluate jet expressions along the solution `v(t)`.
#[derive(Clone, Debug)]
pub struct VJets {
    space: Space,
    jets: Vec<Vec<TSeries>>,
    powers: HashMap<(u8, u8, i32), TSeries>,
}

impl VJets {
    pub fn new(t: &CorrelatorTable, space: Space, order: u32) -> Result<VJets, CohftError> {
        Ok(VJets::from_v(v_of_t(t, space, order)?))
    }

    pub fn from_v(v: Vec<TSeries>) -> VJets {
        let space = v[0].space();
        VJets { space, jets: v.into_iter().map(|s| vec![s]).collect(), powers: HashMap::new() }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n(&self) -> u8 {
        self.jets.len() as u8
    }

    pub fn jet(&mut self, alpha: u8, k: u8) -> &TSeries {
        let list = &mut self.jets[alpha as usize - 1];
        while list.len() <= k as usize {
            let next = list.last().unwrap().dx();
            list.push(next);
        }
        &list[k as usize]
    }

    /// `(v^α_k)^e`; negative powers need a nonzero constant term.
    pub fn pow(&mut self, alpha: u8, k: u8, e: i32) -> Option<TSeries> {
        if let Some(s) = self.powers.get(&(alpha, k, e)) {
            return Some(s.clone());
        }
        let s = if e == 0 {
            TSeries::constant(self.space, self.jet(alpha, k).order(), Q::one())
        } else if e > 0 {
            let prev = self.pow(alpha, k, e - 1)?;
            prev.mul(&self.jet(alpha, k).clone())
        } else if e == -1 {
            self.jet(alpha, k).inverse()?
        } else {
            self.pow(alpha, k, e + 1)?.mul(&self.pow(alpha, k, -1)?)
        };
        self.powers.insert((alpha, k, e), s.clone());
        Some(s)
    }

    /// Evaluates an ε-free even jet expression along `v(t)`.
    pub fn eval(&mut self, e: &DiffExpr) -> Result<TSeries, JetError> {
        let mut acc: Option<TSeries> = None;
        for (g, m, c) in e.terms() {
            if g != 0 || !m.odd().is_empty() {
                return Err(JetError::NotEvenJet);
            }
            let mut term: Option<TSeries> = None;
            for &(j, ex) in m.even() {
                let p = self.pow(j.alpha, j.s, ex).ok_or(JetError::NotEvenJet)?;
                term = Some(match term {
                    None => p,
                    Some(t) => t.mul(&p),
                });
            }
            let term = term.unwrap_or_else(|| TSeries::constant(self.space, self.jet(1, 0).order(), Q::one()));
            match &mut acc {
                None => acc = Some(term.scale(c)),
                Some(a) => a.add_assign_scaled(&term, c),
            }
        }
        Ok(acc.unwrap_or_else(|| TSeries::zero(self.space, self.jets[0][0].order())))
    }
}
