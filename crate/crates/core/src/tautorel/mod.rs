//! Barred, tilded and Ẽ-barred two-point functions, and the
//! Liu–Pandharipande identities among them as series residuals.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::Q;
use crate::cohft::{CohftError, ConformalData, CorrelatorTable};
use crate::jetform::{Space, TSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TautError {
    #[error(transparent)]
    Cohft(#[from] CohftError),
    #[error("descendant index {p} needs series variables up to d = {p}, alphabet stops at {dmax}")]
    Bounds { p: i32, dmax: u8 },
    #[error("Ẽ-decorations need conformal data")]
    NoConformalData,
}

impl TautError {
    pub fn is_truncation(&self) -> bool {
        match self {
            TautError::Cohft(e) => e.is_truncation(),
            TautError::Bounds { .. } => true,
            TautError::NoConformalData => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Decoration {
    Plain,
    Barred,
    Tilded,
    /// `Ẽ∂ₓΩ_{…,p̄}`; the derivative count is fixed at one.
    EBarred,
}

/// One decorated two-point function `∂ₓ^s Ω^{[g]}_{α,0;β,p}` as a series.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoratedOmega {
    pub decoration: Decoration,
    pub g: u8,
    pub s: u8,
    pub alpha: u8,
    pub beta: u8,
    pub p: i32,
    pub value: TSeries,
}

type Key = (Decoration, u8, u8, u8, u8, i32);

/// Cached evaluator for plain and decorated `Ω`'s over one series alphabet.
#[derive(Clone, Debug)]
pub struct TwoPoint<'a> {
    table: &'a CorrelatorTable,
    conf: Option<ConformalData>,
    space: Space,
    order: u32,
    potentials: HashMap<u8, TSeries>,
    cache: HashMap<Key, TSeries>,
}

impl<'a> TwoPoint<'a> {
    pub fn new(table: &'a CorrelatorTable, conf: Option<&ConformalData>, space: Space, order: u32) -> TwoPoint<'a> {
        TwoPoint { table, conf: conf.cloned(), space, order, potentials: HashMap::new(), cache: HashMap::new() }
    }

    pub fn table(&self) -> &'a CorrelatorTable {
        self.table
    }

    pub fn conformal(&self) -> Option<&ConformalData> {
        self.conf.as_ref()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn n(&self) -> u8 {
        self.table.n()
    }

    fn eta(&self, a: u8, b: u8) -> &Q {
        &self.table.eta()[a as usize - 1][b as usize - 1]
    }

    fn eta_inv(&self, a: u8, b: u8) -> &Q {
        &self.table.eta_inv()[a as usize - 1][b as usize - 1]
    }

    fn potential(&mut self, g: u8) -> Result<&TSeries, TautError> {
        if !self.potentials.contains_key(&g) {
            let f = self.table.potential(g, self.space, self.order)?;
            self.potentials.insert(g, f);
        }
        Ok(&self.potentials[&g])
    }

    fn constant(&self, c: Q) -> TSeries {
        TSeries::constant(self.space, self.order, c)
    }

    /// `∂ₓ^s Ω^{[g]}_{α,0;β,p}` with `∂ₓ^sΩ^{[g]}_{α,0;β,−1} = δ_{s0}δ_{g0}η_{αβ}`.
    pub fn plain(&mut self, g: u8, s: u8, a: u8, b: u8, p: i32) -> Result<TSeries, TautError> {
        let key = (Decoration::Plain, g, s, a, b, p);
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let v = if p < 0 {
            let c = if g == 0 && s == 0 { self.eta(a, b).clone() } else { Q::zero() };
            self.constant(c)
        } else {
            if p as u8 > self.space.dmax {
                return Err(TautError::Bounds { p, dmax: self.space.dmax });
            }
            let mut f = if s == 0 { self.potential(g)?.deriv(a, 0).deriv(b, p as u8) } else { self.plain(g, s - 1, a, b, p)? };
            if s > 0 {
                f = f.dx();
            }
            f
        };
        self.cache.insert(key, v.clone());
        Ok(v)
    }

    /// `Σ_{μ,ν} x_μ η^{μν} Ω^{[0]}_{ν,0;β,k}`.
    fn contract_genus0(&mut self, xs: &[TSeries], b: u8, k: i32) -> Result<TSeries, TautError> {
        let n = self.n();
        let mut acc = TSeries::zero(self.space, self.order);
        for mu in 1..=n {
            if xs[mu as usize - 1].is_zero() {
                continue;
            }
            for nu in 1..=n {
                let e = self.eta_inv(mu, nu).clone();
                if e.is_zero() {
                    continue;
                }
                let o = self.plain(0, 0, nu, b, k)?;
                acc.add_assign_scaled(&xs[mu as usize - 1].mul(&o), &e);
            }
        }
        Ok(acc)
    }

    fn apply_e(&self, f: &TSeries) -> Result<TSeries, TautError> {
        let c = self.conf.as_ref().ok_or(TautError::NoConformalData)?;
        Ok(c.apply_e(self.table, f))
    }

    /// Decorated function by its defining subtraction recursion. For
    /// [`Decoration::EBarred`] the argument `s` is ignored.
    pub fn value(&mut self, d: Decoration, g: u8, s: u8, a: u8, b: u8, p: i32) -> Result<TSeries, TautError> {
        let s = if d == Decoration::EBarred { 1 } else { s };
        let key = (d, g, s, a, b, p);
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let n = self.n();
        let v = match d {
            Decoration::Plain => return self.plain(g, s, a, b, p),
            Decoration::Barred if p <= 0 => self.plain(g, s, a, b, p)?,
            Decoration::Tilded if p < 0 => self.plain(g, s, a, b, p)?,
            Decoration::EBarred if p < 0 => return Err(TautError::Bounds { p, dmax: self.space.dmax }),
            Decoration::EBarred if p == 0 => {
                let f = self.plain(g, 1, a, b, 0)?;
                self.apply_e(&f)?
            }
            _ => {
                let lo = if d == Decoration::Tilded { -1 } else { 0 };
                let mut acc = match d {
                    Decoration::EBarred => {
                        let f = self.plain(g, 1, a, b, p)?;
                        self.apply_e(&f)?
                    }
                    _ => self.plain(g, s, a, b, p)?,
                };
                for q in lo..p {
                    let xs: Vec<TSeries> = (1..=n).map(|mu| self.value(d, g, s, a, mu, q)).collect::<Result<_, _>>()?;
                    let sub = self.contract_genus0(&xs, b, p - q - 1)?;
                    acc = acc.sub(&sub);
                }
                acc
            }
        };
        self.cache.insert(key, v.clone());
        Ok(v)
    }

    pub fn decorate(&mut self, d: Decoration, g: u8, s: u8, a: u8, b: u8, p: i32) -> Result<DecoratedOmega, TautError> {
        let value = self.value(d, g, s, a, b, p)?;
        let s = if d == Decoration::EBarred { 1 } else { s };
        Ok(DecoratedOmega { decoration: d, g, s, alpha: a, beta: b, p, value })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LemmaId {
    /// `Σ g₂(−1)^q ∂ₓ^sΩ^{[g₁]}_{α,0;μ,q̄} η^{μν} Ω^{[g₂]}_{β,0;ν,\overline{p−q}} = 0`, `s ≥ 1`, `p ≥ 2g+s`.
    VanishingWithCoefficient,
    /// Reduction of `∂ₓ^sΩ^{[g]}_{α,0;β,p̄}`, `s ≥ 1`, `p ≥ 2g+s`.
    ReductionPositiveS,
    /// Tilded reduction, `s ≥ 0`, `p ≥ 2g+s`.
    Reduction,
    /// Reduction of `Ẽ∂ₓΩ^{[g]}_{α,0;β,p̄}`, `p ≥ 2g+2`.
    ReductionEuler,
}

impl LemmaId {
    pub const ALL: [LemmaId; 4] =
        [LemmaId::VanishingWithCoefficient, LemmaId::ReductionPositiveS, LemmaId::Reduction, LemmaId::ReductionEuler];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::VanishingWithCoefficient => "lp-vanishing-with-coefficient",
            LemmaId::ReductionPositiveS => "lp-reduction-positive-s",
            LemmaId::Reduction => "lp-reduction",
            LemmaId::ReductionEuler => "lp-reduction-euler",
        }
    }

    pub fn hypothesis(self, g: u8, s: u8, p: i32) -> bool {
        let (g, s) = (g as i32, s as i32);
        match self {
            LemmaId::VanishingWithCoefficient | LemmaId::ReductionPositiveS => s >= 1 && p >= 2 * g + s,
            LemmaId::Reduction => p >= 2 * g + s,
            LemmaId::ReductionEuler => p >= 2 * g + 2,
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Residual of one identity over all index pairs `(α,β)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    pub lemma: LemmaId,
    pub g: u8,
    pub s: u8,
    pub p: i32,
    pub within_hypothesis: bool,
    pub residuals: Vec<((u8, u8), TSeries)>,
}

impl LemmaCheck {
    pub fn is_zero(&self) -> bool {
        self.residuals.iter().all(|(_, r)| r.is_zero())
    }

    pub fn nonzero_terms(&self) -> usize {
        self.residuals.iter().map(|(_, r)| r.len()).sum()
    }

    /// Lowest exact degree over the residuals.
    pub fn exact_degree(&self) -> u32 {
        self.residuals.iter().map(|(_, r)| r.order()).min().unwrap_or(0)
    }
}

/// `Σ_{g₁+g₂=g, g₂>0} Σ_{q=lo}^{hi} c(g₂,q) X^{[g₁]}_{α;μ,q} η^{μν} Ω^{[g₂]}_{β,0;ν,\overline{r(q)}}`.
#[allow(clippy::too_many_arguments)]
fn split_sum<C, R>(
    tp: &mut TwoPoint,
    left: Decoration,
    g: u8,
    s: u8,
    a: u8,
    b: u8,
    qs: std::ops::Range<i32>,
    coeff: C,
    r_of: R,
) -> Result<TSeries, TautError>
where
    C: Fn(u8, i32) -> Q,
    R: Fn(i32) -> i32,
{
    let n = tp.n();
    let mut acc = TSeries::zero(tp.space(), tp.order());
    for g2 in 1..=g {
        let g1 = g - g2;
        for q in qs.clone() {
            let c = coeff(g2, q);
            if c.is_zero() {
                continue;
            }
            for mu in 1..=n {
                let x = tp.value(left, g1, s, a, mu, q)?;
                if x.is_zero() {
                    continue;
                }
                for nu in 1..=n {
                    let e = tp.eta_inv(mu, nu).clone();
                    if e.is_zero() {
                        continue;
                    }
                    let y = tp.value(Decoration::Barred, g2, 0, b, nu, r_of(q))?;
                    acc.add_assign_scaled(&x.mul(&y), &(c.clone() * e));
                }
            }
        }
    }
    Ok(acc)
}

fn sign(k: i32) -> Q {
    if k.rem_euclid(2) == 0 {
        Q::from_integer(1.into())
    } else {
        Q::from_integer((-1).into())
    }
}

/// Evaluates the identity `id` at `(g,s,p)` for every `(α,β)`. Parameters
/// outside the hypothesis are evaluated anyway and flagged.
pub fn check_lemma(tp: &mut TwoPoint, id: LemmaId, g: u8, s: u8, p: i32) -> Result<LemmaCheck, TautError> {
    let n = tp.n();
    let mut residuals = Vec::new();
    for a in 1..=n {
        for b in 1..=n {
            let r = match id {
                LemmaId::VanishingWithCoefficient => {
                    split_sum(tp, Decoration::Barred, g, s, a, b, 0..p + 1, |g2, q| Q::from_integer(g2.into()) * sign(q), |q| p - q)?
                }
                LemmaId::ReductionPositiveS | LemmaId::Reduction | LemmaId::ReductionEuler => {
                    let (d, lo, ss) = match id {
                        LemmaId::ReductionPositiveS => (Decoration::Barred, 0, s),
                        LemmaId::Reduction => (Decoration::Tilded, -1, s),
                        _ => (Decoration::EBarred, 0, 1),
                    };
                    let lhs = tp.value(d, g, ss, a, b, p)?;
                    let rhs = split_sum(tp, d, g, ss, a, b, lo..p, |_, q| sign(p - q - 1), |q| p - q - 1)?;
                    lhs.sub(&rhs)
                }
            };
            residuals.push(((a, b), r));
        }
    }
    let s = if id == LemmaId::ReductionEuler { 1 } else { s };
    Ok(LemmaCheck { lemma: id, g, s, p, within_hypothesis: id.hypothesis(g, s, p), residuals })
}

/// `∂ₓ^tΩ^{[g₂]}_{α,0;β,p̃}` for every `(α,β)`; it vanishes when
/// `p > 3g₂ − 1 + t` because `ψ^p` vanishes on `M̄_{g₂,t+2}`.
pub fn check_dimension_vanishing(tp: &mut TwoPoint, g2: u8, t: u8, p: i32) -> Result<(bool, Vec<((u8, u8), TSeries)>), TautError> {
    let n = tp.n();
    let above = p > 3 * g2 as i32 - 1 + t as i32;
    let mut out = Vec::new();
    for a in 1..=n {
        for b in 1..=n {
            out.push(((a, b), tp.value(Decoration::Tilded, g2, t, a, b, p)?));
        }
    }
    Ok((above, out))
}

/// `η⁻¹∂ₓΩ^{[0]}` chained `s` times, lowered back with `η` on the left:
/// `(∂ₓΩ⁰ η⁻¹ ∂ₓΩ⁰ ⋯ η⁻¹ ∂ₓΩ⁰)_{βγ}`.
pub fn genus0_chain(tp: &mut TwoPoint, s: u8) -> Result<Vec<Vec<TSeries>>, TautError> {
    let n = tp.n() as usize;
    let mut cur: Vec<Vec<TSeries>> =
        (1..=n as u8).map(|a| (1..=n as u8).map(|b| tp.plain(0, 0, a, b, -1)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
    if s == 0 {
        return Ok(cur);
    }
    let step: Vec<Vec<TSeries>> =
        (1..=n as u8).map(|a| (1..=n as u8).map(|b| tp.plain(0, 1, a, b, 0)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
    cur = step.clone();
    for _ in 1..s {
        let mut next = vec![vec![TSeries::zero(tp.space(), tp.order()); n]; n];
        for b in 0..n {
            for c in 0..n {
                for x in 0..n {
                    for y in 0..n {
                        let e = tp.eta_inv(x as u8 + 1, y as u8 + 1).clone();
                        if e.is_zero() || cur[b][x].is_zero() {
                            continue;
                        }
                        next[b][c].add_assign_scaled(&cur[b][x].mul(&step[y][c]), &e);
                    }
                }
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Residuals of the genus-zero tilded identity: for `t < s` the entries of
/// `∂ₓ^tΩ^{[0]}_{β,0;γ,\widetilde{s−1}}` themselves, and for `t = s` their
/// difference from [`genus0_chain`].
pub fn check_eqn0(tp: &mut TwoPoint, s: u8) -> Result<Vec<(u8, (u8, u8), TSeries)>, TautError> {
    let n = tp.n();
    let chain = genus0_chain(tp, s)?;
    let mut out = Vec::new();
    for t in 0..=s {
        for a in 1..=n {
            for b in 1..=n {
                let v = tp.value(Decoration::Tilded, 0, t, a, b, s as i32 - 1)?;
                let r = if t == s { v.sub(&chain[a as usize - 1][b as usize - 1]) } else { v };
                out.push((t, (a, b), r));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
