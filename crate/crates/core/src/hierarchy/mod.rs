//! Hamiltonians, principal and full hierarchy flows, the first bracket `A`
//! in `w`-coordinates and the factor `Ã` with `A = ∂ₓ∘Ã`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::algebra::{Ctx, DiffExpr, Jet, Monomial, Parity, VarId, Q};
use crate::cohft::{mat_inv, CohftError, CorrelatorTable};
use crate::functionals::{LocalFunctional, PoissonOperator};
use crate::jetform::{jetify, omega_series, JetBounds, JetError, QuasiMiuraW, Space, VJets};
use crate::transform::TransformError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    #[error(transparent)]
    Cohft(#[from] CohftError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("A = ∂ₓ∘Ã has no solution: the ∂ₓ⁰ coefficient of ({0},{1}) is not exact")]
    Factorization(u8, u8),
    #[error("index p = {0} out of range")]
    Index(i32),
}

impl HierarchyError {
    pub fn is_truncation(&self) -> bool {
        match self {
            HierarchyError::Cohft(e) => e.is_truncation(),
            HierarchyError::Jet(e) => e.is_truncation(),
            HierarchyError::Transform(e) => e.is_truncation(),
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alphabet {
    V,
    W,
}

/// Densities `h_{α,p}`, `p ≥ −1`, with `h_{α,−1} = η_{αβ}·coordinate^β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HamiltonianFamily {
    pub alphabet: Alphabet,
    densities: BTreeMap<(u8, i32), DiffExpr>,
}

impl HamiltonianFamily {
    pub fn density(&self, alpha: u8, p: i32) -> Option<&DiffExpr> {
        self.densities.get(&(alpha, p))
    }

    pub fn functional(&self, alpha: u8, p: i32) -> Option<LocalFunctional> {
        self.density(alpha, p).map(LocalFunctional::integrate)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u8, i32), &DiffExpr)> {
        self.densities.iter().map(|(k, v)| (*k, v))
    }

    /// Re-expresses every `h̄` in `w`: the density is the canonical
    /// representative of the pushed-forward functional.
    pub fn to_w(&self, w: &QuasiMiuraW) -> Result<HamiltonianFamily, HierarchyError> {
        let mut densities = BTreeMap::new();
        for (k, h) in &self.densities {
            let f = w.transform.push_functional(&LocalFunctional::integrate(h))?;
            densities.insert(*k, f.rep().clone());
        }
        Ok(HamiltonianFamily { alphabet: Alphabet::W, densities })
    }
}

/// `Ω^{[0]}_{α,p;β,q}(v)`: genus-zero two-point functions depend on `v` only,
/// so restricting to the small phase space and renaming `t^α_0 ↦ v^α`
/// gives the function exactly through degree `order − 2`.
pub fn genus0_in_v(t: &CorrelatorTable, (a, p): (u8, u8), (b, q): (u8, u8), ctx: Ctx, order: u32) -> Result<DiffExpr, HierarchyError> {
    let sp = Space::new(t.n(), p.max(q));
    let s = omega_series(t, 0, (a, p), (b, q), sp, order)?;
    let mut out = DiffExpr::zero(ctx);
    for (k, c) in s.terms() {
        let mut even = Vec::new();
        let mut small = true;
        for i in 0..sp.vars() {
            if k[i] > 0 {
                let (al, d) = sp.var_of(i);
                if d > 0 {
                    small = false;
                    break;
                }
                even.push((Jet::new(al, 0), k[i] as i32));
            }
        }
        if small {
            let (_, m) = Monomial::new(even, vec![]).expect("polynomial monomial");
            out.add_term(0, m, c.clone());
        }
    }
    Ok(out)
}

/// `h_{α,p}(v) = Ω^{[0]}_{α,p+1;1,0}` for `p ≤ pmax`, and `h_{α,−1}`.
pub fn hamiltonians(t: &CorrelatorTable, pmax: u8, ctx: Ctx, order: u32) -> Result<HamiltonianFamily, HierarchyError> {
    let n = t.n();
    let mut densities = BTreeMap::new();
    for a in 1..=n {
        let mut lin = DiffExpr::zero(ctx);
        for b in 1..=n {
            lin += &DiffExpr::u(ctx, b, 0).scale(&t.eta()[a as usize - 1][b as usize - 1]);
        }
        densities.insert((a, -1), lin);
        for p in 0..=pmax {
            densities.insert((a, p as i32), genus0_in_v(t, (a, p + 1), (1, 0), ctx, order)?);
        }
    }
    Ok(HamiltonianFamily { alphabet: Alphabet::V, densities })
}

fn eta_dx(t: &CorrelatorTable, ctx: Ctx) -> PoissonOperator {
    PoissonOperator::constant(ctx, t.eta_inv(), 1)
}

fn grads(h: &DiffExpr, n: u8) -> Vec<DiffExpr> {
    (1..=n).map(|b| h.var_deriv(Parity::Even, b)).collect()
}

/// Flow along `t^β_{q+1}` of the principal hierarchy,
/// `∂v^α/∂t^β_{q+1} = η^{αγ}∂ₓ δh̄_{β,q+1}/δv^γ`, for `q ≥ −1`.
pub fn principal_flow(t: &CorrelatorTable, beta: u8, q: i32, ctx: Ctx, order: u32) -> Result<Vec<DiffExpr>, HierarchyError> {
    if q < -1 {
        return Err(HierarchyError::Index(q));
    }
    let h = hamiltonians(t, (q + 1) as u8, ctx, order)?;
    let hd = h.density(beta, q + 1).expect("density was generated");
    Ok(eta_dx(t, ctx).apply(&grads(hd, t.n())))
}

/// `η^{αγ}∂ₓΩ^{[0]}_{γ,0;β,q+1}(v)`, the tau-cover form of the same flow.
pub fn principal_flow_taucover(t: &CorrelatorTable, beta: u8, q: i32, ctx: Ctx, order: u32) -> Result<Vec<DiffExpr>, HierarchyError> {
    if q < -1 {
        return Err(HierarchyError::Index(q));
    }
    let om: Vec<DiffExpr> = (1..=t.n()).map(|g| genus0_in_v(t, (g, 0), (beta, (q + 1) as u8), ctx, order)).collect::<Result<_, _>>()?;
    Ok(eta_dx(t, ctx).apply(&om))
}

/// The first bracket in `w`-coordinates and its polynomiality flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstBracket {
    pub a: PoissonOperator,
    /// Every coefficient is free of negative powers of `w[1,1]`.
    pub polynomial: bool,
}

/// `A = L ∘ η∂ₓ ∘ L*` for the quasi-Miura map `v ↦ w`.
pub fn first_bracket_a(t: &CorrelatorTable, w: &QuasiMiuraW) -> Result<FirstBracket, HierarchyError> {
    let ctx = w.transform.ctx();
    let a = w.transform.conjugate_operator(&eta_dx(t, ctx))?;
    let polynomial = a.entries().all(|(_, _, c)| c.is_polynomial());
    Ok(FirstBracket { a, polynomial })
}

/// `∂w^α/∂t^β_{q+1} = A^{αγ}δh̄_{β,q+1}/δw^γ`.
pub fn full_flow(
    t: &CorrelatorTable,
    w: &QuasiMiuraW,
    a: &PoissonOperator,
    beta: u8,
    q: i32,
    order: u32,
) -> Result<Vec<DiffExpr>, HierarchyError> {
    if q < -1 {
        return Err(HierarchyError::Index(q));
    }
    let ctx = w.transform.ctx();
    let hv = hamiltonians(t, (q + 1) as u8, ctx, order)?;
    let hv =
        HamiltonianFamily { alphabet: Alphabet::V, densities: hv.densities.into_iter().filter(|(k, _)| *k == (beta, q + 1)).collect() };
    let hw = hv.to_w(w)?;
    Ok(a.apply(&grads(hw.density(beta, q + 1).unwrap(), t.n())))
}

/// `η^{αγ}∂ₓ Σ_g ε^{2g} Ω^{[g]}_{γ,0;β,q+1}(v)` with every genus jetified:
/// the flow of `w` written in `v`-coordinates. `mv` bounds the degree in
/// undifferentiated `v` of the jetification ansatz.
pub fn full_flow_taucover(
    t: &CorrelatorTable,
    w: &QuasiMiuraW,
    beta: u8,
    q: i32,
    order: u32,
    mv: u32,
) -> Result<Vec<DiffExpr>, HierarchyError> {
    if q < -1 {
        return Err(HierarchyError::Index(q));
    }
    let ctx = w.transform.ctx();
    let n = t.n();
    let qq = (q + 1) as u8;
    let sp = Space::new(n, (3 * ctx.genus).max(qq).max(1));
    let mut vj = VJets::new(t, sp, order)?;
    let mut om = vec![DiffExpr::zero(ctx); n as usize];
    for g in 0..=ctx.genus {
        for gam in 1..=n {
            let part = if g == 0 {
                genus0_in_v(t, (gam, 0), (beta, qq), ctx, order)?
            } else {
                let f = omega_series(t, g, (gam, 0), (beta, qq), sp, order)?;
                let mut b = JetBounds::omega(g, 0);
                b.laurent_min = ctx.laurent_min.max(b.laurent_min);
                b.mv = mv;
                jetify(&f, &mut vj, &b)?.expr.recast(ctx).shift_eps(g)
            };
            om[gam as usize - 1] += &part;
        }
    }
    Ok(eta_dx(t, ctx).apply(&om))
}

/// Solves `A = ∂ₓ∘Ã` from the top order down: `Ã_{m−1} = A_m`,
/// `Ã_{s−1} = A_s − ∂ₓÃ_s`; the `∂ₓ⁰` coefficient must then equal `∂ₓÃ_0`.
pub fn tilde_a(a: &PoissonOperator) -> Result<PoissonOperator, HierarchyError> {
    let ctx = a.ctx();
    let n = ctx.n;
    let mut out = PoissonOperator::zero(ctx);
    let top = a.max_order().unwrap_or(0);
    for al in 1..=n {
        for be in 1..=n {
            let mut cur = DiffExpr::zero(ctx);
            for s in (1..=top).rev() {
                let c = &a.coeff(al, be, s) - &cur.dx();
                out.add_to(al, be, s - 1, &c);
                cur = c;
            }
            if a.coeff(al, be, 0) != cur.dx() {
                return Err(HierarchyError::Factorization(al, be));
            }
        }
    }
    Ok(out)
}

/// `Ã⁻¹ = Σ_k (−η⁻¹Y)^k η⁻¹` with `Y = Ã − Ã|_{ε=0}`; the sum stops at the
/// genus bound of the context.
pub fn tilde_a_inverse(at: &PoissonOperator) -> Result<PoissonOperator, HierarchyError> {
    let ctx = at.ctx();
    let n = ctx.n as usize;
    let base = at.eps_part(0);
    let mut eta = vec![vec![Q::zero(); n]; n];
    for ((a, b), s, c) in base.entries() {
        if s != 0 || c.len() != 1 || c.terms().any(|(_, m, _)| !m.is_one()) {
            return Err(HierarchyError::Factorization(a, b));
        }
        eta[a as usize - 1][b as usize - 1] = c.coeff(0, &Monomial::one());
    }
    let eta_inv = mat_inv(&eta).ok_or(HierarchyError::Cohft(CohftError::SingularMetric))?;
    let ei = PoissonOperator::constant(ctx, &eta_inv, 0);
    let y = at.sub(&base.recast(ctx));
    let step = ei.compose(&y).scale(&-Q::one());
    let mut term = ei.clone();
    let mut acc = ei;
    for _ in 0..ctx.genus {
        term = step.compose(&term);
        if term.is_zero() {
            break;
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// `c^σ_{αγ}(w) = η^{σλ}∂³F^Frob/∂w^λ∂w^α∂w^γ`.
pub fn structure_constants(t: &CorrelatorTable, ctx: Ctx, order: u32) -> Result<Vec<Vec<Vec<DiffExpr>>>, HierarchyError> {
    let n = t.n();
    let mut c = vec![vec![vec![DiffExpr::zero(ctx); n as usize]; n as usize]; n as usize];
    for s in 1..=n {
        for a in 1..=n {
            for g in 1..=n {
                let mut acc = DiffExpr::zero(ctx);
                for l in 1..=n {
                    let e = &t.eta_inv()[s as usize - 1][l as usize - 1];
                    if e.is_zero() {
                        continue;
                    }
                    // ∂_λ Ω^{[0]}_{α,0;γ,0} with λ small-phase-space
                    let om = genus0_in_v(t, (a, 0), (g, 0), ctx, order)?;
                    acc += &om.partial(VarId::u(l, 0)).scale(e);
                }
                c[s as usize - 1][a as usize - 1][g as usize - 1] = acc;
            }
        }
    }
    Ok(c)
}

/// Residual of `∂²h_{β,d}/∂w^α∂w^γ − c^σ_{αγ}∂h_{β,d−1}/∂w^σ` on the genus-zero
/// densities (with `v ↦ w`).
pub fn trr0_w_residual(t: &CorrelatorTable, h: &HamiltonianFamily, c: &[Vec<Vec<DiffExpr>>], beta: u8, d: i32) -> Option<Vec<DiffExpr>> {
    let n = t.n();
    let hd = h.density(beta, d)?;
    let hm = h.density(beta, d - 1)?;
    let mut out = Vec::new();
    for a in 1..=n {
        for g in 1..=n {
            let lhs = hd.partial(VarId::u(a, 0)).partial(VarId::u(g, 0));
            let mut r = lhs;
            for s in 1..=n {
                r -= &(&c[s as usize - 1][a as usize - 1][g as usize - 1] * &hm.partial(VarId::u(s, 0)));
            }
            out.push(r);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests;
