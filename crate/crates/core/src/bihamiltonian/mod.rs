//! The second bracket: dispersionless `K`, the deformed `B = L K L*`,
//! `B̃ = B Ã⁻¹ η`, the triangular recursion solver, and the structural checks.

mod solver;
mod structure;

use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{Ctx, DiffExpr, VarId};
use crate::cohft::{CohftError, ConformalData, CorrelatorTable, Matrix};
use crate::functionals::PoissonOperator;
use crate::hierarchy::{genus0_in_v, tilde_a, tilde_a_inverse, HamiltonianFamily, HierarchyError};
use crate::jetform::{JetError, QuasiMiuraW};
use crate::tautorel::TautError;
use crate::transform::TransformError;

pub use solver::{series_recursion_residual, solve_recursion_for_b, RecursionSolution, SolverSettings};
pub use structure::{
    check_constant_term, determinant_d, random_skew_perturbation, structural_decompose, uniqueness_probe, ProbeOutcome,
    StructuralDecomposition, StructuralEntry,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BihamError {
    #[error(transparent)]
    Cohft(#[from] CohftError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Taut(#[from] TautError),
    #[error("det(η⁻¹∂ₓΩ⁰) vanishes identically")]
    Degenerate,
    #[error("∂ₓ^sΩ^[0] factor at s = {s} is not invertible at this truncation")]
    NotInvertible { s: usize },
    #[error("coefficient ({alpha},{beta}) at ε^{g2} ∂ₓ^{s} is not C/D^n for n ≤ {nmax}", g2 = 2 * *g as u32)]
    NotCOverD { g: u8, s: usize, alpha: u8, beta: u8, nmax: u32 },
}

impl BihamError {
    pub fn is_truncation(&self) -> bool {
        match self {
            BihamError::Cohft(e) => e.is_truncation(),
            BihamError::Hierarchy(e) => e.is_truncation(),
            BihamError::Jet(e) => e.is_truncation(),
            BihamError::Transform(e) => e.is_truncation(),
            BihamError::Taut(e) => e.is_truncation(),
            BihamError::NotInvertible { .. } => true,
            BihamError::Degenerate | BihamError::NotCOverD { .. } => false,
        }
    }
}

fn eta_dx(t: &CorrelatorTable, ctx: Ctx) -> PoissonOperator {
    PoissonOperator::constant(ctx, t.eta_inv(), 1)
}

/// `K^{αβ} = g^{αβ}∂ₓ + b^{αβ}_γ v^γ_1` with `g^{αβ} = η^{αγ}η^{βν}E^μc_{μγν}`
/// and `b^{αβ}_γ = c^{αδ}_γ R̃^β_δ`.
pub fn k_dispersionless(t: &CorrelatorTable, conf: &ConformalData, ctx: Ctx, order: u32) -> Result<PoissonOperator, BihamError> {
    conf.validate(t.eta())?;
    let n = t.n();
    let ni = n as usize;
    let ei = t.eta_inv();
    let r = conf.tilde_r();
    // c_{μγν}
    let mut c = vec![vec![vec![DiffExpr::zero(ctx); ni]; ni]; ni];
    for g in 1..=n {
        for nu in 1..=n {
            let om = genus0_in_v(t, (g, 0), (nu, 0), ctx, order)?;
            for mu in 1..=n {
                c[mu as usize - 1][g as usize - 1][nu as usize - 1] = om.partial(VarId::u(mu, 0));
            }
        }
    }
    let e: Vec<DiffExpr> = (0..ni)
        .map(|g| {
            let mut x = DiffExpr::constant(ctx, conf.b[g].clone());
            for mu in 0..ni {
                x += &DiffExpr::u(ctx, mu as u8 + 1, 0).scale(&conf.q[g][mu]);
            }
            x
        })
        .collect();
    // c^{αβ}_γ
    let mut cu = vec![vec![vec![DiffExpr::zero(ctx); ni]; ni]; ni];
    for a in 0..ni {
        for b in 0..ni {
            for g in 0..ni {
                let mut acc = DiffExpr::zero(ctx);
                for mu in 0..ni {
                    for nu in 0..ni {
                        let k = &ei[a][mu] * &ei[b][nu];
                        if !k.is_zero() {
                            acc += &c[mu][nu][g].scale(&k);
                        }
                    }
                }
                cu[a][b][g] = acc;
            }
        }
    }
    let mut k = PoissonOperator::zero(ctx);
    for a in 0..ni {
        for b in 0..ni {
            let mut gab = DiffExpr::zero(ctx);
            for g in 0..ni {
                for nu in 0..ni {
                    let w = &ei[a][g] * &ei[b][nu];
                    if w.is_zero() {
                        continue;
                    }
                    for mu in 0..ni {
                        gab += &(&e[mu] * &c[mu][g][nu]).scale(&w);
                    }
                }
            }
            k.add_to(a as u8 + 1, b as u8 + 1, 1, &gab);
            let mut bab = DiffExpr::zero(ctx);
            for g in 0..ni {
                let mut coef = DiffExpr::zero(ctx);
                for d in 0..ni {
                    if !r[b][d].is_zero() {
                        coef += &cu[a][d][g].scale(&r[b][d]);
                    }
                }
                bab += &(&coef * &DiffExpr::u(ctx, g as u8 + 1, 1));
            }
            k.add_to(a as u8 + 1, b as u8 + 1, 0, &bab);
        }
    }
    Ok(k)
}

/// Residual `L δh̄_{β,d} − R δ((d+2−R̃)^λ_β h̄_{λ,d+1} + M^λ_β h̄_{λ,d})` of the
/// bi-Hamiltonian recursion, for one pair `(β,d)`.
pub fn recursion_residual(
    left: &PoissonOperator,
    right: &PoissonOperator,
    h: &HamiltonianFamily,
    r: &Matrix,
    m: &Matrix,
    beta: u8,
    d: i32,
) -> Option<Vec<DiffExpr>> {
    let ctx = left.ctx();
    let n = ctx.n;
    let grads = |f: &DiffExpr| -> Vec<DiffExpr> { (1..=n).map(|a| f.var_deriv(crate::algebra::Parity::Even, a)).collect() };
    let hd = h.density(beta, d)?.recast(ctx);
    let lhs = left.apply(&grads(&hd));
    let mut combo = DiffExpr::zero(ctx);
    for l in 1..=n {
        let (li, bi) = (l as usize - 1, beta as usize - 1);
        let mut k = -r[li][bi].clone();
        if li == bi {
            k += crate::algebra::q(d as i64 + 2);
        }
        if !k.is_zero() {
            combo += &h.density(l, d + 1)?.recast(ctx).scale(&k);
        }
        if !m[li][bi].is_zero() {
            combo += &h.density(l, d)?.recast(ctx).scale(&m[li][bi]);
        }
    }
    let rhs = right.apply(&grads(&combo));
    Some(lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect())
}

/// Residuals for every `β` and `−1 ≤ d ≤ dmax`; entries are `(β, d, residual)`.
pub fn check_dispersionless_recursion(
    k: &PoissonOperator,
    p: &PoissonOperator,
    h: &HamiltonianFamily,
    r: &Matrix,
    m: &Matrix,
    dmax: i32,
) -> Vec<(u8, i32, Vec<DiffExpr>)> {
    let n = k.ctx().n;
    let mut out = Vec::new();
    for d in -1..=dmax {
        for beta in 1..=n {
            if let Some(res) = recursion_residual(k, p, h, r, m, beta, d) {
                out.push((beta, d, res));
            }
        }
    }
    out
}

/// `K` and its conjugate `B = L K L*` in `w`-coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondBracket {
    pub k: PoissonOperator,
    pub b: PoissonOperator,
}

pub fn second_bracket_b(t: &CorrelatorTable, conf: &ConformalData, w: &QuasiMiuraW, order: u32) -> Result<SecondBracket, BihamError> {
    let ctx = w.transform.ctx();
    let k = k_dispersionless(t, conf, ctx, order)?;
    let b = w.transform.conjugate_operator(&k)?;
    Ok(SecondBracket { k, b })
}

/// The first Poisson operator `η⁻¹∂ₓ` in the context `ctx`.
pub fn first_bracket_p(t: &CorrelatorTable, ctx: Ctx) -> PoissonOperator {
    eta_dx(t, ctx)
}

/// `B̃^{αβ} = B^{αμ}Ã⁻¹_{μν}η^{νβ}` with `A = ∂ₓ∘Ã`.
pub fn tilde_b(b: &PoissonOperator, a: &PoissonOperator, eta_inv: &Matrix) -> Result<PoissonOperator, BihamError> {
    let ainv = tilde_a_inverse(&tilde_a(a)?)?;
    let e = PoissonOperator::constant(b.ctx(), eta_inv, 0);
    Ok(b.compose(&ainv).compose(&e))
}

/// Re-expresses the coefficients of an operator in `w` as functions of `v`.
/// The Laurent window widens by `3g+1`, the deepest pole `∂ₓ^{3g+1}` can create.
pub fn operator_in_v(op: &PoissonOperator, w: &QuasiMiuraW) -> Result<PoissonOperator, BihamError> {
    let ctx = w.transform.ctx();
    let wide = ctx.with_laurent_min(ctx.laurent_min - 3 * ctx.genus as i32 - 1);
    let tr = w.transform.recast(wide);
    let mut out = PoissonOperator::zero(wide);
    for ((a, b), s, c) in op.entries() {
        out.add_to(a, b, s, &tr.substitute(&c.recast(wide))?);
    }
    Ok(out)
}

/// Coefficient-wise differences between two ε-graded operators, as
/// `(g, s, (α,β), difference)` for every nonzero difference.
pub fn route_mismatches(x: &PoissonOperator, y: &PoissonOperator, gmax: u8) -> Vec<(u8, usize, (u8, u8), DiffExpr)> {
    let lmin = x.ctx().laurent_min.min(y.ctx().laurent_min);
    let mv = x.ctx().mv.max(y.ctx().mv);
    let ctx = Ctx::new(x.ctx().n, gmax).with_laurent_min(lmin).with_mv(mv);
    let d = x.recast(ctx).sub(&y.recast(ctx));
    let mut out = Vec::new();
    for ((a, b), s, c) in d.entries() {
        for g in 0..=gmax {
            let part = c.eps_part(g);
            if !part.is_zero() {
                out.push((g, s, (a, b), part));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
