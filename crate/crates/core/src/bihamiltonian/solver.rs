//! Triangular solve of the compact recursion for `B̃_{[g],s}` in
//! `v`-coordinates, from `s = 3g+1` down to `0`, on series.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::BihamError;
use crate::algebra::{q, Ctx, DiffExpr, Q};
use crate::cohft::{ConformalData, CorrelatorTable};
use crate::functionals::PoissonOperator;
use crate::jetform::{jetify, Certificate, JetBounds, Space, TSeries, VJets};
use crate::tautorel::{Decoration, TwoPoint};

type SMatrix = Vec<Vec<TSeries>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverSettings {
    pub gmax: u8,
    /// Degree of the potentials.
    pub order: u32,
    /// Degree bound on undifferentiated `v` in the jet ansatz.
    pub mv: u32,
    /// Lowest exponent of `v^1_1` allowed in the ansatz.
    pub laurent_min: i32,
}

impl SolverSettings {
    pub fn new(gmax: u8) -> SolverSettings {
        SolverSettings { gmax, order: 10 + 4 * gmax as u32, mv: 2, laurent_min: -(3 * gmax as i32) - 2 }
    }
}

#[derive(Clone, Debug)]
pub struct RecursionSolution {
    /// `Σ_g ε^{2g} Σ_s B̃_{[g],s} ∂ₓ^s` with coefficients in `v`.
    pub operator: PoissonOperator,
    /// Series of every solved coefficient, keyed by `(g, s)`.
    pub series: BTreeMap<(u8, usize), SMatrix>,
    /// `(g, s, α, β, certificate)` for every nonzero coefficient.
    pub certificates: Vec<(u8, usize, u8, u8, Certificate)>,
}

fn det(m: &SMatrix, space: Space, order: u32) -> TSeries {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = TSeries::zero(space, order);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: SMatrix = (1..n).map(|i| (0..n).filter(|&k| k != j).map(|k| m[i][k].clone()).collect()).collect();
        let c = if j % 2 == 0 { Q::one() } else { -Q::one() };
        acc.add_assign_scaled(&m[0][j].mul(&det(&minor, space, order)), &c);
    }
    acc
}

/// `adj(m)` with `m · adj(m) = det(m)`.
fn adjugate(m: &SMatrix, space: Space, order: u32) -> SMatrix {
    let n = m.len();
    if n == 1 {
        return vec![vec![TSeries::constant(space, order, Q::one())]];
    }
    let mut adj = vec![vec![TSeries::zero(space, order); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: SMatrix =
                (0..n).filter(|&r| r != i).map(|r| (0..n).filter(|&k| k != j).map(|k| m[r][k].clone()).collect()).collect();
            let d = det(&minor, space, order);
            adj[j][i] = if (i + j) % 2 == 0 { d } else { d.scale(&-Q::one()) };
        }
    }
    adj
}

fn mat_mul(a: &SMatrix, b: &SMatrix, space: Space, order: u32) -> SMatrix {
    let n = a.len();
    let mut out = vec![vec![TSeries::zero(space, order); n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if !a[i][k].is_zero() && !b[k][j].is_zero() {
                    out[i][j] = out[i][j].add(&a[i][k].mul(&b[k][j]));
                }
            }
        }
    }
    out
}

fn tilded(tp: &mut TwoPoint, g: u8, t: usize, p: i32) -> Result<SMatrix, BihamError> {
    let n = tp.n();
    (1..=n).map(|b| (1..=n).map(|c| Ok(tp.value(Decoration::Tilded, g, t as u8, b, c, p)?)).collect()).collect()
}

/// Right-hand side `η^{αβ}(R̃^μ_β∂ₓΩ^{[g]}_{μ,0;γ,s̄} + Ẽ∂ₓΩ^{[g]}_{β,0;γ,s̄} + g(3−𝖽)∂ₓΩ^{[g]}_{β,0;γ,s̄})`.
fn rhs(tp: &mut TwoPoint, conf: &ConformalData, g: u8, s: usize) -> Result<SMatrix, BihamError> {
    let n = tp.n() as usize;
    let r = conf.tilde_r();
    let gd = Q::from_integer(g.into()) * (q(3) - &conf.charge);
    let ei = tp.table().eta_inv().clone();
    let (space, order) = (tp.space(), tp.order());
    let mut inner = vec![vec![TSeries::zero(space, order); n]; n];
    for b in 0..n {
        for c in 0..n {
            let bar = |tp: &mut TwoPoint, x: usize| tp.value(Decoration::Barred, g, 1, x as u8 + 1, c as u8 + 1, s as i32);
            let mut acc = tp.value(Decoration::EBarred, g, 1, b as u8 + 1, c as u8 + 1, s as i32)?;
            for mu in 0..n {
                if !r[mu][b].is_zero() {
                    acc.add_assign_scaled(&bar(tp, mu)?, &r[mu][b]);
                }
            }
            if !gd.is_zero() {
                acc.add_assign_scaled(&bar(tp, b)?, &gd);
            }
            inner[b][c] = acc;
        }
    }
    let mut out = vec![vec![TSeries::zero(space, order); n]; n];
    for a in 0..n {
        for c in 0..n {
            for b in 0..n {
                if !ei[a][b].is_zero() {
                    out[a][c].add_assign_scaled(&inner[b][c], &ei[a][b]);
                }
            }
        }
    }
    Ok(out)
}

/// Solves the compact recursion genus by genus and reconstructs every
/// coefficient as a jet expression in `v`.
pub fn solve_recursion_for_b(t: &CorrelatorTable, conf: &ConformalData, st: SolverSettings) -> Result<RecursionSolution, BihamError> {
    conf.validate(t.eta())?;
    let n = t.n();
    let ni = n as usize;
    let top = 3 * st.gmax + 1;
    let space = Space::new(n, top);
    let mut tp = TwoPoint::new(t, Some(conf), space, st.order);
    let mut vj = VJets::new(t, space, st.order)?;
    let out_ctx = Ctx::new(n, st.gmax).with_laurent_min(st.laurent_min.min(0)).with_mv(st.mv);
    let mut operator = PoissonOperator::zero(out_ctx);
    let mut series: BTreeMap<(u8, usize), SMatrix> = BTreeMap::new();
    let mut certificates = Vec::new();
    for g in 0..=st.gmax {
        let smax = 3 * g as usize + 1;
        for s in (0..=smax).rev() {
            let order = tp.order();
            let mut known = rhs(&mut tp, conf, g, s)?;
            let minus = |known: &mut SMatrix, prod: SMatrix| {
                for i in 0..ni {
                    for j in 0..ni {
                        known[i][j] = known[i][j].sub(&prod[i][j]);
                    }
                }
            };
            for ((g1, t1), b) in series.iter().filter(|((g1, t1), _)| *g1 < g || *t1 > s) {
                let g2 = g - g1;
                let x = tilded(&mut tp, g2, *t1, s as i32 - 1)?;
                minus(&mut known, mat_mul(b, &x, space, order));
            }
            let x = tilded(&mut tp, 0, s, s as i32 - 1)?;
            let dt = det(&x, space, order);
            let dinv = dt.inverse().ok_or(BihamError::NotInvertible { s })?;
            let xinv: SMatrix = adjugate(&x, space, order).iter().map(|row| row.iter().map(|e| e.mul(&dinv)).collect()).collect();
            let sol = mat_mul(&known, &xinv, space, order);
            let std = 2 * g as i64 + 1 - s as i64;
            for a in 0..ni {
                for b in 0..ni {
                    let f = &sol[a][b];
                    if f.is_zero() {
                        continue;
                    }
                    let bounds = JetBounds { std_degree: std, max_jet: smax as u8, laurent_min: st.laurent_min, mv: st.mv, min_surplus: 0 };
                    let j = jetify(f, &mut vj, &bounds)?;
                    certificates.push((g, s, a as u8 + 1, b as u8 + 1, j.certificate));
                    operator.add_to(a as u8 + 1, b as u8 + 1, s, &j.expr.recast(out_ctx).shift_eps(g));
                }
            }
            series.insert((g, s), sol);
        }
    }
    Ok(RecursionSolution { operator, series, certificates })
}

/// Genus-graded residual of `B̃^{αβ}Ω_{β,0;γ,p} = η^{αβ}∂ₓ(Ω_{β,0;μ,p+1}(p+2−R̃)^μ_γ + Ω_{β,0;μ,p}M^μ_γ)`
/// for an operator in `v`, evaluated on series: entries `(g, (α,γ), residual)`.
pub fn series_recursion_residual(
    tp: &mut TwoPoint,
    op: &PoissonOperator,
    conf: &ConformalData,
    p: i32,
) -> Result<Vec<(u8, (u8, u8), TSeries)>, BihamError> {
    let t = tp.table();
    let n = t.n();
    let gmax = op.ctx().genus;
    let mut vj = VJets::new(t, tp.space(), tp.order())?;
    let r = conf.tilde_r();
    let m = conf.m_matrix(t);
    let ei = t.eta_inv().clone();
    let mut out = Vec::new();
    let plain_ctx = |c: &DiffExpr| Ctx::new(n, 0).with_laurent_min(c.ctx().laurent_min).with_mv(c.ctx().mv);
    let mut coeffs: Vec<(u8, u8, u8, usize, TSeries)> = Vec::new();
    for g1 in 0..=gmax {
        for ((a, b), s, c) in op.eps_part(g1).entries() {
            coeffs.push((g1, a, b, s, vj.eval(&c.recast(plain_ctx(c)))?));
        }
    }
    for g in 0..=gmax {
        for a in 1..=n {
            for c in 1..=n {
                let mut acc = TSeries::zero(tp.space(), tp.order());
                for (g1, aa, b, s, coef) in &coeffs {
                    if *aa != a || *g1 > g {
                        continue;
                    }
                    let om = tp.plain(g - g1, *s as u8, *b, c, p)?;
                    acc = acc.add(&coef.mul(&om));
                }
                for b in 1..=n {
                    let e = &ei[a as usize - 1][b as usize - 1];
                    if e.is_zero() {
                        continue;
                    }
                    for mu in 1..=n {
                        let (mi, ci) = (mu as usize - 1, c as usize - 1);
                        let mut k = -r[mi][ci].clone();
                        if mi == ci {
                            k += q(p as i64 + 2);
                        }
                        if !k.is_zero() {
                            acc.add_assign_scaled(&tp.plain(g, 1, b, mu, p + 1)?, &-(e * &k));
                        }
                        if !m[mi][ci].is_zero() {
                            acc.add_assign_scaled(&tp.plain(g, 1, b, mu, p)?, &-(e * &m[mi][ci]));
                        }
                    }
                }
                out.push((g, (a, c), acc));
            }
        }
    }
    Ok(out)
}
