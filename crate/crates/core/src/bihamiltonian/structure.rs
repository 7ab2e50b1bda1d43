//! `C/Dⁿ` decomposition, constant-term polynomiality and the uniqueness probe.

use rand::Rng;

use super::BihamError;
use crate::algebra::{q, Ctx, DiffExpr, Jet, Monomial, Parity};
use crate::cohft::CorrelatorTable;
use crate::functionals::PoissonOperator;
use crate::hierarchy::{structure_constants, HamiltonianFamily};

fn det(m: &[Vec<DiffExpr>], ctx: Ctx) -> DiffExpr {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = DiffExpr::zero(ctx);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<DiffExpr>> = (1..n).map(|i| (0..n).filter(|&k| k != j).map(|k| m[i][k].clone()).collect()).collect();
        let t = &m[0][j] * &det(&minor, ctx);
        if j % 2 == 0 {
            acc += &t;
        } else {
            acc -= &t;
        }
    }
    acc
}

/// `D = det(c^λ_{γμ} w^μ_1)`.
pub fn determinant_d(t: &CorrelatorTable, ctx: Ctx, order: u32) -> Result<DiffExpr, BihamError> {
    let n = t.n();
    let c = structure_constants(t, ctx, order)?;
    let m: Vec<Vec<DiffExpr>> = (0..n as usize)
        .map(|l| {
            (0..n as usize)
                .map(|g| {
                    let mut acc = DiffExpr::zero(ctx);
                    for mu in 0..n as usize {
                        acc += &(&c[l][g][mu] * &DiffExpr::u(ctx, mu as u8 + 1, 1));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let d = det(&m, ctx);
    if d.is_zero() {
        return Err(BihamError::Degenerate);
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralEntry {
    pub g: u8,
    pub s: usize,
    pub alpha: u8,
    pub beta: u8,
    /// `C_{g,s} = B_{g,s}·Dⁿ`, a differential polynomial.
    pub numerator: DiffExpr,
    pub n: u32,
    /// `n` is minimal, i.e. `C/D` is not a differential polynomial.
    pub not_divisible: bool,
    /// Every term of `C` has std degree `2g+1−s+n·deg D`.
    pub degree_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralDecomposition {
    pub d: DiffExpr,
    pub entries: Vec<StructuralEntry>,
}

impl StructuralDecomposition {
    pub fn max_n(&self) -> u32 {
        self.entries.iter().map(|e| e.n).max().unwrap_or(0)
    }

    pub fn all_certified(&self) -> bool {
        self.entries.iter().all(|e| e.not_divisible && e.degree_ok)
    }
}

/// Writes every `B_{g,s}` as `C/Dⁿ` with minimal `n ≤ nmax`.
pub fn structural_decompose(b: &PoissonOperator, d: &DiffExpr, nmax: u32) -> Result<StructuralDecomposition, BihamError> {
    let ctx = b.ctx();
    let d = d.recast(ctx).eps_part(0);
    let deg_d = d.terms().next().map(|(_, m, _)| m.std_degree()).unwrap_or(0);
    let mut entries = Vec::new();
    for ((alpha, beta), s, c) in b.entries() {
        for g in 0..=ctx.genus {
            let coef = c.eps_part(g);
            if coef.is_zero() {
                continue;
            }
            let mut cur = coef.clone();
            let mut n = 0;
            while !cur.is_polynomial() {
                if n == nmax {
                    return Err(BihamError::NotCOverD { g, s, alpha, beta, nmax });
                }
                cur = &cur * &d;
                n += 1;
            }
            let want = 2 * g as i64 + 1 - s as i64 + n as i64 * deg_d;
            let degree_ok = cur.terms().all(|(_, m, _)| m.std_degree() == want);
            entries.push(StructuralEntry { g, s, alpha, beta, numerator: cur, n, not_divisible: true, degree_ok });
        }
    }
    Ok(StructuralDecomposition { d, entries })
}

/// Whether `Σ_g ε^{2g} B_{g,0}` is polynomial: `n_{g,0} = 0` throughout.
pub fn check_constant_term(dec: &StructuralDecomposition) -> bool {
    dec.entries.iter().filter(|e| e.s == 0).all(|e| e.n == 0)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeOutcome {
    pub zero_perturbation: bool,
    /// `(β, d)` at which `X δh̄_{β,d}/δw ≠ 0`.
    pub detected_at: Vec<(u8, i32)>,
}

impl ProbeOutcome {
    pub fn detected(&self) -> bool {
        !self.detected_at.is_empty()
    }
}

/// For `C = B + X` with `B` solving the recursion, the recursion residual of
/// `C` is `X δh̄_{β,d}/δw`; records every `(β,d)` where it is nonzero.
pub fn uniqueness_probe(x: &PoissonOperator, h: &HamiltonianFamily, dmax: i32) -> ProbeOutcome {
    let ctx = x.ctx();
    let n = ctx.n;
    let mut detected_at = Vec::new();
    for d in -1..=dmax {
        for beta in 1..=n {
            let Some(hd) = h.density(beta, d) else { continue };
            let hd = hd.recast(ctx);
            let grads: Vec<DiffExpr> = (1..=n).map(|a| hd.var_deriv(Parity::Even, a)).collect();
            if x.apply(&grads).iter().any(|r| !r.is_zero()) {
                detected_at.push((beta, d));
            }
        }
    }
    ProbeOutcome { zero_perturbation: x.is_zero(), detected_at }
}

fn jet_monomials(n: u8, std: i64, maxs: u8, out: &mut Vec<Vec<(Jet, i32)>>, cur: &mut Vec<(Jet, i32)>, from: (u8, u8)) {
    if std == 0 {
        out.push(cur.clone());
        return;
    }
    for a in from.0..=n {
        let s0 = if a == from.0 { from.1 } else { 1 };
        for s in s0..=maxs.min(std as u8) {
            cur.push((Jet::new(a, s), 1));
            jet_monomials(n, std - s as i64, maxs, out, cur, (a, s));
            cur.pop();
        }
    }
}

/// Random skew operator `X − X*` at `ε^{2g}`: `X = Σ_{s ≤ 2g+1} X_s ∂ₓ^s`
/// with polynomial `X_s` of std degree `2g+1−s` and small integer coefficients.
pub fn random_skew_perturbation<R: Rng>(ctx: Ctx, g: u8, rng: &mut R) -> PoissonOperator {
    let n = ctx.n;
    loop {
        let mut x = PoissonOperator::zero(ctx);
        for s in 0..=(2 * g as usize + 1) {
            let std = 2 * g as i64 + 1 - s as i64;
            let mut monos = Vec::new();
            jet_monomials(n, std, 3 * g + 1, &mut monos, &mut Vec::new(), (1, 1));
            for a in 1..=n {
                for b in 1..=n {
                    let mut c = DiffExpr::zero(ctx);
                    for m in &monos {
                        if rng.gen_bool(0.5) {
                            continue;
                        }
                        let mut ev = m.clone();
                        if rng.gen_bool(0.3) {
                            ev.push((Jet::new(rng.gen_range(1..=n), 0), 1));
                        }
                        let (_, mono) = Monomial::new(ev, vec![]).expect("polynomial monomial");
                        c.add_term(g, mono, q(rng.gen_range(-3..=3)));
                    }
                    x.add_to(a, b, s, &c);
                }
            }
        }
        let p = x.sub(&x.adjoint());
        if !p.is_zero() {
            return p;
        }
    }
}
