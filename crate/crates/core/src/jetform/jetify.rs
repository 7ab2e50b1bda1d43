//! Recovers a jet expression from its series along `v(t)` by solving an
//! overdetermined linear system over a type-(1,1) ansatz.

use std::collections::HashMap;

use num_traits::Zero;
use serde::Serialize;

use super::series::Key;
use super::{omega_series, JetError, Space, TSeries, VJets};
use crate::algebra::{Ctx, DiffExpr, Jet, Monomial, Q};
use crate::cohft::CorrelatorTable;
use crate::linalg::{solve, Solve, SparseRow};

/// Shape of the ansatz: `(v^1_1)^e · Π v^α_s (s ≥ 1, (α,s) ≠ (1,1)) · Π (v^α)^k`
/// with total std degree `std_degree`, `s ≤ max_jet`, `e ≥ laurent_min`
/// and `Σk ≤ mv`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct JetBounds {
    pub std_degree: i64,
    pub max_jet: u8,
    pub laurent_min: i32,
    pub mv: u32,
    /// Extra equations demanded beyond the 25% surplus rule.
    pub min_surplus: usize,
}

impl JetBounds {
    /// Bounds for `∂ₓ^j Ω^{[g]}`: std degree `2g + j`, jets up to `3g + j`.
    pub fn omega(g: u8, j: u8) -> JetBounds {
        let std = 2 * g as i64 + j as i64;
        JetBounds { std_degree: std, max_jet: 3 * g + j, laurent_min: -(std as i32) - 2, mv: 2, min_surplus: 0 }
    }
}

/// Machine-readable record of a successful solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub unknowns: usize,
    pub equations: usize,
    /// Total degree through which the series comparison is exact.
    pub exact_degree: u32,
    /// Nonzero coefficients of `J(v(t)) − f` after the solve.
    pub residual_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jetified {
    pub expr: DiffExpr,
    pub certificate: Certificate,
}

type Exps = Vec<(Jet, i32)>;

fn rest_monomials(factors: &[(Jet, i64)], max_std: i64, out: &mut Vec<(Exps, i64)>, cur: &mut Exps, std: i64, from: usize) {
    out.push((cur.clone(), std));
    for i in from..factors.len() {
        let (j, w) = factors[i];
        if std + w > max_std {
            continue;
        }
        match cur.last_mut() {
            Some(last) if last.0 == j => last.1 += 1,
            _ => cur.push((j, 1)),
        }
        rest_monomials(factors, max_std, out, cur, std + w, i);
        let last = cur.last_mut().unwrap();
        last.1 -= 1;
        if last.1 == 0 {
            cur.pop();
        }
    }
}

fn v0_monomials(n: u8, mv: u32) -> Vec<Exps> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![(Vec::<(Jet, i32)>::new(), 1u8)];
    for _ in 0..mv {
        let mut next = Vec::new();
        for (m, from) in &frontier {
            for a in *from..=n {
                let mut m2 = m.clone();
                match m2.last_mut() {
                    Some(last) if last.0 == Jet::new(a, 0) => last.1 += 1,
                    _ => m2.push((Jet::new(a, 0), 1)),
                }
                out.push(m2.clone());
                next.push((m2, a));
            }
        }
        frontier = next;
    }
    out
}

fn product(vj: &mut VJets, exps: &[(Jet, i32)]) -> Result<Option<TSeries>, JetError> {
    let mut acc: Option<TSeries> = None;
    for &(j, e) in exps {
        let p = vj.pow(j.alpha, j.s, e).ok_or(JetError::NotEvenJet)?;
        acc = Some(match acc {
            None => p,
            Some(a) => a.mul(&p),
        });
    }
    Ok(acc)
}

/// Solves `J(v(t)) = f` for `J` in the ansatz described by `b`.
pub fn jetify(f: &TSeries, vj: &mut VJets, b: &JetBounds) -> Result<Jetified, JetError> {
    let n = vj.n();
    let sp = vj.space();
    if b.max_jet > sp.dmax {
        return Err(JetError::AlphabetTooSmall { alpha: 1, s: b.max_jet });
    }
    let mut factors = Vec::new();
    for a in 1..=n {
        for s in 1..=b.max_jet {
            if (a, s) != (1, 1) {
                factors.push((Jet::new(a, s), s as i64));
            }
        }
    }
    let max_std = b.std_degree - b.laurent_min as i64;
    let mut rests = Vec::new();
    rest_monomials(&factors, max_std, &mut rests, &mut Vec::new(), 0, 0);
    let v0s = v0_monomials(n, b.mv);

    let mut monos: Vec<Monomial> = Vec::new();
    let mut cols: Vec<TSeries> = Vec::new();
    let mut v0_cache: HashMap<usize, Option<TSeries>> = HashMap::new();
    for (rest, std) in &rests {
        let e = (b.std_degree - std) as i32;
        let r = product(vj, rest)?;
        let lau = vj.pow(1, 1, e).ok_or(JetError::NotEvenJet)?;
        let base = match r {
            Some(r) => r.mul(&lau),
            None => lau,
        };
        for (i, v0) in v0s.iter().enumerate() {
            if let std::collections::hash_map::Entry::Vacant(e) = v0_cache.entry(i) {
                e.insert(product(vj, v0)?);
            }
            let col = match &v0_cache[&i] {
                Some(p) => base.mul(p),
                None => base.clone(),
            };
            let mut ex: Exps = rest.clone();
            ex.extend(v0.iter().copied());
            if e != 0 {
                ex.push((Jet::new(1, 1), e));
            }
            let (_, m) = Monomial::new(ex, vec![]).expect("ansatz monomials are valid");
            monos.push(m);
            cols.push(col);
        }
    }
    let unknowns = cols.len();
    let exact = cols.iter().map(TSeries::order).chain([f.order()]).min().unwrap_or(0);

    let mut rows: HashMap<Key, (SparseRow<usize>, Q)> = HashMap::new();
    for (j, c) in cols.iter().enumerate() {
        for (k, v) in c.truncated(exact).terms() {
            rows.entry(*k).or_default().0.insert(j, v.clone());
        }
    }
    for (k, v) in f.truncated(exact).terms() {
        rows.entry(*k).or_default().1 = v.clone();
    }
    let equations = rows.len();
    let required = (unknowns * 5).div_ceil(4).max(unknowns + b.min_surplus);
    if equations < required {
        return Err(JetError::InsufficientSurplus { unknowns, equations, required });
    }
    let x = match solve(unknowns, rows.into_values()) {
        Solve::Unique(x) => x,
        Solve::Inconsistent => return Err(JetError::Inconsistent { unknowns, equations }),
        Solve::Underdetermined { nullity } => return Err(JetError::Underdetermined { nullity, unknowns, equations }),
    };
    let ctx = Ctx::new(n, 0).with_laurent_min(b.laurent_min.min(0)).with_mv(b.mv);
    let mut expr = DiffExpr::zero(ctx);
    for (m, c) in monos.into_iter().zip(x) {
        if !c.is_zero() {
            expr.add_term(0, m, c);
        }
    }
    let back = vj.eval(&expr)?;
    let residual_terms = back.truncated(exact).sub(&f.truncated(exact)).len();
    if residual_terms != 0 {
        return Err(JetError::Inconsistent { unknowns, equations });
    }
    Ok(Jetified { expr, certificate: Certificate { unknowns, equations, exact_degree: exact, residual_terms } })
}

/// Jetifies `∂ₓ^j Ω^{[g]}_{α,p;β,q}` from the table, with the series
/// alphabet `d ≤ max_jet` and potentials of degree `order`.
pub fn jetify_omega(
    t: &CorrelatorTable,
    g: u8,
    ap: (u8, u8),
    bq: (u8, u8),
    j: u8,
    b: &JetBounds,
    order: u32,
) -> Result<Jetified, JetError> {
    let sp = Space::new(t.n(), b.max_jet.max(ap.1).max(bq.1).max(1));
    let mut vj = VJets::new(t, sp, order)?;
    let mut f = omega_series(t, g, ap, bq, sp, order)?;
    for _ in 0..j {
        f = f.dx();
    }
    jetify(&f, &mut vj, b)
}
