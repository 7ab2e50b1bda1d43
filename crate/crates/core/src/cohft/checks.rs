//! Axiom and homogeneity residuals evaluated on truncated potentials.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use super::{CohftError, ConformalData, CorrelatorTable, Insertion};
use crate::algebra::{fmt_q, q, Q};
use crate::jetform::{Space, TSeries};

/// Window of a check: series degree and the largest descendant index kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Window {
    pub order: u32,
    pub dmax: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub identity: &'static str,
    pub genus: u8,
    /// Free indices of the identity, empty for the scalar ones.
    pub indices: String,
    pub monomial: String,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub window: Window,
    /// Every residual is exact through this total degree.
    pub certified_degree: u32,
    pub checked: Vec<String>,
    pub violations: Vec<Violation>,
}

impl AxiomReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn new(window: Window) -> AxiomReport {
        AxiomReport { window, certified_degree: window.order, checked: Vec::new(), violations: Vec::new() }
    }

    fn record(&mut self, identity: &'static str, genus: u8, indices: String, r: &TSeries) {
        self.certified_degree = self.certified_degree.min(r.order());
        for (k, c) in r.sorted_terms() {
            self.violations.push(Violation {
                identity,
                genus,
                indices: indices.clone(),
                monomial: r.monomial_name(&k),
                residual: fmt_q(&c),
            });
        }
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "window: degree <= {} (requested {}), d <= {}; checked {}",
            self.certified_degree,
            self.window.order,
            self.window.dmax,
            self.checked.join(", ")
        )?;
        if self.violations.is_empty() {
            return write!(f, "all residuals vanish");
        }
        for v in &self.violations {
            writeln!(f, "{} g={} {} [{}] = {}", v.identity, v.genus, v.indices, v.monomial, v.residual)?;
        }
        Ok(())
    }
}

fn window_space(t: &CorrelatorTable, w: Window) -> Result<Space, CohftError> {
    if w.dmax > t.dmax {
        return Err(CohftError::BoundsExceeded(format!("window d <= {} beyond table dmax {}", w.dmax, t.dmax)));
    }
    if t.n() as usize * (w.dmax as usize + 1) > crate::jetform::series::MAX_VARS {
        return Err(CohftError::BoundsExceeded(format!("window d <= {} needs too many series variables", w.dmax)));
    }
    Ok(Space::new(t.n(), w.dmax))
}

fn indices(sp: Space) -> Vec<(u8, u8)> {
    (0..sp.vars()).map(|i| sp.var_of(i)).collect()
}

fn idx_name(list: &[(u8, u8)]) -> String {
    list.iter().map(|(a, d)| format!("({a},{d})")).collect::<Vec<_>>().join(" ")
}

/// String, dilaton, WDVV and TRR-0 residuals of every `F_g` in the table.
/// Violations are reported, not raised; errors mean the window is unusable.
pub fn check_axiom_residuals(t: &CorrelatorTable, w: Window) -> Result<AxiomReport, CohftError> {
    let sp = window_space(t, w)?;
    let n = t.n();
    let mut rep = AxiomReport::new(w);
    let fs: Vec<TSeries> = (0..=t.gmax).map(|g| t.potential(g, sp, w.order)).collect::<Result<_, _>>()?;

    for (g, f) in fs.iter().enumerate() {
        let g = g as u8;
        // ∂F/∂t^1_0 − Σ t_{p+1}∂F/∂t_p − ½η t0 t0 − ⟨τ0(e1)⟩1
        let mut r = f.deriv(1, 0);
        for a in 1..=n {
            for p in 0..sp.dmax {
                r = r.sub(&f.deriv(a, p).mul_var(a, p + 1));
            }
        }
        if g == 0 {
            for a in 1..=n {
                for b in 1..=n {
                    let e = &t.eta()[a as usize - 1][b as usize - 1];
                    if !e.is_zero() {
                        let tt = TSeries::var(sp, w.order, a, 0).mul_var(b, 0);
                        r.add_assign_scaled(&tt, &-(e / q(2)));
                    }
                }
            }
        }
        if g == 1 {
            let c = t.get(1, &[Insertion::new(1, 0)]);
            r.add_assign_scaled(&TSeries::constant(sp, w.order, Q::one()), &-c);
        }
        rep.record("string", g, String::new(), &r);

        if sp.dmax >= 1 {
            // ∂F/∂t^1_1 − (2g−2+Σt∂t)F − δ_{g1}N/24
            let mut r = f.deriv(1, 1).sub(&f.weighted_euler(|_, _| Q::one()));
            r.add_assign_scaled(f, &-q(2 * g as i64 - 2));
            if g == 1 {
                r.add_assign_scaled(&TSeries::constant(sp, w.order, Q::one()), &-(q(n as i64) / q(24)));
            }
            rep.record("dilaton", g, String::new(), &r);
        }
    }
    rep.checked.push(format!("string g<={}", t.gmax));
    if sp.dmax >= 1 {
        rep.checked.push(format!("dilaton g<={}", t.gmax));
    }

    let f0 = &fs[0];
    let idx = indices(sp);
    let eta_inv = t.eta_inv();
    let mut d2: HashMap<((u8, u8), (u8, u8)), TSeries> = HashMap::new();
    let mut second = |x: (u8, u8), y: (u8, u8)| -> TSeries {
        let key = if x <= y { (x, y) } else { (y, x) };
        d2.entry(key).or_insert_with(|| f0.deriv(key.0 .0, key.0 .1).deriv(key.1 .0, key.1 .1)).clone()
    };
    // ∂_x∂_y∂_{t^α_0}F₀ for α = 1..N
    let mut d3: HashMap<((u8, u8), (u8, u8)), Vec<TSeries>> = HashMap::new();
    for (i, &x) in idx.iter().enumerate() {
        for &y in &idx[i..] {
            let s = second(x, y);
            d3.insert((x, y), (1..=n).map(|a| s.deriv(a, 0)).collect());
        }
    }
    let third = |x: (u8, u8), y: (u8, u8)| -> &Vec<TSeries> { &d3[&if x <= y { (x, y) } else { (y, x) }] };
    let contract = |l: &[TSeries], r: &[TSeries]| -> TSeries {
        let mut acc = TSeries::zero(sp, w.order);
        for a in 0..n as usize {
            for b in 0..n as usize {
                if !eta_inv[a][b].is_zero() {
                    acc.add_assign_scaled(&l[a].mul(&r[b]), &eta_inv[a][b]);
                }
            }
        }
        acc
    };

    // WDVV: the (12)(34) and (23)(14) contractions agree
    let mut pair_cache: HashMap<[(u8, u8); 4], TSeries> = HashMap::new();
    let mut pair = |a: (u8, u8), b: (u8, u8), c: (u8, u8), d: (u8, u8)| -> TSeries {
        let mut p = [if a <= b { (a, b) } else { (b, a) }, if c <= d { (c, d) } else { (d, c) }];
        p.sort();
        let key = [p[0].0, p[0].1, p[1].0, p[1].1];
        pair_cache.entry(key).or_insert_with(|| contract(third(p[0].0, p[0].1), third(p[1].0, p[1].1))).clone()
    };
    for &i1 in &idx {
        for &i2 in &idx {
            for &i3 in &idx {
                for &i4 in &idx {
                    let r = pair(i1, i2, i3, i4).sub(&pair(i2, i3, i1, i4));
                    rep.record("wdvv", 0, idx_name(&[i1, i2, i3, i4]), &r);
                }
            }
        }
    }
    rep.checked.push("wdvv".into());

    // TRR-0: ∂_{α,p+1}∂_β∂_γF₀ = ∂_{α,p}∂_{μ,0}F₀ η^{μν} ∂_{ν,0}∂_β∂_γF₀
    for a in 1..=n {
        for p in 0..sp.dmax {
            let lhs_base = f0.deriv(a, p + 1);
            let left: Vec<TSeries> = (1..=n).map(|mu| second((a, p), (mu, 0))).collect();
            for (i, &y) in idx.iter().enumerate() {
                for &z in &idx[i..] {
                    let lhs = lhs_base.deriv(y.0, y.1).deriv(z.0, z.1);
                    let r = lhs.sub(&contract(&left, third(y, z)));
                    rep.record("trr0", 0, idx_name(&[(a, p), y, z]), &r);
                }
            }
        }
    }
    if sp.dmax >= 1 {
        rep.checked.push("trr0".into());
    }
    Ok(rep)
}

/// Residual of the homogeneity equation, per genus:
/// `(Ẽ + (g−1)(3−𝖽))F_g − δ_{g0}½𝖻^γ c_{αβγ}t0^α t0^β − δ_{g1}𝖻^γ⟨τ0(e_γ)⟩1`.
pub fn check_homogeneity(t: &CorrelatorTable, c: &ConformalData, w: Window) -> Result<AxiomReport, CohftError> {
    c.validate(t.eta())?;
    let sp = window_space(t, w)?;
    let n = t.n();
    let mut rep = AxiomReport::new(w);
    let three_minus_d = q(3) - &c.charge;
    for g in 0..=t.gmax {
        let f = t.potential(g, sp, w.order)?;
        let mut r = c.apply_e(t, &f);
        r.add_assign_scaled(&f, &(&three_minus_d * q(g as i64 - 1)));
        match g {
            0 => {
                for a in 1..=n {
                    for b in 1..=n {
                        let coef: Q = (1..=n).map(|gam| &c.b[gam as usize - 1] * t.c3(a, b, gam)).sum();
                        if !coef.is_zero() {
                            let tt = TSeries::var(sp, w.order, a, 0).mul_var(b, 0);
                            r.add_assign_scaled(&tt, &-(coef / q(2)));
                        }
                    }
                }
            }
            1 => {
                let coef: Q = (1..=n).map(|gam| &c.b[gam as usize - 1] * t.get(1, &[Insertion::new(gam, 0)])).sum();
                r.add_assign_scaled(&TSeries::constant(sp, w.order, Q::one()), &-coef);
            }
            _ => {}
        }
        rep.record("homogeneity", g, String::new(), &r);
    }
    rep.checked.push(format!("homogeneity g<={}", t.gmax));
    Ok(rep)
}
