//! The quasi-Miura transformation `w = v + Σ ε^{2g} η Ω^{[g]}_{·,0;1,0}`.

use num_traits::Zero;

use super::{jetify, omega_series, Certificate, JetBounds, JetError, Space, VJets};
use crate::algebra::{Ctx, DiffExpr};
use crate::transform::MiuraTransform;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuasiSettings {
    pub gmax: u8,
    /// Degree of the potentials fed to the solver.
    pub order: u32,
    /// Degree bound on the undifferentiated `v` in the ansatz.
    pub mv: u32,
    /// Extra room below the Laurent exponent `−2g` of the ansatz.
    pub laurent_slack: i32,
}

impl QuasiSettings {
    pub fn new(gmax: u8) -> QuasiSettings {
        QuasiSettings { gmax, order: 8 + 4 * gmax as u32, mv: 2, laurent_slack: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiMiuraW {
    pub transform: MiuraTransform,
    /// Per genus `g ≥ 1` and `β`: certificate of `Ω^{[g]}_{β,0;1,0}`.
    pub certificates: Vec<(u8, u8, Certificate)>,
    /// Per genus: highest jet order occurring in `w`.
    pub observed_max_jet: Vec<(u8, u8)>,
}

/// Jetifies `Ω^{[g]}_{β,0;1,0}` for `1 ≤ g ≤ gmax` and assembles `w(v)`.
pub fn quasi_miura_w(t: &crate::cohft::CorrelatorTable, s: QuasiSettings) -> Result<QuasiMiuraW, JetError> {
    let n = t.n();
    let lmin = -(2 * s.gmax as i32) - s.laurent_slack;
    let ctx = Ctx::new(n, s.gmax).with_laurent_min(lmin);
    let mut corrections = vec![DiffExpr::zero(ctx); n as usize];
    let mut certificates = Vec::new();
    let mut observed = Vec::new();
    if s.gmax > 0 {
        let sp = Space::new(n, 3 * s.gmax);
        let mut vj = VJets::new(t, sp, s.order)?;
        for g in 1..=s.gmax {
            let mut b = JetBounds::omega(g, 0);
            b.mv = s.mv;
            b.laurent_min = -(b.std_degree as i32) - s.laurent_slack;
            let mut top = 0;
            let mut omegas = Vec::new();
            for beta in 1..=n {
                let f = omega_series(t, g, (beta, 0), (1, 0), sp, s.order)?;
                let j = jetify(&f, &mut vj, &b)?;
                top = top.max(j.expr.max_jet());
                certificates.push((g, beta, j.certificate));
                omegas.push(j.expr.recast(ctx).shift_eps(g));
            }
            for a in 0..n as usize {
                for (bi, om) in omegas.iter().enumerate() {
                    let e = &t.eta_inv()[a][bi];
                    if !e.is_zero() {
                        corrections[a] += &om.scale(e);
                    }
                }
            }
            observed.push((g, top));
        }
    }
    let transform = MiuraTransform::from_corrections(ctx, &corrections).map_err(|_| JetError::NotEvenJet)?;
    Ok(QuasiMiuraW { transform, certificates, observed_max_jet: observed })
}
