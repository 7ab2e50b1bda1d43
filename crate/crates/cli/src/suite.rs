//! The verification suite behind `verify`.

use std::sync::OnceLock;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thetaform::algebra::Ctx;
use thetaform::bihamiltonian::{
    check_constant_term, check_dispersionless_recursion, determinant_d, first_bracket_p, k_dispersionless, operator_in_v,
    random_skew_perturbation, route_mismatches, second_bracket_b, series_recursion_residual, solve_recursion_for_b, structural_decompose,
    tilde_b, uniqueness_probe, BihamError, SolverSettings,
};
use thetaform::cohft::{check_axiom_residuals, check_homogeneity, ConformalData, CorrelatorTable, Window};
use thetaform::functionals::{compatibility_residual, poisson_residual, PoissonOperator};
use thetaform::hierarchy::{first_bracket_a, hamiltonians};
use thetaform::jetform::{quasi_miura_w, QuasiMiuraW, QuasiSettings, Space};
use thetaform::report::{CheckRecord, Status};
use thetaform::tautorel::{check_dimension_vanishing, check_eqn0, check_lemma, LemmaId, TwoPoint};
use thetaform::DiffExpr;

use crate::config::RunConfig;
use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Group {
    Cohft,
    Brackets,
    Vanishing,
    Unicity,
    Structure,
    Lp,
}

impl Group {
    pub const FAST: [Group; 4] = [Group::Cohft, Group::Brackets, Group::Vanishing, Group::Lp];
    pub const ALL: [Group; 6] = [Group::Cohft, Group::Brackets, Group::Vanishing, Group::Unicity, Group::Structure, Group::Lp];
}

type Records = Vec<CheckRecord>;

fn summary(es: &[DiffExpr]) -> Option<String> {
    let bad: Vec<String> = es.iter().filter(|e| !e.is_zero()).map(|e| e.to_string()).collect();
    (!bad.is_empty()).then(|| truncate(bad.join("; ")))
}

fn truncate(mut s: String) -> String {
    if s.len() > 200 {
        let cut = (0..=200).rev().find(|&i| s.is_char_boundary(i)).unwrap_or(0);
        s.truncate(cut);
        s.push_str("...");
    }
    s
}

fn flag(id: &str, params: &[(&str, i64)], ok: bool, why: impl FnOnce() -> String, t0: Instant) -> CheckRecord {
    CheckRecord::from_residual(id, params, (!ok).then(why)).timed(t0)
}

fn skipped(id: &str, why: &str) -> CheckRecord {
    CheckRecord::new(id, &[], Status::Skipped, why)
}

/// Quasi-Miura map and both brackets, built once and shared by the groups.
struct Pipeline {
    w: QuasiMiuraW,
    a: PoissonOperator,
    b: Option<PoissonOperator>,
}

struct Shared<'a> {
    t: &'a CorrelatorTable,
    conf: Option<&'a ConformalData>,
    cfg: &'a RunConfig,
    pipeline: OnceLock<Result<Pipeline, Failure>>,
}

impl Shared<'_> {
    fn pipeline(&self) -> Result<&Pipeline, Failure> {
        self.pipeline
            .get_or_init(|| {
                let mut qs = QuasiSettings::new(self.cfg.gmax);
                qs.order = self.cfg.order;
                let w = quasi_miura_w(self.t, qs).map_err(|e| Failure::from_core(e.is_truncation(), e))?;
                let a = first_bracket_a(self.t, &w).map_err(|e| Failure::from_core(e.is_truncation(), e))?.a;
                let b = match self.conf {
                    Some(c) => Some(second_bracket_b(self.t, c, &w, self.cfg.order).map_err(biham)?.b),
                    None => None,
                };
                Ok(Pipeline { w, a, b })
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

fn biham(e: BihamError) -> Failure {
    Failure::from_core(e.is_truncation(), e)
}

fn cohft(sh: &Shared) -> Result<Records, Failure> {
    let (t, conf, cfg) = (sh.t, sh.conf, sh.cfg);
    let mut out = Vec::new();
    let w = Window { order: cfg.check_order, dmax: cfg.check_order.saturating_sub(3).min(u8::MAX as u32) as u8 };
    let params = [("order", w.order as i64), ("dmax", w.dmax as i64)];
    let t0 = Instant::now();
    let r = check_axiom_residuals(t, w).map_err(|e| Failure::from_core(e.is_truncation(), e))?;
    out.push(flag("cohft-axioms", &params, r.is_clean(), || truncate(r.to_string()), t0));
    match conf {
        Some(c) => {
            let t0 = Instant::now();
            let r = check_homogeneity(t, c, w).map_err(|e| Failure::from_core(e.is_truncation(), e))?;
            out.push(flag("cohft-homogeneity", &params, r.is_clean(), || truncate(r.to_string()), t0));
        }
        None => out.push(skipped("cohft-homogeneity", "no conformal data")),
    }
    Ok(out)
}

fn brackets(sh: &Shared) -> Result<Records, Failure> {
    let (t, conf, cfg) = (sh.t, sh.conf, sh.cfg);
    let mut out = Vec::new();
    let g = [("gmax", cfg.gmax as i64)];
    let t0 = Instant::now();
    let p = sh.pipeline()?;
    let fb_poly = p.a.entries().all(|(_, _, c)| c.is_polynomial());
    out.push(flag("first-bracket-polynomial", &g, fb_poly, || "negative powers of w[1,1]".into(), t0));
    let t0 = Instant::now();
    let pr = poisson_residual(&p.a);
    out.push(flag("first-bracket-poisson", &g, pr.is_zero(), || truncate(pr.to_string()), t0));
    let Some(c) = conf else {
        out.push(skipped("dispersionless-recursion", "no conformal data"));
        out.push(skipped("second-bracket", "no conformal data"));
        return Ok(out);
    };
    let (r, m) = (c.tilde_r(), c.m_matrix(t));
    let ctx0 = Ctx::new(t.n(), 0);
    let t0 = Instant::now();
    let k = k_dispersionless(t, c, ctx0, cfg.order).map_err(biham)?;
    let p0 = first_bracket_p(t, ctx0);
    let kr = poisson_residual(&k);
    out.push(flag("k-poisson", &[], kr.is_zero(), || truncate(kr.to_string()), t0));
    let kc = compatibility_residual(&p0, &k);
    out.push(flag("k-compatible", &[], kc.is_zero(), || truncate(kc.to_string()), t0));
    let h0 = hamiltonians(t, (cfg.dmax + 2) as u8, ctx0, cfg.order).map_err(|e| Failure::from_core(e.is_truncation(), e))?;
    for (beta, d, res) in check_dispersionless_recursion(&k, &p0, &h0, &r, &m, cfg.dmax) {
        let params = [("beta", beta as i64), ("d", d as i64)];
        out.push(flag("dispersionless-recursion", &params, summary(&res).is_none(), || summary(&res).unwrap(), t0));
    }
    let t0 = Instant::now();
    let b = p.b.as_ref().expect("conformal pipeline has B");
    let br = poisson_residual(b);
    out.push(flag("second-bracket-poisson", &g, br.is_zero(), || truncate(br.to_string()), t0));
    let t0 = Instant::now();
    let cr = compatibility_residual(&p.a, b);
    out.push(flag("brackets-compatible", &g, cr.is_zero(), || truncate(cr.to_string()), t0));
    let t0 = Instant::now();
    let hw = h0.to_w(&p.w).map_err(|e| Failure::from_core(e.is_truncation(), e))?;
    for (beta, d, res) in check_dispersionless_recursion(b, &p.a, &hw, &r, &m, cfg.dmax) {
        let params = [("gmax", cfg.gmax as i64), ("beta", beta as i64), ("d", d as i64)];
        out.push(flag("bihamiltonian-recursion", &params, summary(&res).is_none(), || summary(&res).unwrap(), t0));
    }
    Ok(out)
}

fn vanishing(sh: &Shared) -> Result<Records, Failure> {
    let cfg = sh.cfg;
    let Some(b) = &sh.pipeline()?.b else { return Ok(vec![skipped("b-vanishing", "no conformal data")]) };
    let t0 = Instant::now();
    let top = b.max_order().unwrap_or(0);
    let mut out = Vec::new();
    for g in 1..=cfg.gmax {
        for s in (2 * g as usize + 2)..=top.max(3 * g as usize + 1) {
            let nz: Vec<DiffExpr> = b.entries().filter(|(_, s1, _)| *s1 == s).map(|(_, _, e)| e.eps_part(g)).collect();
            let params = [("g", g as i64), ("s", s as i64)];
            out.push(flag("b-vanishing", &params, summary(&nz).is_none(), || summary(&nz).unwrap(), t0));
        }
    }
    Ok(out)
}

fn unicity(sh: &Shared) -> Result<Records, Failure> {
    let (t, conf, cfg) = (sh.t, sh.conf, sh.cfg);
    let Some(c) = conf else { return Ok(vec![skipped("route-agreement", "no conformal data")]) };
    let mut out = Vec::new();
    let t0 = Instant::now();
    let mut st = SolverSettings::new(cfg.gmax);
    st.order = cfg.solver_order;
    if let Some(l) = cfg.laurent_min {
        st.laurent_min = l;
    }
    let sol = solve_recursion_for_b(t, c, st).map_err(biham)?;
    let p = sh.pipeline()?;
    let b = p.b.as_ref().expect("conformal pipeline has B");
    let bt = operator_in_v(&tilde_b(b, &p.a, t.eta_inv()).map_err(biham)?, &p.w).map_err(biham)?;
    let mism = route_mismatches(&sol.operator, &bt, cfg.gmax);
    for g in 0..=cfg.gmax {
        let bad: Vec<String> = mism.iter().filter(|m| m.0 == g).map(|(_, s, ab, e)| format!("s={s} {ab:?}: {e}")).collect();
        out.push(flag("route-agreement", &[("g", g as i64)], bad.is_empty(), || truncate(bad.join("; ")), t0));
    }
    let t0 = Instant::now();
    let space = Space::new(t.n(), 2 + 2);
    let mut tp = TwoPoint::new(t, Some(c), space, cfg.check_order.min(cfg.solver_order));
    for p_ in 0..=2 {
        let res = series_recursion_residual(&mut tp, &sol.operator, c, p_).map_err(biham)?;
        let bad = res.iter().filter(|r| !r.2.is_zero()).count();
        out.push(flag("series-recursion", &[("p", p_ as i64)], bad == 0, || format!("{bad} nonzero entries"), t0));
    }
    let t0 = Instant::now();
    let hw = hamiltonians(t, (cfg.dmax + 2) as u8, Ctx::new(t.n(), 0), cfg.order)
        .and_then(|h| h.to_w(&p.w))
        .map_err(|e| Failure::from_core(e.is_truncation(), e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trials = 50;
    let ctx = p.w.transform.ctx();
    let missed =
        (0..trials).filter(|_| !uniqueness_probe(&random_skew_perturbation(ctx, cfg.gmax, &mut rng), &hw, cfg.dmax).detected()).count();
    let params = [("seed", cfg.seed as i64), ("trials", trials), ("g", cfg.gmax as i64)];
    out.push(flag("uniqueness-probe", &params, missed == 0, || format!("{missed} perturbations undetected"), t0));
    Ok(out)
}

fn structure(sh: &Shared) -> Result<Records, Failure> {
    let (t, cfg) = (sh.t, sh.cfg);
    let Some(b) = &sh.pipeline()?.b else { return Ok(vec![skipped("structure", "no conformal data")]) };
    let t0 = Instant::now();
    let d = determinant_d(t, b.ctx(), cfg.order).map_err(biham)?;
    let dec = structural_decompose(b, &d, 16).map_err(biham)?;
    let mut out = Vec::new();
    for e in &dec.entries {
        let params = [("g", e.g as i64), ("s", e.s as i64), ("alpha", e.alpha as i64), ("beta", e.beta as i64), ("n", e.n as i64)];
        out.push(flag(
            "structure-decomposition",
            &params,
            e.not_divisible && e.degree_ok,
            || format!("degree mismatch in {}", e.numerator),
            t0,
        ));
    }
    out.push(flag(
        "constant-term",
        &[("gmax", cfg.gmax as i64)],
        check_constant_term(&dec),
        || "B_{g,0} carries D in a denominator".into(),
        t0,
    ));
    Ok(out)
}

fn lp(sh: &Shared) -> Result<Records, Failure> {
    let (t, conf, cfg) = (sh.t, sh.conf, sh.cfg);
    let gtop = cfg.gmax.min(2);
    let pmax = 2 * gtop as i32 + 4;
    let space = Space::new(t.n(), pmax as u8 + 1);
    let mut tp = TwoPoint::new(t, conf, space, cfg.check_order);
    let taut = |e: thetaform::tautorel::TautError| Failure::from_core(e.is_truncation(), e);
    let mut out = Vec::new();
    for g in 0..=gtop {
        for s in 0..=2u8 {
            for p in 0..=(2 * g as i32 + s as i32 + 2) {
                for id in LemmaId::ALL {
                    let params = [("g", g as i64), ("s", s as i64), ("p", p as i64)];
                    if id == LemmaId::ReductionEuler && conf.is_none() {
                        continue;
                    }
                    let t0 = Instant::now();
                    let r = check_lemma(&mut tp, id, g, s, p).map_err(taut)?;
                    let rec = if r.within_hypothesis {
                        flag(id.name(), &params, r.is_zero(), || format!("{} nonzero terms", r.nonzero_terms()), t0)
                    } else {
                        let res = if r.is_zero() { "0".to_string() } else { format!("{} nonzero terms", r.nonzero_terms()) };
                        CheckRecord::new(id.name(), &params, Status::OutsideHypothesis, res).timed(t0)
                    };
                    out.push(rec);
                }
            }
        }
    }
    for g2 in 0..=gtop {
        for p in 0..=pmax {
            let t0 = Instant::now();
            let (above, res) = check_dimension_vanishing(&mut tp, g2, 0, p).map_err(taut)?;
            let params = [("g", g2 as i64), ("p", p as i64)];
            if above {
                let bad = res.iter().filter(|r| !r.1.is_zero()).count();
                out.push(flag("dimension-vanishing", &params, bad == 0, || format!("{bad} nonzero entries"), t0));
            }
        }
    }
    for s in 0..=4u8 {
        let t0 = Instant::now();
        let res = check_eqn0(&mut tp, s).map_err(taut)?;
        let bad = res.iter().filter(|r| !r.2.is_zero()).count();
        out.push(flag("genus0-product", &[("s", s as i64)], bad == 0, || format!("{bad} nonzero entries"), t0));
    }
    Ok(out)
}

/// Runs the groups concurrently; records come back in group order.
pub fn run(t: &CorrelatorTable, conf: Option<&ConformalData>, cfg: &RunConfig, groups: &[Group]) -> (Records, Vec<Failure>) {
    let sh = Shared { t, conf, cfg, pipeline: OnceLock::new() };
    let sh = &sh;
    let results: Vec<Result<Records, Failure>> = std::thread::scope(|sc| {
        let handles: Vec<_> = groups
            .iter()
            .map(|&g| {
                sc.spawn(move || match g {
                    Group::Cohft => cohft(sh),
                    Group::Brackets => brackets(sh),
                    Group::Vanishing => vanishing(sh),
                    Group::Unicity => unicity(sh),
                    Group::Structure => structure(sh),
                    Group::Lp => lp(sh),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
    });
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(mut v) => records.append(&mut v),
            Err(e) => errors.push(e),
        }
    }
    (records, errors)
}
