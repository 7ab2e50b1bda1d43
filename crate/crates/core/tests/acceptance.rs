//! End-to-end acceptance run: one line per criterion on stderr, then a
//! single assertion over all of them.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thetaform::algebra::{q, Ctx, DiffExpr, Parity};
use thetaform::bihamiltonian::*;
use thetaform::cohft::{check_axiom_residuals, check_homogeneity, gen_trivial, read_table, ConformalData, Window};
use thetaform::functionals::{compatibility_residual, poisson_residual, schouten, LocalFunctional, PoissonOperator};
use thetaform::hierarchy::{first_bracket_a, hamiltonians};
use thetaform::jetform::{jetify_omega, quasi_miura_w, JetBounds, QuasiSettings, Space};
use thetaform::tautorel::{check_eqn0, check_lemma, LemmaId, TwoPoint};
use thetaform::transform::MiuraTransform;
use thetaform::Q;

fn sign(k: usize) -> Q {
    if k.is_multiple_of(2) {
        q(1)
    } else {
        q(-1)
    }
}

/// Random element of standard degree at most `max_std` and super degree `sup`
/// in `N = 2`, homogeneous in both.
fn homogeneous(rng: &mut ChaCha8Rng, max_std: u8, sup: usize) -> DiffExpr {
    let ctx = Ctx::new(2, 0);
    let std = rng.gen_range(0..=max_std);
    let mut e = DiffExpr::zero(ctx);
    for _ in 0..rng.gen_range(1..=3) {
        let mut m = DiffExpr::constant(ctx, q(rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 }));
        let mut left = std as i32;
        for _ in 0..sup {
            let s = rng.gen_range(0..=left.min(2));
            left -= s;
            m = &m * &DiffExpr::th(ctx, rng.gen_range(1..=2), s as u8);
        }
        while left > 0 {
            let s = rng.gen_range(1..=left.min(3));
            left -= s;
            m = &m * &DiffExpr::u(ctx, rng.gen_range(1..=2), s as u8);
        }
        for _ in 0..rng.gen_range(0..=2) {
            m = &m * &DiffExpr::u(ctx, rng.gen_range(1..=2), 0);
        }
        e += &m;
    }
    e
}

fn criterion_1() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut inputs = 0;
    for _ in 0..40 {
        let (sa, sb, sc) = (rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(0..=2));
        let a = homogeneous(&mut rng, 6, sa);
        let b = homogeneous(&mut rng, 6, sb);
        let c = homogeneous(&mut rng, 6, sc);
        inputs += 3;
        assert_eq!(&a * &b, (&b * &a).scale(&sign(sa * sb)), "graded commutativity");
        assert_eq!(&(&a * &b) * &c, &a * &(&b * &c), "associativity");
        let d = a.dx();
        for al in 1..=2 {
            assert!(d.var_deriv(Parity::Even, al).is_zero(), "var_deriv of dx, even");
            assert!(d.var_deriv(Parity::Odd, al).is_zero(), "var_deriv of dx, odd");
        }
    }
    for _ in 0..30 {
        let (pd, qd, rd) = (rng.gen_range(0..=2), rng.gen_range(0..=2), rng.gen_range(0..=2));
        let a = LocalFunctional::integrate(&homogeneous(&mut rng, 3, pd));
        let b = LocalFunctional::integrate(&homogeneous(&mut rng, 3, qd));
        let c = LocalFunctional::integrate(&homogeneous(&mut rng, 3, rd));
        inputs += 3;
        let t1 = schouten(&schouten(&a, &b).unwrap(), &c).unwrap().scale(&sign(pd * rd));
        let t2 = schouten(&schouten(&b, &c).unwrap(), &a).unwrap().scale(&sign(qd * pd));
        let t3 = schouten(&schouten(&c, &a).unwrap(), &b).unwrap().scale(&sign(rd * qd));
        assert!((&(&t1 + &t2) + &t3).is_zero(), "graded Jacobi");
    }
    assert!(inputs >= 100);
}

fn random_miura(ctx: Ctx, rng: &mut ChaCha8Rng) -> MiuraTransform {
    let pool = ["u[1,2]", "u[1,1]^2", "u[1,0]*u[1,2]", "u[1,0]^2*u[1,2]", "u[1,0]*u[1,1]^2"];
    let mut c = DiffExpr::zero(ctx);
    for t in pool {
        let k: i64 = rng.gen_range(-2..=2);
        c += &DiffExpr::parse(ctx, &format!("{k}*eps^2*{t}")).unwrap();
    }
    if c.is_zero() {
        c = DiffExpr::parse(ctx, "eps^2*u[1,2]").unwrap();
    }
    MiuraTransform::from_corrections(ctx, &[c]).unwrap()
}

fn random_bivector(ctx: Ctx, rng: &mut ChaCha8Rng) -> LocalFunctional {
    let pool =
        ["u[1,0]^2*th[1,0]*th[1,1]", "u[1,1]*th[1,0]*th[1,2]", "th[1,0]*th[1,3]", "u[1,0]*th[1,0]*th[1,1]", "u[1,2]*th[1,0]*th[1,1]"];
    loop {
        let mut e = DiffExpr::zero(ctx);
        for t in pool {
            let k: i64 = rng.gen_range(-2..=2);
            e += &DiffExpr::parse(ctx, &format!("{k}*{t}")).unwrap();
        }
        let f = LocalFunctional::integrate(&e);
        if !f.is_zero() {
            return f;
        }
    }
}

fn criterion_2() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ctx = Ctx::new(1, 1);
    for _ in 0..20 {
        let t = random_miura(ctx, &mut rng);
        let p = random_bivector(ctx, &mut rng);
        let r = random_bivector(ctx, &mut rng);
        let lhs = t.push_functional(&schouten(&p, &r).unwrap()).unwrap();
        let rhs = schouten(&t.push_functional(&p).unwrap(), &t.push_functional(&r).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}

fn criterion_3() {
    let t = gen_trivial(2, 10).unwrap();
    let w = Window { order: 10, dmax: 7 };
    let r = check_axiom_residuals(&t, w).unwrap();
    assert!(r.is_clean(), "{r}");
    for id in ["string", "dilaton", "wdvv", "trr0"] {
        assert!(r.checked.iter().any(|c| c.starts_with(id)), "{id} not checked");
    }
    let c = ConformalData::kdv();
    assert_eq!((c.q[0][0].clone(), c.b[0].clone(), c.charge.clone()), (q(1), q(0), q(0)));
    let h = check_homogeneity(&t, &c, w).unwrap();
    assert!(h.is_clean(), "{h}");
}

fn criterion_4() {
    let t = gen_trivial(1, 12).unwrap();
    let mut b = JetBounds::omega(1, 0);
    b.min_surplus = 20;
    let j = jetify_omega(&t, 1, (1, 0), (1, 0), 0, &b, 12).unwrap();
    let want = DiffExpr::parse(j.expr.ctx(), "1/24*u[1,1]^-1*u[1,3] - 1/24*u[1,1]^-2*u[1,2]^2").unwrap();
    assert_eq!(j.expr, want);
    assert!(j.certificate.equations >= j.certificate.unknowns + 20);
    assert_eq!(j.certificate.residual_terms, 0);
}

fn criterion_5() {
    let t = gen_trivial(1, 12).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let fb = first_bracket_a(&t, &w).unwrap();
    assert_eq!(fb.a, PoissonOperator::constant(fb.a.ctx(), t.eta_inv(), 1));
    assert!(fb.polynomial);
    assert!(fb.a.entries().all(|(_, _, c)| c.is_polynomial()));
}

fn criterion_6() {
    let t = gen_trivial(1, 12).unwrap();
    let c = ConformalData::kdv();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let b = second_bracket_b(&t, &c, &w, 12).unwrap().b;
    let ctx = b.ctx();
    let mut want = PoissonOperator::zero(ctx);
    want.add_to(1, 1, 1, &DiffExpr::u(ctx, 1, 0));
    want.add_to(1, 1, 0, &DiffExpr::u(ctx, 1, 1).scale(&thetaform::qr(1, 2)));
    want.add_to(1, 1, 3, &DiffExpr::constant(ctx, thetaform::qr(1, 8)).shift_eps(1));
    assert_eq!(b, want);
    let a = first_bracket_a(&t, &w).unwrap().a;
    assert!(poisson_residual(&b).is_zero());
    assert!(compatibility_residual(&a, &b).is_zero());
    let h = hamiltonians(&t, 6, Ctx::new(1, 0), 12).unwrap().to_w(&w).unwrap();
    let res = check_dispersionless_recursion(&b, &a, &h, &c.tilde_r(), &c.m_matrix(&t), 4);
    assert_eq!(res.len(), 6);
    for (beta, d, r) in res {
        assert!(r.iter().all(|e| e.is_zero()), "β={beta} d={d}");
    }
}

fn genus_two_b() -> (PoissonOperator, thetaform::cohft::CorrelatorTable) {
    let t = gen_trivial(2, 16).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(2)).unwrap();
    (second_bracket_b(&t, &ConformalData::kdv(), &w, 16).unwrap().b, t)
}

fn criterion_7() {
    let t = gen_trivial(1, 12).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let b1 = second_bracket_b(&t, &ConformalData::kdv(), &w, 12).unwrap().b;
    assert!(b1.coeff(1, 1, 4).eps_part(1).is_zero());
    let (b2, _) = genus_two_b();
    for s in [6, 7] {
        assert!(b2.coeff(1, 1, s).eps_part(2).is_zero(), "B_(2,{s})");
    }
}

fn criterion_8() {
    let c = ConformalData::kdv();
    for g in 1..=2u8 {
        let st = SolverSettings::new(g);
        let t = gen_trivial(g, st.order as usize).unwrap();
        let sol = solve_recursion_for_b(&t, &c, st).unwrap();
        let w = quasi_miura_w(&t, QuasiSettings::new(g)).unwrap();
        let a = first_bracket_a(&t, &w).unwrap().a;
        let b = second_bracket_b(&t, &c, &w, st.order).unwrap().b;
        let bt = operator_in_v(&tilde_b(&b, &a, t.eta_inv()).unwrap(), &w).unwrap();
        let mism = route_mismatches(&sol.operator, &bt, g);
        assert!(mism.is_empty(), "genus {g}: {mism:?}");
    }
    let t = gen_trivial(1, 12).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let h = hamiltonians(&t, 6, Ctx::new(1, 0), 12).unwrap().to_w(&w).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..50 {
        let x = random_skew_perturbation(w.transform.ctx(), 1, &mut rng);
        assert!(uniqueness_probe(&x, &h, 4).detected(), "perturbation {i} undetected");
    }
}

fn criterion_9() {
    let (b2, t) = genus_two_b();
    let d = determinant_d(&t, b2.ctx(), 16).unwrap();
    let dec = structural_decompose(&b2, &d, 16).unwrap();
    assert!(!dec.entries.is_empty());
    assert!(dec.all_certified());
    assert!(check_constant_term(&dec));
    for e in &dec.entries {
        let mut back = e.numerator.clone();
        for _ in 0..e.n {
            back = &back * &DiffExpr::u_pow(back.ctx(), 1, 1, -1).unwrap();
        }
        assert_eq!(back, b2.coeff(e.alpha, e.beta, e.s).eps_part(e.g).recast(back.ctx()));
    }
}

fn criterion_10() {
    let t = gen_trivial(2, 10).unwrap();
    let c = ConformalData::kdv();
    let mut tp = TwoPoint::new(&t, Some(&c), Space::new(1, 9), 10);
    let mut checked = 0;
    for g in 0..=2u8 {
        for s in 0..=2u8 {
            for p in 0..=(2 * g as i32 + s as i32 + 2) {
                for id in LemmaId::ALL {
                    let r = check_lemma(&mut tp, id, g, s, p).unwrap();
                    if r.within_hypothesis {
                        checked += 1;
                        assert!(r.is_zero(), "{id} g={g} s={s} p={p}");
                    }
                }
            }
        }
    }
    assert!(checked > 0);
    let t0 = gen_trivial(0, 10).unwrap();
    let mut tp = TwoPoint::new(&t0, Some(&c), Space::new(1, 5), 10);
    for s in 0..=4 {
        assert!(check_eqn0(&mut tp, s).unwrap().iter().all(|r| r.2.is_zero()), "s={s}");
    }
}

fn criterion_11() {
    let t = gen_trivial(0, 12).unwrap();
    let ctx = Ctx::new(1, 0);
    let c = ConformalData::kdv();
    let k = k_dispersionless(&t, &c, ctx, 12).unwrap();
    let h = hamiltonians(&t, 5, ctx, 12).unwrap();
    let res = check_dispersionless_recursion(&k, &first_bracket_p(&t, ctx), &h, &c.tilde_r(), &c.m_matrix(&t), 3);
    assert_eq!(res.len(), 5);
    assert!(res.iter().all(|r| r.2.iter().all(|e| e.is_zero())));
    let (t, c) = read_table(include_str!("fixtures/a2.table")).unwrap();
    let c = c.unwrap();
    let ctx = Ctx::new(2, 0);
    let k = k_dispersionless(&t, &c, ctx, 10).unwrap();
    let h = hamiltonians(&t, 3, ctx, 10).unwrap();
    let res = check_dispersionless_recursion(&k, &first_bracket_p(&t, ctx), &h, &c.tilde_r(), &c.m_matrix(&t), 1);
    assert_eq!(res.len(), 6);
    assert!(res.iter().all(|r| r.2.iter().all(|e| e.is_zero())));
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn(), u64); 11] = [
        ("algebra laws", criterion_1, 10),
        ("Schouten bracket under Miura maps", criterion_2, 60),
        ("CohFT consistency", criterion_3, 120),
        ("jetification anchor", criterion_4, 60),
        ("first bracket", criterion_5, 120),
        ("second bracket anchor", criterion_6, 300),
        ("vanishing", criterion_7, 3600),
        ("uniqueness", criterion_8, 600),
        ("C/D^n structure", criterion_9, 300),
        ("tautological lemmata", criterion_10, 300),
        ("dispersionless recursion", criterion_11, 120),
    ];
    let mut failed = Vec::new();
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f));
        let dt = t0.elapsed();
        let ok = outcome.is_ok() && dt <= Duration::from_secs(*budget);
        let why = match (&outcome, ok) {
            (Err(_), _) => " (assertion failed)".to_string(),
            (Ok(_), false) => format!(" (over the {budget} s budget)"),
            _ => String::new(),
        };
        writeln!(
            std::io::stderr(),
            "criterion {:>2} {:<36} {} {:>8.2}s{why}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64()
        )
        .unwrap();
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
