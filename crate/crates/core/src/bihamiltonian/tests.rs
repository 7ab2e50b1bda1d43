use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cohft::gen_trivial;
use crate::functionals::{compatibility_residual, poisson_residual};
use crate::hierarchy::{first_bracket_a, hamiltonians};
use crate::jetform::{quasi_miura_w, QuasiSettings, Space};
use crate::tautorel::TwoPoint;

fn kdv() -> ConformalData {
    ConformalData::kdv()
}

#[test]
fn kdv_dispersionless_k() {
    let t = gen_trivial(0, 10).unwrap();
    let k = k_dispersionless(&t, &kdv(), Ctx::new(1, 0), 10).unwrap();
    assert_eq!(k.to_string(), "u[1,0]*Dx + 1/2*u[1,1]");
    assert!(k.is_skew());
    assert!(poisson_residual(&k).is_zero());
    let p = first_bracket_p(&t, Ctx::new(1, 0));
    assert!(compatibility_residual(&p, &k).is_zero());
}

#[test]
fn dispersionless_recursion_and_corruption() {
    let t = gen_trivial(0, 12).unwrap();
    let ctx = Ctx::new(1, 0);
    let c = kdv();
    let k = k_dispersionless(&t, &c, ctx, 12).unwrap();
    let p = first_bracket_p(&t, ctx);
    let h = hamiltonians(&t, 5, ctx, 12).unwrap();
    let (r, m) = (c.tilde_r(), c.m_matrix(&t));
    let res = check_dispersionless_recursion(&k, &p, &h, &r, &m, 3);
    assert_eq!(res.len(), 5);
    for (b, d, x) in &res {
        assert!(x.iter().all(|e| e.is_zero()), "β={b} d={d}");
    }
    let mut bad = r.clone();
    bad[0][0] += crate::algebra::q(1);
    let res = check_dispersionless_recursion(&k, &p, &h, &bad, &m, 3);
    let (_, d, _) = res.iter().find(|(_, _, x)| x.iter().any(|e| !e.is_zero())).unwrap();
    assert_eq!(*d, -1);
}

#[test]
fn kdv_second_bracket_genus_one() {
    let t = gen_trivial(1, 12).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let sb = second_bracket_b(&t, &kdv(), &w, 12).unwrap();
    let b = &sb.b;
    assert!(b.coeff(1, 1, 4).is_zero());
    assert_eq!(b.coeff(1, 1, 3).eps_part(1).to_string(), "1/8");
    assert_eq!(b.eps_part(0).to_string(), "u[1,0]*Dx + 1/2*u[1,1]");
    assert_eq!(b.max_order(), Some(3));
    assert!(poisson_residual(b).is_zero());
    let a = first_bracket_a(&t, &w).unwrap().a;
    assert!(compatibility_residual(&a, b).is_zero());
    // A = ∂ₓ and η = 1 for KdV, so B̃ = B.
    assert_eq!(tilde_b(b, &a, t.eta_inv()).unwrap(), *b);
}

#[test]
fn full_recursion_in_w() {
    let t = gen_trivial(1, 12).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let c = kdv();
    let b = second_bracket_b(&t, &c, &w, 12).unwrap().b;
    let a = first_bracket_a(&t, &w).unwrap().a;
    let h = hamiltonians(&t, 6, Ctx::new(1, 0), 12).unwrap().to_w(&w).unwrap();
    for (beta, d, x) in check_dispersionless_recursion(&b, &a, &h, &c.tilde_r(), &c.m_matrix(&t), 4) {
        assert!(x.iter().all(|e| e.is_zero()), "β={beta} d={d}");
    }
}

#[test]
fn solver_genus_zero_is_k() {
    let t = gen_trivial(0, 10).unwrap();
    let sol = solve_recursion_for_b(&t, &kdv(), SolverSettings::new(0)).unwrap();
    assert_eq!(sol.operator.to_string(), "u[1,0]*Dx + 1/2*u[1,1]");
}

#[test]
fn solver_matches_conjugation_genus_one() {
    let st = SolverSettings::new(1);
    let t = gen_trivial(1, st.order as usize).unwrap();
    let c = kdv();
    let sol = solve_recursion_for_b(&t, &c, st).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let b = second_bracket_b(&t, &c, &w, st.order).unwrap().b;
    let a = first_bracket_a(&t, &w).unwrap().a;
    let bt = operator_in_v(&tilde_b(&b, &a, t.eta_inv()).unwrap(), &w).unwrap();
    let mism = route_mismatches(&sol.operator, &bt, 1);
    assert!(mism.is_empty(), "{mism:?}");
    assert_eq!(sol.operator.coeff(1, 1, 3).eps_part(1).to_string(), "1/8");
    assert!(sol.operator.coeff(1, 1, 4).is_zero());
    let mut tp = TwoPoint::new(&t, Some(&c), Space::new(1, 4), st.order);
    for p in 0..=2 {
        for (g, ac, r) in series_recursion_residual(&mut tp, &sol.operator, &c, p).unwrap() {
            assert!(r.is_zero(), "g={g} {ac:?} p={p}");
        }
    }
}

#[test]
fn kdv_structure() {
    let t = gen_trivial(1, 12).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let b = second_bracket_b(&t, &kdv(), &w, 12).unwrap().b;
    let d = determinant_d(&t, b.ctx(), 12).unwrap();
    assert_eq!(d.to_string(), "u[1,1]");
    let dec = structural_decompose(&b, &d, 6).unwrap();
    assert!(dec.all_certified());
    assert!(check_constant_term(&dec));
}

#[test]
fn probe_detects_perturbations() {
    let t = gen_trivial(1, 12).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let ctx = w.transform.ctx();
    let h = hamiltonians(&t, 6, Ctx::new(1, 0), 12).unwrap().to_w(&w).unwrap();
    let mut x = PoissonOperator::zero(ctx);
    x.add_to(1, 1, 3, &DiffExpr::constant(ctx, crate::algebra::q(1)).shift_eps(1));
    let out = uniqueness_probe(&x, &h, 4);
    assert!(out.detected_at.contains(&(1, 2)));
    assert_eq!(out.detected_at.first(), Some(&(1, 0)));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let x = random_skew_perturbation(ctx, 1, &mut rng);
        assert!(x.is_skew());
        assert!(uniqueness_probe(&x, &h, 4).detected());
    }
}

#[test]
fn decomposition_finds_minimal_power() {
    let ctx = Ctx::new(1, 1).with_laurent_min(-4);
    let d = DiffExpr::u(ctx, 1, 1);
    let mut op = PoissonOperator::zero(ctx);
    op.add_to(1, 1, 1, &DiffExpr::parse(ctx, "eps^2*u[1,1]^-2*u[1,2]^2").unwrap());
    op.add_to(1, 1, 0, &DiffExpr::parse(ctx, "eps^2*u[1,3]").unwrap());
    let dec = structural_decompose(&op, &d, 4).unwrap();
    let e = dec.entries.iter().find(|e| e.s == 1).unwrap();
    assert_eq!((e.g, e.n, e.numerator.to_string()), (1, 2, "u[1,2]^2".to_string()));
    assert!(e.degree_ok);
    assert!(check_constant_term(&dec));
    assert_eq!(dec.max_n(), 2);
    assert!(matches!(structural_decompose(&op, &d, 1), Err(BihamError::NotCOverD { nmax: 1, .. })));
    // a coefficient of the wrong standard degree is flagged
    op.add_to(1, 1, 0, &DiffExpr::parse(ctx, "eps^2*u[1,1]^-1*u[1,2]").unwrap());
    let dec = structural_decompose(&op, &d, 4).unwrap();
    assert!(!dec.all_certified());
    assert!(!check_constant_term(&dec));
}
