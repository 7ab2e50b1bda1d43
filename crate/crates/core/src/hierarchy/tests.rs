use super::*;
use crate::algebra::q;
use crate::cohft::gen_trivial;
use crate::functionals::{poisson_bracket, poisson_residual};
use crate::jetform::{quasi_miura_w, QuasiSettings};

fn ctx0() -> Ctx {
    Ctx::new(1, 0)
}

fn parse(ctx: Ctx, s: &str) -> DiffExpr {
    DiffExpr::parse(ctx, s).unwrap()
}

#[test]
fn kdv_densities() {
    let t = gen_trivial(0, 10).unwrap();
    let h = hamiltonians(&t, 2, ctx0(), 10).unwrap();
    assert_eq!(h.density(1, -1).unwrap().to_string(), "u[1,0]");
    assert_eq!(h.density(1, 0).unwrap().to_string(), "1/2*u[1,0]^2");
    assert_eq!(h.density(1, 1).unwrap().to_string(), "1/6*u[1,0]^3");
    assert_eq!(h.density(1, 2).unwrap().to_string(), "1/24*u[1,0]^4");
}

#[test]
fn principal_flows() {
    let t = gen_trivial(0, 10).unwrap();
    let f = principal_flow(&t, 1, 0, ctx0(), 10).unwrap();
    assert_eq!(f[0], parse(ctx0(), "u[1,0]*u[1,1]"));
    let f = principal_flow(&t, 1, -1, ctx0(), 10).unwrap();
    assert_eq!(f[0], parse(ctx0(), "u[1,1]"));
    for q_ in -1..=2 {
        assert_eq!(principal_flow(&t, 1, q_, ctx0(), 10).unwrap(), principal_flow_taucover(&t, 1, q_, ctx0(), 10).unwrap());
    }
}

#[test]
fn hamiltonians_commute() {
    let t = gen_trivial(0, 10).unwrap();
    let ctx = ctx0();
    let h = hamiltonians(&t, 3, ctx, 10).unwrap();
    let p = crate::functionals::operator_to_bivector(&PoissonOperator::constant(ctx, t.eta_inv(), 1));
    for a in -1..=3 {
        for b in -1..=3 {
            let r = poisson_bracket(&p, &h.functional(1, a).unwrap(), &h.functional(1, b).unwrap()).unwrap();
            assert!(r.is_zero(), "{a} {b}");
        }
    }
}

#[test]
fn genus0_jetify_agrees_with_restriction() {
    let t = gen_trivial(0, 10).unwrap();
    let b = JetBounds { std_degree: 0, max_jet: 0, laurent_min: 0, mv: 4, min_surplus: 0 };
    let j = crate::jetform::jetify_omega(&t, 0, (1, 2), (1, 0), 0, &b, 10).unwrap();
    assert_eq!(j.expr.to_string(), "1/6*u[1,0]^3");
    assert_eq!(genus0_in_v(&t, (1, 2), (1, 0), ctx0(), 10).unwrap().to_string(), "1/6*u[1,0]^3");
}

#[test]
fn kdv_first_bracket() {
    let t = gen_trivial(1, 12).unwrap();
    let w0 = quasi_miura_w(&t, QuasiSettings::new(0)).unwrap();
    let a0 = first_bracket_a(&t, &w0).unwrap();
    assert_eq!(a0.a.to_string(), "Dx");
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let a = first_bracket_a(&t, &w).unwrap();
    assert_eq!(a.a.to_string(), "Dx");
    assert!(a.polynomial);
    assert!(poisson_residual(&a.a).is_zero());
}

#[test]
fn kdv_full_flows() {
    let t = gen_trivial(1, 12).unwrap();
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let a = first_bracket_a(&t, &w).unwrap().a;
    let ctx = a.ctx();
    let f0 = full_flow(&t, &w, &a, 1, 0, 12).unwrap();
    assert_eq!(f0[0].eps_part(0), parse(ctx, "u[1,0]*u[1,1]"));
    let f1 = full_flow(&t, &w, &a, 1, 1, 12).unwrap();
    assert_eq!(f1[0], parse(ctx, "1/2*u[1,0]^2*u[1,1] + 1/6*eps^2*u[1,1]*u[1,2] + 1/12*eps^2*u[1,0]*u[1,3]"));
    for q_ in -1..=1 {
        let fw = full_flow(&t, &w, &a, 1, q_, 12).unwrap();
        assert!(fw.iter().all(DiffExpr::is_polynomial));
        let in_v: Vec<DiffExpr> = fw.iter().map(|e| w.transform.substitute(e).unwrap()).collect();
        assert_eq!(in_v, full_flow_taucover(&t, &w, 1, q_, 12, 2).unwrap(), "q={q_}");
    }
}

#[test]
fn tilde_a_examples() {
    let ctx = Ctx::new(1, 2);
    let dx = PoissonOperator::constant(ctx, &[vec![q(1)]], 1);
    let at = tilde_a(&dx).unwrap();
    assert_eq!(at, PoissonOperator::identity(ctx));
    assert_eq!(tilde_a_inverse(&at).unwrap(), PoissonOperator::identity(ctx));
    let c = q(3);
    let a = dx.add(&PoissonOperator::constant(ctx, &[vec![c.clone()]], 3).map_coeffs(|x| x.shift_eps(1)));
    let at = tilde_a(&a).unwrap();
    let inv = tilde_a_inverse(&at).unwrap();
    let want = PoissonOperator::identity(ctx).sub(&PoissonOperator::constant(ctx, &[vec![c]], 2).map_coeffs(|x| x.shift_eps(1)));
    assert_eq!(inv.eps_part(1), want.eps_part(1));
    assert_eq!(at.compose(&inv), PoissonOperator::identity(ctx));
    assert_eq!(inv.compose(&at), PoissonOperator::identity(ctx));
}

#[test]
fn tilde_a_rejects_non_exact() {
    let ctx = Ctx::new(1, 1);
    let mut a = PoissonOperator::constant(ctx, &[vec![q(1)]], 1);
    a.add_to(1, 1, 0, &DiffExpr::u(ctx, 1, 0));
    assert!(matches!(tilde_a(&a), Err(HierarchyError::Factorization(1, 1))));
}

#[test]
fn trr0_in_w() {
    let t = gen_trivial(0, 10).unwrap();
    let h = hamiltonians(&t, 3, ctx0(), 10).unwrap();
    let c = structure_constants(&t, ctx0(), 10).unwrap();
    for d in 0..=3 {
        assert!(trr0_w_residual(&t, &h, &c, 1, d).unwrap().iter().all(DiffExpr::is_zero));
    }
}
