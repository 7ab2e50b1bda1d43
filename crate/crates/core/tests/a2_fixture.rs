use thetaform::algebra::Ctx;
use thetaform::bihamiltonian::{check_dispersionless_recursion, first_bracket_p, k_dispersionless};
use thetaform::cohft::{check_axiom_residuals, check_homogeneity, read_table, Window};
use thetaform::functionals::{compatibility_residual, poisson_residual};
use thetaform::hierarchy::hamiltonians;
use thetaform::DiffExpr;

const A2: &str = include_str!("fixtures/a2.table");

#[test]
fn a2_table_is_consistent() {
    let (t, c) = read_table(A2).unwrap();
    let c = c.unwrap();
    let w = Window { order: 8, dmax: 3 };
    let r = check_axiom_residuals(&t, w).unwrap();
    assert!(r.is_clean(), "{:?}", r.violations);
    let r = check_homogeneity(&t, &c, w).unwrap();
    assert!(r.is_clean(), "{:?}", r.violations);
}

#[test]
fn a2_dispersionless_bihamiltonian() {
    let (t, c) = read_table(A2).unwrap();
    let c = c.unwrap();
    let ctx = Ctx::new(2, 0);
    let k = k_dispersionless(&t, &c, ctx, 10).unwrap();
    // Hand-computed from F; the linear axiom checks cannot see a dropped correlator.
    let e = |s: &str| DiffExpr::parse(ctx, s).unwrap();
    assert_eq!(k.coeff(1, 1, 1), e("2/9*u[2,0]^2"), "K = {k}");
    assert_eq!(k.coeff(1, 1, 0), e("2/9*u[2,0]*u[2,1]"));
    assert!(k.is_skew());
    assert!(poisson_residual(&k).is_zero());
    let p = first_bracket_p(&t, ctx);
    assert!(compatibility_residual(&p, &k).is_zero());
    let h = hamiltonians(&t, 3, ctx, 10).unwrap();
    let res = check_dispersionless_recursion(&k, &p, &h, &c.tilde_r(), &c.m_matrix(&t), 1);
    assert_eq!(res.len(), 6);
    for (b, d, x) in res {
        assert!(x.iter().all(|e| e.is_zero()), "β={b} d={d}: {x:?}");
    }
}
