use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use thetaform::bihamiltonian::{second_bracket_b, solve_recursion_for_b, SolverSettings};
use thetaform::cohft::{gen_trivial, ConformalData};
use thetaform::functionals::{schouten, LocalFunctional};
use thetaform::jetform::{jetify_omega, quasi_miura_w, JetBounds, QuasiSettings, Space};
use thetaform::tautorel::{check_lemma, LemmaId, TwoPoint};
use thetaform::{Ctx, DiffExpr};

fn algebra(c: &mut Criterion) {
    let ctx = Ctx::new(2, 1);
    let a = DiffExpr::parse(ctx, "u[1,0]^2*u[2,3] + 3*u[1,1]*u[2,2]*th[1,0] - eps^2*u[2,5]").unwrap();
    let b = DiffExpr::parse(ctx, "u[2,0]*u[1,2]^2 + u[1,4]*th[2,1] + 1/7*u[1,1]^3").unwrap();
    c.bench_function("diffexpr product and dx", |bn| bn.iter(|| black_box(&a * &b).dx()));
    let ctx = Ctx::new(1, 0);
    let p = LocalFunctional::integrate(&DiffExpr::parse(ctx, "u[1,0]^2*th[1,0]*th[1,1] + u[1,1]*th[1,0]*th[1,2]").unwrap());
    c.bench_function("schouten [P,P]", |bn| bn.iter(|| schouten(black_box(&p), &p).unwrap()));
}

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("pipeline");
    g.sample_size(10);
    g.bench_function("gen_trivial g=1 n=12", |bn| bn.iter(|| gen_trivial(1, black_box(12)).unwrap()));
    let t = gen_trivial(1, 14).unwrap();
    let mut jb = JetBounds::omega(1, 0);
    jb.min_surplus = 20;
    g.bench_function("jetify genus-one anchor", |bn| bn.iter(|| jetify_omega(&t, 1, (1, 0), (1, 0), 0, &jb, 12).unwrap()));
    g.bench_function("quasi-Miura g=1", |bn| bn.iter(|| quasi_miura_w(&t, QuasiSettings::new(1)).unwrap()));
    let w = quasi_miura_w(&t, QuasiSettings::new(1)).unwrap();
    let kdv = ConformalData::kdv();
    g.bench_function("second bracket g=1", |bn| bn.iter(|| second_bracket_b(&t, &kdv, &w, 12).unwrap()));
    g.bench_function("recursion solver g=1", |bn| bn.iter(|| solve_recursion_for_b(&t, &kdv, SolverSettings::new(1)).unwrap()));
    g.bench_function("lemmata g=1", |bn| {
        bn.iter(|| {
            let mut tp = TwoPoint::new(&t, Some(&kdv), Space::new(1, 7), 10);
            for id in LemmaId::ALL {
                for p in 0..=5 {
                    check_lemma(&mut tp, id, 1, 1, p).unwrap();
                }
            }
        })
    });
    g.finish();
}

criterion_group!(benches, algebra, pipeline);
criterion_main!(benches);
