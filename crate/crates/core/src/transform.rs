//! Miura and quasi-Miura transformations close to the identity.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::algebra::{Ctx, DiffExpr, Jet, Monomial, Parity, VarId, Q};
use crate::functionals::{bivector_to_operator, operator_to_bivector, FunctionalError, LocalFunctional, PoissonOperator};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("u[1,1] exponent {found} below the Laurent bound {bound}")]
    LaurentOverflow { found: i32, bound: i32 },
    #[error("transformation is not the identity at leading order")]
    NotNearIdentity,
    #[error(transparent)]
    Functional(#[from] FunctionalError),
}

impl TransformError {
    pub fn is_truncation(&self) -> bool {
        matches!(self, TransformError::LaurentOverflow { .. })
    }
}

/// Generalized binomial coefficient C(e, j) for integer `e`.
fn gbinom(e: i64, j: usize) -> Q {
    let mut r = Q::one();
    for i in 0..j {
        r = r * Q::from_integer(BigInt::from(e - i as i64)) / Q::from_integer(BigInt::from(i as i64 + 1));
    }
    r
}

/// Substitution engine: images of the even and odd families with cached jets
/// and powers.
struct Substituter<'a> {
    ctx: Ctx,
    even: Option<&'a [DiffExpr]>,
    odd: Option<&'a [DiffExpr]>,
    jets: HashMap<VarId, DiffExpr>,
    powers: HashMap<(Jet, i32), DiffExpr>,
}

impl<'a> Substituter<'a> {
    fn new(ctx: Ctx, even: Option<&'a [DiffExpr]>, odd: Option<&'a [DiffExpr]>) -> Self {
        Substituter { ctx, even, odd, jets: HashMap::new(), powers: HashMap::new() }
    }

    fn jet(&mut self, v: VarId) -> DiffExpr {
        if let Some(e) = self.jets.get(&v) {
            return e.clone();
        }
        let images = match v.parity {
            Parity::Even => self.even,
            Parity::Odd => self.odd,
        };
        let e = match images {
            None => DiffExpr::var(self.ctx, v),
            Some(im) if v.jet.s == 0 => im[v.jet.alpha as usize - 1].recast(self.ctx),
            Some(_) => self.jet(VarId { jet: Jet::new(v.jet.alpha, v.jet.s - 1), ..v }).dx(),
        };
        self.jets.insert(v, e.clone());
        e
    }

    fn power(&mut self, j: Jet, e: i32) -> DiffExpr {
        if let Some(p) = self.powers.get(&(j, e)) {
            return p.clone();
        }
        let base = self.jet(VarId { parity: Parity::Even, jet: j });
        let p = if self.even.is_none() {
            DiffExpr::u_pow(self.ctx, j.alpha, j.s, e).expect("valid exponent")
        } else if e > 0 && j != Jet::new(1, 1) {
            if e == 1 {
                base
            } else {
                let half = self.power(j, e / 2);
                let sq = &half * &half;
                if e % 2 == 1 {
                    &sq * &base
                } else {
                    sq
                }
            }
        } else {
            // (u₁ + δ)^e = Σ_j C(e,j) u₁^{e−j} δ^j with δ of ε-order ≥ 2
            let u1 = DiffExpr::u(self.ctx, 1, 1);
            let delta = &base - &u1;
            let mut acc = DiffExpr::zero(self.ctx);
            let mut dpow = DiffExpr::one(self.ctx);
            for k in 0..=self.ctx.genus as usize {
                if dpow.is_zero() {
                    break;
                }
                let lead = DiffExpr::u_pow(self.ctx, 1, 1, e - k as i32).expect("u[1,1] may be inverted");
                acc += &(&lead * &dpow).scale(&gbinom(e as i64, k));
                dpow = &dpow * &delta;
            }
            acc
        };
        self.powers.insert((j, e), p.clone());
        p
    }

    fn monomial(&mut self, m: &Monomial) -> DiffExpr {
        let mut r = DiffExpr::one(self.ctx);
        for (j, e) in m.even() {
            r = &r * &self.power(*j, *e);
        }
        for j in m.odd() {
            r = &r * &self.jet(VarId { parity: Parity::Odd, jet: *j });
        }
        r
    }

    fn apply(&mut self, f: &DiffExpr) -> DiffExpr {
        let mut out = DiffExpr::zero(self.ctx);
        for (g, m, c) in f.terms() {
            if g > self.ctx.genus {
                continue;
            }
            out += &self.monomial(m).shift_eps(g).scale(c);
        }
        out
    }
}

fn check_laurent(e: DiffExpr) -> Result<DiffExpr, TransformError> {
    let found = e.min_laurent();
    let bound = e.ctx().laurent_min;
    if found < bound {
        return Err(TransformError::LaurentOverflow { found, bound });
    }
    Ok(e)
}

/// `ũ^α = u^α + Σ_{k≥1} ε^{2k} F^α_k(u)`, stored as the full images `ũ^α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiuraTransform {
    ctx: Ctx,
    images: Vec<DiffExpr>,
}

impl MiuraTransform {
    pub fn identity(ctx: Ctx) -> MiuraTransform {
        MiuraTransform { ctx, images: (1..=ctx.n).map(|a| DiffExpr::u(ctx, a, 0)).collect() }
    }

    /// Builds `ũ^α = u^α + corrections[α]`; corrections must be of ε-order ≥ 2.
    pub fn from_corrections(ctx: Ctx, corrections: &[DiffExpr]) -> Result<MiuraTransform, TransformError> {
        assert_eq!(corrections.len(), ctx.n as usize);
        if corrections.iter().any(|c| !c.eps_part(0).is_zero()) {
            return Err(TransformError::NotNearIdentity);
        }
        let images = corrections.iter().enumerate().map(|(i, c)| &DiffExpr::u(ctx, i as u8 + 1, 0) + &c.recast(ctx)).collect();
        Ok(MiuraTransform { ctx, images })
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    /// The same map over a context with a different Laurent window or `mv`.
    pub fn recast(&self, ctx: Ctx) -> MiuraTransform {
        MiuraTransform { ctx, images: self.images.iter().map(|e| e.recast(ctx)).collect() }
    }

    pub fn images(&self) -> &[DiffExpr] {
        &self.images
    }

    pub fn correction(&self, alpha: u8) -> DiffExpr {
        &self.images[alpha as usize - 1] - &DiffExpr::u(self.ctx, alpha, 0)
    }

    pub fn is_rational(&self) -> bool {
        self.images.iter().any(|e| !e.is_polynomial())
    }

    /// Replaces every `ũ[α,s]` in `f` by `∂ₓ^s ũ^α(u)`; odd variables pass through.
    pub fn substitute(&self, f: &DiffExpr) -> Result<DiffExpr, TransformError> {
        let ctx = self.ctx;
        let mut sub = Substituter::new(ctx, Some(&self.images), None);
        check_laurent(sub.apply(&f.recast(ctx)))
    }

    /// `self` followed by `next`: `û = next(ũ)`, `ũ = self(u)`.
    pub fn then(&self, next: &MiuraTransform) -> Result<MiuraTransform, TransformError> {
        let images = next.images.iter().map(|e| self.substitute(e)).collect::<Result<_, _>>()?;
        Ok(MiuraTransform { ctx: self.ctx, images })
    }

    /// Inverse transformation, built order by order in ε².
    pub fn invert(&self) -> Result<MiuraTransform, TransformError> {
        let ctx = self.ctx;
        let corr: Vec<DiffExpr> = (1..=ctx.n).map(|a| self.correction(a)).collect();
        let mut inv = MiuraTransform::identity(ctx);
        for _ in 0..ctx.genus {
            let images = (0..ctx.n as usize)
                .map(|i| Ok(&DiffExpr::u(ctx, i as u8 + 1, 0) - &inv.substitute(&corr[i])?))
                .collect::<Result<_, TransformError>>()?;
            inv = MiuraTransform { ctx, images };
        }
        Ok(inv)
    }

    /// Jacobian coefficients `∂ũ^γ/∂u^α_s` as the operator `L = Σ_s (∂ũ/∂u_s) ∂ₓ^s`.
    pub fn linearization(&self) -> PoissonOperator {
        let mut l = PoissonOperator::zero(self.ctx);
        for (gi, img) in self.images.iter().enumerate() {
            for a in 1..=self.ctx.n {
                if let Some(top) = img.max_jet_of(Parity::Even, a) {
                    for s in 0..=top {
                        l.add_to(gi as u8 + 1, a, s as usize, &img.partial(VarId::u(a, s)));
                    }
                }
            }
        }
        l
    }

    /// `θ_β = Σ_s (−∂ₓ)^s (∂ũ^α/∂u^β_s θ̃_α)`, with θ̃ written as `th`.
    pub fn push_theta(&self) -> Vec<DiffExpr> {
        let ctx = self.ctx;
        let th: Vec<DiffExpr> = (1..=ctx.n).map(|a| DiffExpr::th(ctx, a, 0)).collect();
        self.linearization().adjoint().apply(&th)
    }

    /// `P̃ = L ∘ P ∘ L*`, with coefficients re-expressed in ũ.
    pub fn conjugate_operator(&self, p: &PoissonOperator) -> Result<PoissonOperator, TransformError> {
        let l = self.linearization();
        let raw = l.compose(&p.recast(self.ctx)).compose(&l.adjoint());
        let inv = self.invert()?;
        let mut out = PoissonOperator::zero(self.ctx);
        for ((a, b), s, c) in raw.entries() {
            out.add_to(a, b, s, &inv.substitute(c)?);
        }
        Ok(out)
    }

    /// Same as [`conjugate_operator`](Self::conjugate_operator), through the
    /// bivector: substitute θ and u, integrate, and read the operator back.
    pub fn conjugate_bivector(&self, p: &PoissonOperator) -> Result<PoissonOperator, TransformError> {
        let ctx = self.ctx;
        let b = operator_to_bivector(&p.recast(ctx));
        let thetas = self.push_theta();
        let mut sub = Substituter::new(ctx, None, Some(&thetas));
        let in_theta_tilde = sub.apply(b.rep());
        let inv = self.invert()?;
        let mut sub = Substituter::new(ctx, Some(inv.images()), None);
        let back = check_laurent(sub.apply(&in_theta_tilde))?;
        Ok(bivector_to_operator(&LocalFunctional::integrate(&back))?)
    }

    /// Pushes a local functional `∫f(u)` to ũ-coordinates.
    pub fn push_functional(&self, f: &LocalFunctional) -> Result<LocalFunctional, TransformError> {
        let inv = self.invert()?;
        let ctx = self.ctx;
        let thetas = self.push_theta();
        let mut sub = Substituter::new(ctx, None, Some(&thetas));
        let t = sub.apply(&f.rep().recast(ctx));
        let mut sub = Substituter::new(ctx, Some(inv.images()), None);
        Ok(LocalFunctional::integrate(&check_laurent(sub.apply(&t))?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;
    use crate::functionals::{compatibility_residual, poisson_residual, schouten};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(ctx: Ctx, s: &str) -> DiffExpr {
        DiffExpr::parse(ctx, s).unwrap()
    }

    fn kdv_k(ctx: Ctx) -> PoissonOperator {
        let mut k = PoissonOperator::zero(ctx);
        k.add_to(1, 1, 1, &p(ctx, "u[1,0]"));
        k.add_to(1, 1, 0, &p(ctx, "1/2*u[1,1]"));
        k
    }

    /// Random polynomial transformation with corrections homogeneous of std 2k.
    pub(crate) fn random_miura(ctx: Ctx, rng: &mut ChaCha8Rng) -> MiuraTransform {
        let pool = ["u[1,2]", "u[1,1]^2", "u[1,0]*u[1,2]", "u[1,0]^2*u[1,2]", "u[1,0]*u[1,1]^2"];
        let pool4 = ["u[1,4]", "u[1,2]^2", "u[1,1]*u[1,3]", "u[1,0]*u[1,4]"];
        let mut c = DiffExpr::zero(ctx);
        for t in pool {
            let k: i64 = rng.gen_range(-2..=2);
            c += &p(ctx, &format!("{k}*eps^2*{t}"));
        }
        if ctx.genus >= 2 {
            for t in pool4 {
                let k: i64 = rng.gen_range(-1..=1);
                c += &p(ctx, &format!("{k}*eps^4*{t}"));
            }
        }
        MiuraTransform::from_corrections(ctx, &[c]).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let ctx = Ctx::new(1, 1);
        let t = MiuraTransform::identity(ctx);
        let f = p(ctx, "u[1,0]*u[1,2] + eps^2*u[1,3]");
        assert_eq!(t.substitute(&f).unwrap(), f);
        assert_eq!(t.push_theta(), vec![DiffExpr::th(ctx, 1, 0)]);
        assert_eq!(t.invert().unwrap(), t);
        assert_eq!(t.conjugate_operator(&kdv_k(ctx)).unwrap(), kdv_k(ctx));
    }

    #[test]
    fn one_prolongation() {
        let ctx = Ctx::new(1, 1);
        let t = MiuraTransform::from_corrections(ctx, &[p(ctx, "eps^2*u[1,2]")]).unwrap();
        assert_eq!(t.substitute(&p(ctx, "u[1,1]")).unwrap(), p(ctx, "u[1,1] + eps^2*u[1,3]"));
    }

    #[test]
    fn first_order_inverse() {
        let ctx = Ctx::new(1, 1);
        let t = MiuraTransform::from_corrections(ctx, &[p(ctx, "eps^2*u[1,0]*u[1,2] + eps^2*u[1,1]^2")]).unwrap();
        let inv = t.invert().unwrap();
        assert_eq!(inv.images()[0], p(ctx, "u[1,0] - eps^2*u[1,0]*u[1,2] - eps^2*u[1,1]^2"));
    }

    #[test]
    fn theta_pushforward() {
        let ctx = Ctx::new(1, 1);
        let t = MiuraTransform::from_corrections(ctx, &[p(ctx, "eps^2*u[1,1]^2")]).unwrap();
        // θ = θ̃ − 2ε² ∂ₓ(u₁ θ̃)
        let expect = &DiffExpr::th(ctx, 1, 0) - &p(ctx, "eps^2*u[1,1]*th[1,0]").dx().scale(&q(2));
        assert_eq!(t.push_theta(), vec![expect]);
    }

    #[test]
    fn conjugate_constant_dispersion() {
        let ctx = Ctx::new(1, 1);
        let t = MiuraTransform::from_corrections(ctx, &[p(ctx, "3/5*eps^2*u[1,2]")]).unwrap();
        let d = PoissonOperator::constant(ctx, &[vec![q(1)]], 1);
        assert_eq!(t.conjugate_operator(&d).unwrap().to_string(), "Dx + 6/5*eps^2*Dx^3");
    }

    #[test]
    fn laurent_substitution_and_overflow() {
        let ctx = Ctx::new(1, 1).with_laurent_min(-3);
        let t = MiuraTransform::from_corrections(ctx, &[p(ctx, "eps^2*u[1,1]^-1*u[1,2]")]).unwrap();
        assert!(t.is_rational());
        let f = DiffExpr::u_pow(ctx, 1, 1, -1).unwrap();
        let r = t.substitute(&f);
        assert!(matches!(r, Err(TransformError::LaurentOverflow { .. })));
        let ctx = ctx.with_laurent_min(-8);
        let t = MiuraTransform::from_corrections(ctx, &[p(ctx, "eps^2*u[1,1]^-1*u[1,2]")]).unwrap();
        let back = t.invert().unwrap().substitute(&t.substitute(&f.recast(ctx)).unwrap());
        assert_eq!(back.unwrap(), f.recast(ctx));
    }

    #[test]
    fn random_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ctx = Ctx::new(1, 2);
        for _ in 0..10 {
            let t = random_miura(ctx, &mut rng);
            let inv = t.invert().unwrap();
            let f = p(ctx, "u[1,0]^2*u[1,1] + 2*u[1,3] - eps^2*u[1,1]*u[1,2]");
            assert_eq!(inv.substitute(&t.substitute(&f).unwrap()).unwrap(), f);
            assert_eq!(t.substitute(&inv.substitute(&f).unwrap()).unwrap(), f);
        }
    }

    #[test]
    fn routes_agree_and_brackets_survive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ctx = Ctx::new(1, 1);
        let eta = PoissonOperator::constant(ctx, &[vec![q(1)]], 1);
        let k = kdv_k(ctx);
        for _ in 0..3 {
            let t = random_miura(ctx, &mut rng);
            let a = t.conjugate_operator(&eta).unwrap();
            let b = t.conjugate_operator(&k).unwrap();
            assert_eq!(a, t.conjugate_bivector(&eta).unwrap());
            assert_eq!(b, t.conjugate_bivector(&k).unwrap());
            assert!(a.is_skew() && b.is_skew());
            assert!(poisson_residual(&a).is_zero());
            assert!(poisson_residual(&b).is_zero());
            assert!(compatibility_residual(&a, &b).is_zero());
            assert!(a.has_deformation_degrees());
        }
    }

    #[test]
    fn conjugation_is_a_group_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ctx = Ctx::new(1, 1);
        let k = kdv_k(ctx);
        let t1 = random_miura(ctx, &mut rng);
        let t2 = random_miura(ctx, &mut rng);
        let two_step = t2.conjugate_operator(&t1.conjugate_operator(&k).unwrap()).unwrap();
        let one_step = t1.then(&t2).unwrap().conjugate_operator(&k).unwrap();
        assert_eq!(two_step, one_step);
    }

    #[test]
    fn schouten_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ctx = Ctx::new(1, 1);
        let t = random_miura(ctx, &mut rng);
        let pf = LocalFunctional::integrate(&p(ctx, "u[1,0]^2*th[1,0]*th[1,1] + u[1,1]*th[1,0]*th[1,2]"));
        let qf = LocalFunctional::integrate(&p(ctx, "u[1,0]*u[1,1]^2*th[1,0] + u[1,2]*th[1,1]"));
        let lhs = t.push_functional(&schouten(&pf, &qf).unwrap()).unwrap();
        let rhs = schouten(&t.push_functional(&pf).unwrap(), &t.push_functional(&qf).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
