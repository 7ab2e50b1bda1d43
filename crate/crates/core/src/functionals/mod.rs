//! Local functionals, the Schouten bracket, and matrix differential operators.

mod normal;
mod operator;

use std::fmt;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

use crate::algebra::{Ctx, DiffExpr, Grade, GradeSignature, Parity, Q};

pub use normal::normal_form;
pub use operator::PoissonOperator;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctionalError {
    #[error("functional is not homogeneous in super degree")]
    InhomogeneousSuperDegree,
    #[error("bivector expected (super degree 2), found {0}")]
    NotBivector(usize),
    #[error("operator is not skew-adjoint")]
    NotSkew,
}

/// Class of a DiffExpr modulo ∂ₓ-exact terms and constants, held in normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFunctional {
    rep: DiffExpr,
}

impl LocalFunctional {
    pub fn integrate(f: &DiffExpr) -> LocalFunctional {
        LocalFunctional { rep: normal_form(f) }
    }

    pub fn zero(ctx: Ctx) -> LocalFunctional {
        LocalFunctional { rep: DiffExpr::zero(ctx) }
    }

    pub fn rep(&self) -> &DiffExpr {
        &self.rep
    }

    pub fn ctx(&self) -> Ctx {
        self.rep.ctx()
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn grade(&self) -> Grade {
        self.rep.grade()
    }

    pub fn signature(&self) -> Option<GradeSignature> {
        match self.rep.grade() {
            Grade::Homogeneous(s) => Some(s),
            _ => None,
        }
    }

    pub fn super_degree(&self) -> Option<usize> {
        if self.rep.is_zero() {
            return Some(0);
        }
        self.rep.super_degree()
    }

    pub fn scale(&self, c: &Q) -> LocalFunctional {
        LocalFunctional { rep: self.rep.scale(c) }
    }

    pub fn delta_u(&self, alpha: u8) -> DiffExpr {
        self.rep.var_deriv(Parity::Even, alpha)
    }

    pub fn delta_theta(&self, alpha: u8) -> DiffExpr {
        self.rep.var_deriv(Parity::Odd, alpha)
    }
}

impl Add<&LocalFunctional> for &LocalFunctional {
    type Output = LocalFunctional;
    fn add(self, o: &LocalFunctional) -> LocalFunctional {
        LocalFunctional::integrate(&(&self.rep + &o.rep))
    }
}
impl Sub<&LocalFunctional> for &LocalFunctional {
    type Output = LocalFunctional;
    fn sub(self, o: &LocalFunctional) -> LocalFunctional {
        LocalFunctional::integrate(&(&self.rep - &o.rep))
    }
}
impl Neg for &LocalFunctional {
    type Output = LocalFunctional;
    fn neg(self) -> LocalFunctional {
        LocalFunctional { rep: -&self.rep }
    }
}

impl fmt::Display for LocalFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "int({})", self.rep)
    }
}

/// `[P,Q] = ∫ δP/δθ_α δQ/δu^α + (−1)^p δP/δu^α δQ/δθ_α`.
pub fn schouten(p: &LocalFunctional, q: &LocalFunctional) -> Result<LocalFunctional, FunctionalError> {
    let pd = p.super_degree().ok_or(FunctionalError::InhomogeneousSuperDegree)?;
    q.super_degree().ok_or(FunctionalError::InhomogeneousSuperDegree)?;
    let ctx = p.ctx();
    let mut acc = DiffExpr::zero(ctx);
    for a in 1..=ctx.n {
        acc += &(&p.delta_theta(a) * &q.delta_u(a));
        let t = &p.delta_u(a) * &q.delta_theta(a);
        if pd % 2 == 0 {
            acc += &t;
        } else {
            acc -= &t;
        }
    }
    Ok(LocalFunctional::integrate(&acc))
}

/// `{F,G}_P = [[P,F],G]`.
pub fn poisson_bracket(p: &LocalFunctional, f: &LocalFunctional, g: &LocalFunctional) -> Result<LocalFunctional, FunctionalError> {
    schouten(&schouten(p, f)?, g)
}

/// `½∫ Σ P^{αβ}_s θ_α θ_β^s`.
pub fn operator_to_bivector(op: &PoissonOperator) -> LocalFunctional {
    let ctx = op.ctx();
    let half = Q::new(1.into(), 2.into());
    let mut acc = DiffExpr::zero(ctx);
    for ((a, b), s, c) in op.entries() {
        let th = &DiffExpr::th(ctx, a, 0) * &DiffExpr::th(ctx, b, s as u8);
        acc += &(c * &th);
    }
    LocalFunctional::integrate(&acc.scale(&half))
}

/// Reads `P^{αβ}_s` off the coefficient of `θ_β^s` in `δB/δθ_α`.
pub fn bivector_to_operator(b: &LocalFunctional) -> Result<PoissonOperator, FunctionalError> {
    let ctx = b.ctx();
    let mut op = PoissonOperator::zero(ctx);
    if b.is_zero() {
        return Ok(op);
    }
    match b.super_degree() {
        Some(2) => {}
        Some(d) => return Err(FunctionalError::NotBivector(d)),
        None => return Err(FunctionalError::InhomogeneousSuperDegree),
    }
    for a in 1..=ctx.n {
        let d = b.delta_theta(a);
        for (g, m, c) in d.terms() {
            let [j] = m.odd() else { unreachable!("variational derivative of a bivector is linear in θ") };
            let (_, _, rest) = m.partial(crate::algebra::VarId::th(j.alpha, j.s)).unwrap();
            op.add_to(a, j.alpha, j.s as usize, &DiffExpr::monomial(ctx, g, rest, c.clone()));
        }
    }
    if !op.is_skew() {
        return Err(FunctionalError::NotSkew);
    }
    Ok(op)
}

pub fn poisson_residual(p: &PoissonOperator) -> LocalFunctional {
    let b = operator_to_bivector(p);
    schouten(&b, &b).expect("bivectors are homogeneous")
}

pub fn compatibility_residual(p: &PoissonOperator, k: &PoissonOperator) -> LocalFunctional {
    schouten(&operator_to_bivector(p), &operator_to_bivector(k)).expect("bivectors are homogeneous")
}

/// Hamiltonian vector field component `P^{αβ} δH/δu^β`.
pub fn hamiltonian_flow(p: &PoissonOperator, h: &DiffExpr) -> Vec<DiffExpr> {
    let grads: Vec<DiffExpr> = (1..=p.ctx().n).map(|b| h.var_deriv(Parity::Even, b)).collect();
    p.apply(&grads)
}
