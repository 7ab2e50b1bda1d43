//! Graded differential algebra of even jets `u[α,s]` and odd jets `th[α,s]`
//! with exact rational coefficients and an even ε-expansion.

mod monomial;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use monomial::{Jet, Monomial, Parity, VarId};

/// Exact rational coefficient.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `p` or `p/q`.
pub fn fmt_q(c: &Q) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                None
            } else {
                Some(Q::new(a, b))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u8, u8),
    #[error("variable index alpha={0} outside 1..={1}")]
    BadIndex(u8, u8),
    #[error("negative exponent on {0}; only u[1,1] may be inverted")]
    NegativeExponent(VarId),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Truncation bounds shared by all expressions of one computation.
///
/// `genus` bounds the ε-expansion (terms of ε-order above `2*genus` are dropped),
/// `mv` bounds the total degree in the undifferentiated `u[α,0]`, and
/// `laurent_min` is the lowest admissible exponent of `u[1,1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ctx {
    pub n: u8,
    pub genus: u8,
    pub mv: u32,
    pub laurent_min: i32,
}

impl Ctx {
    pub fn new(n: u8, genus: u8) -> Ctx {
        Ctx { n, genus, mv: 64, laurent_min: -64 }
    }

    pub fn with_mv(mut self, mv: u32) -> Ctx {
        self.mv = mv;
        self
    }

    pub fn with_laurent_min(mut self, l: i32) -> Ctx {
        self.laurent_min = l;
        self
    }

    pub fn with_genus(mut self, g: u8) -> Ctx {
        self.genus = g;
        self
    }

    fn meet(self, o: Ctx) -> Ctx {
        assert_eq!(self.n, o.n, "dimension mismatch");
        Ctx { n: self.n, genus: self.genus.min(o.genus), mv: self.mv.min(o.mv), laurent_min: self.laurent_min.max(o.laurent_min) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GradeSignature {
    pub std: i64,
    pub sup: usize,
    pub eps: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grade {
    Zero,
    Homogeneous(GradeSignature),
    Inhomogeneous,
}

/// Element of the algebra: a finite sum of `c * eps^(2g) * monomial`.
#[derive(Clone, Debug)]
pub struct DiffExpr {
    ctx: Ctx,
    terms: BTreeMap<(u8, Monomial), Q>,
    truncated: bool,
}

impl PartialEq for DiffExpr {
    fn eq(&self, o: &Self) -> bool {
        self.ctx.n == o.ctx.n && self.terms == o.terms
    }
}
impl Eq for DiffExpr {}

impl DiffExpr {
    pub fn zero(ctx: Ctx) -> DiffExpr {
        DiffExpr { ctx, terms: BTreeMap::new(), truncated: false }
    }

    pub fn constant(ctx: Ctx, c: Q) -> DiffExpr {
        let mut e = DiffExpr::zero(ctx);
        e.add_term(0, Monomial::one(), c);
        e
    }

    pub fn one(ctx: Ctx) -> DiffExpr {
        DiffExpr::constant(ctx, Q::one())
    }

    pub fn monomial(ctx: Ctx, g: u8, m: Monomial, c: Q) -> DiffExpr {
        let mut e = DiffExpr::zero(ctx);
        e.add_term(g, m, c);
        e
    }

    pub fn var(ctx: Ctx, v: VarId) -> DiffExpr {
        assert!(v.jet.alpha >= 1 && v.jet.alpha <= ctx.n, "alpha out of range");
        DiffExpr::monomial(ctx, 0, Monomial::var(v), Q::one())
    }

    pub fn u(ctx: Ctx, alpha: u8, s: u8) -> DiffExpr {
        DiffExpr::var(ctx, VarId::u(alpha, s))
    }

    pub fn th(ctx: Ctx, alpha: u8, s: u8) -> DiffExpr {
        DiffExpr::var(ctx, VarId::th(alpha, s))
    }

    /// `u[α,s]^e`; negative `e` only for `u[1,1]`.
    pub fn u_pow(ctx: Ctx, alpha: u8, s: u8, e: i32) -> Result<DiffExpr, AlgebraError> {
        let m = Monomial::new(vec![(Jet::new(alpha, s), e)], vec![])?.1;
        Ok(DiffExpr::monomial(ctx, 0, m, Q::one()))
    }

    pub fn parse(ctx: Ctx, s: &str) -> Result<DiffExpr, AlgebraError> {
        parse::parse_expr(ctx, s)
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    /// Set when some product dropped terms because of the `mv` bound.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u8, &Monomial, &Q)> {
        self.terms.iter().map(|((g, m), c)| (*g, m, c))
    }

    pub fn coeff(&self, g: u8, m: &Monomial) -> Q {
        self.terms.get(&(g, m.clone())).cloned().unwrap_or_else(Q::zero)
    }

    /// Re-targets the expression to another context, dropping what no longer fits.
    pub fn recast(&self, ctx: Ctx) -> DiffExpr {
        assert_eq!(ctx.n, self.ctx.n);
        let mut e = DiffExpr::zero(ctx);
        e.truncated = self.truncated;
        for ((g, m), c) in &self.terms {
            e.add_term(*g, m.clone(), c.clone());
        }
        e
    }

    pub fn add_term(&mut self, g: u8, m: Monomial, c: Q) {
        if c.is_zero() || g > self.ctx.genus {
            return;
        }
        if m.u0_degree() > self.ctx.mv as i64 {
            self.truncated = true;
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((g, m)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> DiffExpr {
        if c.is_zero() {
            return DiffExpr::zero(self.ctx);
        }
        DiffExpr { ctx: self.ctx, terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(), truncated: self.truncated }
    }

    /// Multiplies by `eps^(2g)`.
    pub fn shift_eps(&self, g: u8) -> DiffExpr {
        let mut e = DiffExpr::zero(self.ctx);
        e.truncated = self.truncated;
        for ((h, m), c) in &self.terms {
            e.add_term(h + g, m.clone(), c.clone());
        }
        e
    }

    /// Coefficient of `eps^(2g)`, returned at ε-order zero.
    pub fn eps_part(&self, g: u8) -> DiffExpr {
        let mut e = DiffExpr::zero(self.ctx);
        for ((h, m), c) in &self.terms {
            if *h == g {
                e.add_term(0, m.clone(), c.clone());
            }
        }
        e
    }

    pub fn max_eps(&self) -> Option<u8> {
        self.terms.keys().map(|(g, _)| *g).max()
    }

    pub fn filter<F: Fn(u8, &Monomial) -> bool>(&self, f: F) -> DiffExpr {
        let mut e = DiffExpr::zero(self.ctx);
        for ((g, m), c) in &self.terms {
            if f(*g, m) {
                e.add_term(*g, m.clone(), c.clone());
            }
        }
        e
    }

    pub fn checked_mul(&self, o: &DiffExpr) -> Result<DiffExpr, AlgebraError> {
        if self.ctx.n != o.ctx.n {
            return Err(AlgebraError::DimensionMismatch(self.ctx.n, o.ctx.n));
        }
        let ctx = self.ctx.meet(o.ctx);
        let mut acc: std::collections::HashMap<(u8, Monomial), Q> = Default::default();
        let mut truncated = self.truncated || o.truncated;
        for ((ga, ma), ca) in &self.terms {
            for ((gb, mb), cb) in &o.terms {
                let g = ga + gb;
                if g > ctx.genus {
                    continue;
                }
                if let Some((neg, m)) = ma.mul(mb) {
                    if m.u0_degree() > ctx.mv as i64 {
                        truncated = true;
                        continue;
                    }
                    let c = ca * cb;
                    let c = if neg { -c } else { c };
                    *acc.entry((g, m)).or_insert_with(Q::zero) += c;
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(DiffExpr { ctx, terms, truncated })
    }

    pub fn pow(&self, k: u32) -> DiffExpr {
        let mut r = DiffExpr::one(self.ctx);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// Total x-derivative.
    pub fn dx(&self) -> DiffExpr {
        let mut e = DiffExpr::zero(self.ctx);
        e.truncated = self.truncated;
        for ((g, m), c) in &self.terms {
            for (neg, k, dm) in m.dx_terms() {
                let mut cc = c * Q::from_integer(BigInt::from(k));
                if neg {
                    cc = -cc;
                }
                e.add_term(*g, dm, cc);
            }
        }
        e
    }

    pub fn dx_n(&self, n: usize) -> DiffExpr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.dx();
        }
        e
    }

    /// Left partial derivative.
    pub fn partial(&self, v: VarId) -> DiffExpr {
        let mut e = DiffExpr::zero(self.ctx);
        e.truncated = self.truncated;
        for ((g, m), c) in &self.terms {
            if let Some((neg, k, dm)) = m.partial(v) {
                let mut cc = c * Q::from_integer(BigInt::from(k));
                if neg {
                    cc = -cc;
                }
                e.add_term(*g, dm, cc);
            }
        }
        e
    }

    /// Highest jet order of the given family present in the expression.
    pub fn max_jet_of(&self, parity: Parity, alpha: u8) -> Option<u8> {
        self.terms.keys().flat_map(|(_, m)| m.vars().filter(move |v| v.parity == parity && v.jet.alpha == alpha)).map(|v| v.jet.s).max()
    }

    pub fn max_jet(&self) -> u8 {
        self.terms.keys().flat_map(|(_, m)| m.vars()).map(|v| v.jet.s).max().unwrap_or(0)
    }

    /// Variational derivative `Σ_p (−∂ₓ)^p ∂f/∂var_p`.
    pub fn var_deriv(&self, parity: Parity, alpha: u8) -> DiffExpr {
        let mut total = DiffExpr::zero(self.ctx);
        let Some(top) = self.max_jet_of(parity, alpha) else {
            return total;
        };
        for p in (0..=top).rev() {
            // Horner form: total = ∂f/∂var_p − ∂ₓ(total)
            total = self.partial(VarId { parity, jet: Jet::new(alpha, p) }) - total.dx();
        }
        total
    }

    pub fn grade(&self) -> Grade {
        let mut sig: Option<GradeSignature> = None;
        for (g, m) in self.terms.keys() {
            let s = GradeSignature { std: m.std_degree(), sup: m.super_degree(), eps: 2 * *g as u32 };
            match sig {
                None => sig = Some(s),
                Some(t) if t != s => return Grade::Inhomogeneous,
                _ => {}
            }
        }
        match sig {
            None => Grade::Zero,
            Some(s) => Grade::Homogeneous(s),
        }
    }

    /// Super degree if every term agrees.
    pub fn super_degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|(_, m)| m.super_degree());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn min_laurent(&self) -> i32 {
        self.terms.keys().map(|(_, m)| m.laurent_exponent()).min().unwrap_or(0).min(0)
    }

    /// No negative exponents anywhere.
    pub fn is_polynomial(&self) -> bool {
        self.min_laurent() >= 0
    }

    /// Largest power `n` with `u[1,1]^n` dividing every term (may be negative).
    pub fn min_exponent(&self, j: Jet) -> Option<i32> {
        self.terms.keys().map(|(_, m)| m.exponent(j)).min()
    }

    /// Multiplies every term by `u[1,1]^k`.
    pub fn mul_u11_pow(&self, k: i32) -> DiffExpr {
        let mut e = DiffExpr::zero(self.ctx);
        e.truncated = self.truncated;
        for ((g, m), c) in &self.terms {
            e.add_term(*g, m.with_exponent_delta(Jet::new(1, 1), k), c.clone());
        }
        e
    }

    /// Applies `f` to each monomial (as a full expression) and sums.
    pub fn map_monomials<F: FnMut(u8, &Monomial) -> DiffExpr>(&self, mut f: F) -> DiffExpr {
        let mut e = DiffExpr::zero(self.ctx);
        for ((g, m), c) in &self.terms {
            e += &f(*g, m).shift_eps(*g).scale(c);
        }
        e
    }

    fn combine(&self, o: &DiffExpr, sign: bool) -> DiffExpr {
        if self.ctx.n != o.ctx.n {
            panic!("{}", AlgebraError::DimensionMismatch(self.ctx.n, o.ctx.n));
        }
        let mut e = self.recast(self.ctx.meet(o.ctx));
        e.truncated |= o.truncated;
        for ((g, m), c) in &o.terms {
            e.add_term(*g, m.clone(), if sign { -c.clone() } else { c.clone() });
        }
        e
    }
}

impl Add<&DiffExpr> for &DiffExpr {
    type Output = DiffExpr;
    fn add(self, o: &DiffExpr) -> DiffExpr {
        self.combine(o, false)
    }
}
impl Add for DiffExpr {
    type Output = DiffExpr;
    fn add(self, o: DiffExpr) -> DiffExpr {
        &self + &o
    }
}
impl Sub<&DiffExpr> for &DiffExpr {
    type Output = DiffExpr;
    fn sub(self, o: &DiffExpr) -> DiffExpr {
        self.combine(o, true)
    }
}
impl Sub for DiffExpr {
    type Output = DiffExpr;
    fn sub(self, o: DiffExpr) -> DiffExpr {
        &self - &o
    }
}
impl Neg for &DiffExpr {
    type Output = DiffExpr;
    fn neg(self) -> DiffExpr {
        self.scale(&-Q::one())
    }
}
impl Neg for DiffExpr {
    type Output = DiffExpr;
    fn neg(self) -> DiffExpr {
        -&self
    }
}
impl Mul<&DiffExpr> for &DiffExpr {
    type Output = DiffExpr;
    fn mul(self, o: &DiffExpr) -> DiffExpr {
        self.checked_mul(o).unwrap_or_else(|e| panic!("{e}"))
    }
}
impl Mul for DiffExpr {
    type Output = DiffExpr;
    fn mul(self, o: DiffExpr) -> DiffExpr {
        &self * &o
    }
}
impl AddAssign<&DiffExpr> for DiffExpr {
    fn add_assign(&mut self, o: &DiffExpr) {
        assert_eq!(self.ctx.n, o.ctx.n, "dimension mismatch");
        self.truncated |= o.truncated;
        for ((g, m), c) in &o.terms {
            self.add_term(*g, m.clone(), c.clone());
        }
    }
}
impl SubAssign<&DiffExpr> for DiffExpr {
    fn sub_assign(&mut self, o: &DiffExpr) {
        assert_eq!(self.ctx.n, o.ctx.n, "dimension mismatch");
        self.truncated |= o.truncated;
        for ((g, m), c) in &o.terms {
            self.add_term(*g, m.clone(), -c.clone());
        }
    }
}

impl fmt::Display for DiffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|((ga, ma), _), ((gb, mb), _)| (ga, ma.std_degree(), ma).cmp(&(gb, mb.std_degree(), mb)));
        for (i, ((g, m), c)) in keys.into_iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors = Vec::new();
            if !a.is_one() || (m.is_one() && *g == 0) {
                factors.push(fmt_q(&a));
            }
            if *g > 0 {
                factors.push(format!("eps^{}", 2 * *g as u32));
            }
            if !m.is_one() {
                factors.push(m.to_string());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
