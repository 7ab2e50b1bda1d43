use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::algebra::{fmt_q, Ctx, DiffExpr, Q};

fn binom(n: usize, k: usize) -> Q {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Q::from_integer(r)
}

/// Matrix differential operator `Σ_s P^{αβ}_s ∂ₓ^s`; coefficients carry
/// their own ε-expansion.
#[derive(Clone, Debug)]
pub struct PoissonOperator {
    ctx: Ctx,
    coeffs: BTreeMap<(u8, u8), BTreeMap<usize, DiffExpr>>,
}

impl PartialEq for PoissonOperator {
    fn eq(&self, o: &Self) -> bool {
        self.ctx.n == o.ctx.n && self.coeffs == o.coeffs
    }
}
impl Eq for PoissonOperator {}

impl PoissonOperator {
    pub fn zero(ctx: Ctx) -> PoissonOperator {
        PoissonOperator { ctx, coeffs: BTreeMap::new() }
    }

    /// `m ∂ₓ^s` for a constant matrix `m` (row α, column β).
    pub fn constant(ctx: Ctx, m: &[Vec<Q>], s: usize) -> PoissonOperator {
        let mut op = PoissonOperator::zero(ctx);
        for (i, row) in m.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                op.add_to(i as u8 + 1, j as u8 + 1, s, &DiffExpr::constant(ctx, c.clone()));
            }
        }
        op
    }

    pub fn identity(ctx: Ctx) -> PoissonOperator {
        let m: Vec<Vec<Q>> =
            (0..ctx.n as usize).map(|i| (0..ctx.n as usize).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
        PoissonOperator::constant(ctx, &m, 0)
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_to(&mut self, a: u8, b: u8, s: usize, c: &DiffExpr) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry((a, b)).or_default();
        let slot = e.entry(s).or_insert_with(|| DiffExpr::zero(self.ctx));
        *slot += c;
        if slot.is_zero() {
            e.remove(&s);
            if e.is_empty() {
                self.coeffs.remove(&(a, b));
            }
        }
    }

    pub fn coeff(&self, a: u8, b: u8, s: usize) -> DiffExpr {
        self.coeffs.get(&(a, b)).and_then(|e| e.get(&s)).cloned().unwrap_or_else(|| DiffExpr::zero(self.ctx))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u8, u8), usize, &DiffExpr)> {
        self.coeffs.iter().flat_map(|(ab, e)| e.iter().map(move |(s, c)| (*ab, *s, c)))
    }

    pub fn max_order(&self) -> Option<usize> {
        self.entries().map(|(_, s, _)| s).max()
    }

    pub fn map_coeffs<F: FnMut(&DiffExpr) -> DiffExpr>(&self, mut f: F) -> PoissonOperator {
        let mut op = PoissonOperator::zero(self.ctx);
        for ((a, b), s, c) in self.entries() {
            let v = f(c);
            op.ctx = v.ctx();
            op.add_to(a, b, s, &v);
        }
        op
    }

    pub fn recast(&self, ctx: Ctx) -> PoissonOperator {
        let mut op = self.map_coeffs(|c| c.recast(ctx));
        op.ctx = ctx;
        op
    }

    /// ε^{2g} part, returned at ε-order zero.
    pub fn eps_part(&self, g: u8) -> PoissonOperator {
        self.map_coeffs(|c| c.eps_part(g))
    }

    pub fn scale(&self, c: &Q) -> PoissonOperator {
        self.map_coeffs(|x| x.scale(c))
    }

    pub fn mul_expr(&self, f: &DiffExpr) -> PoissonOperator {
        self.map_coeffs(|x| f * x)
    }

    pub fn add(&self, o: &PoissonOperator) -> PoissonOperator {
        let mut r = self.clone();
        for ((a, b), s, c) in o.entries() {
            r.add_to(a, b, s, c);
        }
        r
    }

    pub fn sub(&self, o: &PoissonOperator) -> PoissonOperator {
        self.add(&o.scale(&-Q::one()))
    }

    /// Operator product `self ∘ o`.
    pub fn compose(&self, o: &PoissonOperator) -> PoissonOperator {
        let n = self.ctx.n;
        let mut r = PoissonOperator::zero(self.ctx);
        for ((a, mu), m, p) in self.entries() {
            for nu in 1..=n {
                let Some(row) = o.coeffs.get(&(mu, nu)) else { continue };
                for (k_n, q) in row {
                    let mut dq = q.clone();
                    for k in 0..=m {
                        if k > 0 {
                            dq = dq.dx();
                        }
                        if dq.is_zero() {
                            break;
                        }
                        let c = (p * &dq).scale(&binom(m, k));
                        r.add_to(a, nu, m - k + k_n, &c);
                    }
                }
            }
        }
        r
    }

    /// Formal adjoint: `(P*)^{αβ} = Σ_s (−∂ₓ)^s ∘ P^{βα}_s`.
    pub fn adjoint(&self) -> PoissonOperator {
        let mut r = PoissonOperator::zero(self.ctx);
        for ((a, b), s, p) in self.entries() {
            let mut d = p.clone();
            for k in 0..=s {
                if k > 0 {
                    d = d.dx();
                }
                let mut c = binom(s, k);
                if s % 2 == 1 {
                    c = -c;
                }
                r.add_to(b, a, s - k, &d.scale(&c));
            }
        }
        r
    }

    pub fn is_skew(&self) -> bool {
        self.add(&self.adjoint()).is_zero()
    }

    /// `(P f)^α = Σ_β Σ_s P^{αβ}_s ∂ₓ^s f_β`.
    pub fn apply(&self, f: &[DiffExpr]) -> Vec<DiffExpr> {
        let n = self.ctx.n as usize;
        assert_eq!(f.len(), n);
        let top = self.max_order().unwrap_or(0);
        let jets: Vec<Vec<DiffExpr>> = f
            .iter()
            .map(|x| {
                let mut v = vec![x.clone()];
                for _ in 0..top {
                    let d = v.last().unwrap().dx();
                    v.push(d);
                }
                v
            })
            .collect();
        let mut out = vec![DiffExpr::zero(self.ctx); n];
        for ((a, b), s, p) in self.entries() {
            out[a as usize - 1] += &(p * &jets[b as usize - 1][s]);
        }
        out
    }

    /// Largest ε-order and std degree bookkeeping: checks `deg P_{g,s} = 2g+1−s`.
    pub fn has_deformation_degrees(&self) -> bool {
        self.entries().all(|(_, s, c)| c.terms().all(|(g, m, _)| m.std_degree() == 2 * g as i64 + 1 - s as i64))
    }
}

fn fmt_entry(f: &mut fmt::Formatter<'_>, row: &BTreeMap<usize, DiffExpr>) -> fmt::Result {
    // group by ε-order, then s descending
    let mut parts: Vec<(u8, usize, DiffExpr)> = Vec::new();
    for (s, c) in row {
        let top = c.max_eps().unwrap_or(0);
        for g in 0..=top {
            let p = c.eps_part(g);
            if !p.is_zero() {
                parts.push((g, *s, p.shift_eps(g)));
            }
        }
    }
    parts.sort_by_key(|x| (x.0, std::cmp::Reverse(x.1)));
    if parts.is_empty() {
        return write!(f, "0");
    }
    for (i, (_, s, c)) in parts.iter().enumerate() {
        let d = match s {
            0 => String::new(),
            1 => "Dx".to_string(),
            s => format!("Dx^{s}"),
        };
        let single = c.len() == 1;
        let (neg, body) = if single {
            let (g, m, q) = c.terms().next().unwrap();
            let neg = q.is_negative();
            let a = q.abs();
            let mut fs = Vec::new();
            if !a.is_one() || (m.is_one() && g == 0 && d.is_empty()) {
                fs.push(fmt_q(&a));
            }
            if g > 0 {
                fs.push(format!("eps^{}", 2 * g as u32));
            }
            if !m.is_one() {
                fs.push(m.to_string());
            }
            if !d.is_empty() {
                fs.push(d.clone());
            }
            (neg, fs.join("*"))
        } else if d.is_empty() {
            let t = c.to_string();
            match t.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, t),
            }
        } else {
            (false, format!("({c})*{d}"))
        };
        match (i, neg) {
            (0, true) => write!(f, "-{body}")?,
            (0, false) => write!(f, "{body}")?,
            (_, true) => write!(f, " - {body}")?,
            (_, false) => write!(f, " + {body}")?,
        }
    }
    Ok(())
}

impl fmt::Display for PoissonOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.n == 1 {
            return match self.coeffs.get(&(1, 1)) {
                Some(row) => fmt_entry(f, row),
                None => write!(f, "0"),
            };
        }
        let mut first = true;
        for ((a, b), row) in &self.coeffs {
            if !first {
                writeln!(f)?;
            }
            first = false;
            write!(f, "[{a},{b}]: ")?;
            fmt_entry(f, row)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
