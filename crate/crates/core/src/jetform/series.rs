//! Truncated multivariate power series in the times `t^α_d`.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::algebra::{fmt_q, Q};

pub const MAX_VARS: usize = 24;

/// Dense exponent vector over the variables `t^α_d`, indexed `(α−1)(dmax+1)+d`.
pub type Key = [u8; MAX_VARS];

fn deg(k: &Key) -> u32 {
    k.iter().map(|&e| e as u32).sum()
}

/// Shape of the variable alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    pub n: u8,
    pub dmax: u8,
}

impl Space {
    pub fn new(n: u8, dmax: u8) -> Space {
        assert!(n as usize * (dmax as usize + 1) <= MAX_VARS, "too many series variables");
        Space { n, dmax }
    }

    pub fn index(&self, alpha: u8, d: u8) -> Option<usize> {
        (alpha >= 1 && alpha <= self.n && d <= self.dmax).then(|| (alpha as usize - 1) * (self.dmax as usize + 1) + d as usize)
    }

    pub fn vars(&self) -> usize {
        self.n as usize * (self.dmax as usize + 1)
    }

    pub fn var_of(&self, i: usize) -> (u8, u8) {
        let w = self.dmax as usize + 1;
        ((i / w) as u8 + 1, (i % w) as u8)
    }
}

/// Power series exact through total degree `order`.
#[derive(Clone, Debug)]
pub struct TSeries {
    space: Space,
    order: u32,
    terms: HashMap<Key, Q>,
}

impl PartialEq for TSeries {
    fn eq(&self, o: &Self) -> bool {
        let ord = self.order.min(o.order);
        let a = self.truncated(ord);
        let b = o.truncated(ord);
        a.terms == b.terms
    }
}

impl TSeries {
    pub fn zero(space: Space, order: u32) -> TSeries {
        TSeries { space, order, terms: HashMap::new() }
    }

    pub fn constant(space: Space, order: u32, c: Q) -> TSeries {
        let mut s = TSeries::zero(space, order);
        s.add_term([0; MAX_VARS], c);
        s
    }

    pub fn var(space: Space, order: u32, alpha: u8, d: u8) -> TSeries {
        let mut s = TSeries::zero(space, order);
        if let Some(i) = space.index(alpha, d) {
            let mut k = [0; MAX_VARS];
            k[i] = 1;
            s.add_term(k, Q::one());
        }
        s
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &Q)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, k: Key, c: Q) {
        if c.is_zero() || deg(&k) > self.order {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(k) {
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

    pub fn coeff(&self, k: &Key) -> Q {
        self.terms.get(k).cloned().unwrap_or_else(Q::zero)
    }

    /// Coefficient of `Π t^α_d^e` given as `(α, d, e)` triples.
    pub fn coeff_of(&self, factors: &[(u8, u8, u8)]) -> Q {
        let mut k = [0; MAX_VARS];
        for &(a, d, e) in factors {
            match self.space.index(a, d) {
                Some(i) => k[i] += e,
                None => return Q::zero(),
            }
        }
        self.coeff(&k)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&[0; MAX_VARS])
    }

    pub fn truncated(&self, order: u32) -> TSeries {
        TSeries {
            space: self.space,
            order: order.min(self.order),
            terms: self.terms.iter().filter(|(k, _)| deg(k) <= order).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }

    pub fn valuation(&self) -> u32 {
        self.terms.keys().map(deg).min().unwrap_or(self.order + 1)
    }

    pub fn scale(&self, c: &Q) -> TSeries {
        if c.is_zero() {
            return TSeries::zero(self.space, self.order);
        }
        TSeries { space: self.space, order: self.order, terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    pub fn add(&self, o: &TSeries) -> TSeries {
        let order = self.order.min(o.order);
        let mut r = self.truncated(order);
        for (k, v) in &o.terms {
            r.add_term(*k, v.clone());
        }
        r
    }

    pub fn sub(&self, o: &TSeries) -> TSeries {
        let order = self.order.min(o.order);
        let mut r = self.truncated(order);
        for (k, v) in &o.terms {
            r.add_term(*k, -v.clone());
        }
        r
    }

    pub fn add_assign_scaled(&mut self, o: &TSeries, c: &Q) {
        if o.order < self.order {
            *self = self.truncated(o.order);
        }
        for (k, v) in &o.terms {
            self.add_term(*k, v * c);
        }
    }

    pub fn mul(&self, o: &TSeries) -> TSeries {
        let (va, vb) = (self.valuation(), o.valuation());
        let order = (self.order + vb).min(o.order + va);
        let order = order.min(self.order.max(o.order));
        let mut buckets: Vec<Vec<(&Key, &Q)>> = vec![Vec::new(); order as usize + 1];
        for (k, v) in &o.terms {
            let d = deg(k);
            if d <= order {
                buckets[d as usize].push((k, v));
            }
        }
        let nv = self.space.vars();
        let mut terms: HashMap<Key, Q> = HashMap::new();
        for (ka, ca) in &self.terms {
            let da = deg(ka);
            if da > order {
                continue;
            }
            for bucket in &buckets[..=(order - da) as usize] {
                for (kb, cb) in bucket {
                    let mut k = *ka;
                    for i in 0..nv {
                        k[i] += kb[i];
                    }
                    *terms.entry(k).or_insert_with(Q::zero) += ca * *cb;
                }
            }
        }
        terms.retain(|_, v| !v.is_zero());
        TSeries { space: self.space, order, terms }
    }

    pub fn pow(&self, e: u32) -> TSeries {
        let mut r = TSeries::constant(self.space, self.order, Q::one());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    /// `∂/∂t^α_d`; exact one degree lower.
    pub fn deriv(&self, alpha: u8, d: u8) -> TSeries {
        let order = self.order.saturating_sub(1);
        let mut r = TSeries::zero(self.space, order);
        let Some(i) = self.space.index(alpha, d) else { return r };
        for (k, v) in &self.terms {
            if k[i] > 0 {
                let mut nk = *k;
                nk[i] -= 1;
                r.add_term(nk, v * Q::from_integer(k[i].into()));
            }
        }
        r
    }

    /// `∂ₓ = ∂/∂t^1_0`.
    pub fn dx(&self) -> TSeries {
        self.deriv(1, 0)
    }

    /// Multiplies by `t^α_d`; exact one degree higher.
    pub fn mul_var(&self, alpha: u8, d: u8) -> TSeries {
        let mut r = TSeries::zero(self.space, self.order + 1);
        let Some(i) = self.space.index(alpha, d) else {
            // the variable is outside the alphabet, i.e. set to zero
            return TSeries::zero(self.space, self.order + 1);
        };
        for (k, v) in &self.terms {
            let mut nk = *k;
            nk[i] += 1;
            r.add_term(nk, v.clone());
        }
        r
    }

    /// `Σ t^α_d ∂/∂t^α_d` weighted by `w(α,d)`: the Euler-type operator
    /// `Σ w t ∂_t` acting diagonally on monomials.
    pub fn weighted_euler<F: Fn(u8, u8) -> Q>(&self, w: F) -> TSeries {
        let nv = self.space.vars();
        let weights: Vec<Q> = (0..nv)
            .map(|i| {
                let (a, d) = self.space.var_of(i);
                w(a, d)
            })
            .collect();
        let mut r = TSeries::zero(self.space, self.order);
        for (k, v) in &self.terms {
            let mut c = Q::zero();
            for i in 0..nv {
                if k[i] > 0 {
                    c += &weights[i] * Q::from_integer(k[i].into());
                }
            }
            r.add_term(*k, v * c);
        }
        r
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn inverse(&self) -> Option<TSeries> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return None;
        }
        let inv0 = c0.recip();
        // 1/(c0(1+x)) = inv0 Σ (−x)^k
        let x = self.sub(&TSeries::constant(self.space, self.order, c0)).scale(&inv0);
        let mut acc = TSeries::constant(self.space, self.order, Q::one());
        let mut p = acc.clone();
        for _ in 0..self.order {
            p = p.mul(&x).scale(&-Q::one());
            if p.is_zero() {
                break;
            }
            acc = acc.add(&p);
        }
        Some(acc.scale(&inv0))
    }

    /// Integer power, negative exponents through [`inverse`](Self::inverse).
    pub fn powi(&self, e: i32) -> Option<TSeries> {
        if e >= 0 {
            Some(self.pow(e as u32))
        } else {
            Some(self.inverse()?.pow((-e) as u32))
        }
    }

    /// Nonzero coefficients sorted by total degree then key, for reports.
    pub fn sorted_terms(&self) -> Vec<(Key, Q)> {
        let mut v: Vec<_> = self.terms.iter().map(|(k, c)| (*k, c.clone())).collect();
        v.sort_by_key(|a| (deg(&a.0), a.0));
        v
    }

    pub fn monomial_name(&self, k: &Key) -> String {
        let mut parts = Vec::new();
        for i in 0..self.space.vars() {
            if k[i] > 0 {
                let (a, d) = self.space.var_of(i);
                if k[i] == 1 {
                    parts.push(format!("t[{a},{d}]"));
                } else {
                    parts.push(format!("t[{a},{d}]^{}", k[i]));
                }
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl fmt::Display for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.sorted_terms();
        if terms.is_empty() {
            write!(f, "0")?;
        }
        for (i, (k, c)) in terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", fmt_q(c), self.monomial_name(k))?;
        }
        write!(f, " + O(t^{})", self.order + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{q, qr};

    fn sp() -> Space {
        Space::new(1, 3)
    }

    #[test]
    fn geometric_inverse() {
        let one_minus = TSeries::constant(sp(), 6, q(1)).sub(&TSeries::var(sp(), 6, 1, 1));
        let inv = one_minus.inverse().unwrap();
        for k in 0..=6u8 {
            assert_eq!(inv.coeff_of(&[(1, 1, k)]), q(1));
        }
        assert_eq!(inv.mul(&one_minus), TSeries::constant(sp(), 6, q(1)));
    }

    #[test]
    fn product_rule_and_orders() {
        let a = TSeries::var(sp(), 5, 1, 0).add(&TSeries::constant(sp(), 5, qr(1, 2)));
        let b = TSeries::var(sp(), 5, 1, 2).pow(2);
        let ab = a.mul(&b);
        assert_eq!(ab.dx(), a.dx().mul(&b).add(&a.mul(&b.dx())));
        assert_eq!(ab.coeff_of(&[(1, 0, 1), (1, 2, 2)]), q(1));
        assert_eq!(ab.dx().order(), 4);
    }

    #[test]
    fn euler_weights() {
        let s = TSeries::var(sp(), 4, 1, 0).mul(&TSeries::var(sp(), 4, 1, 3));
        let e = s.weighted_euler(|_, d| q(1) - q(d as i64));
        assert_eq!(e, s.scale(&q(-1)));
    }
}
