use std::fmt;

use super::AlgebraError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

/// Jet coordinate `(α, s)`, ordered by α then s.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Jet {
    pub alpha: u8,
    pub s: u8,
}

impl Jet {
    pub const fn new(alpha: u8, s: u8) -> Jet {
        Jet { alpha, s }
    }
}

/// A jet variable; the derived order is parity, then α, then s.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    pub parity: Parity,
    pub jet: Jet,
}

impl VarId {
    pub const fn u(alpha: u8, s: u8) -> VarId {
        VarId { parity: Parity::Even, jet: Jet::new(alpha, s) }
    }
    pub const fn th(alpha: u8, s: u8) -> VarId {
        VarId { parity: Parity::Odd, jet: Jet::new(alpha, s) }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.parity {
            Parity::Even => "u",
            Parity::Odd => "th",
        };
        write!(f, "{}[{},{}]", p, self.jet.alpha, self.jet.s)
    }
}

const U11: Jet = Jet::new(1, 1);

/// Product of even powers and a strictly increasing list of odd variables.
/// The sign produced by sorting the odd part lives in the coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    even: Vec<(Jet, i32)>,
    odd: Vec<Jet>,
}

/// Sorts `odd` in place, returning the permutation parity, or `None` on a repeat.
fn sort_odd(odd: &mut [Jet]) -> Option<bool> {
    let mut neg = false;
    for i in 1..odd.len() {
        let mut j = i;
        while j > 0 && odd[j - 1] > odd[j] {
            odd.swap(j - 1, j);
            neg = !neg;
            j -= 1;
        }
    }
    if odd.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(neg)
    }
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn var(v: VarId) -> Monomial {
        match v.parity {
            Parity::Even => Monomial { even: vec![(v.jet, 1)], odd: vec![] },
            Parity::Odd => Monomial { even: vec![], odd: vec![v.jet] },
        }
    }

    /// Builds a monomial from unsorted parts, returning the sign of the odd
    /// reordering (`true` = negative). A repeated odd variable is an error.
    pub fn new(even: Vec<(Jet, i32)>, mut odd: Vec<Jet>) -> Result<(bool, Monomial), AlgebraError> {
        let mut ev: Vec<(Jet, i32)> = Vec::new();
        for (j, e) in even {
            match ev.iter_mut().find(|(k, _)| *k == j) {
                Some(slot) => slot.1 += e,
                None => ev.push((j, e)),
            }
        }
        ev.retain(|(_, e)| *e != 0);
        ev.sort();
        if let Some((j, _)) = ev.iter().find(|(j, e)| *e < 0 && *j != U11) {
            return Err(AlgebraError::NegativeExponent(VarId { parity: Parity::Even, jet: *j }));
        }
        let neg = sort_odd(&mut odd).ok_or_else(|| AlgebraError::Parse("repeated odd variable".into()))?;
        Ok((neg, Monomial { even: ev, odd }))
    }

    pub fn is_one(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty()
    }

    pub fn even(&self) -> &[(Jet, i32)] {
        &self.even
    }

    pub fn odd(&self) -> &[Jet] {
        &self.odd
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.even
            .iter()
            .map(|(j, _)| VarId { parity: Parity::Even, jet: *j })
            .chain(self.odd.iter().map(|j| VarId { parity: Parity::Odd, jet: *j }))
    }

    pub fn std_degree(&self) -> i64 {
        self.even.iter().map(|(j, e)| j.s as i64 * *e as i64).sum::<i64>() + self.odd.iter().map(|j| j.s as i64).sum::<i64>()
    }

    pub fn super_degree(&self) -> usize {
        self.odd.len()
    }

    pub fn exponent(&self, j: Jet) -> i32 {
        self.even.iter().find(|(k, _)| *k == j).map(|(_, e)| *e).unwrap_or(0)
    }

    pub fn laurent_exponent(&self) -> i32 {
        self.exponent(U11)
    }

    /// Total degree in the undifferentiated variables.
    pub fn u0_degree(&self) -> i64 {
        self.even.iter().filter(|(j, _)| j.s == 0).map(|(_, e)| *e as i64).sum()
    }

    /// Total even degree counted per α (Laurent exponents count negatively).
    pub fn even_degree_of(&self, alpha: u8) -> i64 {
        self.even.iter().filter(|(j, _)| j.alpha == alpha).map(|(_, e)| *e as i64).sum()
    }

    pub fn odd_count_of(&self, alpha: u8) -> usize {
        self.odd.iter().filter(|j| j.alpha == alpha).count()
    }

    pub fn with_exponent_delta(&self, j: Jet, d: i32) -> Monomial {
        let mut even = self.even.clone();
        match even.iter_mut().find(|(k, _)| *k == j) {
            Some(slot) => slot.1 += d,
            None => even.push((j, d)),
        }
        even.retain(|(_, e)| *e != 0);
        even.sort();
        Monomial { even, odd: self.odd.clone() }
    }

    /// Product; `None` if an odd variable repeats, else `(negate, monomial)`.
    pub fn mul(&self, o: &Monomial) -> Option<(bool, Monomial)> {
        let mut even = Vec::with_capacity(self.even.len() + o.even.len());
        let (mut i, mut k) = (0, 0);
        while i < self.even.len() || k < o.even.len() {
            if k == o.even.len() || (i < self.even.len() && self.even[i].0 < o.even[k].0) {
                even.push(self.even[i]);
                i += 1;
            } else if i == self.even.len() || o.even[k].0 < self.even[i].0 {
                even.push(o.even[k]);
                k += 1;
            } else {
                let e = self.even[i].1 + o.even[k].1;
                if e != 0 {
                    even.push((self.even[i].0, e));
                }
                i += 1;
                k += 1;
            }
        }
        let mut neg = false;
        let mut odd = Vec::with_capacity(self.odd.len() + o.odd.len());
        let (mut i, mut k) = (0, 0);
        while i < self.odd.len() || k < o.odd.len() {
            if k == o.odd.len() || (i < self.odd.len() && self.odd[i] < o.odd[k]) {
                odd.push(self.odd[i]);
                i += 1;
            } else if i == self.odd.len() || o.odd[k] < self.odd[i] {
                // passes the remaining left factors
                if (self.odd.len() - i) % 2 == 1 {
                    neg = !neg;
                }
                odd.push(o.odd[k]);
                k += 1;
            } else {
                return None;
            }
        }
        Some((neg, Monomial { even, odd }))
    }

    /// Terms of ∂ₓ applied to this monomial: `(negate, integer factor, monomial)`.
    pub fn dx_terms(&self) -> Vec<(bool, i64, Monomial)> {
        let mut out = Vec::new();
        for (idx, (j, e)) in self.even.iter().enumerate() {
            let mut even = self.even.clone();
            even[idx].1 -= 1;
            let up = Jet::new(j.alpha, j.s + 1);
            match even.iter_mut().find(|(k, _)| *k == up) {
                Some(slot) => slot.1 += 1,
                None => even.push((up, 1)),
            }
            even.retain(|(_, x)| *x != 0);
            even.sort();
            out.push((false, *e as i64, Monomial { even, odd: self.odd.clone() }));
        }
        for idx in 0..self.odd.len() {
            let mut odd = self.odd.clone();
            odd[idx].s += 1;
            if let Some(neg) = sort_odd(&mut odd) {
                out.push((neg, 1, Monomial { even: self.even.clone(), odd }));
            }
        }
        out
    }

    /// Left partial derivative: `(negate, factor, monomial)`.
    pub fn partial(&self, v: VarId) -> Option<(bool, i64, Monomial)> {
        match v.parity {
            Parity::Even => {
                let idx = self.even.iter().position(|(j, _)| *j == v.jet)?;
                let e = self.even[idx].1;
                let mut even = self.even.clone();
                even[idx].1 -= 1;
                even.retain(|(_, x)| *x != 0);
                Some((false, e as i64, Monomial { even, odd: self.odd.clone() }))
            }
            Parity::Odd => {
                let idx = self.odd.iter().position(|j| *j == v.jet)?;
                let mut odd = self.odd.clone();
                odd.remove(idx);
                Some((idx % 2 == 1, 1, Monomial { even: self.even.clone(), odd }))
            }
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (j, e) in &self.even {
            let v = VarId { parity: Parity::Even, jet: *j };
            if *e == 1 {
                parts.push(v.to_string());
            } else {
                parts.push(format!("{v}^{e}"));
            }
        }
        for j in &self.odd {
            parts.push(VarId { parity: Parity::Odd, jet: *j }.to_string());
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}
