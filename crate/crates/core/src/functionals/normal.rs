//! Canonical representatives modulo the image of ∂ₓ and constants.
//!
//! Each graded slice (ε-order, std degree, per-α even degree, per-α odd count)
//! is handled separately: the images under ∂ₓ of every monomial of the slice
//! one std degree below are row-reduced, and the input is reduced against the
//! pivots. Monomials with lower `u[1,1]` exponent are eliminated first, which
//! keeps the result independent of the Laurent window used for the preimage.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use once_cell::sync::Lazy;

use crate::algebra::{Ctx, DiffExpr, Jet, Monomial, Parity, Q};
use crate::linalg::{Echelon, SparseRow};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct SliceKey {
    pub std: i64,
    pub even: Vec<i64>,
    pub odd: Vec<usize>,
}

impl SliceKey {
    pub fn of(n: u8, m: &Monomial) -> SliceKey {
        SliceKey {
            std: m.std_degree(),
            even: (1..=n).map(|a| m.even_degree_of(a)).collect(),
            odd: (1..=n).map(|a| m.odd_count_of(a)).collect(),
        }
    }
}

/// Monomial wrapper whose order drives pivot choice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct ElimKey {
    neg_laurent: i32,
    factors: Vec<(u8, Parity, u8, i32)>,
    mono: Monomial,
}

impl ElimKey {
    fn new(m: Monomial) -> ElimKey {
        let mut factors: Vec<_> = m
            .even()
            .iter()
            .map(|(j, e)| (j.s, Parity::Even, j.alpha, *e))
            .chain(m.odd().iter().map(|j| (j.s, Parity::Odd, j.alpha, 1)))
            .collect();
        factors.sort_by(|a, b| b.cmp(a));
        ElimKey { neg_laurent: -m.laurent_exponent(), factors, mono: m }
    }
}

impl Ord for ElimKey {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.neg_laurent, &self.factors, &self.mono).cmp(&(o.neg_laurent, &o.factors, &o.mono))
    }
}
impl PartialOrd for ElimKey {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

type CacheKey = (u8, SliceKey, i32, u32);
static CACHE: Lazy<Mutex<HashMap<CacheKey, Arc<Echelon<ElimKey>>>>> = Lazy::new(Default::default);

/// Strictly increasing jet lists of length `k` with std sum ≤ `max`.
fn odd_sets(alpha: u8, k: usize, max: i64) -> Vec<(i64, Vec<Jet>)> {
    fn rec(alpha: u8, k: usize, from: u8, budget: i64, cur: &mut Vec<Jet>, used: i64, out: &mut Vec<(i64, Vec<Jet>)>) {
        if k == 0 {
            out.push((used, cur.clone()));
            return;
        }
        let mut s = from;
        // the remaining k jets need at least k*s std
        while (s as i64) * (k as i64) <= budget {
            cur.push(Jet::new(alpha, s));
            rec(alpha, k - 1, s + 1, budget - s as i64, cur, used + s as i64, out);
            cur.pop();
            s += 1;
        }
    }
    let mut out = Vec::new();
    rec(alpha, k, 0, max, &mut Vec::new(), 0, &mut out);
    out
}

/// Multisets of jets of order ≥ 2 with total std ≤ `max`: (std, count, factors).
fn high_jets(alpha: u8, max: i64) -> Vec<(i64, i64, Vec<(Jet, i32)>)> {
    fn rec(alpha: u8, s: i64, budget: i64, cur: &mut Vec<(Jet, i32)>, std: i64, cnt: i64, out: &mut Vec<(i64, i64, Vec<(Jet, i32)>)>) {
        if s > budget {
            out.push((std, cnt, cur.clone()));
            return;
        }
        let mut e = 0;
        while e * s <= budget {
            if e > 0 {
                cur.push((Jet::new(alpha, s as u8), e as i32));
            }
            rec(alpha, s + 1, budget - e * s, cur, std + e * s, cnt + e, out);
            if e > 0 {
                cur.pop();
            }
            e += 1;
        }
    }
    let mut out = Vec::new();
    rec(alpha, 2, max.max(0), &mut Vec::new(), 0, 0, &mut out);
    out
}

/// Even parts of family α with the given total degree and std ≤ `max`.
fn even_parts(alpha: u8, deg: i64, max: i64, lmin: i32, mv: u32) -> Vec<(i64, Vec<(Jet, i32)>)> {
    let lo1 = if alpha == 1 { lmin as i64 } else { 0 };
    let mut out = Vec::new();
    for (h, cnt, jets) in high_jets(alpha, max - lo1) {
        let lo = lo1.max(deg - cnt - mv as i64);
        let hi = (max - h).min(deg - cnt);
        for e1 in lo..=hi {
            if alpha != 1 && e1 < 0 {
                continue;
            }
            let e0 = deg - cnt - e1;
            let mut v = jets.clone();
            if e1 != 0 {
                v.push((Jet::new(alpha, 1), e1 as i32));
            }
            if e0 != 0 {
                v.push((Jet::new(alpha, 0), e0 as i32));
            }
            out.push((h + e1, v));
        }
    }
    out
}

/// Every monomial of the slice whose `u[1,1]` exponent is at least `lmin`.
pub(crate) fn slice_monomials(n: u8, key: &SliceKey, lmin: i32, mv: u32) -> Vec<Monomial> {
    let mut fams: Vec<Vec<(i64, Vec<(Jet, i32)>, Vec<Jet>)>> = Vec::new();
    let mins: Vec<i64> = (0..n as usize)
        .map(|i| {
            let k = key.odd[i] as i64;
            let odd_min = k * (k - 1) / 2;
            let even_min = if i == 0 { (lmin as i64).min(0) } else { 0 };
            odd_min + even_min
        })
        .collect();
    let total_min: i64 = mins.iter().sum();
    for i in 0..n as usize {
        let alpha = i as u8 + 1;
        let max = key.std - (total_min - mins[i]);
        let mut opts = Vec::new();
        for (se, ev) in even_parts(alpha, key.even[i], max, lmin, mv) {
            for (so, od) in odd_sets(alpha, key.odd[i], max - se) {
                opts.push((se + so, ev.clone(), od));
            }
        }
        fams.push(opts);
    }
    let mut out = Vec::new();
    fn rec(
        fams: &[Vec<(i64, Vec<(Jet, i32)>, Vec<Jet>)>],
        i: usize,
        left: i64,
        ev: &mut Vec<(Jet, i32)>,
        od: &mut Vec<Jet>,
        mv: u32,
        out: &mut Vec<Monomial>,
    ) {
        if i == fams.len() {
            if left == 0 {
                if let Ok((_, m)) = Monomial::new(ev.clone(), od.clone()) {
                    if m.u0_degree() <= mv as i64 {
                        out.push(m);
                    }
                }
            }
            return;
        }
        for (s, e, o) in &fams[i] {
            let (le, lo) = (ev.len(), od.len());
            ev.extend_from_slice(e);
            od.extend_from_slice(o);
            rec(fams, i + 1, left - s, ev, od, mv, out);
            ev.truncate(le);
            od.truncate(lo);
        }
    }
    rec(&fams, 0, key.std, &mut Vec::new(), &mut Vec::new(), mv, &mut out);
    out
}

fn echelon_for(n: u8, key: &SliceKey, lmin: i32, mv: u32) -> Arc<Echelon<ElimKey>> {
    let ck = (n, key.clone(), lmin, mv);
    if let Some(e) = CACHE.lock().unwrap().get(&ck) {
        return e.clone();
    }
    let below = SliceKey { std: key.std - 1, ..key.clone() };
    let ctx = Ctx::new(n, 0).with_mv(mv).with_laurent_min(lmin);
    let mut ech = Echelon::new();
    for m in slice_monomials(n, &below, lmin, mv) {
        let img = DiffExpr::monomial(ctx, 0, m, Q::from_integer(1.into())).dx();
        let row: SparseRow<ElimKey> = img.terms().map(|(_, m, c)| (ElimKey::new(m.clone()), c.clone())).collect();
        ech.insert(row);
    }
    let ech = Arc::new(ech);
    CACHE.lock().unwrap().insert(ck, ech.clone());
    ech
}

/// Canonical representative of `f` modulo ∂ₓ-exact terms and constants.
pub fn normal_form(f: &DiffExpr) -> DiffExpr {
    let ctx = f.ctx();
    let n = ctx.n;
    let mut groups: BTreeMap<(u8, SliceKey), Vec<(Monomial, Q)>> = BTreeMap::new();
    for (g, m, c) in f.terms() {
        if m.is_one() {
            continue;
        }
        groups.entry((g, SliceKey::of(n, m))).or_default().push((m.clone(), c.clone()));
    }
    let mut out = DiffExpr::zero(ctx);
    for ((g, key), terms) in groups {
        let lmin = terms.iter().map(|(m, _)| m.laurent_exponent()).min().unwrap_or(0);
        let lmin = (lmin + 1).min(0);
        let ech = echelon_for(n, &key, lmin, ctx.mv);
        let row: SparseRow<ElimKey> = terms.into_iter().map(|(m, c)| (ElimKey::new(m), c)).collect();
        for (k, c) in ech.reduce(row) {
            if !c.is_zero() && !k.mono.is_one() {
                out.add_term(g, k.mono, c);
            }
        }
    }
    out
}
