//! Exact sparse row reduction over the rationals.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use num_traits::{One, Zero};

use crate::Q;

pub type SparseRow<K> = BTreeMap<K, Q>;

/// Row echelon basis of a subspace; each row's pivot is its largest key and
/// has coefficient 1.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone + Hash> {
    rows: Vec<SparseRow<K>>,
    pivot_of: HashMap<K, usize>,
}

impl<K: Ord + Clone + Hash> Default for Echelon<K> {
    fn default() -> Self {
        Echelon { rows: Vec::new(), pivot_of: HashMap::new() }
    }
}

fn axpy<K: Ord + Clone>(target: &mut SparseRow<K>, c: &Q, row: &SparseRow<K>) {
    for (k, v) in row {
        let e = target.entry(k.clone()).or_insert_with(Q::zero);
        *e -= c * v;
        if e.is_zero() {
            target.remove(k);
        }
    }
}

impl<K: Ord + Clone + Hash> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_pivot(&self, k: &K) -> bool {
        self.pivot_of.contains_key(k)
    }

    pub fn pivots(&self) -> impl Iterator<Item = &K> {
        self.pivot_of.keys()
    }

    /// Eliminates every pivot key from `v`; the result is the canonical
    /// representative of `v` modulo the span.
    pub fn reduce(&self, mut v: SparseRow<K>) -> SparseRow<K> {
        let mut bound: Option<K> = None;
        loop {
            let next = match &bound {
                None => v.iter().rev().find(|(k, _)| self.pivot_of.contains_key(*k)),
                Some(b) => v.range(..b.clone()).rev().find(|(k, _)| self.pivot_of.contains_key(*k)),
            };
            let Some((k, c)) = next else { break };
            let (k, c) = (k.clone(), c.clone());
            let row = &self.rows[self.pivot_of[&k]];
            axpy(&mut v, &c, row);
            bound = Some(k);
        }
        v
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseRow<K>) -> bool {
        let mut v = self.reduce(v);
        let Some((k, c)) = v.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        if !c.is_one() {
            let inv = c.recip();
            for x in v.values_mut() {
                *x *= &inv;
            }
        }
        self.pivot_of.insert(k, self.rows.len());
        self.rows.push(v);
        true
    }
}

/// Outcome of an exact linear solve `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solve {
    Unique(Vec<Q>),
    Inconsistent,
    Underdetermined { nullity: usize },
}

/// Solves the system given as rows `(Σ a_j x_j, b)`.
pub fn solve(unknowns: usize, rows: impl IntoIterator<Item = (SparseRow<usize>, Q)>) -> Solve {
    // key 0 holds the right-hand side so it is never chosen as a pivot
    // while any unknown survives
    let mut ech: Echelon<usize> = Echelon::new();
    for (a, b) in rows {
        let mut r: SparseRow<usize> = a.into_iter().filter(|(_, c)| !c.is_zero()).map(|(j, c)| (j + 1, c)).collect();
        if !b.is_zero() {
            r.insert(0, b);
        }
        ech.insert(r);
    }
    if ech.is_pivot(&0) {
        return Solve::Inconsistent;
    }
    let rank = ech.rank();
    if rank < unknowns {
        return Solve::Underdetermined { nullity: unknowns - rank };
    }
    // pivots ascending: each row only involves smaller keys
    let mut order: Vec<usize> = (0..ech.rows.len()).collect();
    order.sort_by_key(|&i| *ech.rows[i].keys().next_back().unwrap());
    let mut x = vec![Q::zero(); unknowns];
    for i in order {
        let row = &ech.rows[i];
        let p = *row.keys().next_back().unwrap();
        let mut val = row.get(&0).cloned().unwrap_or_else(Q::zero);
        for (k, c) in row.range(1..p) {
            val -= c * &x[k - 1];
        }
        x[p - 1] = val;
    }
    Solve::Unique(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{q, qr};

    fn row(xs: &[(usize, i64)]) -> SparseRow<usize> {
        xs.iter().map(|&(k, c)| (k, q(c))).collect()
    }

    #[test]
    fn unique_solution() {
        // x + y = 3, x - y = 1, 2x = 4
        let r = solve(2, vec![(row(&[(0, 1), (1, 1)]), q(3)), (row(&[(0, 1), (1, -1)]), q(1)), (row(&[(0, 2)]), q(4))]);
        assert_eq!(r, Solve::Unique(vec![q(2), q(1)]));
    }

    #[test]
    fn fractional_solution() {
        let r = solve(1, vec![(row(&[(0, 3)]), q(1))]);
        assert_eq!(r, Solve::Unique(vec![qr(1, 3)]));
    }

    #[test]
    fn inconsistent() {
        let r = solve(1, vec![(row(&[(0, 1)]), q(1)), (row(&[(0, 1)]), q(2))]);
        assert_eq!(r, Solve::Inconsistent);
    }

    #[test]
    fn underdetermined() {
        let r = solve(3, vec![(row(&[(0, 1), (1, 1)]), q(1))]);
        assert_eq!(r, Solve::Underdetermined { nullity: 2 });
    }

    #[test]
    fn reduce_is_canonical() {
        let mut e: Echelon<u32> = Echelon::new();
        e.insert([(2, q(1)), (1, q(1))].into_iter().collect());
        let a = e.reduce([(2, q(1))].into_iter().collect());
        let b = e.reduce([(1, q(-1))].into_iter().collect());
        assert_eq!(a, b);
    }
}
