//! ψ-class intersection numbers of the trivial CohFT.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{CohftError, CorrelatorTable, Insertion};
use crate::algebra::Q;

fn dfact(k: i64) -> BigInt {
    // (2k+1)!! for the argument 2k+1; (−1)!! = 1
    let mut r = BigInt::one();
    let mut i = k;
    while i > 1 {
        r *= BigInt::from(i);
        i -= 2;
    }
    r
}

fn qi(b: BigInt) -> Q {
    Q::from_integer(b)
}

#[derive(Default)]
struct Wk {
    memo: HashMap<(u32, Vec<u32>), Q>,
}

impl Wk {
    /// `⟨τ_{d_1}…τ_{d_n}⟩_g`, zero outside the stable range or dimension.
    fn get(&mut self, g: u32, ds: &[u32]) -> Q {
        let n = ds.len() as i64;
        if 2 * g as i64 - 2 + n <= 0 {
            return Q::zero();
        }
        let total: i64 = ds.iter().map(|&d| d as i64).sum();
        if total != 3 * g as i64 - 3 + n {
            return Q::zero();
        }
        let mut key = ds.to_vec();
        key.sort_unstable();
        if let Some(v) = self.memo.get(&(g, key.clone())) {
            return v.clone();
        }
        let v = self.compute(g, &key);
        self.memo.insert((g, key), v.clone());
        v
    }

    fn compute(&mut self, g: u32, ds: &[u32]) -> Q {
        if g == 0 && ds == [0, 0, 0] {
            return Q::one();
        }
        if g == 1 && ds == [1] {
            return Q::new(1.into(), 24.into());
        }
        if let Some(pos) = ds.iter().position(|&d| d == 0) {
            // string equation
            let rest: Vec<u32> = ds.iter().enumerate().filter(|(i, _)| *i != pos).map(|(_, &d)| d).collect();
            let mut acc = Q::zero();
            for j in 0..rest.len() {
                if rest[j] > 0 {
                    let mut r = rest.clone();
                    r[j] -= 1;
                    acc += self.get(g, &r);
                }
            }
            return acc;
        }
        // DVV recursion on the largest insertion τ_{k+1}
        let top = *ds.iter().max().unwrap();
        let pos = ds.iter().position(|&d| d == top).unwrap();
        let k = top as i64 - 1;
        let rest: Vec<u32> = ds.iter().enumerate().filter(|(i, _)| *i != pos).map(|(_, &d)| d).collect();
        let mut acc = Q::zero();
        for j in 0..rest.len() {
            let dj = rest[j] as i64;
            let c = qi(dfact(2 * k + 2 * dj + 1)) / qi(dfact(2 * dj - 1));
            let mut r = rest.clone();
            r[j] = (dj + k) as u32;
            acc += c * self.get(g, &r);
        }
        let half = Q::new(1.into(), 2.into());
        for r in 0..k {
            let s = k - 1 - r;
            let c = qi(dfact(2 * r + 1) * dfact(2 * s + 1)) * &half;
            if g >= 1 {
                let mut v = vec![r as u32, s as u32];
                v.extend_from_slice(&rest);
                acc += &c * self.get(g - 1, &v);
            }
            let m = rest.len();
            for mask in 0..(1u32 << m) {
                let (mut a, mut b) = (vec![r as u32], vec![s as u32]);
                for (i, &d) in rest.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        a.push(d);
                    } else {
                        b.push(d);
                    }
                }
                for g1 in 0..=g {
                    let x = self.get(g1, &a);
                    if x.is_zero() {
                        continue;
                    }
                    acc += &c * x * self.get(g - g1, &b);
                }
            }
        }
        acc / qi(dfact(2 * k + 3))
    }
}

/// All partitions-with-order-forgotten of `total` into `n` parts ≥ 0.
fn multisets(n: usize, total: u32, max: u32, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if cur.len() == n {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let left = (n - cur.len()) as u32;
    for d in (0..=max.min(total)).rev() {
        if d * left < total {
            break;
        }
        cur.push(d);
        multisets(n, total - d, d, out, cur);
        cur.pop();
    }
}

/// Table of the trivial CohFT (`N = 1`, `η = 1`) for `g ≤ gmax`, `n ≤ nmax`.
pub fn gen_trivial(gmax: u8, nmax: usize) -> Result<CorrelatorTable, CohftError> {
    if gmax > 3 {
        return Err(CohftError::BoundsExceeded(format!("gmax {gmax} > 3")));
    }
    if nmax > 40 {
        return Err(CohftError::BoundsExceeded(format!("nmax {nmax} > 40")));
    }
    let dmax = (3 * gmax as i64 - 3 + nmax as i64).max(1);
    let mut t = CorrelatorTable::new(vec![vec![Q::one()]], gmax, nmax, dmax.min(255) as u8)?;
    let mut wk = Wk::default();
    for g in 0..=gmax as u32 {
        for n in 1..=nmax {
            if 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            let total = 3 * g as i64 - 3 + n as i64;
            if total < 0 {
                continue;
            }
            let mut ms = Vec::new();
            multisets(n, total as u32, total as u32, &mut ms, &mut Vec::new());
            for ds in ms {
                let v = wk.get(g, &ds);
                let ins = ds.iter().map(|&d| Insertion::new(1, d as u8)).collect();
                t.insert(g as u8, ins, v);
            }
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(g: u8, ds: &[u8]) -> Q {
        let t = gen_trivial(3, 6).unwrap();
        t.get(g, &ds.iter().map(|&d| Insertion::new(1, d)).collect::<Vec<_>>())
    }

    #[test]
    fn anchors() {
        assert_eq!(v(0, &[0, 0, 0]), Q::one());
        assert_eq!(v(1, &[1]), Q::new(1.into(), 24.into()));
        // dimension constraint kills ⟨τ₀²τ₁⟩₀; the string equation gives ⟨τ₀³τ₁⟩₀
        assert_eq!(v(0, &[0, 0, 1]), Q::zero());
        assert_eq!(v(0, &[0, 0, 0, 1]), Q::one());
    }

    #[test]
    fn known_values() {
        assert_eq!(v(2, &[4]), Q::new(1.into(), 1152.into()));
        assert_eq!(v(2, &[2, 3]), Q::new(29.into(), 5760.into()));
        assert_eq!(v(3, &[7]), Q::new(1.into(), 82944.into()));
        assert_eq!(v(1, &[1, 1]), Q::new(1.into(), 24.into()));
        assert_eq!(v(0, &[0, 0, 0, 1, 1]), Q::from_integer(2.into()));
        assert_eq!(v(0, &[0, 0, 0, 0, 2]), Q::one());
    }

    #[test]
    fn one_point_closed_form() {
        // ⟨τ_{3g−2}⟩_g = 1/(24^g g!)
        for g in 1..=3u8 {
            let fact: i64 = (1..=g as i64).product();
            let want = Q::new(1.into(), (24i64.pow(g as u32) * fact).into());
            assert_eq!(v(g, &[3 * g - 2]), want);
        }
    }

    #[test]
    fn dilaton_holds() {
        // ⟨τ₁ X⟩_g = (2g−2+n)⟨X⟩_g
        assert_eq!(v(2, &[1, 4]), v(2, &[4]) * Q::from_integer(3.into()));
        assert_eq!(v(1, &[1, 1, 1]), v(1, &[1, 1]) * Q::from_integer(2.into()));
    }

    #[test]
    fn bounds() {
        assert!(gen_trivial(4, 3).is_err());
    }
}
