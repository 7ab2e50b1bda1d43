use super::*;
use crate::cohft::{gen_trivial, ConformalData};

fn kdv_tp(t: &CorrelatorTable, dmax: u8, order: u32) -> TwoPoint<'_> {
    TwoPoint::new(t, Some(&ConformalData::kdv()), Space::new(1, dmax), order)
}

#[test]
fn barred_at_zero_is_plain() {
    let t = gen_trivial(1, 8).unwrap();
    let mut tp = kdv_tp(&t, 3, 8);
    for g in 0..=1 {
        for s in 0..=2 {
            assert_eq!(tp.value(Decoration::Barred, g, s, 1, 1, 0).unwrap(), tp.plain(g, s, 1, 1, 0).unwrap());
        }
    }
}

#[test]
fn genus_zero_tilded_vanishes() {
    let t = gen_trivial(0, 8).unwrap();
    let mut tp = kdv_tp(&t, 3, 8);
    for p in 0..=3 {
        assert!(tp.value(Decoration::Tilded, 0, 0, 1, 1, p).unwrap().is_zero(), "p = {p}");
    }
}

#[test]
fn tilded_equals_barred_away_from_genus_zero_s_zero() {
    let t = gen_trivial(1, 8).unwrap();
    let mut tp = kdv_tp(&t, 3, 8);
    for (g, s) in [(1, 1), (1, 0), (0, 1), (0, 2)] {
        for p in 0..=3 {
            let a = tp.value(Decoration::Tilded, g, s, 1, 1, p).unwrap();
            let b = tp.value(Decoration::Barred, g, s, 1, 1, p).unwrap();
            assert_eq!(a, b, "g={g} s={s} p={p}");
        }
    }
}

#[test]
fn subtractions_reassemble_plain() {
    let t = gen_trivial(1, 8).unwrap();
    let mut tp = kdv_tp(&t, 3, 8);
    let (g, s, p) = (1, 1, 3);
    let mut sum = tp.value(Decoration::Barred, g, s, 1, 1, p).unwrap();
    for q in 0..p {
        let x = tp.value(Decoration::Barred, g, s, 1, 1, q).unwrap();
        sum = sum.add(&x.mul(&tp.plain(0, 0, 1, 1, p - q - 1).unwrap()));
    }
    assert_eq!(sum, tp.plain(g, s, 1, 1, p).unwrap());
}

#[test]
fn lemmas_hold_within_hypothesis() {
    let t = gen_trivial(1, 9).unwrap();
    let mut tp = kdv_tp(&t, 5, 9);
    let r = check_lemma(&mut tp, LemmaId::Reduction, 1, 1, 3).unwrap();
    assert!(r.within_hypothesis);
    assert!(r.is_zero());
    for id in LemmaId::ALL {
        for s in 0..=1u8 {
            for p in 0..=5 {
                let r = check_lemma(&mut tp, id, 1, s, p).unwrap();
                if r.within_hypothesis {
                    assert!(r.is_zero(), "{id} s={s} p={p}: {} terms", r.nonzero_terms());
                }
            }
        }
    }
}

#[test]
fn empty_sum_at_genus_zero() {
    let t = gen_trivial(0, 8).unwrap();
    let mut tp = kdv_tp(&t, 3, 8);
    let r = check_lemma(&mut tp, LemmaId::VanishingWithCoefficient, 0, 1, 2).unwrap();
    assert!(r.is_zero());
}

#[test]
fn outside_hypothesis_is_flagged_and_nonzero() {
    let t = gen_trivial(1, 8).unwrap();
    let mut tp = kdv_tp(&t, 3, 8);
    let r = check_lemma(&mut tp, LemmaId::ReductionPositiveS, 1, 1, 1).unwrap();
    assert!(!r.within_hypothesis);
    assert!(!r.is_zero());
}

#[test]
fn dimension_vanishing() {
    let t = gen_trivial(1, 9).unwrap();
    let mut tp = kdv_tp(&t, 5, 9);
    let (above, r) = check_dimension_vanishing(&mut tp, 0, 0, 0).unwrap();
    assert!(above && r.iter().all(|(_, x)| x.is_zero()));
    for p in 3..=5 {
        let (above, r) = check_dimension_vanishing(&mut tp, 1, 0, p).unwrap();
        assert!(above && r.iter().all(|(_, x)| x.is_zero()), "p = {p}");
    }
    let (above, r) = check_dimension_vanishing(&mut tp, 1, 0, 2).unwrap();
    assert!(!above && r.iter().any(|(_, x)| !x.is_zero()));
}

#[test]
fn eqn0_product_formula() {
    let t = gen_trivial(0, 10).unwrap();
    let mut tp = kdv_tp(&t, 4, 10);
    for s in 0..=4 {
        for (tt, ab, r) in check_eqn0(&mut tp, s).unwrap() {
            assert!(r.is_zero(), "s={s} t={tt} {ab:?}: {r}");
        }
    }
}

#[test]
fn euler_barred_genus_zero_kdv() {
    // Ẽ∂ₓΩ_{0̄} = Ẽv₁ = 0 and Ẽ∂ₓΩ_{1̄} = v·v₁ for KdV
    let t = gen_trivial(0, 8).unwrap();
    let mut tp = kdv_tp(&t, 3, 8);
    assert!(tp.value(Decoration::EBarred, 0, 1, 1, 1, 0).unwrap().is_zero());
    let e1 = tp.value(Decoration::EBarred, 0, 1, 1, 1, 1).unwrap();
    let om = tp.plain(0, 0, 1, 1, 0).unwrap();
    assert_eq!(e1, om.mul(&om.dx()));
}
