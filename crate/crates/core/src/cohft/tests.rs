use super::*;
use crate::algebra::{q, qr};

fn w(order: u32, dmax: u8) -> Window {
    Window { order, dmax }
}

#[test]
fn trivial_table_passes_axioms() {
    let t = gen_trivial(2, 10).unwrap();
    let rep = check_axiom_residuals(&t, w(10, 3)).unwrap();
    assert!(rep.is_clean(), "{rep}");
    assert_eq!(rep.certified_degree, 7);
    let h = check_homogeneity(&t, &ConformalData::kdv(), w(10, 3)).unwrap();
    assert!(h.is_clean(), "{h}");
}

#[test]
fn corrupted_string_coefficient_is_reported() {
    let mut t = gen_trivial(1, 6).unwrap();
    let i = |d| Insertion::new(1, d);
    t.insert(0, vec![i(0), i(0), i(1)], q(2));
    let rep = check_axiom_residuals(&t, w(6, 2)).unwrap();
    let v: Vec<_> = rep.violations.iter().filter(|v| v.identity == "string" && v.genus == 0).collect();
    assert!(v.iter().any(|v| v.monomial == "t[1,0]*t[1,1]" && v.residual == "2"), "{rep}");
}

#[test]
fn axiom_triple_alone_is_consistent_at_low_order() {
    let mut t = CorrelatorTable::new(vec![vec![q(1)]], 0, 3, 0).unwrap();
    let i = Insertion::new(1, 0);
    t.insert(0, vec![i, i, i], q(1));
    let rep = check_axiom_residuals(&t, w(3, 0)).unwrap();
    assert!(rep.is_clean(), "{rep}");
}

#[test]
fn wrong_charge_breaks_homogeneity() {
    let t = gen_trivial(1, 6).unwrap();
    let mut c = ConformalData::kdv();
    c.charge = q(1);
    assert!(matches!(check_homogeneity(&t, &c, w(6, 2)), Err(CohftError::ConformalViolation(_))));
    // bypass validation: the residual itself is nonzero
    let sp = Space::new(1, 2);
    let f = t.potential(0, sp, 6).unwrap();
    let mut r = c.apply_e(&t, &f);
    r.add_assign_scaled(&f, &-(q(3) - &c.charge));
    assert!(!r.is_zero());
}

#[test]
fn zero_potential_is_homogeneous() {
    let t = CorrelatorTable::new(vec![vec![q(1)]], 1, 4, 1).unwrap();
    assert!(check_homogeneity(&t, &ConformalData::kdv(), w(4, 1)).unwrap().is_clean());
}

#[test]
fn kdv_r_and_m() {
    let t = gen_trivial(0, 4).unwrap();
    let c = ConformalData::kdv();
    assert_eq!(c.tilde_r(), vec![vec![qr(1, 2)]]);
    assert_eq!(c.m_matrix(&t), vec![vec![q(0)]]);
    assert!(eta_compatible(&c.tilde_r(), t.eta_inv()));
}

#[test]
fn eta_compatibility_for_admissible_data() {
    // antidiagonal η in rank 3: 𝗊₁₂ = −𝗊₂₃ is the free off-diagonal entry
    let z = q(0);
    let eta = vec![vec![z.clone(), z.clone(), q(1)], vec![z.clone(), q(1), z.clone()], vec![q(1), z.clone(), z.clone()]];
    for (d, x) in [(qr(1, 3), q(5)), (q(0), qr(-2, 7)), (q(2), q(1))] {
        let c = ConformalData {
            q: vec![
                vec![q(1), x.clone(), z.clone()],
                vec![z.clone(), (q(2) - &d) / q(2), -x.clone()],
                vec![z.clone(), z.clone(), q(1) - &d],
            ],
            b: vec![z.clone(); 3],
            charge: d,
        };
        c.validate(&eta).unwrap();
        assert!(eta_compatible(&c.tilde_r(), &mat_inv(&eta).unwrap()));
    }
}

#[test]
fn validation_rejects_bad_unit_column() {
    let c = ConformalData { q: vec![vec![q(2)]], b: vec![q(0)], charge: q(-2) };
    assert!(c.validate(&vec![vec![q(1)]]).is_err());
}

#[test]
fn permuted_insert_is_noop() {
    let mut t = gen_trivial(1, 5).unwrap();
    let before = t.clone();
    let i = |d| Insertion::new(1, d);
    let v = t.get(0, &[i(0), i(0), i(1), i(1)]);
    t.insert(0, vec![i(1), i(0), i(1), i(0)], v);
    assert_eq!(t, before);
}

#[test]
fn file_roundtrip_is_byte_stable() {
    let t = gen_trivial(1, 5).unwrap();
    let s = write_table(&t, Some(&ConformalData::kdv()));
    let (t2, c2) = read_table(&s).unwrap();
    assert_eq!(t2, t);
    assert_eq!(c2, Some(ConformalData::kdv()));
    assert_eq!(write_table(&t2, c2.as_ref()), s);
}

#[test]
fn file_errors_carry_line_numbers() {
    let e = read_table("N 1\neta 1\n0; (1,0) (2,0) (1,0); 1\n").unwrap_err();
    assert!(matches!(e, CohftError::Format { line: 3, .. }), "{e}");
    assert!(read_table("N 2\neta 1 0 0\n").is_err());
}

#[test]
fn truncation_guard() {
    let t = gen_trivial(0, 5).unwrap();
    assert!(matches!(t.potential(0, Space::new(1, 1), 6), Err(CohftError::TruncationInsufficient { .. })));
}
