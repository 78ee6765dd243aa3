use std::collections::BTreeSet;

use mubkit::finite_field::FieldSpec;
use mubkit::multiplier_lab::{appendix_b_multiplier, enumerate_weyl_multipliers, m_inv};
use mubkit::phase_space::{LinearMap2, PhaseSpace, PhaseVector, SymplecticForm};
use mubkit::quadrature::quadratures_from_weyl;
use mubkit::symplectic_actions::{
    covariance_residual, is_nonsplit, is_nonsplit_by_directions, maximal_nonsplit_torus, metaplectic_operator,
    sl_enumerate, sl_extension_probe, torus_commutant,
};
use mubkit::weyl_rep::{weyl_system_from_multiplier, DEFAULT_SEED};

fn space(desc: &str) -> PhaseSpace {
    PhaseSpace::new(&FieldSpec::parse(desc, None).unwrap())
}

fn key(a: &LinearMap2) -> [usize; 4] {
    [a.a11.index(), a.a12.index(), a.a21.index(), a.a22.index()]
}

#[test]
fn sl_matches_brute_force_determinant_count() {
    for desc in ["2", "3", "2^2", "5"] {
        let sp = space(desc);
        let f = sp.field();
        let q = sp.q();
        let mut oracle = BTreeSet::new();
        for a in f.elements() {
            for b in f.elements() {
                for c in f.elements() {
                    for d in f.elements() {
                        if f.sub(f.mul(a, d), f.mul(b, c)) == f.one() {
                            oracle.insert([a.index(), b.index(), c.index(), d.index()]);
                        }
                    }
                }
            }
        }
        let sl: BTreeSet<[usize; 4]> = sl_enumerate(&sp).unwrap().iter().map(key).collect();
        assert_eq!(oracle.len(), q * (q * q - 1), "GF({desc})");
        assert_eq!(sl, oracle, "GF({desc})");
    }
}

#[test]
fn nonsplit_tests_agree() {
    for desc in ["2", "3", "2^2"] {
        let sp = space(desc);
        for a in sl_enumerate(&sp).unwrap() {
            assert_eq!(is_nonsplit(&sp, &a).unwrap(), is_nonsplit_by_directions(&sp, &a).unwrap(), "GF({desc})");
        }
    }
}

#[test]
fn maximal_torus_structure() {
    for desc in ["2", "3", "2^2", "5"] {
        let sp = space(desc);
        let f = sp.field();
        let t = maximal_nonsplit_torus(&sp);
        let minus = LinearMap2::diag(f.neg(f.one()), f.neg(f.one()));
        let split: BTreeSet<[usize; 4]> =
            t.elements.iter().filter(|a| !is_nonsplit(&sp, a).unwrap()).map(key).collect();
        let expected: BTreeSet<[usize; 4]> = [LinearMap2::identity(), minus].iter().map(key).collect();
        assert_eq!(split, expected, "GF({desc})");
        let comm: BTreeSet<[usize; 4]> = torus_commutant(&sp, &t).unwrap().iter().map(key).collect();
        let elems: BTreeSet<[usize; 4]> = t.elements.iter().map(key).collect();
        assert_eq!(comm, elems, "GF({desc})");
    }
}

#[test]
fn metaplectic_operators_cover_sl_for_the_invariant_multiplier() {
    let sp = space("3");
    let f = sp.field().clone();
    let w = weyl_system_from_multiplier(&m_inv(&sp, &SymplecticForm::standard()).unwrap()).unwrap();
    let qs = quadratures_from_weyl(&w, PhaseVector::ZERO).unwrap();
    let sl = sl_enumerate(&sp).unwrap();
    let regular: Vec<LinearMap2> = sl.iter().filter(|a| a.minus_identity(&f).inverse(&f).is_ok()).copied().collect();
    let family: Vec<_> = regular.iter().map(|a| (*a, metaplectic_operator(a, &w).unwrap().matrix)).collect();
    assert!(covariance_residual(&qs, &family) <= 1e-9);

    // The elements with A - I invertible generate SL(V).
    let mut closure: BTreeSet<[usize; 4]> = regular.iter().map(key).collect();
    let mut frontier = regular.clone();
    while let Some(a) = frontier.pop() {
        for b in &regular {
            let c = a.compose(&f, b);
            if closure.insert(key(&c)) {
                frontier.push(c);
            }
        }
    }
    assert_eq!(closure.len(), sl.len());
}

#[test]
fn non_invariant_multiplier_has_no_metaplectic_operator() {
    let sp = space("3");
    let f = sp.field();
    let t = maximal_nonsplit_torus(&sp);
    let m = enumerate_weyl_multipliers(&sp, &SymplecticForm::standard())
        .unwrap()
        .into_iter()
        .find(|m| m != &m_inv(&sp, &SymplecticForm::standard()).unwrap())
        .unwrap();
    let w = weyl_system_from_multiplier(&m).unwrap();
    assert!(t.elements[1..].iter().any(|a| metaplectic_operator(a, &w).is_err()));
    assert!(metaplectic_operator(&LinearMap2::diag(f.one(), f.one()), &w).is_err());
}

#[test]
fn extension_probe_outcomes() {
    let sp3 = space("3");
    let w3 = weyl_system_from_multiplier(&m_inv(&sp3, &SymplecticForm::standard()).unwrap()).unwrap();
    let r3 = sl_extension_probe(&w3, DEFAULT_SEED).unwrap();
    assert_eq!(r3.group_order, 24);
    assert!(r3.defect_free);

    let sp2 = space("2");
    let w2 = weyl_system_from_multiplier(&appendix_b_multiplier(&sp2, &SymplecticForm::standard()).unwrap()).unwrap();
    let r2 = sl_extension_probe(&w2, DEFAULT_SEED).unwrap();
    assert_eq!(r2.corrected_defect_free, Some(true));

    let sp4 = space("2^2");
    let w4 = weyl_system_from_multiplier(&appendix_b_multiplier(&sp4, &SymplecticForm::standard()).unwrap()).unwrap();
    assert!(sl_extension_probe(&w4, DEFAULT_SEED).unwrap().informational);

    let sp5 = space("5");
    let w5 = weyl_system_from_multiplier(&m_inv(&sp5, &SymplecticForm::standard()).unwrap()).unwrap();
    assert!(sl_extension_probe(&w5, DEFAULT_SEED).is_err());
}
