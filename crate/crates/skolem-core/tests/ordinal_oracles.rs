mod common;

use common::ordinals::*;
use proptest::prelude::*;
use skolem_core::ordinal::{self as ord, parse_ordinal, Ordinal};

#[test]
fn vector_model_agrees_below_omega_pow_omega() {
    let pool: Vec<(Ordinal, Vector)> =
        pool().into_iter().filter_map(|a| Vector::from_ordinal(&a).map(|v| (a, v))).collect();
    assert!(pool.len() > 50);
    for (a, va) in &pool {
        assert_eq!(va.to_ordinal(), *a);
        for (b, vb) in &pool {
            assert_eq!(a.cmp(b), va.cmp(vb), "{a} vs {b}");
            assert_eq!(ord::add(a, b), va.add(vb).to_ordinal(), "{a} + {b}");
            assert_eq!(ord::mul(a, b), va.mul(vb).to_ordinal(), "{a} * {b}");
            assert_eq!(ord::hsum(a, b), va.nat_add(vb).to_ordinal(), "{a} (+) {b}");
            assert_eq!(ord::hprod(a, b), va.nat_mul(vb).to_ordinal(), "{a} (x) {b}");
        }
    }
}

#[test]
fn polynomial_model_agrees_below_omega_pow_omega_squared() {
    let pool: Vec<(Ordinal, Poly)> =
        pool().into_iter().filter_map(|a| Poly::from_ordinal(&a).map(|p| (a, p))).collect();
    assert!(pool.len() > 100);
    for (a, pa) in &pool {
        for (b, pb) in &pool {
            assert_eq!(a.cmp(b), pa.cmp(pb));
            assert_eq!(Poly::from_ordinal(&ord::hsum(a, b)).unwrap(), pa.nat_add(pb));
            assert_eq!(Poly::from_ordinal(&ord::hprod(a, b)).unwrap(), pa.nat_mul(pb));
        }
    }
}

#[test]
fn lemma_suite_has_no_violations() {
    for (name, violations) in lemma_suite() {
        assert_eq!(violations, 0, "{name}");
    }
}

#[test]
fn recursion_oracle_examples() {
    let w = w();
    assert_eq!(iterated_sum_by_recursion(&o(2), 1, 0), w);
    assert_eq!(iterated_sum_by_recursion(&w, 1, 1), cnf(&[(o(2), 1), (o(1), 1)]));
    assert_eq!(iterated_product_by_recursion(&o(2), 1, 3), cnf(&[(o(1), 8)]));
    assert_eq!(iterated_product_by_recursion(&w, 1, 0), cnf(&[(w.clone(), 1)]));
    assert_eq!(ord::cexp(&o(2), &w), w);
}

#[test]
fn towers_and_closure() {
    let t = ord::omega_tower(3).unwrap();
    assert_eq!(t.to_string(), "w^(w^w)");
    assert_eq!(ord::omega_tower(4).unwrap().to_string(), "w^(w^(w^w))");
    assert!(ord::is_multiplicatively_closed(&t));
    assert!(ord::is_additively_closed(&t));
    assert!(!ord::is_additively_closed(&ord::hsum(&t, &t)));
    assert!(ord::omega_tower(ord::MAX_TOWER + 1).is_err());
}

fn arb_exponent() -> impl Strategy<Value = Ordinal> {
    prop::sample::select(pool_exponents())
}

fn arb_ordinal() -> impl Strategy<Value = Ordinal> {
    prop::collection::vec((arb_exponent(), 0u32..5), 0..4).prop_map(|ps| cnf(&ps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn natural_sum_is_commutative_and_associative(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        prop_assert_eq!(ord::hsum(&a, &b), ord::hsum(&b, &a));
        prop_assert_eq!(ord::hsum(&ord::hsum(&a, &b), &c), ord::hsum(&a, &ord::hsum(&b, &c)));
        prop_assert_eq!(ord::hsum(&a, &b), nat_sum(&a, &b));
    }

    #[test]
    fn natural_product_distributes(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        prop_assert_eq!(ord::hprod(&a, &b), ord::hprod(&b, &a));
        prop_assert_eq!(ord::hprod(&a, &ord::hsum(&b, &c)), ord::hsum(&ord::hprod(&a, &b), &ord::hprod(&a, &c)));
        prop_assert_eq!(ord::hprod(&a, &b), nat_prod(&a, &b));
    }

    #[test]
    fn ordinal_sum_and_product_laws(a in arb_ordinal(), b in arb_ordinal(), c in arb_ordinal()) {
        prop_assert_eq!(ord::add(&ord::add(&a, &b), &c), ord::add(&a, &ord::add(&b, &c)));
        prop_assert_eq!(ord::mul(&ord::mul(&a, &b), &c), ord::mul(&a, &ord::mul(&b, &c)));
        prop_assert_eq!(ord::mul(&a, &ord::add(&b, &c)), ord::add(&ord::mul(&a, &b), &ord::mul(&a, &c)));
        prop_assert!(ord::add(&a, &b) <= ord::hsum(&a, &b));
        prop_assert!(ord::add(&a, &b) >= b);
    }

    #[test]
    fn exponent_laws(a in arb_ordinal(), k in 0u32..3, m in 0u32..3) {
        let (b, c) = (omega_k_plus_n(k, m), omega_k_plus_n(m, k));
        prop_assert_eq!(ord::pow(&a, &ord::add(&b, &c)), ord::mul(&ord::pow(&a, &b), &ord::pow(&a, &c)));
    }

    #[test]
    fn display_round_trips(a in arb_ordinal()) {
        prop_assert_eq!(parse_ordinal(&a.to_string()).unwrap(), a);
    }
}
