//! Algebraic laws of the polynomial core, checked on random small polynomials.

use bilevel_core::poly::{coefficient_vector, monomial_map};
use bilevel_core::scalar::ratio;
use bilevel_core::{MonomialBasis, Polynomial, RatPoly, Rational};
use proptest::prelude::*;

const VARS: usize = 3;

fn coeff() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn poly() -> impl Strategy<Value = RatPoly> {
    prop::collection::vec((prop::collection::vec(0u32..=2, VARS), coeff()), 0..6)
        .prop_map(|terms| RatPoly::from_terms(VARS, terms).unwrap())
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(coeff(), VARS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn evaluation_is_a_homomorphism(a in poly(), b in poly(), x in point()) {
        let (va, vb) = (a.evaluate(&x).unwrap(), b.evaluate(&x).unwrap());
        prop_assert_eq!((&a + &b).evaluate(&x).unwrap(), &va + &vb);
        prop_assert_eq!((&a * &b).evaluate(&x).unwrap(), &va * &vb);
        prop_assert_eq!(a.pow(3).evaluate(&x).unwrap(), &va * &va * &va);
    }

    #[test]
    fn degree_of_product(a in poly(), b in poly()) {
        prop_assume!(!a.is_zero() && !b.is_zero());
        prop_assert_eq!((&a * &b).degree(), a.degree() + b.degree());
    }

    #[test]
    fn restrict_then_evaluate(a in poly(), x in point(), mask in prop::collection::vec(any::<bool>(), VARS)) {
        let fixed: Vec<Option<Rational>> = x.iter().zip(&mask).map(|(v, &m)| m.then(|| v.clone())).collect();
        let rest: Vec<Rational> = x.iter().zip(&mask).filter(|(_, &m)| !m).map(|(v, _)| v.clone()).collect();
        let r = a.restrict(&fixed).unwrap();
        prop_assert_eq!(r.num_vars(), rest.len());
        prop_assert_eq!(r.evaluate(&rest).unwrap(), a.evaluate(&x).unwrap());
    }

    #[test]
    fn substitution_commutes_with_evaluation(a in poly(), q in poly(), x in point(), var in 0..VARS) {
        let s = a.substitute(var, &q).unwrap();
        let mut y = x.clone();
        y[var] = q.evaluate(&x).unwrap();
        prop_assert_eq!(s.evaluate(&x).unwrap(), a.evaluate(&y).unwrap());
    }

    #[test]
    fn json_round_trip(a in poly()) {
        let text = serde_json::to_string(&a).unwrap();
        let back: RatPoly = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
        prop_assert_eq!(back, a);
    }

    #[test]
    fn moment_vector_linearizes(a in poly(), x in point()) {
        let basis = MonomialBasis::new(VARS, 6);
        let c = coefficient_vector(&a, &basis).unwrap();
        let m = monomial_map(&x, &basis).unwrap();
        let dot: Rational = c.iter().zip(&m).map(|(u, v)| u * v).sum();
        prop_assert_eq!(dot, a.evaluate(&x).unwrap());
    }

    #[test]
    fn rank_unrank(n in 1usize..5, d in 0u32..6, pick in any::<u64>()) {
        let basis = MonomialBasis::new(n, d);
        let r = pick as u128 % basis.len();
        let e = basis.unrank(r).unwrap();
        prop_assert_eq!(basis.rank(&e).unwrap(), r);
    }

    #[test]
    fn float_evaluation_tracks_exact(a in poly(), x in point()) {
        let xf: Vec<f64> = x.iter().map(bilevel_core::scalar::rational_to_f64).collect();
        let exact = bilevel_core::scalar::rational_to_f64(&a.evaluate(&x).unwrap());
        let fast: Polynomial<f64> = a.to_f64();
        prop_assert!((fast.evaluate(&xf).unwrap() - exact).abs() <= 1e-9 * (1.0 + exact.abs()));
    }
}
