//! Membership, root isolation and disjointification on random inputs.

mod common;

use bilevel_core::scalar::{int, ratio};
use bilevel_core::semialg::univariate::{isolate_roots, Sturm, UPoly};
use bilevel_core::semialg::{disjointify, target_eval, BasicSet, SAFunctionSpec, SASet, DEFAULT_POOL_CAP};
use bilevel_core::valuefn::exact_tolerance;
use bilevel_core::{Extended, RatPoly, Rational};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn small() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn upoly() -> impl Strategy<Value = UPoly> {
    prop::collection::vec(-6i64..=6, 2..6)
        .prop_map(|c| UPoly::new(c.into_iter().map(int).collect()))
        .prop_filter("nonconstant", |p| p.degree() >= 1)
}

fn plane_poly() -> impl Strategy<Value = RatPoly> {
    prop::collection::vec((prop::collection::vec(0u32..=2, 2), -3i64..=3), 1..4)
        .prop_map(|terms| RatPoly::from_terms(2, terms.into_iter().map(|(e, c)| (e, int(c)))).unwrap())
}

fn basic_set() -> impl Strategy<Value = BasicSet> {
    (prop::option::of(plane_poly()), prop::collection::vec(plane_poly(), 0..3)).prop_map(|(eq, strict)| {
        BasicSet::new(eq.unwrap_or_else(|| RatPoly::zero(2)), strict).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn isolated_roots_bracket_sign_changes(p in upoly()) {
        let (lo, hi) = (int(-20), int(20));
        let roots = isolate_roots(&p, &lo, &hi, &ratio(1, 1 << 20));
        prop_assert_eq!(roots.len(), Sturm::new(&p).count(&lo, &hi));
        for w in roots.windows(2) {
            prop_assert!(w[0].approx() < w[1].approx());
        }
        for r in &roots {
            match r.exact() {
                Some(v) => prop_assert!(p.eval(v).is_zero()),
                None => prop_assert!((p.eval(&r.approx())).abs() < Rational::from_integer(1.into())),
            }
        }
    }

    #[test]
    fn disjoint_cells_cover_the_union(pieces in prop::collection::vec(basic_set(), 1..4), pts in prop::collection::vec((small(), small()), 40)) {
        let union = SASet::new(2, pieces).unwrap();
        let cells = disjointify(&union, DEFAULT_POOL_CAP).unwrap();
        for (a, b) in pts {
            let x = [a, b];
            let owners = cells.iter().filter(|c| c.contains(&x).unwrap()).count();
            prop_assert!(owners <= 1);
            prop_assert_eq!(owners == 1, union.contains(&x).unwrap());
        }
    }

    #[test]
    fn polynomial_spec_evaluates_to_the_polynomial(c in prop::collection::vec(-5i64..=5, 1..4), x in small()) {
        let f = RatPoly::from_terms(1, c.iter().enumerate().map(|(i, v)| (vec![i as u32], int(*v)))).unwrap();
        let spec = SAFunctionSpec::of_polynomial(&f);
        let v = target_eval(&spec, &[x.clone()], None, &exact_tolerance()).unwrap();
        prop_assert_eq!(v, Extended::Finite(f.evaluate(&[x]).unwrap()));
    }

    #[test]
    fn normalization_preserves_membership(x in small()) {
        let spec = common::punctured_identity();
        let norm = spec.normalize();
        let pt = [x];
        prop_assert_eq!(spec.dom().contains(&pt).unwrap(), norm.dom().contains(&pt).unwrap());
        prop_assert_eq!(spec.dom_plus().contains(&pt).unwrap(), norm.dom_plus().contains(&pt).unwrap());
    }

    #[test]
    fn spec_files_round_trip(s in basic_set()) {
        let text = serde_json::to_string(&s).unwrap();
        let back: BasicSet = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}
