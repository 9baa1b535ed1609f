//! The reduction on random instances, against brute-force subset enumeration.

use std::collections::BTreeSet;

use bilevel_core::hardness::{
    binary_points, oracle_decide, phi_on_binary, reduce_to_bilevel, BinarySign, Instance, SubsetSums, Verdict,
};
use bilevel_core::scalar::{int, ratio};
use bilevel_core::Rational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = Instance> {
    (prop::collection::vec(1u64..=12, 1..7), 0u64..=20, 1u32..=3)
        .prop_filter_map("r ≤ k", |(q, big_r, r)| Instance::new(q, big_r, r).ok())
}

fn all_sums(q: &[u64]) -> BTreeSet<u64> {
    (0u32..1 << q.len()).map(|m| (0..q.len()).filter(|i| m >> i & 1 == 1).map(|i| q[i]).sum()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn table_matches_enumeration(inst in instance()) {
        let sums = SubsetSums::new(&inst.q, 10_000).unwrap();
        let brute = all_sums(&inst.q);
        for s in 0..=inst.q.iter().sum::<u64>() + 2 {
            prop_assert_eq!(sums.reachable(s), brute.contains(&s));
            if let Some(w) = sums.witness(s) {
                prop_assert_eq!(w.iter().map(|&i| inst.q[i]).sum::<u64>(), s);
                prop_assert_eq!(w.iter().collect::<BTreeSet<_>>().len(), w.len());
            }
        }
    }

    #[test]
    fn oracle_matches_enumeration(inst in instance()) {
        let brute = all_sums(&inst.q);
        let missing = (inst.big_r..=inst.interval_end()).find(|s| !brute.contains(s));
        let ans = oracle_decide(&inst, 10_000).unwrap();
        prop_assert_eq!(ans.verdict, if missing.is_some() { Verdict::Yes } else { Verdict::No });
        prop_assert_eq!(ans.missing_sum, missing);
    }

    #[test]
    fn certificate_always_holds(inst in instance()) {
        let (prog, cert) = reduce_to_bilevel(&inst).unwrap();
        prop_assert!(cert.holds());
        prop_assert_eq!((prog.p().degree(), prog.q().degree()), (5, 5));
    }

    #[test]
    fn binary_signs_follow_reachability(inst in instance()) {
        let (prog, _) = reduce_to_bilevel(&inst).unwrap();
        let sums = SubsetSums::new(&inst.q, 10_000).unwrap();
        for x in binary_points(inst.r) {
            let c = phi_on_binary(&inst, &x, &sums).unwrap();
            match c.sign {
                BinarySign::Zero { t } => {
                    let mut y = vec![int(1)];
                    y.extend(t.iter().map(|&b| int(b as i64)));
                    let (p, q) = prog.objectives_at(&x, &y).unwrap();
                    prop_assert!(p.is_zero() && q.is_zero());
                }
                BinarySign::Negative { h_estimate, h_lower_bound } => {
                    prop_assert!(!sums.reachable(c.target_sum));
                    let est = h_estimate.unwrap();
                    prop_assert!(est > 0.0);
                    if let Some(lb) = h_lower_bound {
                        prop_assert!(lb <= est + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn q_is_nonnegative_on_the_box(inst in instance(), seed in prop::collection::vec(0i64..=8, 12)) {
        let (prog, _) = reduce_to_bilevel(&inst).unwrap();
        let n = prog.n() + prog.m();
        let pt: Vec<Rational> = (0..n).map(|i| ratio(seed[i % seed.len()], 8)).collect();
        let (xs, ys) = pt.split_at(prog.n());
        let (p, q) = prog.objectives_at(xs, ys).unwrap();
        prop_assert!(!q.is_negative());
        // z = 0 gives P = 1
        let mut y0 = ys.to_vec();
        y0[0] = int(0);
        prop_assert_eq!(prog.objectives_at(xs, &y0).unwrap().0, int(1));
        let _ = p;
    }
}
