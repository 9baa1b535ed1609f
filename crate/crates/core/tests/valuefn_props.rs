//! The generic evaluator against closed-form value functions, and probe behaviour.

use bilevel_core::encoder::{interval, BilevelProgram, Mode};
use bilevel_core::scalar::{int, ratio, rational_to_f64};
use bilevel_core::valuefn::{eval_generic, probe_function, EvalConfig, ProbeConfig, Semicontinuity};
use bilevel_core::{RatPoly, Rational};
use proptest::prelude::*;

/// `Q = (t - a - b·x)²` on `[-2, 2]`, `P = t`: the value is `a + b·x` clipped to the box.
fn shifted(a: &Rational, b: &Rational, mode: Mode) -> BilevelProgram {
    let x = RatPoly::var(2, 0);
    let t = RatPoly::var(2, 1);
    let target = &RatPoly::constant(2, a.clone()) + &x.scale(b);
    let q = (&t - &target).square();
    BilevelProgram::new(1, 1, t, q, vec![interval(int(-2), int(2))], mode).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unique_minimizer_is_found(a in -12i64..=12, b in -4i64..=4, x in -8i64..=8) {
        let (a, b, x) = (ratio(a, 8), ratio(b, 4), ratio(x, 8));
        let want = rational_to_f64(&(&a + &b * &x)).clamp(-2.0, 2.0);
        for mode in [Mode::Optimistic, Mode::Pessimistic] {
            let r = eval_generic(&shifted(&a, &b, mode), &[x.clone()], &EvalConfig::default()).unwrap();
            prop_assert!((r.value.to_f64() - want).abs() < 1e-3, "{mode}: {:?} vs {want}", r.value);
        }
    }

    #[test]
    fn same_seed_same_answer(a in -12i64..=12, seed in any::<u64>()) {
        let prog = shifted(&ratio(a, 8), &int(1), Mode::Optimistic);
        let cfg = EvalConfig { seed, ..EvalConfig::default() };
        let one = eval_generic(&prog, &[int(0)], &cfg).unwrap();
        let two = eval_generic(&prog, &[int(0)], &cfg).unwrap();
        prop_assert_eq!(one.value, two.value);
        prop_assert_eq!(one.argmin_sample, two.argmin_sample);
    }

    #[test]
    fn continuous_functions_pass_both_probes(c in prop::collection::vec(-5i64..=5, 1..4), x in -16i64..=16) {
        let f = RatPoly::from_terms(1, c.iter().enumerate().map(|(i, v)| (vec![i as u32], int(*v)))).unwrap();
        let eval = |y: &[Rational]| Ok(rational_to_f64(&f.evaluate(y)?));
        let cfg = ProbeConfig::default();
        let pt = [ratio(x, 8)];
        prop_assert!(probe_function(eval, Semicontinuity::Lower, &pt, &cfg).unwrap().passed());
        prop_assert!(probe_function(eval, Semicontinuity::Upper, &pt, &cfg).unwrap().passed());
    }
}

#[test]
fn ties_split_the_modes() {
    // argmin {±1/2}: optimistic takes -1/2, pessimistic +1/2
    let t = RatPoly::var(2, 1);
    let q = (&t.square() - &RatPoly::constant(2, ratio(1, 4))).square();
    for (mode, want) in [(Mode::Optimistic, -0.5), (Mode::Pessimistic, 0.5)] {
        let prog = BilevelProgram::new(1, 1, t.clone(), q.clone(), vec![interval(int(-1), int(1))], mode).unwrap();
        let v = eval_generic(&prog, &[int(3)], &EvalConfig::default()).unwrap().value.to_f64();
        assert!((v - want).abs() < 1e-3, "{mode}: {v}");
    }
}
