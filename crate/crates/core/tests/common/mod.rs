//! Target functions and sets shared by the integration suites.
#![allow(dead_code)]

use bilevel_core::scalar::{int, ratio};
use bilevel_core::semialg::{BasicSet, ClosedSASet, GrowthBounds, PiecewisePolySpec, SAFunctionSpec, SASet};
use bilevel_core::{RatPoly, Rational};

pub fn x1() -> RatPoly {
    RatPoly::var(1, 0)
}

fn c1(v: Rational) -> RatPoly {
    RatPoly::constant(1, v)
}

pub fn unit_bounds() -> GrowthBounds {
    GrowthBounds::new(int(1), 2).unwrap()
}

/// 1 on `x < 0`, 0 on `x ≥ 0`: lower semicontinuous.
pub fn step_spec() -> SAFunctionSpec {
    let x = RatPoly::var(2, 0);
    let t = RatPoly::var(2, 1);
    let one = RatPoly::one(2);
    let graph = SASet::new(
        2,
        vec![
            BasicSet::new(&t - &one, vec![-&x]).unwrap(),
            BasicSet::new(t.clone(), vec![x.clone()]).unwrap(),
            BasicSet::zero_set(&x.square() + &t.square()),
        ],
    )
    .unwrap();
    SAFunctionSpec::finite(1, graph).unwrap().with_growth(unit_bounds()).normalize()
}

/// Closed graph of the step: `{x ≤ 0, t = 1} ∪ {x ≥ 0, t = 0}`.
pub fn step_closure() -> ClosedSASet {
    let x = RatPoly::var(2, 0);
    let t = RatPoly::var(2, 1);
    let one = RatPoly::one(2);
    ClosedSASet::new(2, vec![vec![-&x, &t - &one, &one - &t], vec![x.clone(), t.clone(), -&t]]).unwrap()
}

/// `[-1, 1]` as a union of basic sets.
fn middle_cell() -> SASet {
    let x = x1();
    let one = RatPoly::one(1);
    SASet::new(
        1,
        vec![
            BasicSet::open(1, vec![&x + &one, &one - &x]).unwrap(),
            BasicSet::zero_set(&x + &one),
            BasicSet::zero_set(&x - &one),
        ],
    )
    .unwrap()
}

/// `x²` left of −1, `x²/2 − 1` on `[−1, 1]`, `2 − x²` right of 1. Lower semicontinuous, drops
/// at both breakpoints.
pub fn quadratic_pieces() -> PiecewisePolySpec {
    let x = x1();
    let one = RatPoly::one(1);
    let cells = vec![
        SASet::single(BasicSet::open(1, vec![&(-&x) - &one]).unwrap()),
        middle_cell(),
        SASet::single(BasicSet::open(1, vec![&x - &one]).unwrap()),
    ];
    let polys = vec![x.square(), &x.square().scale(&ratio(1, 2)) - &one, &c1(int(2)) - &x.square()];
    let closures = vec![
        ClosedSASet::new(1, vec![vec![&(-&x) - &one]]).unwrap(),
        ClosedSASet::new(1, vec![vec![&x + &one, &one - &x]]).unwrap(),
        ClosedSASet::new(1, vec![vec![&x - &one]]).unwrap(),
    ];
    PiecewisePolySpec::new(1, cells, polys, Some(closures)).unwrap()
}

/// 1 on `x ≤ 0`, 0 on `x > 0`: upper semicontinuous, so only the pessimistic mode fits it.
pub fn usc_step() -> PiecewisePolySpec {
    let x = x1();
    let cells = vec![
        SASet::new(1, vec![BasicSet::open(1, vec![-&x]).unwrap(), BasicSet::zero_set(x.clone())]).unwrap(),
        SASet::single(BasicSet::open(1, vec![x.clone()]).unwrap()),
    ];
    let closures =
        vec![ClosedSASet::new(1, vec![vec![-&x]]).unwrap(), ClosedSASet::new(1, vec![vec![x.clone()]]).unwrap()];
    PiecewisePolySpec::new(1, cells, vec![RatPoly::one(1), RatPoly::zero(1)], Some(closures)).unwrap()
}

/// A named basic set together with rational points known to lie on it.
pub struct IndicatorCase {
    pub name: &'static str,
    pub set: BasicSet,
    pub on_set: Vec<Vec<Rational>>,
}

/// Rational points of the unit circle from the slopes `s`.
fn circle_point(s: Rational) -> Vec<Rational> {
    let den = int(1) + &s * &s;
    vec![(int(1) - &s * &s) / &den, (int(2) * &s) / den]
}

pub fn indicator_cases() -> Vec<IndicatorCase> {
    let x = RatPoly::var(2, 0);
    let y = RatPoly::var(2, 1);
    let one2 = RatPoly::one(2);
    vec![
        IndicatorCase {
            name: "point",
            set: BasicSet::zero_set(&x1() - &c1(ratio(1, 2))),
            on_set: vec![vec![ratio(1, 2)]],
        },
        IndicatorCase {
            name: "open half-line",
            set: BasicSet::open(1, vec![x1()]).unwrap(),
            on_set: (1..=6).map(|k| vec![ratio(k, 3)]).collect(),
        },
        IndicatorCase {
            name: "parabola interior",
            set: BasicSet::open(2, vec![&y - &x.square()]).unwrap(),
            on_set: (-3..=3).map(|k| vec![ratio(k, 2), ratio(k * k, 4) + ratio(1, 8)]).collect(),
        },
        IndicatorCase {
            name: "circle",
            set: BasicSet::zero_set(&(&x.square() + &y.square()) - &one2),
            on_set: (-4..=4).map(|k| circle_point(ratio(k, 3))).collect(),
        },
        IndicatorCase {
            name: "open segment",
            set: BasicSet::new(&y - &x, vec![x.clone(), &one2 - &x]).unwrap(),
            on_set: (1..=7).map(|k| vec![ratio(k, 8), ratio(k, 8)]).collect(),
        },
    ]
}

/// `f(x) = x` with the point `x = 1` moved to `+∞`.
pub fn punctured_identity() -> SAFunctionSpec {
    let x = RatPoly::var(2, 0);
    let t = RatPoly::var(2, 1);
    let one = RatPoly::one(2);
    let away = (&x - &one).square();
    let graph = SASet::single(BasicSet::new(&t - &x, vec![away]).unwrap());
    let dom = SASet::single(BasicSet::open(1, vec![(&x1() - &RatPoly::one(1)).square()]).unwrap());
    let plus = SASet::single(BasicSet::zero_set(&x1() - &RatPoly::one(1)));
    SAFunctionSpec::new(1, graph, dom, plus, SASet::empty(1)).unwrap().normalize()
}

/// Lattice points `k/den` covering `[lo, hi]`.
pub fn grid(lo: i64, hi: i64, count: usize) -> Vec<Vec<Rational>> {
    let span = int(hi - lo);
    (0..count).map(|i| vec![int(lo) + &span * ratio(i as i64, count as i64 - 1)]).collect()
}
