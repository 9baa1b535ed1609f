//! Reference evaluation of target functions.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::scalar::{format_rational, int, Rational};
use crate::semialg::univariate::{cauchy_bound, isolate_roots, RealRoot, UPoly};
use crate::semialg::{ClosedSASet, PiecewisePolySpec, SAFunctionSpec};
use crate::RatPoly;

/// Closed interval `[lo, hi]` for the last coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub lo: Rational,
    pub hi: Rational,
}

impl Window {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        Window { lo, hi }
    }

    pub fn symmetric(r: Rational) -> Self {
        Window { lo: -r.clone(), hi: r }
    }
}

/// Restrict a polynomial over `x.len() + 1` variables to the last one.
pub fn restrict_to_last(p: &RatPoly, x: &[Rational]) -> Result<UPoly> {
    let mut fixed: Vec<Option<Rational>> = x.iter().cloned().map(Some).collect();
    fixed.push(None);
    let r = p.restrict(&fixed)?;
    Ok(UPoly::new(r.univariate_coeffs(0)))
}

fn product_of_nonconstant<'a>(polys: impl IntoIterator<Item = &'a UPoly>) -> Option<UPoly> {
    let mut acc: Option<UPoly> = None;
    for p in polys {
        if p.degree() >= 1 {
            acc = Some(match acc {
                None => p.clone(),
                Some(a) => a.mul(p),
            });
        }
    }
    acc.map(|p| p.square_free())
}

/// A rational strictly between two distinct ordered roots.
fn between(a: &mut RealRoot, b: &mut RealRoot) -> Rational {
    RealRoot::separate(a, b);
    (a.upper().clone() + b.lower().clone()) / int(2)
}

/// Whether `{t in window : q_j(t) > 0 for all j}` is nonempty.
fn open_fiber_nonempty(strict: &[UPoly], window: &Window, tol: &Rational) -> bool {
    let holds = |t: &Rational| strict.iter().all(|q| q.sign_at(t) == Ordering::Greater);
    let mut seq = vec![RealRoot::Exact(window.lo.clone())];
    if let Some(prod) = product_of_nonconstant(strict) {
        for r in isolate_roots(&prod, &window.lo, &window.hi, tol) {
            if r.exact() != Some(&window.lo) && r.exact() != Some(&window.hi) {
                seq.push(r);
            }
        }
    }
    if window.hi != window.lo {
        seq.push(RealRoot::Exact(window.hi.clone()));
    }
    for r in &seq {
        if let Some(v) = r.exact() {
            if holds(v) {
                return true;
            }
        }
    }
    for k in 1..seq.len() {
        let (left, right) = seq.split_at_mut(k);
        let m = between(&mut left[k - 1], &mut right[0]);
        if holds(&m) {
            return true;
        }
    }
    false
}

/// Evaluate an extended-real semi-algebraic function at `x`.
///
/// Without an explicit window the spec's growth bounds give `[-(B + ‖x‖^N), B + ‖x‖^N]`.
/// Irrational values are returned as the midpoint of an isolating interval of width ≤ `tol`.
pub fn target_eval(
    spec: &SAFunctionSpec,
    x: &[Rational],
    window: Option<&Window>,
    tol: &Rational,
) -> Result<Extended<Rational>> {
    let in_dom = spec.dom().contains(x)?;
    let in_plus = spec.dom_plus().contains(x)?;
    let in_minus = spec.dom_minus().contains(x)?;
    let count = [in_dom, in_plus, in_minus].iter().filter(|b| **b).count();
    if count != 1 {
        return Err(Error::DomainInconsistent { count });
    }
    if in_plus {
        return Ok(Extended::PosInf);
    }
    if in_minus {
        return Ok(Extended::NegInf);
    }
    let mut restricted = Vec::new();
    for piece in spec.graph().pieces() {
        let eq = restrict_to_last(piece.equality(), x)?;
        let strict = piece.strict().iter().map(|q| restrict_to_last(q, x)).collect::<Result<Vec<_>>>()?;
        restricted.push((eq, strict));
    }
    let window = match (window, spec.growth()) {
        (Some(w), _) => w.clone(),
        (None, Some(g)) => Window::symmetric(g.scale_at(x)),
        // Beyond every root of every restricted polynomial all signs are constant, so this
        // window sees every isolated point and every open fiber.
        (None, None) => root_window(restricted.iter().flat_map(|(e, s)| std::iter::once(e).chain(s))),
    };
    let mut pieces = Vec::new();
    for (eq, strict) in restricted {
        if eq.is_zero() {
            if open_fiber_nonempty(&strict, &window, tol) {
                return Err(Error::FiberNotFinite);
            }
            continue;
        }
        if eq.degree() >= 1 {
            pieces.push((eq, strict));
        }
    }
    let mut survivors = Vec::new();
    if let Some(prod) = product_of_nonconstant(pieces.iter().map(|(e, _)| e)) {
        for mut root in isolate_roots(&prod, &window.lo, &window.hi, tol) {
            let ok = pieces.iter().any(|(eq, strict)| {
                root.sign_of(eq) == Ordering::Equal && strict.iter().all(|q| root.sign_of(q) == Ordering::Greater)
            });
            if ok {
                root.refine_to(tol);
                survivors.push(root);
            }
        }
    }
    match survivors.len() {
        0 => Err(Error::NoRootInWindow { lo: format_rational(&window.lo), hi: format_rational(&window.hi) }),
        1 => Ok(Extended::Finite(survivors[0].approx())),
        count => Err(Error::MultipleRoots { count }),
    }
}

/// Window strictly containing every real root of the given polynomials.
pub fn root_window<'a>(polys: impl IntoIterator<Item = &'a UPoly>) -> Window {
    let mut r = int(1);
    for p in polys {
        if p.degree() >= 1 {
            let b = cauchy_bound(p);
            if b > r {
                r = b;
            }
        }
    }
    Window::symmetric(r + int(1))
}

/// Smallest `t` with `(x, t)` in the closed set over the whole line.
pub fn closure_global_min(closed: &ClosedSASet, x: &[Rational], tol: &Rational) -> Result<Extended<RealRoot>> {
    let restricted: Vec<UPoly> = closed
        .clauses()
        .iter()
        .flatten()
        .map(|p| restrict_to_last(p, x))
        .collect::<Result<_>>()?;
    let window = root_window(&restricted);
    Ok(match closure_fiber_min(closed, x, &window, tol)? {
        None => Extended::PosInf,
        Some(r) if r.exact() == Some(&window.lo) => Extended::NegInf,
        Some(r) => Extended::Finite(r),
    })
}

/// Smallest `t` in `[lo, hi]` with `(x, t)` in the closed set, or `None` if the fiber is empty.
pub fn closure_fiber_min(
    closed: &ClosedSASet,
    x: &[Rational],
    window: &Window,
    tol: &Rational,
) -> Result<Option<RealRoot>> {
    let clauses: Vec<Vec<UPoly>> = closed
        .clauses()
        .iter()
        .map(|c| c.iter().map(|p| restrict_to_last(p, x)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut candidates = vec![RealRoot::Exact(window.lo.clone())];
    if let Some(prod) = product_of_nonconstant(clauses.iter().flatten()) {
        for r in isolate_roots(&prod, &window.lo, &window.hi, tol) {
            if r.exact() != Some(&window.lo) {
                candidates.push(r);
            }
        }
    }
    for mut cand in candidates {
        let inside = clauses
            .iter()
            .any(|c| c.iter().all(|p| cand.sign_of(p) != Ordering::Less));
        if inside {
            cand.refine_to(tol);
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

/// `f(x) = P_i(x)` for the unique cell containing `x`.
pub fn piecewise_eval(spec: &PiecewisePolySpec, x: &[Rational]) -> Result<Rational> {
    let cells = spec.containing_cells(x)?;
    if cells.len() != 1 {
        return Err(Error::NotPartition { count: cells.len() });
    }
    spec.polys()[cells[0]].evaluate(x)
}

/// Closed graph of a piecewise function: one clause per closure clause of each cell, extended
/// by `t - P_i ≥ 0` and `P_i - t ≥ 0`.
pub fn graph_closure_of(spec: &PiecewisePolySpec) -> Result<ClosedSASet> {
    let closures = spec
        .closures()
        .ok_or_else(|| Error::RecipePrecondition("piecewise spec carries no closures".into()))?;
    let n = spec.n();
    let map: Vec<usize> = (0..n).collect();
    let t = RatPoly::var(n + 1, n);
    let mut clauses = Vec::new();
    for (closure, poly) in closures.iter().zip(spec.polys()) {
        let p = poly.embed(n + 1, &map)?;
        for clause in closure.clauses() {
            let mut c: Vec<RatPoly> = clause.iter().map(|q| q.embed(n + 1, &map)).collect::<Result<_>>()?;
            c.push(&t - &p);
            c.push(&p - &t);
            clauses.push(c);
        }
    }
    ClosedSASet::new(n + 1, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::semialg::{BasicSet, GrowthBounds, SASet};

    fn tol() -> Rational {
        ratio(1, 1 << 40)
    }

    fn step_spec() -> SAFunctionSpec {
        // graph: {t - 1 = 0, -x > 0} ∪ {t = 0, x = 0 via x^2... } ∪ {t = 0, x > 0}
        let x = RatPoly::var(2, 0);
        let t = RatPoly::var(2, 1);
        let one = RatPoly::one(2);
        let graph = SASet::new(
            2,
            vec![
                BasicSet::new(&t - &one, vec![-&x]).unwrap(),
                BasicSet::new(&t.square() + &x.square(), vec![]).unwrap(),
                BasicSet::new(t.clone(), vec![x.clone()]).unwrap(),
            ],
        )
        .unwrap();
        SAFunctionSpec::finite(1, graph).unwrap().with_growth(GrowthBounds::new(int(1), 2).unwrap())
    }

    #[test]
    fn polynomial_graph() {
        let x = RatPoly::var(1, 0);
        let spec = SAFunctionSpec::of_polynomial(&x.square());
        let w = Window::new(int(-100), int(100));
        assert_eq!(target_eval(&spec, &[int(3)], Some(&w), &tol()).unwrap(), Extended::Finite(int(9)));
        assert_eq!(target_eval(&spec, &[ratio(-7, 3)], Some(&w), &tol()).unwrap(), Extended::Finite(ratio(49, 9)));
    }

    #[test]
    fn infinite_parts() {
        let x = RatPoly::var(1, 0);
        let spec = SAFunctionSpec::new(
            1,
            SAFunctionSpec::of_polynomial(&x).graph().clone(),
            SASet::single(BasicSet::open(1, vec![-&x]).unwrap()),
            SASet::single(BasicSet::open(1, vec![x.clone()]).unwrap()),
            SASet::single(BasicSet::zero_set(x.clone())),
        )
        .unwrap();
        let w = Window::new(int(-10), int(10));
        assert_eq!(target_eval(&spec, &[int(1)], Some(&w), &tol()).unwrap(), Extended::PosInf);
        assert_eq!(target_eval(&spec, &[int(0)], Some(&w), &tol()).unwrap(), Extended::NegInf);
        assert_eq!(target_eval(&spec, &[int(-2)], Some(&w), &tol()).unwrap(), Extended::Finite(int(-2)));
    }

    #[test]
    fn step_function() {
        let spec = step_spec();
        assert_eq!(target_eval(&spec, &[int(-1)], None, &tol()).unwrap(), Extended::Finite(int(1)));
        assert_eq!(target_eval(&spec, &[int(0)], None, &tol()).unwrap(), Extended::Finite(int(0)));
        assert_eq!(target_eval(&spec, &[int(5)], None, &tol()).unwrap(), Extended::Finite(int(0)));
    }

    #[test]
    fn window_errors() {
        let x = RatPoly::var(1, 0);
        let spec = SAFunctionSpec::of_polynomial(&x.square());
        let w = Window::new(int(-1), int(1));
        assert!(matches!(target_eval(&spec, &[int(3)], Some(&w), &tol()), Err(Error::NoRootInWindow { .. })));
        // t^2 - x = 0 has two roots for x > 0
        let t = RatPoly::var(2, 1);
        let bad = SAFunctionSpec::finite(1, SASet::single(BasicSet::zero_set(&t.square() - &RatPoly::var(2, 0)))).unwrap();
        let w = Window::new(int(-10), int(10));
        assert_eq!(target_eval(&bad, &[int(4)], Some(&w), &tol()), Err(Error::MultipleRoots { count: 2 }));
        let open = SAFunctionSpec::finite(1, SASet::single(BasicSet::open(2, vec![t]).unwrap())).unwrap();
        assert_eq!(target_eval(&open, &[int(0)], Some(&w), &tol()), Err(Error::FiberNotFinite));
    }

    #[test]
    fn irrational_value() {
        let t = RatPoly::var(2, 1);
        let x = RatPoly::var(2, 0);
        // t = sqrt(x) for x > 0: t^2 - x = 0, t > 0
        let spec = SAFunctionSpec::new(
            1,
            SASet::single(BasicSet::new(&t.square() - &x, vec![t.clone()]).unwrap()),
            SASet::single(BasicSet::open(1, vec![RatPoly::var(1, 0)]).unwrap()),
            SASet::empty(1),
            SASet::single(BasicSet::open(1, vec![-&RatPoly::var(1, 0)]).unwrap()),
        )
        .unwrap();
        let mut w = Window::new(int(-10), int(10));
        let v = target_eval(&spec, &[int(2)], Some(&w), &tol()).unwrap();
        assert!((v.to_f64() - 2f64.sqrt()).abs() < 1e-10);
        w.lo = int(0);
        assert!(matches!(target_eval(&spec, &[int(0)], Some(&w), &tol()), Err(Error::DomainInconsistent { count: 0 })));
    }

    #[test]
    fn closure_minimum() {
        // clauses {x ≥ 0, t ≥ 0, -t ≥ 0} ∪ {-x ≥ 0, t - 1 ≥ 0, 1 - t ≥ 0}
        let x = RatPoly::var(2, 0);
        let t = RatPoly::var(2, 1);
        let one = RatPoly::one(2);
        let c = ClosedSASet::new(
            2,
            vec![vec![x.clone(), t.clone(), -&t], vec![-&x, &t - &one, &one - &t]],
        )
        .unwrap();
        let w = Window::new(int(-2), int(2));
        let at = |v: i64| closure_fiber_min(&c, &[int(v)], &w, &tol()).unwrap().map(|r| r.approx());
        assert_eq!(at(-1), Some(int(1)));
        assert_eq!(at(0), Some(int(0)));
        assert_eq!(at(1), Some(int(0)));
        let narrow = Window::new(int(2), int(3));
        assert_eq!(closure_fiber_min(&c, &[int(1)], &narrow, &tol()).unwrap(), None);
    }

    #[test]
    fn default_window_from_roots() {
        let x = RatPoly::var(1, 0);
        let spec = SAFunctionSpec::of_polynomial(&x.square().scale(&int(1000)));
        assert_eq!(target_eval(&spec, &[int(30)], None, &tol()).unwrap(), Extended::Finite(int(900_000)));
        let t = RatPoly::var(2, 1);
        let open = SAFunctionSpec::finite(1, SASet::single(BasicSet::open(2, vec![&t - &RatPoly::constant(2, int(50))]).unwrap())).unwrap();
        assert_eq!(target_eval(&open, &[int(0)], None, &tol()), Err(Error::FiberNotFinite));
    }

    #[test]
    fn global_closure_min() {
        let x = RatPoly::var(2, 0);
        let t = RatPoly::var(2, 1);
        // t ≥ x^2 has minimum x^2; t ≤ x is unbounded below; t^2 + 1 ≤ 0 is empty
        let up = ClosedSASet::new(2, vec![vec![&t - &x.square()]]).unwrap();
        let down = ClosedSASet::new(2, vec![vec![&x - &t]]).unwrap();
        let none = ClosedSASet::new(2, vec![vec![-&(&t.square() + &RatPoly::one(2))]]).unwrap();
        let v = closure_global_min(&up, &[int(7)], &tol()).unwrap();
        assert_eq!(v.map(|r| r.approx()), Extended::Finite(int(49)));
        assert!(matches!(closure_global_min(&down, &[int(7)], &tol()).unwrap(), Extended::NegInf));
        assert!(matches!(closure_global_min(&none, &[int(7)], &tol()).unwrap(), Extended::PosInf));
    }

    #[test]
    fn piecewise_abs() {
        let x = RatPoly::var(1, 0);
        let spec = PiecewisePolySpec::new(
            1,
            vec![
                SASet::single(BasicSet::open(1, vec![-&x]).unwrap()),
                SASet::new(1, vec![BasicSet::zero_set(x.clone()), BasicSet::open(1, vec![x.clone()]).unwrap()]).unwrap(),
            ],
            vec![-&x, x.clone()],
            None,
        )
        .unwrap();
        assert_eq!(piecewise_eval(&spec, &[int(-2)]).unwrap(), int(2));
        assert_eq!(piecewise_eval(&spec, &[int(0)]).unwrap(), int(0));
        let one = PiecewisePolySpec::new(1, vec![SASet::whole(1)], vec![RatPoly::constant(1, int(7))], None).unwrap();
        assert_eq!(piecewise_eval(&one, &[ratio(5, 3)]).unwrap(), int(7));
    }
}
