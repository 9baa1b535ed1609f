//! Floating evaluation for the grid path: sparse terms, compensated sums, exact univariate
//! restrictions along one coordinate.

use std::collections::BTreeSet;

use crate::scalar::{rational_to_f64, Scalar};
use crate::RatPoly;

/// `(sparse exponents, coefficient)`.
type Term = (Vec<(usize, u32)>, f64);

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FastPoly {
    terms: Vec<Term>,
}

impl FastPoly {
    pub fn from_rational(p: &RatPoly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let e = m.exponents().iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e)).collect();
                (e, rational_to_f64(c))
            })
            .collect();
        FastPoly { terms }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        self.terms.iter().flat_map(|(e, _)| e.iter().map(|(i, _)| *i)).collect()
    }

    /// Split off the terms touching `vars`; the rest stays in `self`.
    pub fn take_terms(&mut self, vars: &BTreeSet<usize>) -> FastPoly {
        let (taken, kept): (Vec<Term>, Vec<Term>) =
            self.terms.drain(..).partition(|(e, _)| e.iter().any(|(i, _)| vars.contains(i)));
        self.terms = kept;
        FastPoly { terms: taken }
    }

    /// Variable sets of the individual monomials.
    pub fn supports(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.terms.iter().map(|(e, _)| e.iter().map(|(i, _)| *i).collect())
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        f64::sum_all(self.terms.iter().map(|(e, c)| e.iter().fold(*c, |acc, &(i, k)| acc * y[i].powi(k as i32))))
    }

    /// Coefficients of `s ↦ self(y with y_k = s)`, lowest degree first.
    pub fn along(&self, k: usize, y: &[f64]) -> Vec<f64> {
        let mut parts: Vec<Vec<f64>> = Vec::new();
        for (e, c) in &self.terms {
            let mut v = *c;
            let mut deg = 0usize;
            for &(i, p) in e {
                if i == k {
                    deg = p as usize;
                } else {
                    v *= y[i].powi(p as i32);
                }
            }
            if parts.len() <= deg {
                parts.resize(deg + 1, Vec::new());
            }
            parts[deg].push(v);
        }
        let mut out: Vec<f64> = parts.into_iter().map(f64::sum_all).collect();
        while out.len() > 1 && out.last() == Some(&0.0) {
            out.pop();
        }
        if out.is_empty() {
            out.push(0.0);
        }
        out
    }
}

pub(crate) fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * s + v)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, v)| v * i as f64).collect()
}

/// Roots of `c` inside `(lo, hi)` found by sign changes on a uniform mesh, then bisection.
pub(crate) fn roots_in(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let deg = c.len().saturating_sub(1);
    if deg == 0 || hi <= lo {
        return Vec::new();
    }
    if deg == 1 {
        let r = -c[0] / c[1];
        return if r > lo && r < hi { vec![r] } else { Vec::new() };
    }
    let mesh = 32 * deg;
    let step = (hi - lo) / mesh as f64;
    let mut out = Vec::new();
    let mut a = lo;
    let mut fa = horner(c, a);
    for i in 1..=mesh {
        let b = if i == mesh { hi } else { lo + step * i as f64 };
        let fb = horner(c, b);
        if fa == 0.0 && a > lo {
            out.push(a);
        } else if fa * fb < 0.0 {
            let (mut l, mut r, fl) = (a, b, fa);
            for _ in 0..80 {
                let mid = 0.5 * (l + r);
                let fm = horner(c, mid);
                if fm == 0.0 {
                    l = mid;
                    r = mid;
                    break;
                }
                if (fm < 0.0) == (fl < 0.0) {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            out.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    out
}

/// Global minimum of a univariate polynomial over `[lo, hi]`: endpoints and critical points.
/// `current` wins ties, so flat directions stay put.
pub(crate) fn min_univariate(c: &[f64], lo: f64, hi: f64, current: f64) -> (f64, f64) {
    let base = horner(c, current);
    if c.len() <= 1 {
        return (current, base);
    }
    let mut best = (current, base);
    let consider = |s: f64, best: &mut (f64, f64)| {
        let v = horner(c, s);
        if v < best.1 - 1e-15 * best.1.abs().max(1e-300) {
            *best = (s, v);
        }
    };
    consider(lo, &mut best);
    consider(hi, &mut best);
    for r in roots_in(&derivative(c), lo, hi) {
        consider(r, &mut best);
    }
    best
}

/// Critical points of a univariate polynomial in `(lo, hi)`.
pub(crate) fn critical_points(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    roots_in(&derivative(c), lo, hi)
}

/// Exact-line coordinate descent over `vars`, in place. Returns the final value.
pub(crate) fn coordinate_descent(q: &FastPoly, y: &mut [f64], vars: &[usize], bounds: &[(f64, f64)], sweeps: usize) -> (f64, u64) {
    let mut val = q.eval(y);
    let mut evals = 1u64;
    for _ in 0..sweeps {
        for &k in vars {
            let c = q.along(k, y);
            let (s, _) = min_univariate(&c, bounds[k].0, bounds[k].1, y[k]);
            y[k] = s;
            evals += 1;
        }
        let next = q.eval(y);
        evals += 1;
        let done = val - next <= 1e-14 * (1.0 + val.abs());
        val = next;
        if done {
            break;
        }
    }
    (val, evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn restriction_matches_evaluation() {
        let x = RatPoly::var(2, 0);
        let y = RatPoly::var(2, 1);
        let p = &(&x.square() * &y) - &(&y.pow(3) + &RatPoly::constant(2, int(2)));
        let f = FastPoly::from_rational(&p);
        let pt = [0.5, 1.5];
        let c = f.along(1, &pt);
        assert!((horner(&c, 1.5) - f.eval(&pt)).abs() < 1e-12);
        assert_eq!(f.vars(), BTreeSet::from([0, 1]));
    }

    #[test]
    fn univariate_minimum() {
        // s^3 - 3s on [-2, 2]: minimum -2 at s = -2 and s = 1
        let cubic = [0.0, -3.0, 0.0, 1.0];
        let (s, v) = min_univariate(&cubic, -2.0, 2.0, 0.0);
        assert!((v + 2.0).abs() < 1e-12);
        assert!((s + 2.0).abs() < 1e-12 || (s - 1.0).abs() < 1e-9);
        let (s, _) = min_univariate(&[1.0, -2.0, 1.0], -4.0, 4.0, 3.0);
        assert!((s - 1.0).abs() < 1e-9);
        // flat stays put
        assert_eq!(min_univariate(&[2.0], 0.0, 1.0, 0.25).0, 0.25);
    }

    #[test]
    fn descent_on_separable_quadratic() {
        let a = RatPoly::var(2, 0);
        let b = RatPoly::var(2, 1);
        let one = RatPoly::one(2);
        let q = &(&a - &one).square() + &(&b + &one).square();
        let f = FastPoly::from_rational(&q);
        let mut y = [0.0, 0.0];
        let (v, _) = coordinate_descent(&f, &mut y, &[0, 1], &[(-2.0, 2.0), (-2.0, 2.0)], 10);
        assert!(v < 1e-18 && (y[0] - 1.0).abs() < 1e-9 && (y[1] + 1.0).abs() < 1e-9);
    }
}
