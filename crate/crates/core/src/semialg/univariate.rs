//! Exact univariate polynomials over the rationals and real-root isolation.
//!
//! Roots are isolated with a Sturm sequence and refined by exact rational bisection. A root is
//! reported exactly when it is rational and found either at a bisection point or by the
//! rational-candidate check against divisors of the leading coefficient.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{int, Rational};

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct UPoly(Vec<Rational>);

impl UPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with -1 standing for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn sign_at(&self, t: &Rational) -> Ordering {
        self.eval(t).cmp(&Rational::zero())
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.0.iter().enumerate().skip(1).map(|(k, c)| c * int(k as i64)).collect())
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly(Vec::new());
        }
        let mut out = vec![Rational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.0.clone();
        let dd = d.0.len() - 1;
        let lead = d.lead();
        if rem.len() <= dd {
            return (UPoly(Vec::new()), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (i, dc) in d.0.iter().enumerate() {
                    rem[k + i] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (UPoly::new(quot), UPoly::new(rem))
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        UPoly(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same real roots, all simple.
    pub fn square_free(&self) -> UPoly {
        if self.degree() <= 1 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() <= 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    /// Primitive integer polynomial with the same roots.
    fn to_primitive_integer(&self) -> Vec<BigInt> {
        let lcm = self.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.0.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if g.is_zero() {
            return ints;
        }
        ints.into_iter().map(|c| c / &g).collect()
    }
}

/// Cauchy bound: every real root `r` of nonzero `p` has `|r| < 1 + max |a_i / a_deg|`.
pub fn cauchy_bound(p: &UPoly) -> Rational {
    let lead = p.lead().abs();
    let m = p.0[..p.0.len().saturating_sub(1)]
        .iter()
        .map(|c| c.abs() / &lead)
        .fold(Rational::zero(), |a, b| if b > a { b } else { a });
    m + Rational::one()
}

pub struct Sturm(Vec<UPoly>);

impl Sturm {
    pub fn new(p: &UPoly) -> Self {
        let mut seq = vec![p.clone()];
        if p.degree() >= 1 {
            seq.push(p.derivative());
            loop {
                let n = seq.len();
                let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
                if r.is_zero() {
                    break;
                }
                // Scaling by a positive constant keeps sign counts intact and numbers small.
                let l = r.lead().abs();
                seq.push(UPoly(r.0.iter().map(|c| -(c / &l)).collect()));
            }
        }
        Sturm(seq)
    }

    fn variations(&self, t: &Rational) -> usize {
        let mut count = 0;
        let mut last = Ordering::Equal;
        for p in &self.0 {
            let s = p.sign_at(t);
            if s == Ordering::Equal {
                continue;
            }
            if last != Ordering::Equal && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct real roots in `(a, b]`.
    pub fn count(&self, a: &Rational, b: &Rational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// A real root of a square-free polynomial, either exact or isolated in `(lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RealRoot {
    Exact(Rational),
    Isolated { sqfree: UPoly, lo: Rational, hi: Rational },
}

impl RealRoot {
    pub fn approx(&self) -> Rational {
        match self {
            RealRoot::Exact(v) => v.clone(),
            RealRoot::Isolated { lo, hi, .. } => (lo + hi) / int(2),
        }
    }

    pub fn to_f64(&self) -> f64 {
        crate::scalar::rational_to_f64(&self.approx())
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            RealRoot::Exact(v) => Some(v),
            RealRoot::Isolated { .. } => None,
        }
    }

    pub(crate) fn lower(&self) -> &Rational {
        match self {
            RealRoot::Exact(v) => v,
            RealRoot::Isolated { lo, .. } => lo,
        }
    }

    pub(crate) fn upper(&self) -> &Rational {
        match self {
            RealRoot::Exact(v) => v,
            RealRoot::Isolated { hi, .. } => hi,
        }
    }

    /// Halve the isolating interval; may discover the root exactly.
    pub fn refine(&mut self) {
        if let RealRoot::Isolated { sqfree, lo, hi } = self {
            let mid = (&*lo + &*hi) / int(2);
            let s_mid = sqfree.sign_at(&mid);
            if s_mid == Ordering::Equal {
                *self = RealRoot::Exact(mid);
                return;
            }
            if s_mid == sqfree.sign_at(hi) {
                *hi = mid;
            } else {
                *lo = mid;
            }
        }
    }

    pub fn refine_to(&mut self, width: &Rational) {
        while let RealRoot::Isolated { lo, hi, .. } = self {
            if &(&*hi - &*lo) <= width {
                break;
            }
            self.refine();
        }
    }

    /// Sign of `q` at this root, decided exactly.
    pub fn sign_of(&mut self, q: &UPoly) -> Ordering {
        if q.is_zero() {
            return Ordering::Equal;
        }
        match self {
            RealRoot::Exact(v) => q.sign_at(v),
            RealRoot::Isolated { sqfree, lo, hi } => {
                let g = sqfree.gcd(q);
                if g.degree() >= 1 {
                    // Roots of g are roots of sqfree; at most one lies in (lo, hi).
                    let (a, b) = (g.sign_at(lo), g.sign_at(hi));
                    if b == Ordering::Equal || (a != Ordering::Equal && a != b) {
                        return Ordering::Equal;
                    }
                }
                let qs = Sturm::new(&q.square_free());
                loop {
                    if let RealRoot::Isolated { lo, hi, .. } = self {
                        if qs.count(lo, hi) == 0 && q.sign_at(lo) != Ordering::Equal {
                            return q.sign_at(hi);
                        }
                    } else {
                        return self.sign_of(q);
                    }
                    self.refine();
                }
            }
        }
    }

    /// Refine both roots until their enclosures are disjoint; returns their order.
    /// The roots must be distinct.
    pub fn separate(a: &mut RealRoot, b: &mut RealRoot) -> Ordering {
        loop {
            if let (RealRoot::Exact(x), RealRoot::Exact(y)) = (&*a, &*b) {
                return x.cmp(y);
            }
            if a.upper() < b.lower() {
                return Ordering::Less;
            }
            if b.upper() < a.lower() {
                return Ordering::Greater;
            }
            a.refine();
            b.refine();
        }
    }
}

fn divisors_up_to(n: &BigInt, cap: u64) -> Option<Vec<BigInt>> {
    let n = n.abs();
    let small: u64 = n.clone().try_into().ok()?;
    if small > cap {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= small {
        if small % d == 0 {
            out.push(BigInt::from(d));
            if d * d != small {
                out.push(BigInt::from(small / d));
            }
        }
        d += 1;
    }
    out.sort();
    Some(out)
}

/// Try to pin an isolated root to a rational with denominator dividing `lead`.
fn rational_candidate(sqfree: &UPoly, lo: &Rational, hi: &Rational, denominators: &[BigInt]) -> Option<Rational> {
    for b in denominators {
        let br = Rational::from_integer(b.clone());
        let from = (lo * &br).ceil().to_integer();
        let to = (hi * &br).floor().to_integer();
        if &to - &from > BigInt::from(4) {
            continue;
        }
        let mut a = from;
        while a <= to {
            let cand = Rational::new(a.clone(), b.clone());
            if &cand > lo && &cand < hi && sqfree.sign_at(&cand) == Ordering::Equal {
                return Some(cand);
            }
            a += 1;
        }
    }
    None
}

/// All distinct real roots of nonzero `p` in the closed window `[lo, hi]`, in increasing order.
/// Isolated roots are refined to width at most `tol`.
pub fn isolate_roots(p: &UPoly, lo: &Rational, hi: &Rational, tol: &Rational) -> Vec<RealRoot> {
    assert!(!p.is_zero(), "root isolation of the zero polynomial");
    if p.degree() == 0 || lo > hi {
        return Vec::new();
    }
    if p.degree() == 1 {
        let r = -&p.0[0] / &p.0[1];
        return if &r >= lo && &r <= hi { vec![RealRoot::Exact(r)] } else { Vec::new() };
    }
    let s = p.square_free();
    let sturm = Sturm::new(&s);
    let prim = s.to_primitive_integer();
    let denominators = divisors_up_to(prim.last().expect("nonzero"), 1_000_000).unwrap_or_default();

    let mut out = Vec::new();
    if s.sign_at(lo) == Ordering::Equal {
        out.push(RealRoot::Exact(lo.clone()));
    }
    let mut stack = vec![(lo.clone(), hi.clone(), sturm.count(lo, hi))];
    let mut isolated = Vec::new();
    while let Some((a, b, c)) = stack.pop() {
        match c {
            0 => {}
            1 => isolated.push((a, b)),
            _ => {
                let mid = (&a + &b) / int(2);
                let left = sturm.count(&a, &mid);
                stack.push((mid.clone(), b, c - left));
                stack.push((a, mid, left));
            }
        }
    }
    isolated.sort_by(|x, y| x.0.cmp(&y.0));
    for (mut a, mut b) in isolated {
        // Exactly one root in (a, b]. Shrink until both endpoints are non-roots.
        loop {
            if s.sign_at(&b) == Ordering::Equal {
                out.push(RealRoot::Exact(b));
                break;
            }
            if s.sign_at(&a) != Ordering::Equal {
                out.push(finish_root(&s, a, b, tol, &denominators));
                break;
            }
            let mid = (&a + &b) / int(2);
            if sturm.count(&a, &mid) == 0 {
                a = mid;
            } else {
                b = mid;
            }
        }
    }
    out
}

fn finish_root(s: &UPoly, lo: Rational, hi: Rational, tol: &Rational, denominators: &[BigInt]) -> RealRoot {
    let mut root = RealRoot::Isolated { sqfree: s.clone(), lo, hi };
    if !denominators.is_empty() {
        let max_d = denominators.last().cloned().unwrap_or_else(BigInt::one);
        let narrow = Rational::new(BigInt::one(), &max_d * &max_d * 2);
        root.refine_to(&narrow);
        if let RealRoot::Isolated { sqfree, lo, hi } = &root {
            if let Some(r) = rational_candidate(sqfree, lo, hi, denominators) {
                return RealRoot::Exact(r);
            }
        }
    }
    root.refine_to(tol);
    root
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn up(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn sturm_counts() {
        // (t - 1)(t - 2)(t + 3)
        let p = up(&[6, -7, 0, 1]);
        let s = Sturm::new(&p);
        assert_eq!(s.count(&int(-10), &int(10)), 3);
        assert_eq!(s.count(&int(0), &ratio(3, 2)), 1);
        assert_eq!(s.count(&int(1), &int(2)), 1);
    }

    #[test]
    fn rational_roots_are_exact() {
        // (2t - 1)(3t + 2)(t - 5) = 6t^3 - 29t^2 - 3t + 10 ... built by multiplication
        let p = up(&[-1, 2]).mul(&up(&[2, 3])).mul(&up(&[-5, 1]));
        let roots = isolate_roots(&p, &int(-10), &int(10), &ratio(1, 1_000_000));
        let vals: Vec<_> = roots.iter().map(|r| r.exact().cloned().unwrap()).collect();
        assert_eq!(vals, vec![ratio(-2, 3), ratio(1, 2), int(5)]);
    }

    #[test]
    fn irrational_roots_are_isolated() {
        let p = up(&[-2, 0, 1]);
        let tol = ratio(1, 1 << 30);
        let roots = isolate_roots(&p, &int(-2), &int(2), &tol);
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert!(r.exact().is_none());
            assert!((r.to_f64().abs() - 2f64.sqrt()).abs() < 1e-8);
        }
        assert!(roots[0].to_f64() < roots[1].to_f64());
    }

    #[test]
    fn window_endpoints_and_multiplicity() {
        // (t - 1)^2 (t + 1): roots 1 and -1; window [-1, 1] closed
        let p = up(&[-1, 1]).mul(&up(&[-1, 1])).mul(&up(&[1, 1]));
        let roots = isolate_roots(&p, &int(-1), &int(1), &ratio(1, 1000));
        assert_eq!(roots, vec![RealRoot::Exact(int(-1)), RealRoot::Exact(int(1))]);
        assert!(isolate_roots(&p, &int(2), &int(3), &ratio(1, 1000)).is_empty());
    }

    #[test]
    fn sign_at_isolated_root() {
        let p = up(&[-2, 0, 1]);
        let mut roots = isolate_roots(&p, &int(0), &int(2), &ratio(1, 8));
        let r = &mut roots[0];
        assert_eq!(r.sign_of(&up(&[-1, 1])), Ordering::Greater); // sqrt2 - 1
        assert_eq!(r.sign_of(&up(&[-3, 2])), Ordering::Less); // 2 sqrt2 - 3
    }

    #[test]
    fn sign_detects_shared_root() {
        let p = up(&[-2, 0, 1]);
        let mut roots = isolate_roots(&p, &int(0), &int(2), &ratio(1, 8));
        let q = up(&[-2, 0, 1]).mul(&up(&[7, 1]));
        assert_eq!(roots[0].sign_of(&q), Ordering::Equal);
    }
}
