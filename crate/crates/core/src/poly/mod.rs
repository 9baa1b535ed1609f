//! Sparse multivariate polynomials over a [`Scalar`] coefficient type.
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors, so iteration order (and with it
//! every serialized form) is deterministic. Zero coefficients are never stored.

pub mod basis;
mod format;

pub use basis::{coefficient_vector, monomial_map, MonomialBasis};
pub use format::{PolyRecord, TermRecord};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};


use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Exponent vector `[e0, e1, ...]` standing for `x0^e0 * x1^e1 * ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn var(num_vars: usize, idx: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[idx] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    fn product(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, PartialEq)]
pub struct Polynomial<C> {
    num_vars: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Scalar> Polynomial<C> {
    pub fn zero(num_vars: usize) -> Self {
        Polynomial { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: C) -> Self {
        let mut p = Self::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(num_vars), c);
        }
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, C::one())
    }

    /// The coordinate polynomial `x_idx`.
    pub fn var(num_vars: usize, idx: usize) -> Self {
        assert!(idx < num_vars, "variable {idx} out of range for {num_vars} variables");
        let mut p = Self::zero(num_vars);
        p.terms.insert(Monomial::var(num_vars, idx), C::one());
        p
    }

    /// Build from `(exponents, coefficient)` pairs; repeated exponents are summed.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
    {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(Error::LengthMismatch { expected: num_vars, got: e.len() });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> C {
        self.terms.get(&Monomial(exps.to_vec())).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Degree counted only over the listed variables.
    pub fn degree_in(&self, vars: &[usize]) -> u32 {
        self.terms
            .keys()
            .map(|m| vars.iter().map(|&v| m.0[v]).sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&vec![0; self.num_vars])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Variables that occur with a positive exponent in some term.
    pub fn vars_used(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    out.insert(i);
                }
            }
        }
        out
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.num_vars));
        }
        let mut acc: HashMap<Monomial, C> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.product(mb);
                let c = ca.clone() * cb.clone();
                match acc.get_mut(&m) {
                    Some(v) => *v = v.clone() + c,
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Polynomial { num_vars: self.num_vars, terms })
    }

    pub fn arith(&self, other: &Self, op: ArithOp) -> Result<Self> {
        match op {
            ArithOp::Add => self.checked_add(other),
            ArithOp::Sub => self.checked_sub(other),
            ArithOp::Mul => self.checked_mul(other),
        }
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::VarCountMismatch { left: self.num_vars, right: other.num_vars });
        }
        Ok(())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        let terms = self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c.clone())).collect();
        Polynomial { num_vars: self.num_vars, terms }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.num_vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn product<'a, I: IntoIterator<Item = &'a Self>>(num_vars: usize, factors: I) -> Self {
        factors.into_iter().fold(Self::one(num_vars), |acc, f| &acc * f)
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Self>>(num_vars: usize, items: I) -> Self {
        let mut out = Self::zero(num_vars);
        for p in items {
            assert_eq!(p.num_vars, num_vars, "variable count mismatch in sum");
            for (m, c) in &p.terms {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Exact (or floating, per `C`) evaluation.
    pub fn evaluate(&self, point: &[C]) -> Result<C> {
        if point.len() != self.num_vars {
            return Err(Error::LengthMismatch { expected: self.num_vars, got: point.len() });
        }
        Ok(self.eval_unchecked(point))
    }

    fn eval_unchecked(&self, point: &[C]) -> C {
        let powers = self.power_table(point);
        // zero and unit powers skip the multiplication; binary points are common
        C::sum_all(self.terms.iter().filter_map(|(m, c)| {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let pw = &powers[i][e as usize];
                    if pw.is_zero() {
                        return None;
                    }
                    if !pw.is_one() {
                        v = v * pw.clone();
                    }
                }
            }
            Some(v)
        }))
    }

    fn power_table(&self, point: &[C]) -> Vec<Vec<C>> {
        let mut max_e = vec![0u32; self.num_vars];
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                max_e[i] = max_e[i].max(e);
            }
        }
        point
            .iter()
            .zip(&max_e)
            .map(|(x, &me)| {
                let mut row = Vec::with_capacity(me as usize + 1);
                row.push(C::one());
                for k in 1..=me as usize {
                    let next = row[k - 1].clone() * x.clone();
                    row.push(next);
                }
                row
            })
            .collect()
    }

    /// Re-index variables into a larger space: variable `i` becomes `position_map[i]`.
    pub fn embed(&self, target_num_vars: usize, position_map: &[usize]) -> Result<Self> {
        if position_map.len() != self.num_vars {
            return Err(Error::LengthMismatch { expected: self.num_vars, got: position_map.len() });
        }
        let mut seen = vec![false; target_num_vars];
        for &slot in position_map {
            if slot >= target_num_vars {
                return Err(Error::IndexOutOfRange { index: slot, bound: target_num_vars });
            }
            if seen[slot] {
                return Err(Error::NonInjectiveMap(slot));
            }
            seen[slot] = true;
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = vec![0; target_num_vars];
                for (i, &slot) in position_map.iter().enumerate() {
                    e[slot] = m.0[i];
                }
                (Monomial(e), c.clone())
            })
            .collect();
        Ok(Polynomial { num_vars: target_num_vars, terms })
    }

    /// Embed the variables `0..num_vars` at the front of a space with `target_num_vars`.
    pub fn extend_vars(&self, target_num_vars: usize) -> Self {
        let map: Vec<usize> = (0..self.num_vars).collect();
        self.embed(target_num_vars, &map).expect("prefix embedding is always valid")
    }

    /// Substitute polynomial `q` (same variable space) for variable `var`.
    pub fn substitute(&self, var: usize, q: &Self) -> Result<Self> {
        self.check_vars(q)?;
        if var >= self.num_vars {
            return Err(Error::IndexOutOfRange { index: var, bound: self.num_vars });
        }
        let max_e = self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0);
        let mut q_pows = vec![Self::one(self.num_vars)];
        for k in 1..=max_e as usize {
            let next = &q_pows[k - 1] * q;
            q_pows.push(next);
        }
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let e = rest.0[var];
            rest.0[var] = 0;
            let mono = Polynomial { num_vars: self.num_vars, terms: BTreeMap::from([(rest, c.clone())]) };
            let term = &mono * &q_pows[e as usize];
            for (tm, tc) in term.terms {
                out.add_term(tm, tc);
            }
        }
        Ok(out)
    }

    /// Fix some variables to values. The result lives over the remaining variables, in order.
    pub fn restrict(&self, fixed: &[Option<C>]) -> Result<Self> {
        if fixed.len() != self.num_vars {
            return Err(Error::LengthMismatch { expected: self.num_vars, got: fixed.len() });
        }
        let free: Vec<usize> = (0..self.num_vars).filter(|&i| fixed[i].is_none()).collect();
        let values: Vec<C> = fixed.iter().map(|v| v.clone().unwrap_or_else(C::zero)).collect();
        let powers = self.power_table(&values);
        let mut out = Self::zero(free.len());
        let mut acc: HashMap<Monomial, Vec<C>> = HashMap::new();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 && fixed[i].is_some() {
                    v = v * powers[i][e as usize].clone();
                }
            }
            let key = Monomial(free.iter().map(|&i| m.0[i]).collect());
            acc.entry(key).or_default().push(v);
        }
        for (m, parts) in acc {
            out.add_term(m, C::sum_all(parts));
        }
        Ok(out)
    }

    /// Group terms by their exponents on the trailing variables `split..num_vars`.
    /// Each group's coefficient is a polynomial over the leading `split` variables.
    pub fn split_at(&self, split: usize) -> BTreeMap<Monomial, Polynomial<C>> {
        assert!(split <= self.num_vars);
        let mut out: BTreeMap<Monomial, Polynomial<C>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let lower = Monomial(m.0[split..].to_vec());
            let upper = Monomial(m.0[..split].to_vec());
            out.entry(lower).or_insert_with(|| Polynomial::zero(split)).add_term(upper, c.clone());
        }
        out
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[var] -= 1;
            let k = C::from_u32(e).expect("exponent fits the scalar type");
            out.add_term(dm, c.clone() * k);
        }
        out
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        let mut out = Polynomial::zero(self.num_vars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn max_abs_coeff(&self) -> C {
        self.terms.values().map(Scalar::abs_val).fold(C::zero(), |a, b| if b > a { b } else { a })
    }

    /// True when no monomial appears in both polynomials.
    pub fn shares_no_monomial(&self, other: &Self) -> bool {
        self.terms.keys().all(|m| !other.terms.contains_key(m))
    }

    /// Coefficients of `self` as a univariate polynomial in `var`, lowest degree first.
    /// Only valid when `var` is the sole variable in use.
    pub fn univariate_coeffs(&self, var: usize) -> Vec<C> {
        let deg = self.degree_in(&[var]) as usize;
        let mut out = vec![C::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.0[var] as usize;
            out[e] = out[e].clone() + c.clone();
        }
        out
    }
}

impl Polynomial<Rational> {
    pub fn to_f64(&self) -> Polynomial<f64> {
        self.map_coeffs(|c| c.to_f64())
    }
}

pub fn poly_arith<C: Scalar>(a: &Polynomial<C>, b: &Polynomial<C>, op: ArithOp) -> Result<Polynomial<C>> {
    a.arith(b, op)
}

impl<C: Scalar> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        self.checked_add(rhs).expect("polynomial addition across variable spaces")
    }
}

impl<C: Scalar> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        self.checked_sub(rhs).expect("polynomial subtraction across variable spaces")
    }
}

impl<C: Scalar> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        self.checked_mul(rhs).expect("polynomial product across variable spaces")
    }
}

impl<C: Scalar> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect();
        Polynomial { num_vars: self.num_vars, terms }
    }
}

impl<C: Scalar> Add for Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        &self + &rhs
    }
}

impl<C: Scalar> Sub for Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        &self - &rhs
    }
}

impl<C: Scalar> Mul for Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        &self * &rhs
    }
}

impl<C: Scalar> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        -&self
    }
}

impl<C: Scalar + fmt::Display> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 [{} vars]", self.num_vars);
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{e}")?,
                }
            }
        }
        write!(f, " [{} vars]", self.num_vars)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    type P = Polynomial<Rational>;

    fn x() -> P {
        P::var(1, 0)
    }

    #[test]
    fn arithmetic_examples() {
        let one = P::one(1);
        assert_eq!(poly_arith(&x(), &one, ArithOp::Add).unwrap(), &x() + &one);
        let prod = poly_arith(&(&x() + &one), &(&x() - &one), ArithOp::Mul).unwrap();
        assert_eq!(prod, &x().square() - &one);
        let x2y = P::from_terms(2, [(vec![2, 1], int(1))]).unwrap();
        let diff = poly_arith(&x2y, &x2y, ArithOp::Sub).unwrap();
        assert!(diff.is_zero());
        assert_eq!(diff.num_terms(), 0);
    }

    #[test]
    fn mismatched_spaces_rejected() {
        let a = P::var(2, 0);
        let b = P::var(3, 0);
        assert_eq!(a.checked_add(&b), Err(Error::VarCountMismatch { left: 2, right: 3 }));
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn evaluation_examples() {
        let p = P::from_terms(2, [(vec![2, 0], int(1)), (vec![0, 1], int(1))]).unwrap();
        assert_eq!(p.evaluate(&[int(2), int(3)]).unwrap(), int(7));
        assert_eq!(P::zero(3).evaluate(&[int(1), int(5), ratio(1, 3)]).unwrap(), int(0));
        let xy = P::from_terms(2, [(vec![1, 1], int(1))]).unwrap();
        let gadget = (&P::one(2) - &xy).square();
        assert_eq!(gadget.evaluate(&[ratio(1, 2), int(2)]).unwrap(), int(0));
        assert!(p.evaluate(&[int(1)]).is_err());
    }

    #[test]
    fn embed_examples() {
        let c = x().embed(3, &[2]).unwrap();
        assert_eq!(c, P::var(3, 2));
        let xy = &P::var(2, 0) + &P::var(2, 1);
        assert_eq!(xy.embed(4, &[0, 3]).unwrap(), &P::var(4, 0) + &P::var(4, 3));
        let five = P::constant(1, int(5));
        assert_eq!(five.embed(6, &[4]).unwrap(), P::constant(6, int(5)));
        assert_eq!(xy.embed(4, &[1, 1]), Err(Error::NonInjectiveMap(1)));
        assert_eq!(xy.embed(2, &[0, 2]), Err(Error::IndexOutOfRange { index: 2, bound: 2 }));
    }

    #[test]
    fn degree_rules() {
        assert_eq!(P::zero(2).degree(), 0);
        let a = &P::var(2, 0).pow(3) + &P::var(2, 1);
        let b = &P::var(2, 1).square() + &P::one(2);
        assert_eq!((&a * &b).degree(), a.degree() + b.degree());
        assert_eq!(a.degree_in(&[1]), 1);
    }

    #[test]
    fn substitute_and_restrict() {
        // p(x, t) = t^2 - x, substitute t -> (1 + x^2) t
        let p = &P::var(2, 1).square() - &P::var(2, 0);
        let q = &(&P::one(2) + &P::var(2, 0).square()) * &P::var(2, 1);
        let s = p.substitute(1, &q).unwrap();
        let pt = [int(2), ratio(1, 3)];
        let expect = ratio(25, 9) - int(2);
        assert_eq!(s.evaluate(&pt).unwrap(), expect);
        let r = s.restrict(&[Some(int(2)), None]).unwrap();
        assert_eq!(r.num_vars(), 1);
        assert_eq!(r.evaluate(&[ratio(1, 3)]).unwrap(), expect);
    }

    #[test]
    fn split_groups_lower_monomials() {
        // x0 * y0 + 2 x0^2 * y0 + y1
        let p = P::from_terms(3, [(vec![1, 1, 0], int(1)), (vec![2, 1, 0], int(2)), (vec![0, 0, 1], int(1))]).unwrap();
        let parts = p.split_at(1);
        assert_eq!(parts.len(), 2);
        let c = &parts[&Monomial(vec![1, 0])];
        assert_eq!(c.evaluate(&[int(3)]).unwrap(), int(21));
    }

    #[test]
    fn derivative_and_univariate() {
        let p = &(&x().pow(3) * &P::constant(1, int(2))) - &x();
        assert_eq!(p.derivative(0), &(&x().square() * &P::constant(1, int(6))) - &P::one(1));
        assert_eq!(p.univariate_coeffs(0), vec![int(0), int(-1), int(0), int(2)]);
    }
}
