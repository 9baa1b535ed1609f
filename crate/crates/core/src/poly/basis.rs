//! Graded-lexicographic monomial basis.
//!
//! Order: constant first, then by total degree; within one degree, lexicographically
//! descending exponent vectors (so `x0^2, x0 x1, x1^2` for two variables). Rank and unrank are
//! combinatorial and never materialize the basis.

use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::scalar::Scalar;

/// Binomial coefficient with saturation at `u128::MAX`.
pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at each step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of exponent vectors of length `parts` with sum at most `total`.
fn at_most(total: u64, parts: u64) -> u128 {
    binomial(total + parts, parts)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    num_vars: usize,
    degree_bound: u32,
}

impl MonomialBasis {
    pub fn new(num_vars: usize, degree_bound: u32) -> Self {
        MonomialBasis { num_vars, degree_bound }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    /// `C(num_vars + d, num_vars)`, saturating.
    pub fn len(&self) -> u128 {
        at_most(self.degree_bound as u64, self.num_vars as u64)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rank(&self, exps: &[u32]) -> Result<u128> {
        if exps.len() != self.num_vars {
            return Err(Error::LengthMismatch { expected: self.num_vars, got: exps.len() });
        }
        let deg: u32 = exps.iter().sum();
        if deg > self.degree_bound {
            return Err(Error::DegreeExceedsBound { degree: deg, bound: self.degree_bound });
        }
        let n = self.num_vars as u64;
        let mut rank = if deg == 0 { 0 } else { at_most(deg as u64 - 1, n) };
        let mut rem = deg as u64;
        for (i, &e) in exps.iter().enumerate() {
            let parts = n - i as u64 - 1;
            let e = e as u64;
            // Vectors agreeing so far but larger in slot i come first.
            if rem > e {
                rank += at_most(rem - e - 1, parts);
            }
            rem -= e;
        }
        Ok(rank)
    }

    pub fn unrank(&self, mut rank: u128) -> Result<Vec<u32>> {
        if rank >= self.len() {
            return Err(Error::IndexOutOfRange { index: rank as usize, bound: self.len() as usize });
        }
        let n = self.num_vars as u64;
        let mut deg = 0u64;
        while at_most(deg, n) <= rank {
            deg += 1;
        }
        if deg > 0 {
            rank -= at_most(deg - 1, n);
        }
        let mut out = vec![0u32; self.num_vars];
        let mut rem = deg;
        for i in 0..self.num_vars {
            let parts = n - i as u64 - 1;
            if parts == 0 {
                out[i] = rem as u32;
                break;
            }
            // Largest e whose block of larger vectors is not past `rank`.
            let mut e = rem;
            loop {
                let skipped = if rem > e { at_most(rem - e - 1, parts) } else { 0 };
                let block = binomial(rem - e + parts - 1, parts - 1);
                if rank < skipped + block {
                    rank -= skipped;
                    break;
                }
                e -= 1;
            }
            out[i] = e as u32;
            rem -= e;
        }
        Ok(out)
    }

    /// Materialize all exponent vectors in basis order.
    pub fn monomials(&self, cap: u128) -> Result<Vec<Vec<u32>>> {
        let len = self.len();
        if len > cap {
            return Err(Error::CapExceeded { what: "monomial basis", size: len, cap });
        }
        let mut out = Vec::with_capacity(len as usize);
        for d in 0..=self.degree_bound {
            let mut cur = vec![0u32; self.num_vars];
            push_degree(&mut out, &mut cur, 0, d);
        }
        Ok(out)
    }
}

fn push_degree(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, slot: usize, rem: u32) {
    if cur.is_empty() {
        if rem == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if slot == cur.len() - 1 {
        cur[slot] = rem;
        out.push(cur.clone());
        cur[slot] = 0;
        return;
    }
    for e in (0..=rem).rev() {
        cur[slot] = e;
        push_degree(out, cur, slot + 1, rem - e);
    }
    cur[slot] = 0;
}

/// Default cap on materialized bases.
pub const BASIS_CAP: u128 = 1 << 22;

/// Vector of all monomials of the basis evaluated at `point`, in basis order.
pub fn monomial_map<C: Scalar>(point: &[C], basis: &MonomialBasis) -> Result<Vec<C>> {
    if point.len() != basis.num_vars {
        return Err(Error::LengthMismatch { expected: basis.num_vars, got: point.len() });
    }
    let d = basis.degree_bound as usize;
    let powers: Vec<Vec<C>> = point
        .iter()
        .map(|x| {
            let mut row = vec![C::one()];
            for k in 1..=d {
                let next = row[k - 1].clone() * x.clone();
                row.push(next);
            }
            row
        })
        .collect();
    let len = basis.len();
    if len > BASIS_CAP {
        return Err(Error::CapExceeded { what: "monomial basis", size: len, cap: BASIS_CAP });
    }
    let mut out = Vec::with_capacity(len as usize);
    for deg in 0..=d {
        fill_products(&mut out, &powers, 0, deg, C::one());
    }
    Ok(out)
}

/// Same traversal as [`push_degree`], carrying the running product so each monomial costs one
/// multiplication.
fn fill_products<C: Scalar>(out: &mut Vec<C>, powers: &[Vec<C>], slot: usize, rem: usize, acc: C) {
    let times = |acc: &C, p: &C| if p.is_one() { acc.clone() } else { acc.clone() * p.clone() };
    match powers.len() {
        0 => {
            if rem == 0 {
                out.push(acc);
            }
        }
        n if slot == n - 1 => out.push(times(&acc, &powers[slot][rem])),
        _ => {
            for e in (0..=rem).rev() {
                fill_products(out, powers, slot + 1, rem - e, times(&acc, &powers[slot][e]));
            }
        }
    }
}

/// Dense coefficients of `p` in basis order.
pub fn coefficient_vector<C: Scalar>(p: &Polynomial<C>, basis: &MonomialBasis) -> Result<Vec<C>> {
    if p.num_vars() != basis.num_vars {
        return Err(Error::VarCountMismatch { left: p.num_vars(), right: basis.num_vars });
    }
    if !p.is_zero() && p.degree() > basis.degree_bound {
        return Err(Error::DegreeExceedsBound { degree: p.degree(), bound: basis.degree_bound });
    }
    let len = basis.len();
    if len > BASIS_CAP {
        return Err(Error::CapExceeded { what: "monomial basis", size: len, cap: BASIS_CAP });
    }
    let mut out = vec![C::zero(); len as usize];
    for (m, c) in p.terms() {
        out[basis.rank(&m.0)? as usize] = c.clone();
    }
    Ok(out)
}

impl Monomial {
    pub fn rank_in(&self, basis: &MonomialBasis) -> Result<u128> {
        basis.rank(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, Rational};

    #[test]
    fn order_and_length() {
        let b = MonomialBasis::new(2, 2);
        assert_eq!(b.len(), 6);
        let ms = b.monomials(100).unwrap();
        assert_eq!(ms, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        for (i, m) in ms.iter().enumerate() {
            assert_eq!(b.rank(m).unwrap(), i as u128);
            assert_eq!(&b.unrank(i as u128).unwrap(), m);
        }
    }

    #[test]
    fn rank_unrank_round_trip_wider() {
        let b = MonomialBasis::new(4, 5);
        let ms = b.monomials(10_000).unwrap();
        assert_eq!(ms.len() as u128, binomial(9, 4));
        for (i, m) in ms.iter().enumerate() {
            assert_eq!(b.rank(m).unwrap(), i as u128);
            assert_eq!(&b.unrank(i as u128).unwrap(), m);
        }
    }

    #[test]
    fn map_examples() {
        let b = MonomialBasis::new(1, 2);
        assert_eq!(monomial_map(&[int(3)], &b).unwrap(), vec![int(1), int(3), int(9)]);
        let b = MonomialBasis::new(2, 1);
        assert_eq!(monomial_map(&[int(5), int(7)], &b).unwrap(), vec![int(1), int(5), int(7)]);
        let b = MonomialBasis::new(1, 3);
        assert_eq!(monomial_map(&[int(0)], &b).unwrap(), vec![int(1), int(0), int(0), int(0)]);
        assert!(monomial_map(&[int(0), int(1)], &b).is_err());
    }

    #[test]
    fn coefficient_examples() {
        let b = MonomialBasis::new(1, 2);
        let x: Polynomial<Rational> = Polynomial::var(1, 0);
        assert_eq!(coefficient_vector(&x.square(), &b).unwrap(), vec![int(0), int(0), int(1)]);
        let p = &Polynomial::one(1) + &x.scale(&int(2));
        assert_eq!(coefficient_vector(&p, &b).unwrap(), vec![int(1), int(2), int(0)]);
        assert_eq!(
            coefficient_vector(&x.pow(3), &b),
            Err(Error::DegreeExceedsBound { degree: 3, bound: 2 })
        );
    }

    #[test]
    fn zero_vars() {
        let b = MonomialBasis::new(0, 3);
        assert_eq!(b.len(), 1);
        assert_eq!(b.monomials(10).unwrap(), vec![Vec::<u32>::new()]);
        assert_eq!(b.rank(&[]).unwrap(), 0);
    }
}
