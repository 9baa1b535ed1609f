//! Splitting a union of basic sets into disjoint sign-condition cells.
//!
//! All polynomials of all pieces are pooled (constants dropped, each scaled so its largest
//! monomial has coefficient 1). A cell fixes a sign in `{<, =, >}` for every pooled
//! polynomial, so distinct cells are disjoint by construction. Only sign vectors compatible with
//! at least one piece are produced; each such vector is produced once, by the first compatible
//! piece. Emptiness of a cell is not decided.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;
use crate::semialg::{BasicSet, SASet};
use crate::RatPoly;

pub const DEFAULT_POOL_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignCondition {
    Neg,
    Zero,
    Pos,
}

impl SignCondition {
    const ALL: [SignCondition; 3] = [SignCondition::Neg, SignCondition::Zero, SignCondition::Pos];

    fn flip(self) -> Self {
        match self {
            SignCondition::Neg => SignCondition::Pos,
            SignCondition::Zero => SignCondition::Zero,
            SignCondition::Pos => SignCondition::Neg,
        }
    }

    fn of(v: &Rational) -> Self {
        if v.is_zero() {
            SignCondition::Zero
        } else if v.is_positive() {
            SignCondition::Pos
        } else {
            SignCondition::Neg
        }
    }
}

/// What a polynomial condition reduces to after canonicalization.
enum Atom {
    /// Always true (e.g. `1 > 0`, `0 = 0`).
    True,
    /// Never true (e.g. `1 = 0`, `-1 > 0`).
    False,
    Sign(RatPoly, SignCondition),
}

fn canonical(p: &RatPoly, want: SignCondition) -> Atom {
    if p.is_constant() {
        let c = p.constant_term();
        return if SignCondition::of(&c) == want { Atom::True } else { Atom::False };
    }
    let (_, lead) = p.terms().last().expect("nonconstant polynomial has terms");
    let lead = lead.clone();
    let scaled = p.scale(&(Rational::from_integer(1.into()) / &lead));
    let want = if lead.is_negative() { want.flip() } else { want };
    Atom::Sign(scaled, want)
}

#[derive(Debug, Clone)]
pub struct Disjointifier {
    num_vars: usize,
    pool: Vec<RatPoly>,
    /// Per input piece, the sign it fixes on each pooled polynomial; `None` when the piece is
    /// syntactically empty.
    pieces: Vec<Option<Vec<Option<SignCondition>>>>,
}

impl Disjointifier {
    pub fn new(s: &SASet) -> Self {
        let mut pool: Vec<RatPoly> = Vec::new();
        let mut raw: Vec<Option<Vec<(usize, SignCondition)>>> = Vec::new();
        for piece in s.pieces() {
            let mut fixed = Vec::new();
            let mut empty = false;
            let conds = std::iter::once((piece.equality(), SignCondition::Zero))
                .chain(piece.strict().iter().map(|q| (q, SignCondition::Pos)));
            for (p, want) in conds {
                match canonical(p, want) {
                    Atom::True => {}
                    Atom::False => empty = true,
                    Atom::Sign(h, sign) => {
                        let idx = match pool.iter().position(|g| g == &h) {
                            Some(i) => i,
                            None => {
                                pool.push(h);
                                pool.len() - 1
                            }
                        };
                        fixed.push((idx, sign));
                    }
                }
            }
            raw.push(if empty { None } else { Some(fixed) });
        }
        let pieces = raw
            .into_iter()
            .map(|r| {
                let fixed = r?;
                let mut v = vec![None; pool.len()];
                for (i, s) in fixed {
                    match v[i] {
                        Some(prev) if prev != s => return None,
                        _ => v[i] = Some(s),
                    }
                }
                Some(v)
            })
            .collect();
        Disjointifier { num_vars: s.num_vars(), pool, pieces }
    }

    pub fn pool(&self) -> &[RatPoly] {
        &self.pool
    }

    pub fn cells(&self) -> CellIter<'_> {
        CellIter { d: self, piece: 0, odometer: None }
    }

    /// Encode a sign vector as a basic set: `Σ h² = 0` over the `=` entries, `±h > 0` otherwise.
    pub fn encode(&self, signs: &[SignCondition]) -> BasicSet {
        let n = self.num_vars;
        let zeros: Vec<RatPoly> = signs
            .iter()
            .zip(&self.pool)
            .filter(|(s, _)| **s == SignCondition::Zero)
            .map(|(_, h)| h.square())
            .collect();
        let equality = RatPoly::sum(n, zeros.iter());
        let strict = signs
            .iter()
            .zip(&self.pool)
            .filter_map(|(s, h)| match s {
                SignCondition::Pos => Some(h.clone()),
                SignCondition::Neg => Some(-h),
                SignCondition::Zero => None,
            })
            .collect();
        BasicSet::new(equality, strict).expect("pool shares the variable count")
    }

    fn compatible(fixed: &[Option<SignCondition>], signs: &[SignCondition]) -> bool {
        fixed.iter().zip(signs).all(|(f, s)| f.is_none_or(|f| f == *s))
    }

    /// Sign vector of the pooled family at `point`.
    pub fn signs_at(&self, point: &[Rational]) -> Result<Vec<SignCondition>> {
        self.pool.iter().map(|h| h.evaluate(point).map(|v| SignCondition::of(&v))).collect()
    }
}

/// Lazy cell enumeration.
pub struct CellIter<'a> {
    d: &'a Disjointifier,
    piece: usize,
    /// Current assignment for the free positions of the current piece.
    odometer: Option<Vec<usize>>,
}

impl Iterator for CellIter<'_> {
    type Item = (Vec<SignCondition>, BasicSet);

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let fixed = match self.d.pieces.get(self.piece) {
                None => return None,
                Some(None) => {
                    self.piece += 1;
                    continue;
                }
                Some(Some(f)) => f,
            };
            let free: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i].is_none()).collect();
            let odo = match &mut self.odometer {
                None => {
                    self.odometer = Some(vec![0; free.len()]);
                    self.odometer.as_mut().expect("just set")
                }
                Some(o) => {
                    // advance
                    let mut k = 0;
                    loop {
                        if k == o.len() {
                            self.odometer = None;
                            self.piece += 1;
                            break;
                        }
                        o[k] += 1;
                        if o[k] < 3 {
                            break;
                        }
                        o[k] = 0;
                        k += 1;
                    }
                    match &mut self.odometer {
                        None => continue,
                        Some(o) => o,
                    }
                }
            };
            let mut signs: Vec<SignCondition> = fixed.iter().map(|f| f.unwrap_or(SignCondition::Neg)).collect();
            for (slot, &i) in free.iter().enumerate() {
                signs[i] = SignCondition::ALL[odo[slot]];
            }
            let earlier = self.d.pieces[..self.piece]
                .iter()
                .flatten()
                .any(|f| Disjointifier::compatible(f, &signs));
            if !earlier {
                let set = self.d.encode(&signs);
                return Some((signs, set));
            }
        }
    }
}

/// Eager enumeration with a cap on the pooled family size.
pub fn disjointify(s: &SASet, cap: usize) -> Result<Vec<BasicSet>> {
    let d = Disjointifier::new(s);
    if d.pool.len() > cap {
        return Err(Error::CapExceeded { what: "pooled polynomial family", size: d.pool.len() as u128, cap: cap as u128 });
    }
    Ok(d.cells().map(|(_, b)| b).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn x() -> RatPoly {
        RatPoly::var(1, 0)
    }

    fn count_at(cells: &[BasicSet], v: i64) -> usize {
        cells.iter().filter(|c| c.contains(&[int(v)]).unwrap()).count()
    }

    #[test]
    fn half_line_and_two_points() {
        let s = SASet::new(
            1,
            vec![
                BasicSet::open(1, vec![x()]).unwrap(),
                BasicSet::zero_set(&x().square() - &RatPoly::one(1)),
            ],
        )
        .unwrap();
        let cells = disjointify(&s, DEFAULT_POOL_CAP).unwrap();
        assert_eq!(count_at(&cells, 2), 1);
        assert_eq!(count_at(&cells, -1), 1);
        assert_eq!(count_at(&cells, 1), 1);
        assert_eq!(count_at(&cells, -2), 0);
        assert_eq!(count_at(&cells, 0), 0);
    }

    #[test]
    fn duplicates_are_idempotent() {
        let one = SASet::single(BasicSet::open(1, vec![x()]).unwrap());
        let two = SASet::new(1, vec![BasicSet::open(1, vec![x()]).unwrap(), BasicSet::open(1, vec![x()]).unwrap()]).unwrap();
        assert_eq!(disjointify(&one, 16).unwrap(), disjointify(&two, 16).unwrap());
    }

    #[test]
    fn scaled_duplicates_share_a_pool_entry() {
        let s = SASet::new(
            1,
            vec![
                BasicSet::open(1, vec![x().scale(&int(3))]).unwrap(),
                BasicSet::open(1, vec![-&x()]).unwrap(),
            ],
        )
        .unwrap();
        let d = Disjointifier::new(&s);
        assert_eq!(d.pool().len(), 1);
        assert_eq!(d.cells().count(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let pieces = (0..5)
            .map(|k| BasicSet::open(1, vec![&x() - &RatPoly::constant(1, int(k))]).unwrap())
            .collect();
        let s = SASet::new(1, pieces).unwrap();
        assert!(matches!(disjointify(&s, 4), Err(Error::CapExceeded { .. })));
        assert!(disjointify(&s, 5).is_ok());
    }

    #[test]
    fn whole_space_is_one_cell() {
        let cells = disjointify(&SASet::whole(2), 16).unwrap();
        assert_eq!(cells.len(), 1);
        assert!(cells[0].contains(&[int(3), int(-4)]).unwrap());
    }
}
