//! Linearization of the lower objective over the moment vector `M_d(y)`.
//!
//! `Q(x, y) = Σ_k c_k(x) · M_d(y)[k]`, so minimizing `Q(x, ·)` over the box is minimizing a linear
//! functional over `conv(M_d(box))`. That hull is kept implicit: only images of box points are
//! ever produced.

use serde::Serialize;

use crate::encoder::BilevelProgram;
use crate::error::{Error, Result};
use crate::poly::basis::{monomial_map, BASIS_CAP};
use crate::poly::MonomialBasis;
use crate::scalar::{format_rational, Rational};
use crate::semialg::sampling::axis;
use crate::RatPoly;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedProgram {
    n: usize,
    basis: MonomialBasis,
    /// Nonzero objective coefficients by basis rank, ascending.
    objective: Vec<(u128, RatPoly)>,
    upper_selector: u128,
    upper_multiplier: RatPoly,
    lower_box: Vec<(Rational, Rational)>,
}

/// Lift a bounded-box program whose `P` is `a(x)·y_k`.
pub fn moment_lift(prog: &BilevelProgram) -> Result<LiftedProgram> {
    let lower_box = prog.finite_box()?;
    let (n, m) = (prog.n(), prog.m());
    let p_split = prog.p().split_at(n);
    let (selector_mono, multiplier) = match p_split.iter().collect::<Vec<_>>().as_slice() {
        [(mono, a)] if mono.degree() == 1 => ((*mono).clone(), (*a).clone()),
        _ => {
            return Err(Error::NotLiftable("P must be a(x) times a single lower variable".into()));
        }
    };
    let d = prog.lower_degree_q().max(1);
    let basis = MonomialBasis::new(m, d);
    let mut objective = Vec::new();
    for (mono, coeff) in prog.q().split_at(n) {
        objective.push((mono.rank_in(&basis)?, coeff));
    }
    objective.sort_by_key(|(r, _)| *r);
    let upper_selector = selector_mono.rank_in(&basis)?;
    Ok(LiftedProgram { n, basis, objective, upper_selector, upper_multiplier: multiplier, lower_box })
}

impl LiftedProgram {
    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn objective_sparse(&self) -> &[(u128, RatPoly)] {
        &self.objective
    }

    /// Dense coefficient vector, one polynomial over `x` per basis monomial.
    pub fn objective_coeffs(&self) -> Result<Vec<RatPoly>> {
        let len = self.basis.len();
        if len > BASIS_CAP {
            return Err(Error::CapExceeded { what: "monomial basis", size: len, cap: BASIS_CAP });
        }
        let mut out = vec![RatPoly::zero(self.n); len as usize];
        for (r, c) in &self.objective {
            out[*r as usize] = c.clone();
        }
        Ok(out)
    }

    pub fn upper_selector(&self) -> u128 {
        self.upper_selector
    }

    pub fn upper_multiplier(&self) -> &RatPoly {
        &self.upper_multiplier
    }

    pub fn lower_box(&self) -> &[(Rational, Rational)] {
        &self.lower_box
    }

    /// Monomial at a basis rank, evaluated at `y`.
    fn monomial_at(&self, rank: u128, y: &[Rational]) -> Result<Rational> {
        let e = self.basis.unrank(rank)?;
        Ok(y.iter().zip(&e).fold(Rational::from_integer(1.into()), |acc, (v, &k)| acc * num_traits::pow(v.clone(), k as usize)))
    }

    /// `c_Q(x) · M_d(y)` computed from the sparse objective only.
    pub fn objective_at(&self, x: &[Rational], y: &[Rational]) -> Result<Rational> {
        if y.len() != self.basis.num_vars() {
            return Err(Error::LengthMismatch { expected: self.basis.num_vars(), got: y.len() });
        }
        let mut acc = Rational::from_integer(0.into());
        for (r, c) in &self.objective {
            acc += c.evaluate(x)? * self.monomial_at(*r, y)?;
        }
        Ok(acc)
    }

    /// `c_Q(x) · λ` for a full moment vector.
    pub fn linear_value(&self, x: &[Rational], lambda: &[Rational]) -> Result<Rational> {
        let mut acc = Rational::from_integer(0.into());
        for (r, c) in &self.objective {
            let v = lambda
                .get(*r as usize)
                .ok_or(Error::IndexOutOfRange { index: *r as usize, bound: lambda.len() })?;
            acc += c.evaluate(x)? * v;
        }
        Ok(acc)
    }

    /// Upper objective read off a moment vector: `a(x) · λ[selector]`.
    pub fn upper_value(&self, x: &[Rational], lambda: &[Rational]) -> Result<Rational> {
        let v = lambda
            .get(self.upper_selector as usize)
            .ok_or(Error::IndexOutOfRange { index: self.upper_selector as usize, bound: lambda.len() })?;
        Ok(self.upper_multiplier.evaluate(x)? * v)
    }

    pub fn moments(&self, y: &[Rational]) -> Result<Vec<Rational>> {
        monomial_map(y, &self.basis)
    }

    /// Images `M_d(y)` of the box grid with `per_dim` points per axis; a sample of the hull.
    pub fn box_grid_moments(&self, per_dim: usize, cap: usize) -> Result<Vec<Vec<Rational>>> {
        let total = (per_dim as u128).saturating_pow(self.lower_box.len() as u32);
        if total > cap as u128 {
            return Err(Error::CapExceeded { what: "box grid", size: total, cap: cap as u128 });
        }
        let axes: Vec<Vec<Rational>> = self.lower_box.iter().map(|(lo, hi)| axis(lo, hi, per_dim)).collect();
        let mut pts = vec![Vec::new()];
        for a in &axes {
            pts = pts
                .into_iter()
                .flat_map(|p| {
                    a.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v.clone());
                        q
                    })
                })
                .collect();
        }
        pts.iter().map(|y| self.moments(y)).collect()
    }
}

#[derive(Serialize)]
struct ObjectiveEntry<'a> {
    index: String,
    monomial: Vec<u32>,
    coeff: &'a RatPoly,
}

impl Serialize for LiftedProgram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::{Error as _, SerializeStruct};
        let entries = self
            .objective
            .iter()
            .map(|(r, c)| {
                Ok(ObjectiveEntry { index: r.to_string(), monomial: self.basis.unrank(*r).map_err(S::Error::custom)?, coeff: c })
            })
            .collect::<std::result::Result<Vec<_>, S::Error>>()?;
        let bx: Vec<[String; 2]> = self.lower_box.iter().map(|(a, b)| [format_rational(a), format_rational(b)]).collect();
        let mut st = s.serialize_struct("LiftedProgram", 7)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("basis_vars", &self.basis.num_vars())?;
        st.serialize_field("basis_degree", &self.basis.degree_bound())?;
        st.serialize_field("basis_len", &self.basis.len().to_string())?;
        st.serialize_field("objective", &entries)?;
        st.serialize_field("upper_selector", &self.upper_selector.to_string())?;
        st.serialize_field("upper_multiplier", &self.upper_multiplier)?;
        st.serialize_field("feasible_set", &serde_json::json!({ "kind": "conv(M_d(box))", "box": bx }))?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{interval, unbounded, Mode};
    use crate::scalar::{int, ratio};

    #[test]
    fn square_objective() {
        let t = RatPoly::var(2, 1);
        let prog = BilevelProgram::new(1, 1, t.clone(), t.square(), vec![interval(int(-1), int(1))], Mode::Optimistic).unwrap();
        let l = moment_lift(&prog).unwrap();
        assert_eq!(l.basis().len(), 3);
        let c = l.objective_coeffs().unwrap();
        assert_eq!(c, vec![RatPoly::zero(1), RatPoly::zero(1), RatPoly::one(1)]);
        assert_eq!(l.upper_selector(), 1);
        let y = [ratio(1, 3)];
        let lam = l.moments(&y).unwrap();
        assert_eq!(l.linear_value(&[int(5)], &lam).unwrap(), ratio(1, 9));
        assert_eq!(l.upper_value(&[int(5)], &lam).unwrap(), ratio(1, 3));
    }

    #[test]
    fn rejects_bad_programs() {
        let t = RatPoly::var(2, 1);
        let free = BilevelProgram::new(1, 1, t.clone(), t.square(), vec![unbounded()], Mode::Optimistic).unwrap();
        assert_eq!(moment_lift(&free), Err(Error::UnboundedBox(0)));
        let sq = BilevelProgram::new(1, 1, t.square(), t.square(), vec![interval(int(0), int(1))], Mode::Optimistic).unwrap();
        assert!(matches!(moment_lift(&sq), Err(Error::NotLiftable(_))));
    }
}
