//! Lower semicontinuous functions with growth bounds, over a compact lower box.
//!
//! With `c(x) = B + ‖x‖^N` and the closed graph `∪_i ∩_j {P_ij(x, t) ≥ 0}`, substitute
//! `t = c(x)·t'` to get `P̃_ij(x, t')` and set
//!
//! `G_ij = (P̃_ij - (P̃_ij² + 1) z_ij)²`, `Q = ∏_i Σ_j G_ij`, `P = c(x)·t'`,
//!
//! over `t' ∈ [-1, 1]`, `z_ij ∈ [0, 1/2]`. Minimizing `G_ij` over `z` leaves 0 where `P̃_ij ≥ 0` and
//! `P̃_ij²` otherwise, so `Q = 0` exactly on the closed graph and `φ_o(x) = min` of its fiber.

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::encoder::{interval, lower, pessimize, BilevelProgram, Metadata, Mode, Recipe, Role, RoleSlot};
use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::scalar::{format_rational, int, ratio, Rational};
use crate::semialg::{closure_global_min, ClosedSASet, GrowthBounds, SamplePlan};
use crate::RatPoly;

/// Minimizer of `(p - (p² + 1) z)²` over `z ∈ [0, 1/2]`: `(p/(p²+1), 0)` for `p ≥ 0`, else `(0, p²)`.
pub fn lsc_block_minimizer(p: &Rational) -> (Rational, Rational) {
    if p.is_negative() {
        (Rational::zero(), p * p)
    } else {
        (p / (p * p + int(1)), Rational::zero())
    }
}

/// Reflect `t ↦ -t` in every clause: the closed graph of `-f`.
pub(crate) fn reflect_closure(c: &ClosedSASet) -> Result<ClosedSASet> {
    let n = c.num_vars() - 1;
    let minus_t = -&RatPoly::var(n + 1, n);
    let clauses = c
        .clauses()
        .iter()
        .map(|cl| cl.iter().map(|p| p.substitute(n, &minus_t)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    ClosedSASet::new(n + 1, clauses)
}

/// Check `|min fiber| ≤ B + ‖x‖^N` at every sample point.
pub fn validate_bounds(closure: &ClosedSASet, bounds: &GrowthBounds, plan: &SamplePlan) -> Result<()> {
    let n = closure.num_vars() - 1;
    let tol = ratio(1, 1 << 30);
    let points = plan.points(n)?;
    let failures: Vec<Result<Option<String>>> = points
        .par_iter()
        .map(|x| {
            let c = bounds.scale_at(x);
            let at = || x.iter().map(format_rational).collect::<Vec<_>>().join(", ");
            Ok(match closure_global_min(closure, x, &tol)? {
                Extended::Finite(r) => {
                    let v = r.approx();
                    (v.abs() > c).then(|| format!("|f| = {} exceeds {} at x = ({})", format_rational(&v), format_rational(&c), at()))
                }
                Extended::PosInf => Some(format!("empty fiber at x = ({})", at())),
                Extended::NegInf => Some(format!("fiber unbounded below at x = ({})", at())),
            })
        })
        .collect();
    for f in failures {
        if let Some(msg) = f? {
            return Err(Error::BoundsViolated(msg));
        }
    }
    Ok(())
}

fn build(closure: &ClosedSASet, bounds: &GrowthBounds) -> Result<BilevelProgram> {
    let closure = closure.normalize();
    let n = closure.num_vars() - 1;
    let clauses = closure.clauses().len();
    let width = closure.max_width();
    let m = 1 + clauses * width;
    let total = n + m;
    let xs: Vec<usize> = (0..n).collect();

    // Substitute t = c(x)·t' over (x, t'), then place t' at lower slot 0.
    let c_xt = bounds.scale_poly(n + 1, &xs);
    let scaled_t = &c_xt * &RatPoly::var(n + 1, n);
    let mut map: Vec<usize> = xs.clone();
    map.push(lower(n, 0));

    let one = RatPoly::one(total);
    let mut factors = Vec::with_capacity(clauses);
    for (i, clause) in closure.clauses().iter().enumerate() {
        let mut sum = RatPoly::zero(total);
        for (j, pij) in clause.iter().enumerate() {
            let pt = pij.substitute(n, &scaled_t)?.embed(total, &map)?;
            let z = RatPoly::var(total, lower(n, 1 + i * width + j));
            let g = (&pt - &(&(&pt.square() + &one) * &z)).square();
            sum = &sum + &g;
        }
        factors.push(sum);
    }
    let q = RatPoly::product(total, factors.iter());
    let p = &bounds.scale_poly(total, &xs) * &RatPoly::var(total, lower(n, 0));

    let mut bx = vec![interval(int(-1), int(1))];
    bx.extend(std::iter::repeat_n(interval(int(0), ratio(1, 2)), clauses * width));
    let mut roles = vec![RoleSlot::new(Role::T, &[])];
    for i in 0..clauses {
        for j in 0..width {
            roles.push(RoleSlot::new(Role::Z, &[i, j]));
        }
    }
    let recipe = Recipe::LscBounded { closure, bounds: bounds.clone() };
    BilevelProgram::new(n, m, p, q, bx, Mode::Optimistic)?.with_metadata(Metadata::new(roles, &recipe))
}

/// Compile the closed graph of an lsc (optimistic) or usc (pessimistic) function.
///
/// The bounds are checked at every point of `validation` before anything is built.
pub fn encode_lsc_bounded(
    graph_closure: &ClosedSASet,
    bounds: &GrowthBounds,
    mode: Mode,
    validation: &SamplePlan,
) -> Result<BilevelProgram> {
    if graph_closure.clauses().is_empty() {
        return Err(Error::EmptyDecomposition("closed graph has no clauses".into()));
    }
    if graph_closure.num_vars() == 0 {
        return Err(Error::InvalidProgram("closed graph needs at least the t variable".into()));
    }
    let target = match mode {
        Mode::Optimistic => graph_closure.clone(),
        Mode::Pessimistic => reflect_closure(graph_closure)?,
    };
    validate_bounds(&target, bounds, validation)?;
    let prog = build(&target, bounds)?;
    Ok(match mode {
        Mode::Optimistic => prog,
        Mode::Pessimistic => pessimize(&prog),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn step_closure() -> ClosedSASet {
        let x = RatPoly::var(2, 0);
        let t = RatPoly::var(2, 1);
        let one = RatPoly::one(2);
        ClosedSASet::new(2, vec![vec![x.clone(), t.clone(), -&t], vec![-&x, &t - &one, &one - &t]]).unwrap()
    }

    #[test]
    fn minimizer_table() {
        assert_eq!(lsc_block_minimizer(&int(1)), (ratio(1, 2), int(0)));
        assert_eq!(lsc_block_minimizer(&int(-2)), (int(0), int(4)));
        assert_eq!(lsc_block_minimizer(&int(0)), (int(0), int(0)));
        for k in 0..50 {
            let (z, _) = lsc_block_minimizer(&ratio(k, 7));
            assert!(z >= int(0) && z <= ratio(1, 2));
        }
    }

    #[test]
    fn step_program_shape() {
        let b = GrowthBounds::new(int(1), 2).unwrap();
        let prog = encode_lsc_bounded(&step_closure(), &b, Mode::Optimistic, &SamplePlan::grid(-2, 2, 9)).unwrap();
        assert_eq!(prog.m(), 1 + 2 * 3);
        assert!(prog.is_bounded());
        // At x = -1 the fiber is {1}: t' = 1/2, then each block at its closed-form minimizer.
        let x = [int(-1)];
        let c = b.scale_at(&x);
        let tp = int(1) / &c;
        let md = prog.metadata().unwrap();
        let Recipe::LscBounded { closure, .. } = md.recipe().unwrap() else { panic!() };
        let mut y = vec![tp.clone()];
        let mut point = x.to_vec();
        point.push(&c * &tp);
        for clause in closure.clauses() {
            for pij in clause {
                y.push(lsc_block_minimizer(&pij.evaluate(&point).unwrap()).0);
            }
        }
        let (p, q) = prog.objectives_at(&x, &y).unwrap();
        assert_eq!(p, int(1));
        assert_eq!(q, int(0));
    }

    #[test]
    fn bounds_are_validated() {
        let b = GrowthBounds::new(ratio(1, 2), 2).unwrap();
        // f(-1/4) = 1 > 1/2 + 1/16
        let plan = SamplePlan::Points(vec![vec![ratio(-1, 4)]]);
        assert!(matches!(
            encode_lsc_bounded(&step_closure(), &b, Mode::Optimistic, &plan),
            Err(Error::BoundsViolated(_))
        ));
        let empty = ClosedSASet::new(2, vec![]).unwrap();
        assert!(matches!(
            encode_lsc_bounded(&empty, &b, Mode::Optimistic, &plan),
            Err(Error::EmptyDecomposition(_))
        ));
    }
}
