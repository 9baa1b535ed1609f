//! Exact value functions read off construction metadata.
//!
//! The recipe always describes the program as it was built, before any [`pessimize`]; the
//! metadata's `negated` flag says whether `P` has been negated since. So a program is evaluated
//! by running its recipe under the sense `(mode, negated)` implies and negating the result back.
//!
//! [`pessimize`]: crate::encoder::pessimize

use num_traits::{One, Zero};

use crate::encoder::{pw_lsc_value, reflect_closure, BilevelProgram, Mode, Recipe};
use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::hardness::{hardness_value, DEFAULT_ORACLE_CAP};
use crate::scalar::{int, Rational};
use crate::semialg::{closure_fiber_min, target_eval, ClosedSASet, Window};

/// Width of the isolating interval whose midpoint stands in for an irrational value.
pub fn exact_tolerance() -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(1u64 << 40))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Inf,
    Sup,
}

fn base_sense(mode: Mode, negated: bool) -> Sense {
    match (mode, negated) {
        (Mode::Optimistic, false) | (Mode::Pessimistic, true) => Sense::Inf,
        (Mode::Pessimistic, false) | (Mode::Optimistic, true) => Sense::Sup,
    }
}

/// Exact `φ` of a compiled program at a rational point, in the program's own mode.
pub fn eval_constructed(prog: &BilevelProgram, x: &[Rational]) -> Result<Extended<Rational>> {
    eval_constructed_as(prog, x, prog.mode())
}

/// Same, as if the program's mode were `mode`.
pub fn eval_constructed_as(prog: &BilevelProgram, x: &[Rational], mode: Mode) -> Result<Extended<Rational>> {
    let md = prog
        .metadata()
        .ok_or_else(|| Error::RecipePrecondition("program carries no construction metadata".into()))?;
    if x.len() != prog.n() {
        return Err(Error::LengthMismatch { expected: prog.n(), got: x.len() });
    }
    let recipe = md.recipe()?;
    let v = recipe_value(&recipe, x, base_sense(mode, md.negated))?;
    Ok(if md.negated { -v } else { v })
}

fn fiber_min(closure: &ClosedSASet, x: &[Rational], window: &Window) -> Result<Rational> {
    closure_fiber_min(closure, x, window, &exact_tolerance())?
        .map(|r| r.approx())
        .ok_or_else(|| Error::RecipePrecondition("the closed graph has an empty fiber inside the growth window".into()))
}

fn recipe_value(recipe: &Recipe, x: &[Rational], sense: Sense) -> Result<Extended<Rational>> {
    Ok(match recipe {
        Recipe::SaUnbounded { spec } => match target_eval(spec, x, None, &exact_tolerance())? {
            Extended::Finite(v) => Extended::Finite(v),
            // dom+: Θ(x) is empty
            Extended::PosInf => match sense {
                Sense::Inf => Extended::PosInf,
                Sense::Sup => Extended::NegInf,
            },
            // dom-: P is unbounded on Θ(x) in both directions
            Extended::NegInf => match sense {
                Sense::Inf => Extended::NegInf,
                Sense::Sup => Extended::PosInf,
            },
        },
        Recipe::LscBounded { closure, bounds } => {
            let window = Window::symmetric(bounds.scale_at(x));
            Extended::Finite(match sense {
                Sense::Inf => fiber_min(closure, x, &window)?,
                Sense::Sup => -fiber_min(&reflect_closure(closure)?, x, &window)?,
            })
        }
        Recipe::Indicator { set } => Extended::Finite(if set.contains(x)? { Rational::one() } else { Rational::zero() }),
        Recipe::PiecewiseUnbounded { polys, blocks } => {
            let mut acc = Rational::zero();
            for (p, cell) in polys.iter().zip(blocks) {
                let mut hits = 0i64;
                for b in cell {
                    if b.contains(x)? {
                        hits += 1;
                    }
                }
                if hits > 0 {
                    acc += p.evaluate(x)? * int(hits);
                }
            }
            Extended::Finite(acc)
        }
        Recipe::PwLscBounded { polys, closures, bounds } => {
            Extended::Finite(pw_lsc_value(polys, closures, bounds, x, sense == Sense::Sup)?)
        }
        Recipe::Hardness { instance } => {
            Extended::Finite(hardness_value(instance, x, sense == Sense::Sup, DEFAULT_ORACLE_CAP)?)
        }
    })
}
