//! Value functions `φ_o(x) = inf { P(x, y) : y ∈ Θ(x) }` and `φ_p(x) = sup {…}`, two ways.
//!
//! [`eval_generic`] searches the lower box numerically and needs nothing but `P`, `Q` and a
//! bounded box. [`eval_constructed`] reads the construction metadata and evaluates the closed-form
//! minimizer tables exactly. [`cross_validate`] compares them; [`semicontinuity_probe`] samples the
//! regularity the value function must have in each mode.
//!
//! Known limitation: the generic evaluator stands in for `Θ(x)` with a `Q`-sublevel set of width
//! `argmin_tolerance`, which can only be larger than `Θ(x)`. This biases `φ_o` down and `φ_p` up.

mod constructed;
mod fast;
mod grid;
mod probe;

pub use constructed::{eval_constructed, eval_constructed_as, exact_tolerance, Sense};
pub use probe::{
    cross_validate, probe_function, semicontinuity_probe, CrossReport, Evaluator, Mismatch, ProbeConfig, ProbeReport,
    ProbeViolation, Semicontinuity, SkipNotice,
};

use std::collections::BTreeSet;

use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::{interval, BilevelProgram, Mode, Recipe};
use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::scalar::{f64_to_rational, int, rational_to_f64, Rational};
use fast::FastPoly;
use grid::{combine, flat_group, grid_group, groups, mids, multistart_group};

/// Lower points reported in [`EvalResult::argmin_sample`].
const SAMPLE_KEEP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericMode {
    #[default]
    Float,
    /// Float search, then exact rational re-evaluation of `P` and `Q` on the reported sample.
    ExactOnGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub grid_points_per_dim: usize,
    /// Every stage after the first re-centres on the near-tie incumbents and shrinks the box by 4.
    pub refinement_stages: usize,
    pub argmin_tolerance: f64,
    pub numeric_mode: NumericMode,
    /// Groups with more outer variables than this use multi-start descent instead of a grid.
    pub max_grid_dims: usize,
    /// Grid nodes per stage, shared by all refinement boxes.
    pub grid_budget: usize,
    pub max_boxes: usize,
    /// Largest product of group samples enumerated exactly when optimizing `P`.
    pub product_cap: usize,
    pub multistart: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            grid_points_per_dim: 33,
            refinement_stages: 3,
            argmin_tolerance: 1e-6,
            numeric_mode: NumericMode::Float,
            max_grid_dims: 3,
            grid_budget: 4096,
            max_boxes: 16,
            product_cap: 20_000,
            multistart: 16,
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.argmin_tolerance > 0.0) || !self.argmin_tolerance.is_finite() {
            return Err(Error::InvalidConfig("argmin_tolerance must be positive".into()));
        }
        if self.refinement_stages == 0 {
            return Err(Error::InvalidConfig("refinement_stages must be at least 1".into()));
        }
        if self.grid_points_per_dim < 2 {
            return Err(Error::InvalidConfig("grid_points_per_dim must be at least 2".into()));
        }
        if self.max_boxes == 0 || self.grid_budget == 0 || self.product_cap == 0 {
            return Err(Error::InvalidConfig("max_boxes, grid_budget and product_cap must be positive".into()));
        }
        Ok(())
    }

    /// Deeper search used by the verification harnesses.
    pub fn thorough() -> Self {
        EvalConfig { refinement_stages: 8, argmin_tolerance: 1e-9, ..EvalConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: Extended<f64>,
    /// Best lower point first, then other points of the approximate argmin set.
    pub argmin_sample: Vec<Vec<f64>>,
    /// Number of points in the product of group samples.
    pub sample_size: u128,
    pub q_min: f64,
    /// Incumbent `Q` minimum after each stage; never increases.
    pub stage_history: Vec<f64>,
    pub evaluations: u64,
}

/// Approximate `φ` at `x` by grid search over the bounded lower box.
pub fn eval_generic(prog: &BilevelProgram, x: &[Rational], cfg: &EvalConfig) -> Result<EvalResult> {
    cfg.validate()?;
    let fbox = prog.finite_box()?;
    let (n, m) = (prog.n(), prog.m());
    if x.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: x.len() });
    }
    let fixed: Vec<Option<Rational>> = x.iter().cloned().map(Some).chain(std::iter::repeat_n(None, m)).collect();
    let q_r = prog.q().restrict(&fixed)?;
    let p_r = prog.p().restrict(&fixed)?;
    let bounds: Vec<(f64, f64)> = fbox.iter().map(|(a, b)| (rational_to_f64(a), rational_to_f64(b))).collect();
    let mut qf = FastPoly::from_rational(&q_r);
    let pf = FastPoly::from_rational(&p_r);
    let pvars = pf.vars();
    let sup = prog.mode() == Mode::Pessimistic;

    let gs = groups(&qf, m);
    let in_q: BTreeSet<usize> = gs.iter().flatten().copied().collect();
    let flat: Vec<usize> = pvars.iter().copied().filter(|v| !in_q.contains(v)).collect();
    let eps = cfg.argmin_tolerance / (gs.len() + flat.len()).max(1) as f64;
    let parts: Vec<(Vec<usize>, FastPoly)> = gs
        .into_iter()
        .map(|vars| {
            let set: BTreeSet<usize> = vars.iter().copied().collect();
            let qc = qf.take_terms(&set);
            (vars, qc)
        })
        .collect();
    let q_const = qf.eval(&vec![0.0; m]);
    let mut samples: Vec<_> = parts
        .par_iter()
        .enumerate()
        .map(|(gi, (vars, qc))| {
            let outer: Vec<usize> = vars.iter().copied().filter(|v| pvars.contains(v)).collect();
            let seed = cfg.seed.wrapping_add(gi as u64);
            if outer.is_empty() {
                multistart_group(qc, vars, &bounds, eps, false, cfg, seed)
            } else if outer.len() <= cfg.max_grid_dims {
                grid_group(qc, vars, &outer, &bounds, eps, cfg)
            } else {
                multistart_group(qc, vars, &bounds, eps, true, cfg, seed)
            }
        })
        .collect();
    samples.extend(flat.iter().map(|&v| flat_group(v, &bounds, cfg)));

    let comb = combine(&samples, &pf, &mids(&bounds), sup, cfg.product_cap, SAMPLE_KEEP);
    let q_min = q_const + samples.iter().map(|s| s.q_min).sum::<f64>();
    let stage_history: Vec<f64> =
        (0..cfg.refinement_stages).map(|s| q_const + samples.iter().map(|g| g.history[s]).sum::<f64>()).collect();
    let evaluations = comb.evaluations + samples.iter().map(|s| s.evaluations).sum::<u64>();
    let mut value = comb.value;
    if cfg.numeric_mode == NumericMode::ExactOnGrid {
        value = exact_on_sample(prog, x, &comb.sample, cfg.argmin_tolerance, sup)?;
    }
    Ok(EvalResult {
        value: Extended::from_f64(value),
        argmin_sample: comb.sample,
        sample_size: comb.sample_size,
        q_min,
        stage_history,
        evaluations,
    })
}

fn exact_on_sample(prog: &BilevelProgram, x: &[Rational], sample: &[Vec<f64>], eps: f64, sup: bool) -> Result<f64> {
    let scored: Vec<(Rational, Rational)> = sample
        .par_iter()
        .map(|y| {
            let yr: Vec<Rational> = y.iter().map(|v| f64_to_rational(*v).expect("finite grid point")).collect();
            prog.objectives_at(x, &yr)
        })
        .collect::<Result<_>>()?;
    let q_min = scored.iter().map(|(_, q)| q).min().expect("nonempty sample").clone();
    let cut = q_min + f64_to_rational(eps).expect("finite tolerance");
    let kept = scored.iter().filter(|(_, q)| *q <= cut).map(|(p, _)| p);
    let best = if sup { kept.max() } else { kept.min() };
    Ok(rational_to_f64(best.expect("the minimizer itself is kept")))
}

/// Replace every infinite box side by `±radius`. Metadata is kept.
pub fn truncate_box(prog: &BilevelProgram, radius: &Rational) -> Result<BilevelProgram> {
    if !radius.is_positive() {
        return Err(Error::InvalidConfig("truncation radius must be positive".into()));
    }
    let bounds = prog
        .bounds()
        .iter()
        .map(|(lo, hi)| {
            let lo = match lo {
                Extended::Finite(v) => v.clone(),
                _ => -radius.clone(),
            };
            let hi = match hi {
                Extended::Finite(v) => v.clone(),
                _ => radius.clone(),
            };
            interval(lo, hi)
        })
        .collect();
    prog.clone().with_bounds(bounds)
}

/// Radius that keeps every closed-form minimizer of an indicator or piecewise program inside the
/// truncated box at the given points: twice the largest `1/|E(x)|`, `1/|Q_j(x)|`, and at least 2.
pub fn truncation_radius(prog: &BilevelProgram, points: &[Vec<Rational>]) -> Result<Rational> {
    let md = prog.metadata().ok_or_else(|| Error::RecipePrecondition("program carries no metadata".into()))?;
    let sets = match md.recipe()? {
        Recipe::Indicator { set } => vec![set],
        Recipe::PiecewiseUnbounded { blocks, .. } => blocks.into_iter().flatten().collect(),
        other => {
            return Err(Error::RecipePrecondition(format!(
                "no truncation rule for `{}`",
                serde_json::to_value(&other).map(|v| v["construction"].to_string()).unwrap_or_default()
            )))
        }
    };
    let mut r = int(1);
    for x in points {
        for s in &sets {
            for poly in std::iter::once(s.equality()).chain(s.strict()) {
                let v = poly.evaluate(x)?;
                if !num_traits::Zero::is_zero(&v) {
                    let inv = v.abs().recip();
                    if inv > r {
                        r = inv;
                    }
                }
            }
        }
    }
    Ok(r * int(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode_indicator_convex, encode_lsc_bounded, unbounded};
    use crate::scalar::ratio;
    use crate::semialg::{BasicSet, ClosedSASet, GrowthBounds, SamplePlan};
    use crate::RatPoly;

    fn toy(mode: Mode) -> BilevelProgram {
        let t = RatPoly::var(2, 1);
        BilevelProgram::new(1, 1, t.clone(), t.square(), vec![interval(int(-1), int(1))], mode).unwrap()
    }

    #[test]
    fn square_toy_value_is_zero() {
        for x in [-3, 0, 5] {
            let r = eval_generic(&toy(Mode::Optimistic), &[int(x)], &EvalConfig::default()).unwrap();
            assert!(r.value.to_f64().abs() < 1e-9);
            assert!(!r.argmin_sample.is_empty());
            assert!(r.stage_history.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn ties_are_kept() {
        // Q = (t^2 - 1/4)^2 has minimizers ±1/2; P = t
        let t = RatPoly::var(2, 1);
        let q = (&t.square() - &RatPoly::constant(2, ratio(1, 4))).square();
        let opt = BilevelProgram::new(1, 1, t.clone(), q, vec![interval(int(-1), int(1))], Mode::Optimistic).unwrap();
        let lo = eval_generic(&opt, &[int(0)], &EvalConfig::default()).unwrap().value.to_f64();
        let hi = eval_generic(&opt.clone().with_mode(Mode::Pessimistic), &[int(0)], &EvalConfig::default()).unwrap().value.to_f64();
        assert!((lo + 0.5).abs() < 1e-3 && (hi - 0.5).abs() < 1e-3);
    }

    #[test]
    fn unbounded_boxes_are_refused() {
        let t = RatPoly::var(2, 1);
        let free = BilevelProgram::new(1, 1, t.clone(), t.square(), vec![unbounded()], Mode::Optimistic).unwrap();
        assert_eq!(eval_generic(&free, &[int(0)], &EvalConfig::default()).unwrap_err(), Error::UnboundedBox(0));
        let bad = EvalConfig { refinement_stages: 0, ..EvalConfig::default() };
        assert!(matches!(eval_generic(&toy(Mode::Optimistic), &[int(0)], &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn indicator_at_point() {
        let s = BasicSet::new(RatPoly::var(1, 0), vec![RatPoly::one(1)]).unwrap();
        let prog = encode_indicator_convex(&s, Mode::Optimistic).unwrap();
        let pts = vec![vec![int(0)], vec![ratio(1, 2)]];
        let r = truncation_radius(&prog, &pts).unwrap();
        let cut = truncate_box(&prog, &r).unwrap();
        let cfg = EvalConfig::thorough();
        assert!((eval_generic(&cut, &pts[0], &cfg).unwrap().value.to_f64() - 1.0).abs() < 1e-3);
        assert!(eval_generic(&cut, &pts[1], &cfg).unwrap().value.to_f64().abs() < 1e-3);
    }

    #[test]
    fn lsc_step_at_minus_one() {
        let x = RatPoly::var(2, 0);
        let t = RatPoly::var(2, 1);
        let one = RatPoly::one(2);
        let step = ClosedSASet::new(2, vec![vec![x.clone(), t.clone(), -&t], vec![-&x, &t - &one, &one - &t]]).unwrap();
        let b = GrowthBounds::new(int(1), 2).unwrap();
        let prog = encode_lsc_bounded(&step, &b, Mode::Optimistic, &SamplePlan::grid(-2, 2, 5)).unwrap();
        let cfg = EvalConfig::thorough();
        let v = eval_generic(&prog, &[int(-1)], &cfg).unwrap();
        assert!((v.value.to_f64() - 1.0).abs() < 1e-3, "{v:?}");
        assert!(v.q_min >= -1e-12);
        let exact = EvalConfig { numeric_mode: NumericMode::ExactOnGrid, ..cfg };
        assert!((eval_generic(&prog, &[int(0)], &exact).unwrap().value.to_f64()).abs() < 1e-3);
    }
}
