//! Sampled semicontinuity probes and the two-evaluator agreement harness.
//!
//! A probe walks rays `x + r·4^-j·u` toward `x`. A neighbour counts as a violation only when the
//! gap `φ(x) - φ(y)` (lower check) stays above the tolerance at every level and does not decay
//! between the last two levels. Continuous slopes shrink by a factor of 4 per level; jumps do not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eval_constructed, eval_generic, truncate_box, truncation_radius, EvalConfig};
use crate::encoder::{BilevelProgram, Mode};
use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::scalar::{format_rational, int, rational_to_f64, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Semicontinuity {
    /// `φ(x) ≤ liminf φ(y)`: what optimistic value functions satisfy.
    Lower,
    /// `φ(x) ≥ limsup φ(y)`: the pessimistic counterpart.
    Upper,
}

impl Semicontinuity {
    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Optimistic => Semicontinuity::Lower,
            Mode::Pessimistic => Semicontinuity::Upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub radius: f64,
    pub samples: usize,
    pub levels: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { radius: 0.1, samples: 20, levels: 8, tol: 1e-6, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeViolation {
    pub direction: Vec<f64>,
    pub nearest: Vec<f64>,
    pub nearest_value: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub point: Vec<f64>,
    pub kind: Semicontinuity,
    pub value: f64,
    pub neighbors: usize,
    pub violations: Vec<ProbeViolation>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Which value function a probe samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluator {
    Generic(EvalConfig),
    Constructed,
}

fn lattice(rng: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    Rational::new(rng.gen_range(lo..=hi).into(), den.into())
}

/// Probe an arbitrary function of a rational point.
pub fn probe_function<F>(f: F, kind: Semicontinuity, x: &[Rational], cfg: &ProbeConfig) -> Result<ProbeReport>
where
    F: Fn(&[Rational]) -> Result<f64> + Sync,
{
    if !(cfg.radius > 0.0) || cfg.levels == 0 || !(cfg.tol >= 0.0) {
        return Err(Error::InvalidConfig("probe needs a positive radius, at least one level and tol ≥ 0".into()));
    }
    const DEN: i64 = 1 << 10;
    let radius = crate::scalar::f64_to_rational(cfg.radius).ok_or_else(|| Error::InvalidConfig("radius".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rays: Vec<(Vec<Rational>, Rational)> = (0..cfg.samples)
        .map(|_| {
            let u: Vec<Rational> = loop {
                let u: Vec<Rational> = x.iter().map(|_| lattice(&mut rng, -DEN, DEN, DEN)).collect();
                if u.iter().any(|v| !num_traits::Zero::is_zero(v)) {
                    break u;
                }
            };
            let r = &radius * lattice(&mut rng, 1, DEN, DEN);
            (u, r)
        })
        .collect();
    let fx = f(x)?;
    let gap = |fy: f64| match kind {
        Semicontinuity::Lower => fx - fy,
        Semicontinuity::Upper => fy - fx,
    };
    let found: Vec<Option<ProbeViolation>> = rays
        .par_iter()
        .map(|(u, r)| {
            let mut gaps = Vec::with_capacity(cfg.levels);
            let mut last = (Vec::new(), 0.0);
            let mut step = r.clone();
            for _ in 0..cfg.levels {
                let y: Vec<Rational> = x.iter().zip(u).map(|(a, b)| a + &step * b).collect();
                let fy = f(&y)?;
                let g = gap(fy);
                if !(g > cfg.tol) {
                    return Ok(None);
                }
                gaps.push(g);
                last = (y, fy);
                step /= int(4);
            }
            let n = gaps.len();
            if n >= 2 && !(gaps[n - 1] >= 0.75 * gaps[n - 2]) {
                return Ok(None);
            }
            Ok(Some(ProbeViolation {
                direction: u.iter().map(rational_to_f64).collect(),
                nearest: last.0.iter().map(rational_to_f64).collect(),
                nearest_value: last.1,
                magnitude: gaps.iter().copied().fold(f64::INFINITY, f64::min),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(ProbeReport {
        point: x.iter().map(rational_to_f64).collect(),
        kind,
        value: fx,
        neighbors: cfg.samples,
        violations: found.into_iter().flatten().collect(),
    })
}

/// Probe a program's value function; the direction follows its mode unless `kind` overrides it.
pub fn semicontinuity_probe(
    prog: &BilevelProgram,
    x: &[Rational],
    cfg: &ProbeConfig,
    evaluator: &Evaluator,
    kind: Option<Semicontinuity>,
) -> Result<ProbeReport> {
    let kind = kind.unwrap_or_else(|| Semicontinuity::for_mode(prog.mode()));
    match evaluator {
        Evaluator::Constructed => probe_function(|y| Ok(eval_constructed(prog, y)?.to_f64()), kind, x, cfg),
        Evaluator::Generic(ec) => {
            prog.finite_box()?;
            probe_function(|y| Ok(eval_generic(prog, y, ec)?.value.to_f64()), kind, x, cfg)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkipNotice {
    pub point: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub point: Vec<String>,
    pub exact: String,
    pub generic: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossReport {
    pub checked: usize,
    pub skipped: Vec<SkipNotice>,
    pub mismatches: Vec<Mismatch>,
    pub max_diff: f64,
    pub tol: f64,
    /// Set when an unbounded box had to be truncated for the generic evaluator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<String>,
}

impl CrossReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compare both evaluators at every point. Indicator and piecewise programs with free lower
/// variables are truncated to a box that holds every closed-form minimizer at these points.
pub fn cross_validate(prog: &BilevelProgram, points: &[Vec<Rational>], cfg: &EvalConfig, tol: f64) -> Result<CrossReport> {
    let (searched, radius) = if prog.is_bounded() {
        (prog.clone(), None)
    } else {
        let r = truncation_radius(prog, points).map_err(|_| Error::UnboundedBox(first_unbounded(prog)))?;
        (truncate_box(prog, &r)?, Some(format_rational(&r)))
    };
    let rows: Vec<(Vec<String>, Extended<Rational>, Option<f64>)> = points
        .par_iter()
        .map(|x| {
            let exact = eval_constructed(prog, x)?;
            let generic = match exact {
                Extended::Finite(_) => Some(eval_generic(&searched, x, cfg)?.value.to_f64()),
                _ => None,
            };
            Ok((x.iter().map(format_rational).collect(), exact, generic))
        })
        .collect::<Result<_>>()?;
    let mut report =
        CrossReport { checked: 0, skipped: Vec::new(), mismatches: Vec::new(), max_diff: 0.0, tol, truncation_radius: radius };
    for (point, exact, generic) in rows {
        match (exact, generic) {
            (Extended::Finite(e), Some(g)) => {
                let diff = (rational_to_f64(&e) - g).abs();
                report.checked += 1;
                if diff > report.max_diff || diff.is_nan() {
                    report.max_diff = diff;
                }
                if !(diff <= tol) {
                    report.mismatches.push(Mismatch { point, exact: format_rational(&e), generic: g, diff });
                }
            }
            (e, _) => report.skipped.push(SkipNotice {
                point,
                reason: format!("exact value is {e}; an unattained or unbounded infimum cannot be certified by sampling"),
            }),
        }
    }
    Ok(report)
}

fn first_unbounded(prog: &BilevelProgram) -> usize {
    match prog.finite_box() {
        Err(Error::UnboundedBox(k)) => k,
        _ => 0,
    }
}
