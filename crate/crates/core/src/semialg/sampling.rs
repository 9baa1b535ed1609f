//! Sample plans and partition validation.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{format_rational, int, parse_rational, Rational};
use crate::semialg::PiecewisePolySpec;

const MAX_POINTS: u128 = 10_000_000;

/// Where to sample. Grids and random boxes use the same bounds in every coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplePlan {
    Grid { lo: Rational, hi: Rational, per_dim: usize },
    Points(Vec<Vec<Rational>>),
    /// Uniform on the lattice `(1/denominator) Z` inside `[lo, hi]^n`.
    Random { lo: Rational, hi: Rational, count: usize, seed: u64, denominator: u32 },
}

impl SamplePlan {
    pub fn grid(lo: i64, hi: i64, per_dim: usize) -> Self {
        SamplePlan::Grid { lo: int(lo), hi: int(hi), per_dim }
    }

    /// Points of the plan in dimension `n`, in a fixed order.
    pub fn points(&self, n: usize) -> Result<Vec<Vec<Rational>>> {
        match self {
            SamplePlan::Points(pts) => {
                if let Some(p) = pts.iter().find(|p| p.len() != n) {
                    return Err(Error::LengthMismatch { expected: n, got: p.len() });
                }
                Ok(pts.clone())
            }
            SamplePlan::Grid { lo, hi, per_dim } => {
                if *per_dim == 0 {
                    return Err(Error::EmptyGrid("grid with zero points per dimension".into()));
                }
                let total = (*per_dim as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
                if total > MAX_POINTS {
                    return Err(Error::CapExceeded { what: "sample grid", size: total, cap: MAX_POINTS });
                }
                let axis = axis(lo, hi, *per_dim);
                let mut out = vec![Vec::new()];
                for _ in 0..n {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            axis.iter().map(move |v| {
                                let mut q = p.clone();
                                q.push(v.clone());
                                q
                            })
                        })
                        .collect();
                }
                Ok(out)
            }
            SamplePlan::Random { lo, hi, count, seed, denominator } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let den = Rational::from_integer((*denominator).into());
                let a = (lo * &den).ceil().to_integer();
                let b = (hi * &den).floor().to_integer();
                let (a, b): (i64, i64) = match (a.try_into(), b.try_into()) {
                    (Ok(a), Ok(b)) if a <= b => (a, b),
                    _ => return Err(Error::EmptyGrid("random box has no lattice points".into())),
                };
                Ok((0..*count)
                    .map(|_| (0..n).map(|_| Rational::new(rng.gen_range(a..=b).into(), (*denominator).into())).collect())
                    .collect())
            }
        }
    }
}

/// `per_dim` equally spaced rationals from `lo` to `hi` inclusive.
pub fn axis(lo: &Rational, hi: &Rational, per_dim: usize) -> Vec<Rational> {
    if per_dim == 1 {
        return vec![(lo + hi) / int(2)];
    }
    let step = (hi - lo) / int(per_dim as i64 - 1);
    (0..per_dim).map(|k| lo + &step * int(k as i64)).collect()
}

fn parse_bracket(s: &str) -> Result<(Rational, Rational)> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected [lo,hi], got `{s}`")))?;
    let (a, b) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("expected [lo,hi], got `{s}`")))?;
    let (a, b) = (parse_rational(a)?, parse_rational(b)?);
    if a > b {
        return Err(Error::Parse(format!("empty interval `{s}`")));
    }
    Ok((a, b))
}

impl FromStr for SamplePlan {
    type Err = Error;

    /// `grid:[lo,hi]:count` or `random:[lo,hi]:count[:seed]`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Parse(format!("bad sample plan `{s}`")))?;
        let close = rest.find(']').ok_or_else(|| Error::Parse(format!("bad sample plan `{s}`")))?;
        let (lo, hi) = parse_bracket(&rest[..=close])?;
        let tail: Vec<&str> = rest[close + 1..].split(':').filter(|p| !p.is_empty()).collect();
        let num = |i: usize| -> Result<u64> {
            tail.get(i)
                .ok_or_else(|| Error::Parse(format!("sample plan `{s}` is missing a count")))?
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))
        };
        match kind {
            "grid" => Ok(SamplePlan::Grid { lo, hi, per_dim: num(0)? as usize }),
            "random" => Ok(SamplePlan::Random {
                lo,
                hi,
                count: num(0)? as usize,
                seed: if tail.len() > 1 { num(1)? } else { 0 },
                denominator: 1024,
            }),
            other => Err(Error::Parse(format!("unknown sample plan kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionViolation {
    pub point: Vec<String>,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub checked: usize,
    pub violations: Vec<PartitionViolation>,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flag every sampled point lying in zero or in several cells.
pub fn validate_partition(spec: &PiecewisePolySpec, plan: &SamplePlan) -> Result<PartitionReport> {
    let points = plan.points(spec.n())?;
    let results: Vec<Result<Option<PartitionViolation>>> = points
        .par_iter()
        .map(|p| {
            let cells = spec.containing_cells(p)?;
            Ok((cells.len() != 1).then(|| PartitionViolation { point: p.iter().map(format_rational).collect(), cells }))
        })
        .collect();
    let mut violations = Vec::new();
    for r in results {
        if let Some(v) = r? {
            violations.push(v);
        }
    }
    Ok(PartitionReport { checked: points.len(), violations })
}
