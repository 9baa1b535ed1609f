//! Convexity of `Q` in the lower variables.
//!
//! When `deg_y Q ≤ 2` the Hessian in `y` depends on `x` only, so positive semidefiniteness at a
//! given `x` is decided exactly by symmetric elimination. A sampled midpoint test runs alongside
//! and is the only check available at higher degree.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::encoder::BilevelProgram;
use crate::error::Result;
use crate::extended::Extended;
use crate::scalar::{format_rational, int, Rational};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub lower_degree: u32,
    pub hessian_checks: usize,
    pub midpoint_checks: usize,
    pub violations: Vec<String>,
}

impl ConvexityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact PSD test by symmetric Gaussian elimination.
pub fn is_psd(mut h: Vec<Vec<Rational>>) -> bool {
    let d = h.len();
    for k in 0..d {
        let piv = h[k][k].clone();
        if piv.is_negative() {
            return false;
        }
        if piv.is_zero() {
            if (k + 1..d).any(|j| !h[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..d {
            let f = &h[i][k] / &piv;
            if f.is_zero() {
                continue;
            }
            for j in k..d {
                let v = &f * &h[k][j];
                h[i][j] -= v;
            }
        }
    }
    true
}

/// Hessian of `Q(x, ·)` when `Q` is at most quadratic in `y`.
fn hessian_at(prog: &BilevelProgram, x: &[Rational]) -> Result<Vec<Vec<Rational>>> {
    let (n, m) = (prog.n(), prog.m());
    let mut h = vec![vec![Rational::zero(); m]; m];
    for (mono, coeff) in prog.q().split_at(n) {
        let e = mono.exponents();
        if e.iter().sum::<u32>() != 2 {
            continue;
        }
        let c = coeff.evaluate(x)?;
        let vars: Vec<usize> = (0..m).filter(|&k| e[k] > 0).collect();
        match vars.as_slice() {
            [a] => h[*a][*a] += &c * int(2),
            [a, b] => {
                h[*a][*b] += c.clone();
                h[*b][*a] += c;
            }
            _ => unreachable!("degree two"),
        }
    }
    Ok(h)
}

/// Sample `y` in the box; unbounded coordinates are drawn from `[-radius, radius]`.
fn sample_box(prog: &BilevelProgram, rng: &mut ChaCha8Rng, radius: i64) -> Vec<Rational> {
    const DEN: i64 = 1 << 12;
    prog.bounds()
        .iter()
        .map(|(lo, hi)| {
            let lo = match lo {
                Extended::Finite(v) => (v * int(DEN)).ceil().to_integer().try_into().unwrap_or(-radius * DEN),
                _ => -radius * DEN,
            };
            let hi: i64 = match hi {
                Extended::Finite(v) => (v * int(DEN)).floor().to_integer().try_into().unwrap_or(radius * DEN),
                _ => radius * DEN,
            };
            Rational::new(rng.gen_range(lo..=hi.max(lo)).into(), DEN.into())
        })
        .collect()
}

/// Exact Hessian check (when quadratic) plus `pairs` midpoint tests at each `x`.
pub fn convexity_certificate(
    prog: &BilevelProgram,
    xs: &[Vec<Rational>],
    pairs: usize,
    seed: u64,
) -> Result<ConvexityReport> {
    let deg = prog.lower_degree_q();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConvexityReport { lower_degree: deg, hessian_checks: 0, midpoint_checks: 0, violations: Vec::new() };
    let show = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(", ");
    for x in xs {
        if deg <= 2 {
            report.hessian_checks += 1;
            if !is_psd(hessian_at(prog, x)?) {
                report.violations.push(format!("Hessian not PSD at x = ({})", show(x)));
            }
        }
        for _ in 0..pairs {
            let a = sample_box(prog, &mut rng, 4);
            let b = sample_box(prog, &mut rng, 4);
            let mid: Vec<Rational> = a.iter().zip(&b).map(|(u, v)| (u + v) / int(2)).collect();
            let qa = prog.objectives_at(x, &a)?.1;
            let qb = prog.objectives_at(x, &b)?.1;
            let qm = prog.objectives_at(x, &mid)?.1;
            report.midpoint_checks += 1;
            if qm > (qa + qb) / int(2) {
                report.violations.push(format!("midpoint test fails at x = ({})", show(x)));
            }
        }
    }
    Ok(report)
}
