//! Constructions whose lower-level problem is convex.
//!
//! Indicator of a basic set `{E = 0, Q_j > 0}` (lower variables `w, z, t`):
//!
//! `F = (1 - tE) ∏_j w_j z_j Q_j`, `G = (1 - tE)² + Σ_j [(1 - Q_j z_j)² - Q_j w_j]`
//!
//! over `w ∈ [0, 1]^J` and free `z, t`. `G` is linear in `w` and a convex quadratic in `z` and `t`.
//! Every minimizer gives the same `F`, namely the indicator of the set.
//!
//! Piecewise polynomials are sums of indicator blocks over a disjoint basic decomposition of each
//! cell. The compact variant uses the clause form of each cell's closure instead.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::encoder::{interval, lower, pessimize, unbounded, BilevelProgram, Bound, Metadata, Mode, Recipe, Role, RoleSlot};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, int, Rational};
use crate::semialg::{disjointify, BasicSet, ClosedSASet, GrowthBounds, PiecewisePolySpec, SamplePlan};
use crate::RatPoly;

/// One coordinate of a closed-form minimizer set.
#[derive(Debug, Clone, PartialEq)]
pub enum Pick {
    At(Rational),
    Between(Rational, Rational),
    Anything,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorMinimizer {
    pub w: Vec<Pick>,
    pub z: Vec<Pick>,
    pub t: Pick,
    /// `F` at every minimizer.
    pub value: Rational,
}

/// Minimizer table of the indicator block from the values `E(x)` and `Q_j(x)`.
pub fn indicator_minimizer(e: &Rational, q: &[Rational]) -> IndicatorMinimizer {
    let w = q
        .iter()
        .map(|v| {
            if v.is_positive() {
                Pick::At(int(1))
            } else if v.is_zero() {
                Pick::Between(int(0), int(1))
            } else {
                Pick::At(int(0))
            }
        })
        .collect();
    let z = q.iter().map(|v| if v.is_zero() { Pick::Anything } else { Pick::At(v.recip()) }).collect();
    let t = if e.is_zero() { Pick::Anything } else { Pick::At(e.recip()) };
    let inside = e.is_zero() && q.iter().all(|v| v.is_positive());
    IndicatorMinimizer { w, z, t, value: if inside { int(1) } else { int(0) } }
}

/// `(F, G)` of one indicator block with its `2J + 1` lower variables starting at `base`.
fn indicator_block(set: &BasicSet, n: usize, total: usize, base: usize) -> Result<(RatPoly, RatPoly, usize)> {
    let map: Vec<usize> = (0..n).collect();
    let one = RatPoly::one(total);
    let e = set.equality().embed(total, &map)?;
    let mut strict: Vec<RatPoly> = set.strict().iter().map(|q| q.embed(total, &map)).collect::<Result<_>>()?;
    if strict.is_empty() {
        strict.push(one.clone());
    }
    let j = strict.len();
    let t = RatPoly::var(total, lower(n, base + 2 * j));
    let gate = &one - &(&t * &e);
    let mut f = gate.clone();
    let mut g = gate.square();
    for (k, qk) in strict.iter().enumerate() {
        let w = RatPoly::var(total, lower(n, base + k));
        let z = RatPoly::var(total, lower(n, base + j + k));
        f = &f * &(&(&w * &z) * qk);
        g = &(&g + &(&one - &(qk * &z)).square()) - &(qk * &w);
    }
    Ok((f, g, j))
}

fn block_layout(j: usize, block: &[usize]) -> (Vec<Bound>, Vec<RoleSlot>) {
    let mut bx = vec![interval(int(0), int(1)); j];
    bx.extend(vec![unbounded(); j + 1]);
    let mut roles: Vec<RoleSlot> = (0..j).map(|k| RoleSlot::new(Role::W, &[block, &[k]].concat())).collect();
    roles.extend((0..j).map(|k| RoleSlot::new(Role::Z, &[block, &[k]].concat())));
    roles.push(RoleSlot::new(Role::T, block));
    (bx, roles)
}

/// Program whose value function is the characteristic function of `s`, in either mode.
pub fn encode_indicator_convex(s: &BasicSet, mode: Mode) -> Result<BilevelProgram> {
    let n = s.num_vars();
    let j = s.strict().len().max(1);
    let m = 2 * j + 1;
    let (f, g, _) = indicator_block(s, n, n + m, 0)?;
    let (bx, roles) = block_layout(j, &[]);
    let recipe = Recipe::Indicator { set: s.clone() };
    BilevelProgram::new(n, m, f, g, bx, mode)?.with_metadata(Metadata::new(roles, &recipe))
}

/// `P = Σ_i P_i Σ_j F_ij`, `Q = Σ_ij G_ij` over disjoint variable groups, one per basic cell `T_ij`
/// of the disjoint decomposition of `S_i`.
pub fn encode_piecewise_unbounded(spec: &PiecewisePolySpec, mode: Mode, pool_cap: usize) -> Result<BilevelProgram> {
    let n = spec.n();
    let blocks: Vec<Vec<BasicSet>> = spec.cells().iter().map(|c| disjointify(c, pool_cap)).collect::<Result<_>>()?;
    let flat: Vec<(usize, usize, &BasicSet)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(i, cell)| cell.iter().enumerate().map(move |(j, b)| (i, j, b)))
        .collect();
    if flat.is_empty() {
        return Err(Error::EmptyDecomposition("no cell has a nonempty sign condition".into()));
    }
    let widths: Vec<usize> = flat.iter().map(|(_, _, b)| b.strict().len().max(1)).collect();
    let m: usize = widths.iter().map(|j| 2 * j + 1).sum();
    let total = n + m;
    let mut bases = Vec::with_capacity(flat.len());
    let mut acc = 0;
    for j in &widths {
        bases.push(acc);
        acc += 2 * j + 1;
    }
    let built: Vec<(RatPoly, RatPoly)> = flat
        .par_iter()
        .zip(bases.par_iter())
        .map(|((i, _, b), base)| {
            let (f, g, _) = indicator_block(b, n, total, *base)?;
            let pi = spec.polys()[*i].extend_vars(total);
            Ok((&pi * &f, g))
        })
        .collect::<Result<_>>()?;
    let p = RatPoly::sum(total, built.iter().map(|(f, _)| f));
    let q = RatPoly::sum(total, built.iter().map(|(_, g)| g));
    let mut bx = Vec::with_capacity(m);
    let mut roles = Vec::with_capacity(m);
    for ((i, j, _), w) in flat.iter().zip(&widths) {
        let (b, r) = block_layout(*w, &[*i, *j]);
        bx.extend(b);
        roles.extend(r);
    }
    let recipe = Recipe::PiecewiseUnbounded { polys: spec.polys().to_vec(), blocks };
    BilevelProgram::new(n, m, p, q, bx, mode)?.with_metadata(Metadata::new(roles, &recipe))
}

/// Pad every closure to `J` clauses (with `-1 ≥ 0`) of width `K` (with `0 ≥ 0`).
fn pad_closures(closures: &[ClosedSASet]) -> (Vec<ClosedSASet>, usize, usize) {
    let j = closures.iter().map(|c| c.clauses().len()).max().unwrap_or(0).max(1);
    let k = closures.iter().map(|c| c.max_width()).max().unwrap_or(0).max(1);
    let padded = closures
        .iter()
        .map(|c| {
            let n = c.num_vars();
            let mut clauses: Vec<Vec<RatPoly>> = c.clauses().to_vec();
            clauses.resize(j, vec![-&RatPoly::one(n)]);
            for cl in &mut clauses {
                cl.resize(k, RatPoly::zero(n));
            }
            ClosedSASet::new(n, clauses).expect("same space")
        })
        .collect();
    (padded, j, k)
}

/// Optimistic value of the compact piecewise program, by minimum selection over clauses.
///
/// Clause `(i, j)` contributes `r_i·π` with `π` ranging over the products `∏_k z_k` allowed by the
/// signs of its polynomials: `{1}` strictly inside, `{0}` outside, `[0, 1]` on the boundary.
pub(crate) fn pw_lsc_value(
    polys: &[RatPoly],
    closures: &[ClosedSASet],
    bounds: &GrowthBounds,
    x: &[Rational],
    sup: bool,
) -> Result<Rational> {
    let c = bounds.scale_at(x);
    let mut best: Option<Rational> = None;
    for (poly, closure) in polys.iter().zip(closures) {
        let r = poly.evaluate(x)? - &c;
        for clause in closure.clauses() {
            let vals = clause.iter().map(|p| p.evaluate(x)).collect::<Result<Vec<_>>>()?;
            let options: Vec<Rational> = if vals.iter().any(|v| v.is_negative()) {
                vec![Rational::zero()]
            } else if vals.iter().all(|v| v.is_positive()) {
                vec![r.clone()]
            } else {
                vec![Rational::zero(), r.clone()]
            };
            for o in options {
                best = Some(match best {
                    None => o,
                    Some(b) if (sup && o > b) || (!sup && o < b) => o,
                    Some(b) => b,
                });
            }
        }
    }
    Ok(c + best.unwrap_or_else(Rational::zero))
}

/// Compact convex program for a piecewise polynomial whose closures are given in clause form.
///
/// Optimistic mode expects an lsc function, pessimistic a usc one (compiled through `-f`). The
/// bounds must dominate each piece on its closure; this is checked at every point of `validation`.
/// Points where minimum selection over closures disagrees with the cell value are returned as
/// warnings: there the function is not semicontinuous in the direction the mode needs.
pub fn encode_pw_lsc_bounded(
    spec: &PiecewisePolySpec,
    bounds: &GrowthBounds,
    mode: Mode,
    validation: &SamplePlan,
) -> Result<(BilevelProgram, Vec<String>)> {
    let closures = spec
        .closures()
        .ok_or_else(|| Error::RecipePrecondition("piecewise spec carries no closures".into()))?;
    let n = spec.n();
    let polys: Vec<RatPoly> = match mode {
        Mode::Optimistic => spec.polys().to_vec(),
        Mode::Pessimistic => spec.polys().iter().map(|p| -p).collect(),
    };
    let (padded, jn, kn) = pad_closures(closures);

    let points = validation.points(n)?;
    let checks: Vec<Result<Option<String>>> = points
        .par_iter()
        .map(|x| {
            let at = || x.iter().map(format_rational).collect::<Vec<_>>().join(", ");
            let c = bounds.scale_at(x);
            for (i, (p, cl)) in polys.iter().zip(closures).enumerate() {
                if cl.contains(x)? {
                    let v = p.evaluate(x)?;
                    if v > c {
                        return Err(Error::BoundsViolated(format!(
                            "piece {i} is {} > {} at x = ({})",
                            format_rational(&v),
                            format_rational(&c),
                            at()
                        )));
                    }
                }
            }
            let cells = spec.containing_cells(x)?;
            let Some(&cell) = cells.first() else {
                return Ok(Some(format!("x = ({}) lies in no cell", at())));
            };
            let f = polys[cell].evaluate(x)?;
            let sel = pw_lsc_value(&polys, &padded, bounds, x, false)?;
            Ok((sel != f).then(|| {
                format!(
                    "minimum selection gives {} but the cell value is {} at x = ({}); not {} there",
                    format_rational(&sel),
                    format_rational(&f),
                    at(),
                    if mode == Mode::Optimistic { "lower semicontinuous" } else { "upper semicontinuous" }
                )
            }))
        })
        .collect();
    let mut warnings = Vec::new();
    for c in checks {
        if let Some(w) = c? {
            warnings.push(w);
        }
    }

    let ni = polys.len();
    let zs = ni * jn * kn;
    let m = zs + ni * jn;
    let total = n + m;
    let xs: Vec<usize> = (0..n).collect();
    let c = bounds.scale_poly(total, &xs);
    let one = RatPoly::one(total);
    let zvar = |i: usize, j: usize, k: usize| RatPoly::var(total, lower(n, (i * jn + j) * kn + k));
    let svar = |i: usize, j: usize| RatPoly::var(total, lower(n, zs + i * jn + j));

    let mut p = c.clone();
    let mut linear = RatPoly::zero(total);
    let mut s_sum = RatPoly::zero(total);
    for (i, (poly, cl)) in polys.iter().zip(&padded).enumerate() {
        let r = &poly.extend_vars(total) - &c;
        for (j, clause) in cl.clauses().iter().enumerate() {
            let mut prod = svar(i, j);
            for (k, pk) in clause.iter().enumerate() {
                prod = &prod * &zvar(i, j, k);
                linear = &linear + &(&pk.extend_vars(total) * &zvar(i, j, k));
            }
            p = &p + &(&r * &prod);
            s_sum = &s_sum + &svar(i, j);
        }
    }
    let q = &(&one - &s_sum).square() - &linear;

    let mut roles = Vec::with_capacity(m);
    for i in 0..ni {
        for j in 0..jn {
            for k in 0..kn {
                roles.push(RoleSlot::new(Role::Z, &[i, j, k]));
            }
        }
    }
    for i in 0..ni {
        for j in 0..jn {
            roles.push(RoleSlot::new(Role::S, &[i, j]));
        }
    }
    let recipe = Recipe::PwLscBounded { polys, closures: padded, bounds: bounds.clone() };
    let prog = BilevelProgram::new(n, m, p, q, vec![interval(int(0), int(1)); m], Mode::Optimistic)?
        .with_metadata(Metadata::new(roles, &recipe))?;
    let prog = match mode {
        Mode::Optimistic => prog,
        Mode::Pessimistic => pessimize(&prog),
    };
    Ok((prog, warnings))
}

/// `∏_k z*_k` for a clause: 1 strictly inside, 0 outside, `None` (anything in `[0, 1]`) on the boundary.
pub fn clause_product_minimizer(values: &[Rational]) -> Option<Rational> {
    if values.iter().any(|v| v.is_negative()) {
        Some(Rational::zero())
    } else if values.iter().all(|v| v.is_positive()) {
        Some(Rational::one())
    } else {
        None
    }
}
