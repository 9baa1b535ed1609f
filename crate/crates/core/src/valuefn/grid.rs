//! Multi-stage grid search over a bounded lower box.
//!
//! After fixing `x`, the lower variables split into groups that share no monomial of `Q`, so
//! `Q = const + Σ_c Q_c` and the argmin set is the product of per-group argmin sets. Each group is
//! searched on its own. Only the group variables that also occur in `P` (the outer ones) are
//! gridded; the rest are minimized by exact coordinate descent at every grid node. `P` is then
//! optimized over the product of the per-group near-tie samples.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::fast::{coordinate_descent, critical_points, FastPoly};
use super::EvalConfig;

const INNER_SWEEPS: usize = 60;
const FULL_SWEEPS: usize = 200;
const BLOCK_ROUNDS: usize = 100;

/// Near-tie lower points of one group, values listed in the order of `vars`.
#[derive(Debug, Clone)]
pub(crate) struct GroupSample {
    pub vars: Vec<usize>,
    pub points: Vec<Vec<f64>>,
    pub qs: Vec<f64>,
    pub q_min: f64,
    pub history: Vec<f64>,
    pub evaluations: u64,
}

/// Connected groups of `vars` under "appear in one monomial of `q`".
pub(crate) fn groups(q: &FastPoly, m: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for support in q.supports() {
        for w in support.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let used = q.vars();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; m];
    for v in used {
        let r = find(&mut parent, v);
        if root_slot[r] == usize::MAX {
            root_slot[r] = out.len();
            out.push(Vec::new());
        }
        out[root_slot[r]].push(v);
    }
    out
}

pub(crate) fn mids(bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect()
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn project(y: &[f64], vars: &[usize]) -> Vec<f64> {
    vars.iter().map(|&k| y[k]).collect()
}

/// Farthest-point selection (in box-normalized coordinates `dims`), starting from the best point.
fn spread(points: &[&Vec<f64>], qs: &[f64], dims: &[usize], bounds: &[(f64, f64)], cap: usize) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let scale: Vec<f64> = dims.iter().map(|&k| (bounds[k].1 - bounds[k].0).max(1e-300)).collect();
    let dist = |a: &Vec<f64>, b: &Vec<f64>| -> f64 {
        dims.iter().zip(&scale).map(|(&k, s)| ((a[k] - b[k]) / s).powi(2)).sum()
    };
    let first = (0..points.len()).min_by(|&a, &b| qs[a].total_cmp(&qs[b]).then(a.cmp(&b))).expect("nonempty");
    let mut chosen = vec![first];
    let mut near: Vec<f64> = points.iter().map(|p| dist(p, points[first])).collect();
    while chosen.len() < cap {
        let (idx, d) = near.iter().enumerate().fold((0, -1.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        if d <= 0.0 {
            break;
        }
        chosen.push(idx);
        for (i, p) in points.iter().enumerate() {
            near[i] = near[i].min(dist(p, points[idx]));
        }
    }
    chosen
}

fn stage_tolerance(cfg: &EvalConfig, stage: usize, incumbent: f64) -> f64 {
    if stage + 1 >= cfg.refinement_stages {
        cfg.argmin_tolerance
    } else {
        cfg.argmin_tolerance.max(1e-2 * (1.0 + incumbent.abs()) * 16f64.powi(-(stage as i32)))
    }
}

/// Group not touched by `Q` at all: every box point is a minimizer.
pub(crate) fn flat_group(var: usize, bounds: &[(f64, f64)], cfg: &EvalConfig) -> GroupSample {
    let pts: Vec<Vec<f64>> = axis(bounds[var].0, bounds[var].1, cfg.grid_points_per_dim).into_iter().map(|v| vec![v]).collect();
    GroupSample {
        vars: vec![var],
        qs: vec![0.0; pts.len()],
        points: pts,
        q_min: 0.0,
        history: vec![0.0; cfg.refinement_stages],
        evaluations: 0,
    }
}

/// Grid over the outer variables, coordinate descent on the inner ones.
pub(crate) fn grid_group(
    q: &FastPoly,
    vars: &[usize],
    outer: &[usize],
    bounds: &[(f64, f64)],
    eps: f64,
    cfg: &EvalConfig,
) -> GroupSample {
    let d = outer.len();
    let inner: Vec<usize> = vars.iter().copied().filter(|v| !outer.contains(v)).collect();
    let half0: Vec<f64> = outer.iter().map(|&k| 0.5 * (bounds[k].1 - bounds[k].0)).collect();
    let base = mids(bounds);
    let mut all: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut centers: Vec<Vec<f64>> = vec![base.clone()];
    let mut incumbent = f64::INFINITY;
    let mut history = Vec::with_capacity(cfg.refinement_stages);
    let mut evaluations = 0u64;

    let solve = |start: &Vec<f64>, o: &[f64]| -> (Vec<f64>, f64, u64) {
        let mut y = start.clone();
        for (k, v) in outer.iter().zip(o) {
            y[*k] = *v;
        }
        if inner.is_empty() {
            let v = q.eval(&y);
            (y, v, 1)
        } else {
            let (v, e) = coordinate_descent(q, &mut y, &inner, bounds, INNER_SWEEPS);
            (y, v, e)
        }
    };

    for stage in 0..cfg.refinement_stages {
        let shrink = 4f64.powi(stage as i32);
        let per_box = (cfg.grid_budget / centers.len().max(1)).max(1) as f64;
        let floor = if stage == 0 { 9 } else { 5 };
        let per_dim = cfg.grid_points_per_dim.min(per_box.powf(1.0 / d as f64).floor() as usize).max(floor);
        let mut nodes: Vec<(usize, Vec<f64>)> = Vec::new();
        for (ci, c) in centers.iter().enumerate() {
            let axes: Vec<Vec<f64>> = outer
                .iter()
                .zip(&half0)
                .map(|(&k, h)| {
                    let (lo, hi) = ((c[k] - h / shrink).max(bounds[k].0), (c[k] + h / shrink).min(bounds[k].1));
                    axis(lo, hi, per_dim)
                })
                .collect();
            let mut idx = vec![0usize; d];
            loop {
                nodes.push((ci, idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect()));
                let mut j = 0;
                while j < d {
                    idx[j] += 1;
                    if idx[j] < axes[j].len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == d {
                    break;
                }
            }
        }
        if stage == 0 && d == 1 && inner.is_empty() {
            let k = outer[0];
            for r in critical_points(&q.along(k, &base), bounds[k].0, bounds[k].1) {
                nodes.push((0, vec![r]));
            }
        }
        let results: Vec<(Vec<f64>, f64, u64)> = nodes.par_iter().map(|(ci, o)| solve(&centers[*ci], o)).collect();
        for (y, v, e) in results {
            evaluations += e;
            if v < incumbent {
                incumbent = v;
            }
            all.push((y, v));
        }
        history.push(incumbent);
        let tol = stage_tolerance(cfg, stage, incumbent).max(eps);
        let ties: Vec<usize> = (0..all.len()).filter(|&i| all[i].1 <= incumbent + tol).collect();
        let pts: Vec<&Vec<f64>> = ties.iter().map(|&i| &all[i].0).collect();
        let qs: Vec<f64> = ties.iter().map(|&i| all[i].1).collect();
        centers = spread(&pts, &qs, outer, bounds, cfg.max_boxes).into_iter().map(|i| pts[i].clone()).collect();
    }
    // The grid cannot land on a non-dyadic minimizer; descent from the surviving centres, outer
    // variables included, can. The polished points join the sample rather than replace it, so
    // genuine ties found on the grid survive.
    let polished: Vec<(Vec<f64>, f64, u64)> = centers
        .into_par_iter()
        .map(|mut y| {
            let (v, e) = coordinate_descent(q, &mut y, vars, bounds, FULL_SWEEPS);
            (y, v, e)
        })
        .collect();
    for (y, v, e) in polished {
        evaluations += e;
        incumbent = incumbent.min(v);
        all.push((y, v));
    }
    finish(vars, all, incumbent, eps, history, evaluations)
}

/// Seeded multi-start coordinate descent over all group variables.
pub(crate) fn multistart_group(
    q: &FastPoly,
    vars: &[usize],
    bounds: &[(f64, f64)],
    eps: f64,
    keep_all: bool,
    cfg: &EvalConfig,
    seed: u64,
) -> GroupSample {
    let base = mids(bounds);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![base.clone()];
    for _ in 0..cfg.multistart {
        let mut y = base.clone();
        for &k in vars {
            let (lo, hi) = bounds[k];
            y[k] = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
        }
        starts.push(y);
    }
    let results: Vec<(Vec<f64>, f64, u64)> = starts
        .into_par_iter()
        .map(|mut y| {
            let (v, e) = coordinate_descent(q, &mut y, vars, bounds, FULL_SWEEPS);
            (y, v, e)
        })
        .collect();
    let evaluations = results.iter().map(|r| r.2).sum();
    let incumbent = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let all: Vec<(Vec<f64>, f64)> = results.into_iter().map(|(y, v, _)| (y, v)).collect();
    let history = vec![incumbent; cfg.refinement_stages];
    let mut out = finish(vars, all, incumbent, eps, history, evaluations);
    if !keep_all {
        out.points.truncate(1);
        out.qs.truncate(1);
    }
    out
}

/// Near-ties, best first, duplicates dropped.
fn finish(vars: &[usize], all: Vec<(Vec<f64>, f64)>, incumbent: f64, eps: f64, history: Vec<f64>, evaluations: u64) -> GroupSample {
    let mut ties: Vec<(Vec<f64>, f64)> =
        all.into_iter().filter(|(_, v)| *v <= incumbent + eps).map(|(y, v)| (project(&y, vars), v)).collect();
    ties.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal)));
    let mut seen = BTreeSet::new();
    ties.retain(|(p, _)| seen.insert(p.iter().map(|v| v.to_bits()).collect::<Vec<_>>()));
    let (points, qs) = ties.into_iter().unzip();
    GroupSample { vars: vars.to_vec(), points, qs, q_min: incumbent, history, evaluations }
}

/// Representative indices: best `Q`, then per-coordinate extremes over `pvars`.
fn core_indices(g: &GroupSample, pvars: &BTreeSet<usize>) -> Vec<usize> {
    let mut out = vec![0usize];
    for (j, v) in g.vars.iter().enumerate() {
        if !pvars.contains(v) {
            continue;
        }
        let cmp = |a: &usize, b: &usize| g.points[*a][j].total_cmp(&g.points[*b][j]);
        let idx: Vec<usize> = (0..g.points.len()).collect();
        for pick in [idx.iter().copied().min_by(cmp), idx.iter().copied().max_by(cmp)].into_iter().flatten() {
            if !out.contains(&pick) {
                out.push(pick);
            }
        }
    }
    out
}

fn product_len(sizes: impl IntoIterator<Item = usize>) -> u128 {
    sizes.into_iter().fold(1u128, |acc, s| acc.saturating_mul(s as u128))
}

/// Subsets of every group sample whose product fits in `cap`.
fn thin(groups: &[GroupSample], pvars: &BTreeSet<usize>, cap: usize) -> Vec<Vec<usize>> {
    if product_len(groups.iter().map(|g| g.points.len())) <= cap as u128 {
        return groups.iter().map(|g| (0..g.points.len()).collect()).collect();
    }
    let mut picks: Vec<Vec<usize>> = groups.iter().map(|g| core_indices(g, pvars)).collect();
    while product_len(picks.iter().map(Vec::len)) > cap as u128 {
        let big = (0..picks.len()).max_by_key(|&i| picks[i].len()).expect("nonempty");
        picks[big].pop();
    }
    const FILL_PER_GROUP: usize = 64;
    loop {
        let mut grew = false;
        for (gi, g) in groups.iter().enumerate() {
            let cur = picks[gi].len();
            if cur >= g.points.len() || cur >= FILL_PER_GROUP {
                continue;
            }
            let total = product_len(picks.iter().map(Vec::len));
            if total / cur as u128 * (cur as u128 + 1) > cap as u128 {
                continue;
            }
            let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();
            let far = (0..g.points.len())
                .filter(|i| !picks[gi].contains(i))
                .map(|i| (i, picks[gi].iter().map(|&j| dist(&g.points[i], &g.points[j])).fold(f64::INFINITY, f64::min)))
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            if let Some((i, _)) = far {
                picks[gi].push(i);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    picks
}

pub(crate) struct Combined {
    pub value: f64,
    pub sample: Vec<Vec<f64>>,
    pub sample_size: u128,
    pub evaluations: u64,
}

/// Optimize `P` (minimize, or maximize when `sup`) over the product of group samples.
pub(crate) fn combine(groups: &[GroupSample], p: &FastPoly, base: &[f64], sup: bool, cap: usize, keep: usize) -> Combined {
    let sign = if sup { -1.0 } else { 1.0 };
    let pvars = p.vars();
    let mut y0 = base.to_vec();
    for g in groups {
        for (k, v) in g.vars.iter().zip(&g.points[0]) {
            y0[*k] = *v;
        }
    }
    let active: Vec<&GroupSample> =
        groups.iter().filter(|g| g.points.len() > 1 && g.vars.iter().any(|v| pvars.contains(v))).collect();
    let sample_size = product_len(active.iter().map(|g| g.points.len()));
    let owned: Vec<GroupSample> = active.iter().map(|g| (*g).clone()).collect();
    let picks = thin(&owned, &pvars, cap);
    let sizes: Vec<usize> = picks.iter().map(Vec::len).collect();
    let total = product_len(sizes.iter().copied()) as usize;

    let point_of = |choice: &[usize]| -> Vec<f64> {
        let mut y = y0.clone();
        for (g, &c) in active.iter().zip(choice) {
            for (k, v) in g.vars.iter().zip(&g.points[c]) {
                y[*k] = *v;
            }
        }
        y
    };
    let decode = |mut idx: usize| -> Vec<usize> {
        picks
            .iter()
            .map(|pk| {
                let c = pk[idx % pk.len()];
                idx /= pk.len();
                c
            })
            .collect()
    };
    let scored: Vec<(f64, usize)> = (0..total).into_par_iter().map(|i| (sign * p.eval(&point_of(&decode(i))), i)).collect();
    let mut order: Vec<&(f64, usize)> = scored.iter().collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut evaluations = total as u64;

    // Block descent over the full samples from the best enumerated choices.
    let mut best: Option<(f64, Vec<usize>)> = None;
    for &&(v0, i0) in order.iter().take(4) {
        let mut choice = decode(i0);
        let mut val = v0;
        for _ in 0..BLOCK_ROUNDS {
            let mut moved = false;
            for (gi, g) in active.iter().enumerate() {
                let mut trial = choice.clone();
                for c in 0..g.points.len() {
                    trial[gi] = c;
                    let v = sign * p.eval(&point_of(&trial));
                    evaluations += 1;
                    if v < val - 1e-13 * (1.0 + val.abs()) {
                        val = v;
                        choice[gi] = c;
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| val < *b) {
            best = Some((val, choice));
        }
    }
    let (val, choice) = best.unwrap_or_else(|| (sign * p.eval(&y0), Vec::new()));
    let best_y = point_of(&choice);
    let mut sample = vec![best_y];
    sample.extend(order.iter().skip(1).take(keep.saturating_sub(1)).map(|(_, i)| point_of(&decode(*i))));
    Combined { value: sign * val, sample, sample_size: sample_size.max(1), evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RatPoly;

    #[test]
    fn groups_follow_shared_monomials() {
        let v = |i| RatPoly::var(4, i);
        let q = &(&v(0) * &v(1)) + &(&v(2).square() + &RatPoly::one(4));
        let g = groups(&FastPoly::from_rational(&q), 4);
        assert_eq!(g, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn spread_prefers_distant_points() {
        let pts = [vec![0.0], vec![0.1], vec![1.0]];
        let refs: Vec<&Vec<f64>> = pts.iter().collect();
        let chosen = spread(&refs, &[0.0, 0.0, 0.0], &[0], &[(0.0, 1.0)], 2);
        assert_eq!(chosen, vec![0, 2]);
    }

    #[test]
    fn thinning_respects_cap() {
        let g = |n: usize| GroupSample {
            vars: vec![0],
            points: (0..n).map(|i| vec![i as f64]).collect(),
            qs: vec![0.0; n],
            q_min: 0.0,
            history: vec![],
            evaluations: 0,
        };
        let groups = vec![g(100), g(100), g(100)];
        let picks = thin(&groups, &BTreeSet::from([0]), 1000);
        assert!(product_len(picks.iter().map(Vec::len)) <= 1000);
        assert!(picks.iter().all(|p| p.contains(&0) && p.contains(&99)));
    }
}
