//! Subset-sum-interval instances as degree-five bilevel programs.
//!
//! An instance `(q_1..q_k, R, r)` asks whether some integer in `[R, R + 2^r - 1]` is not a subset
//! sum of the `q_i`. With `F(x) = R + Σ_j 2^(j-1) x_j`, `G(t) = Σ_i q_i t_i`,
//!
//! `H = Σ_i (t_i(1 - t_i))² + (F - G)²`, `L = z[(z - 1)² + Σ_j ((1 - x_j) x_j)²]`,
//! `P = 1 - z(H + 1)`, `Q = L + H`, lower box `[0, 1]^(k+1)` with `z` first,
//!
//! the optimistic value is 1 off binary `x` and `-min_t H(x, t)` on binary `x`. So the optimal
//! value is negative exactly when the answer is YES.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoder::{interval, BilevelProgram, Metadata, Mode, Recipe, Role, RoleSlot};
use crate::error::{Error, Result};
use crate::scalar::{int, is_binary, Rational};
use crate::RatPoly;

pub const DEFAULT_ORACLE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    pub q: Vec<u64>,
    #[serde(rename = "R")]
    pub big_r: u64,
    pub r: u32,
}

#[derive(Deserialize)]
struct RawInstance {
    q: Vec<u64>,
    #[serde(rename = "R")]
    big_r: u64,
    r: u32,
}

impl TryFrom<RawInstance> for Instance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        Instance::new(raw.q, raw.big_r, raw.r)
    }
}

/// Largest `q_i`, `R` and `2^(r-1)` accepted; keeps every coefficient inside `i128`.
const MAX_MAGNITUDE: u64 = 1 << 40;

impl Instance {
    pub fn new(q: Vec<u64>, big_r: u64, r: u32) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidInstance("q is empty".into()));
        }
        if q.contains(&0) {
            return Err(Error::InvalidInstance("every q_i must be positive".into()));
        }
        if r == 0 {
            return Err(Error::InvalidInstance("r must be positive".into()));
        }
        if r as usize > q.len() {
            return Err(Error::TrivialInstance { r: r as usize, k: q.len() });
        }
        if r > 41 || big_r > MAX_MAGNITUDE || q.iter().any(|&v| v > MAX_MAGNITUDE) {
            return Err(Error::InvalidInstance("magnitudes above 2^40 are not supported".into()));
        }
        Ok(Instance { q, big_r, r })
    }

    pub fn k(&self) -> usize {
        self.q.len()
    }

    /// `M = max(max q_i, 2^(r-1), R)`.
    pub fn magnitude(&self) -> i128 {
        let qmax = *self.q.iter().max().expect("nonempty") as i128;
        qmax.max(1i128 << (self.r - 1)).max(self.big_r as i128)
    }

    /// `F(x)` at a binary point.
    pub fn target_sum(&self, x: &[Rational]) -> Result<u64> {
        if x.len() != self.r as usize {
            return Err(Error::LengthMismatch { expected: self.r as usize, got: x.len() });
        }
        if !x.iter().all(is_binary) {
            return Err(Error::NonBinaryPoint);
        }
        Ok(self.big_r + x.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, _)| 1u64 << j).sum::<u64>())
    }

    pub fn interval_end(&self) -> u64 {
        self.big_r + (1u64 << self.r) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCertificate {
    pub deg_p: u32,
    pub deg_q: u32,
    #[serde(rename = "M")]
    pub m: i128,
    pub coeff_bound: i128,
    pub max_abs_coeff_p: i128,
    pub max_abs_coeff_q: i128,
    /// `L` and `H` share no monomial.
    pub disjoint_summands: bool,
}

impl ReductionCertificate {
    pub fn holds(&self) -> bool {
        self.deg_p == 5
            && self.deg_q == 5
            && self.max_abs_coeff_p <= self.coeff_bound
            && self.max_abs_coeff_q <= self.coeff_bound
            && self.disjoint_summands
    }
}

/// The polynomials of the reduction over `(x, z, t)`.
pub struct Gadgets {
    pub f: RatPoly,
    pub g: RatPoly,
    pub h: RatPoly,
    pub l: RatPoly,
    pub p: RatPoly,
    pub q: RatPoly,
}

pub fn gadgets(inst: &Instance) -> Gadgets {
    let (r, k) = (inst.r as usize, inst.k());
    let total = r + 1 + k;
    let one = RatPoly::one(total);
    let x = |j: usize| RatPoly::var(total, j);
    let z = RatPoly::var(total, r);
    let t = |i: usize| RatPoly::var(total, r + 1 + i);
    let mut f = RatPoly::constant(total, Rational::from_integer(inst.big_r.into()));
    for j in 0..r {
        f = &f + &x(j).scale(&Rational::from_integer(BigInt::from(1u64 << j)));
    }
    let mut g = RatPoly::zero(total);
    for (i, &qi) in inst.q.iter().enumerate() {
        g = &g + &t(i).scale(&Rational::from_integer(qi.into()));
    }
    let mut h = (&f - &g).square();
    for i in 0..k {
        h = &h + &(&t(i) * &(&one - &t(i))).square();
    }
    let mut inner = (&z - &one).square();
    for j in 0..r {
        inner = &inner + &(&(&one - &x(j)) * &x(j)).square();
    }
    let l = &z * &inner;
    let p = &one - &(&z * &(&h + &one));
    let q = &l + &h;
    Gadgets { f, g, h, l, p, q }
}

fn max_abs_integer(p: &RatPoly) -> i128 {
    let m = p.max_abs_coeff();
    debug_assert!(m.is_integer());
    m.to_integer().to_i128().unwrap_or(i128::MAX)
}

pub fn certificate(inst: &Instance, gd: &Gadgets) -> ReductionCertificate {
    let m = inst.magnitude();
    ReductionCertificate {
        deg_p: gd.p.degree(),
        deg_q: gd.q.degree(),
        m,
        coeff_bound: 2 * (m * m + 1),
        max_abs_coeff_p: max_abs_integer(&gd.p),
        max_abs_coeff_q: max_abs_integer(&gd.q),
        disjoint_summands: gd.l.shares_no_monomial(&gd.h),
    }
}

pub fn reduce_to_bilevel(inst: &Instance) -> Result<(BilevelProgram, ReductionCertificate)> {
    let gd = gadgets(inst);
    let cert = certificate(inst, &gd);
    let (n, m) = (inst.r as usize, inst.k() + 1);
    let mut roles = vec![RoleSlot::new(Role::Z, &[])];
    roles.extend((0..inst.k()).map(|i| RoleSlot::new(Role::T, &[i])));
    let recipe = Recipe::Hardness { instance: inst.clone() };
    let prog = BilevelProgram::new(n, m, gd.p, gd.q, vec![interval(int(0), int(1)); m], Mode::Optimistic)?
        .with_metadata(Metadata::new(roles, &recipe))?;
    Ok((prog, cert))
}

/// Reachable subset sums with one witness subset per sum.
pub struct SubsetSums {
    q: Vec<u64>,
    /// `via[s]`: the item whose addition first reached `s`.
    via: Vec<Option<usize>>,
}

impl SubsetSums {
    pub fn new(q: &[u64], cap: u64) -> Result<Self> {
        let total: u64 = q.iter().sum();
        if total > cap {
            return Err(Error::CapExceeded { what: "subset-sum table", size: total as u128, cap: cap as u128 });
        }
        let mut reach = vec![false; total as usize + 1];
        let mut via = vec![None; total as usize + 1];
        reach[0] = true;
        let mut hi = 0usize;
        for (i, &qi) in q.iter().enumerate() {
            let qi = qi as usize;
            for s in (qi..=hi + qi).rev() {
                if !reach[s] && reach[s - qi] {
                    reach[s] = true;
                    via[s] = Some(i);
                }
            }
            hi += qi;
        }
        // from here on reach is implied by via, except at 0
        Ok(SubsetSums { q: q.to_vec(), via })
    }

    pub fn reachable(&self, s: u64) -> bool {
        s == 0 || self.via.get(s as usize).is_some_and(Option::is_some)
    }

    /// Indices of a subset summing to `s`.
    pub fn witness(&self, s: u64) -> Option<Vec<usize>> {
        if !self.reachable(s) {
            return None;
        }
        let mut out = Vec::new();
        let mut cur = s;
        while cur > 0 {
            let i = self.via[cur as usize].expect("reachable sums have a predecessor");
            out.push(i);
            cur -= self.q[i];
        }
        out.reverse();
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleAnswer {
    pub verdict: Verdict,
    /// YES: an unreachable sum in the interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing_sum: Option<u64>,
    /// NO: a subset (by index) for every sum in the interval.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub subsets: BTreeMap<u64, Vec<usize>>,
}

pub fn oracle_decide(inst: &Instance, cap: u64) -> Result<OracleAnswer> {
    let span = 1u64 << inst.r;
    if inst.big_r.saturating_add(span) > cap {
        return Err(Error::CapExceeded { what: "sum interval", size: (inst.big_r + span) as u128, cap: cap as u128 });
    }
    let sums = SubsetSums::new(&inst.q, cap)?;
    let mut subsets = BTreeMap::new();
    for s in inst.big_r..=inst.interval_end() {
        match sums.witness(s) {
            None => return Ok(OracleAnswer { verdict: Verdict::Yes, missing_sum: Some(s), subsets: BTreeMap::new() }),
            Some(w) => {
                subsets.insert(s, w);
            }
        }
    }
    Ok(OracleAnswer { verdict: Verdict::No, missing_sum: None, subsets })
}

/// `H(t) = Σ (t_i - t_i²)² + (s - q·t)²` for a fixed target `s`.
fn h_value(q: &[f64], s: f64, t: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut lin = s;
    for (qi, ti) in q.iter().zip(t) {
        let b = ti - ti * ti;
        acc += b * b;
        lin -= qi * ti;
    }
    acc + lin * lin
}

/// Minimize `(t - t²)² + (a - q t)²` over `[0, 1]` through the roots of its cubic derivative.
fn coordinate_min(qi: f64, a: f64) -> f64 {
    let h = |t: f64| {
        let b = t - t * t;
        let c = a - qi * t;
        b * b + c * c
    };
    let dh = |t: f64| 2.0 * (t - t * t) * (1.0 - 2.0 * t) - 2.0 * qi * (a - qi * t);
    // dh' = 12t² - 12t + 2 + 2q² has no real root once q² > 1/2: h is convex, one bisection does
    if qi * qi > 0.5 {
        let (mut lo, mut hi) = (0.0, 1.0);
        if dh(lo) >= 0.0 {
            return lo;
        }
        if dh(hi) <= 0.0 {
            return hi;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if dh(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }
    let mut best = if h(0.0) <= h(1.0) { 0.0 } else { 1.0 };
    const SEG: usize = 64;
    for k in 0..SEG {
        let (mut lo, mut hi) = (k as f64 / SEG as f64, (k + 1) as f64 / SEG as f64);
        let (dl, dr) = (dh(lo), dh(hi));
        if dl == 0.0 {
            if h(lo) < h(best) {
                best = lo;
            }
            continue;
        }
        if dl.signum() == dr.signum() {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if dh(mid).signum() == dl.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        if h(root) < h(best) {
            best = root;
        }
    }
    best
}

/// Up to this many items every corner of the cube is also a start.
const CORNER_STARTS_MAX_K: usize = 6;

/// Multi-start exact coordinate descent for `min_{t ∈ [0,1]^k} H`. Returns an upper estimate and
/// the point reaching it.
pub fn min_h_estimate(q: &[u64], s: u64, starts: usize, seed: u64) -> (f64, Vec<f64>) {
    let qf: Vec<f64> = q.iter().map(|&v| v as f64).collect();
    let sf = s as f64;
    let k = q.len();
    let mut inits: Vec<Vec<f64>> = Vec::new();
    if k <= CORNER_STARTS_MAX_K {
        for mask in 0u32..(1 << k) {
            inits.push((0..k).map(|i| ((mask >> i) & 1) as f64).collect());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    inits.push(vec![0.5; k]);
    while inits.len() < starts.max(1) + if k <= CORNER_STARTS_MAX_K { 1 << k } else { 0 } {
        inits.push((0..k).map(|_| rng.gen::<f64>()).collect());
    }
    inits
        .into_par_iter()
        .map(|mut t| {
            let mut val = h_value(&qf, sf, &t);
            for _ in 0..200 {
                for i in 0..k {
                    let rest: f64 = qf.iter().zip(&t).enumerate().filter(|(j, _)| *j != i).map(|(_, (a, b))| a * b).sum();
                    t[i] = coordinate_min(qf[i], sf - rest);
                }
                let next = h_value(&qf, sf, &t);
                let done = val - next <= 1e-15 * val.max(1e-300);
                val = next;
                if done {
                    break;
                }
            }
            (val, t)
        })
        .reduce_with(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one start")
}

/// Grid-and-Lipschitz lower bound on `min H` for small `k`, `None` when the grid would be too big.
pub fn min_h_lower_bound(q: &[u64], s: u64, per_dim: usize) -> Option<f64> {
    let k = q.len();
    let count = (per_dim as u128).checked_pow(k as u32)?;
    if count > 1 << 20 || per_dim < 2 {
        return None;
    }
    let qf: Vec<f64> = q.iter().map(|&v| v as f64).collect();
    let sf = s as f64;
    let spread = sf + qf.iter().sum::<f64>();
    // |∂H/∂t_i| ≤ 2·(1/4)·1 + 2 q_i |s - q·t|
    let lip = qf.iter().map(|qi| (0.5 + 2.0 * qi * spread).powi(2)).sum::<f64>().sqrt();
    let h = 1.0 / (per_dim - 1) as f64;
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; k];
    let mut t = vec![0.0; k];
    loop {
        for i in 0..k {
            t[i] = idx[i] as f64 * h;
        }
        best = best.min(h_value(&qf, sf, &t));
        let mut d = 0;
        loop {
            if d == k {
                return Some(best - lip * h * (k as f64).sqrt() / 2.0);
            }
            idx[d] += 1;
            if idx[d] < per_dim {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "sign", rename_all = "UPPERCASE")]
pub enum BinarySign {
    /// `φ_o(x) = 0`, attained at the binary `t`.
    Zero { t: Vec<u8> },
    /// `φ_o(x) = -min H < 0`.
    Negative {
        /// Best `min H` found numerically (an upper estimate). Absent on the table-only path.
        #[serde(skip_serializing_if = "Option::is_none")]
        h_estimate: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        h_lower_bound: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryCertificate {
    pub x: Vec<u8>,
    pub target_sum: u64,
    #[serde(flatten)]
    pub sign: BinarySign,
}

/// Sign of `φ_o` at a binary `x`, decided by the subset-sum table, with a numeric `min H`
/// estimate and lower bound attached to negative signs.
pub fn phi_on_binary(inst: &Instance, x: &[Rational], sums: &SubsetSums) -> Result<BinaryCertificate> {
    binary_sign(inst, x, sums, true)
}

/// The sign alone, without the numeric data. Cheap enough for exhaustive sweeps.
pub fn phi_sign_on_binary(inst: &Instance, x: &[Rational], sums: &SubsetSums) -> Result<BinaryCertificate> {
    binary_sign(inst, x, sums, false)
}

fn binary_sign(inst: &Instance, x: &[Rational], sums: &SubsetSums, numeric: bool) -> Result<BinaryCertificate> {
    let s = inst.target_sum(x)?;
    let xb: Vec<u8> = x.iter().map(|v| if v.is_zero() { 0 } else { 1 }).collect();
    let sign = match sums.witness(s) {
        Some(w) => {
            let mut t = vec![0u8; inst.k()];
            for i in w {
                t[i] = 1;
            }
            BinarySign::Zero { t }
        }
        None if numeric => {
            let (est, _) = min_h_estimate(&inst.q, s, 32, s);
            BinarySign::Negative { h_estimate: Some(est), h_lower_bound: min_h_lower_bound(&inst.q, s, 17) }
        }
        None => BinarySign::Negative { h_estimate: None, h_lower_bound: None },
    };
    Ok(BinaryCertificate { x: xb, target_sum: s, sign })
}

/// All binary points of dimension `r`, in counting order.
pub fn binary_points(r: u32) -> impl Iterator<Item = Vec<Rational>> {
    (0u64..(1u64 << r)).map(move |mask| (0..r).map(|j| int(((mask >> j) & 1) as i64)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub instance: Instance,
    pub certificate: ReductionCertificate,
    pub oracle: OracleAnswer,
    /// Binary points where `φ_o < 0`.
    pub negative_points: Vec<BinaryCertificate>,
    pub zero_points: usize,
    /// Optimal value `< 0` according to the program.
    pub decision: bool,
    /// `(x, φ_o(x))` from the generic evaluator at non-binary points.
    pub off_binary: Vec<(Vec<f64>, f64)>,
    pub mismatches: Vec<String>,
}

impl ReductionReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Everything the reduction claims on one instance, checked.
///
/// The sign at binary points comes from the subset-sum table; zero signs are confirmed by exact
/// evaluation of `Q` and `P` at the witness, negative ones by a positive numeric `min H`.
/// With `numeric` off the negative signs rest on the table alone. `off_binary_checks` random
/// non-binary points go through the generic evaluator, which must return 1 within `tol`.
pub fn verify_reduction(
    inst: &Instance,
    cap: u64,
    numeric: bool,
    off_binary_checks: usize,
    cfg: &crate::valuefn::EvalConfig,
    tol: f64,
    seed: u64,
) -> Result<ReductionReport> {
    let (prog, cert) = reduce_to_bilevel(inst)?;
    let oracle = oracle_decide(inst, cap)?;
    let sums = SubsetSums::new(&inst.q, cap)?;
    let mut mismatches = Vec::new();
    if !cert.holds() {
        mismatches.push(format!("certificate fails: {cert:?}"));
    }
    let certs: Vec<BinaryCertificate> = binary_points(inst.r)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|x| binary_sign(inst, x, &sums, numeric))
        .collect::<Result<_>>()?;
    let mut negative_points = Vec::new();
    let mut zero_points = 0;
    for c in certs {
        let x: Vec<Rational> = c.x.iter().map(|&b| int(b as i64)).collect();
        match &c.sign {
            BinarySign::Zero { t } => {
                let mut y = vec![int(1)];
                y.extend(t.iter().map(|&b| int(b as i64)));
                let (p, q) = prog.objectives_at(&x, &y)?;
                if !q.is_zero() || !p.is_zero() {
                    mismatches.push(format!("witness at x = {:?} gives P = {p}, Q = {q}", c.x));
                }
                zero_points += 1;
            }
            BinarySign::Negative { h_estimate, h_lower_bound } => {
                if let Some(est) = h_estimate {
                    if !(*est > 0.0) {
                        mismatches.push(format!("x = {:?}: unreachable sum but min H estimate {est}", c.x));
                    }
                    if let Some(lb) = h_lower_bound {
                        if *lb > est + tol {
                            mismatches.push(format!("x = {:?}: min H lower bound {lb} above the estimate {est}", c.x));
                        }
                    }
                }
                negative_points.push(c);
            }
        }
    }
    let decision = !negative_points.is_empty();
    if decision != (oracle.verdict == Verdict::Yes) {
        mismatches.push(format!("oracle says {:?} but the program decision is {decision}", oracle.verdict));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut off_binary = Vec::new();
    for _ in 0..off_binary_checks {
        let x: Vec<Rational> = loop {
            let cand: Vec<Rational> = (0..inst.r).map(|_| Rational::new(rng.gen_range(-64i64..=128).into(), 64.into())).collect();
            if !cand.iter().all(is_binary) {
                break cand;
            }
        };
        let res = crate::valuefn::eval_generic(&prog, &x, cfg)?;
        let v = res.value.to_f64();
        if (v - 1.0).abs() > tol {
            mismatches.push(format!("non-binary x = {:?}: generic value {v}, expected 1", x.iter().map(|r| r.to_string()).collect::<Vec<_>>()));
        }
        off_binary.push((x.iter().map(crate::scalar::rational_to_f64).collect(), v));
    }
    Ok(ReductionReport { instance: inst.clone(), certificate: cert, oracle, negative_points, zero_points, decision, off_binary, mismatches })
}

/// Seeded instances. Even indices plant a gap (YES-leaning), odd ones use dense small `q` (NO-leaning).
pub fn generate_instances(count: usize, max_k: usize, max_q: u64, max_r: u32, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|idx| {
            let k = rng.gen_range(1..=max_k.max(1));
            let r = rng.gen_range(1..=max_r.max(1).min(k as u32));
            let q: Vec<u64> = if idx % 2 == 0 {
                (0..k).map(|_| rng.gen_range(1..=max_q)).collect()
            } else {
                (0..k).map(|_| rng.gen_range(1..=max_q.min(3))).collect()
            };
            let total: u64 = q.iter().sum();
            let big_r = if idx % 2 == 0 {
                rng.gen_range(0..=total + 2)
            } else {
                rng.gen_range(0..=total.saturating_sub((1 << r) - 1))
            };
            Instance::new(q, big_r.min(MAX_MAGNITUDE), r).expect("generated within limits")
        })
        .collect()
}

/// `φ_o` at `x` following the reduction's case analysis; `-min H` is numeric.
pub(crate) fn hardness_value(inst: &Instance, x: &[Rational], sup: bool, cap: u64) -> Result<Rational> {
    if x.len() != inst.r as usize {
        return Err(Error::LengthMismatch { expected: inst.r as usize, got: x.len() });
    }
    if !x.iter().all(is_binary) || sup {
        // off binary points z = 0 is the only minimizer; on them z = 0 still gives the largest P
        return Ok(int(1));
    }
    let sums = SubsetSums::new(&inst.q, cap)?;
    let s = inst.target_sum(x)?;
    if sums.reachable(s) {
        return Ok(Rational::zero());
    }
    let (est, _) = min_h_estimate(&inst.q, s, 32, s);
    let v = crate::scalar::f64_to_rational(-est).ok_or_else(|| Error::RecipePrecondition("non-finite min H".into()))?;
    debug_assert!(v.is_negative());
    Ok(v)
}
