//! Compilers from target functions to polynomial bilevel programs.
//!
//! A program is `φ(x) = inf/sup { P(x, y) : y ∈ argmin_{y ∈ box} Q(x, y) }`. Every compiler
//! attaches a [`Metadata`] block naming the construction, the role of each lower variable and
//! the data needed to evaluate the value function exactly (see `valuefn::eval_constructed`).

mod certify;
mod convex;
mod lift;
mod lsc;
mod sa;

pub use certify::{convexity_certificate, ConvexityReport};
pub use convex::{clause_product_minimizer, encode_indicator_convex, encode_piecewise_unbounded, encode_pw_lsc_bounded, indicator_minimizer, IndicatorMinimizer};
pub use lift::{moment_lift, LiftedProgram};
pub use lsc::{encode_lsc_bounded, lsc_block_minimizer, validate_bounds};
pub use sa::{encode_sa_unbounded, sa_block_minimizer};

pub(crate) use convex::pw_lsc_value;
pub(crate) use lsc::reflect_closure;

use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::Extended;
use crate::hardness::Instance;
use crate::scalar::{format_rational, int, Rational};
use crate::semialg::{BasicSet, ClosedSASet, GrowthBounds, SAFunctionSpec};
use crate::RatPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Optimistic,
    Pessimistic,
}

impl Mode {
    pub fn flip(self) -> Self {
        match self {
            Mode::Optimistic => Mode::Pessimistic,
            Mode::Pessimistic => Mode::Optimistic,
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimistic" => Ok(Mode::Optimistic),
            "pessimistic" => Ok(Mode::Pessimistic),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Optimistic => "optimistic",
            Mode::Pessimistic => "pessimistic",
        })
    }
}

/// What a lower variable does in its construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    T,
    Z,
    Nu,
    NuPlus,
    NuMinus,
    U,
    V,
    W,
    S,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleSlot {
    pub role: Role,
    pub index: Vec<usize>,
}

impl RoleSlot {
    pub fn new(role: Role, index: &[usize]) -> Self {
        RoleSlot { role, index: index.to_vec() }
    }
}

/// Everything the exact evaluator needs, per construction.
///
/// The recipe always describes the program *before* any [`pessimize`]; the metadata's
/// `negated` flag records whether `P` has been negated since.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", content = "recipe", rename_all = "kebab-case")]
pub enum Recipe {
    /// Value = the compiled spec's function (graph root, or ±∞ on dom±).
    SaUnbounded { spec: SAFunctionSpec },
    /// Value = least `t ∈ [-c(x), c(x)]` with `(x, t)` in the closure.
    LscBounded { closure: ClosedSASet, bounds: GrowthBounds },
    /// Value = characteristic function of the set. Mode-independent.
    Indicator { set: BasicSet },
    /// Value = `Σ_i P_i(x) · #{j : x ∈ T_ij}`. Mode-independent.
    PiecewiseUnbounded { polys: Vec<RatPoly>, blocks: Vec<Vec<BasicSet>> },
    /// Value = `c(x) + min_{ij} (P_i(x) - c(x))·[x ∈ clause ij]`.
    PwLscBounded { polys: Vec<RatPoly>, closures: Vec<ClosedSASet>, bounds: GrowthBounds },
    /// Value = 1 off binary points, `-min_t H(x, t)` on them.
    Hardness { instance: Instance },
}

pub const KNOWN_CONSTRUCTIONS: [&str; 6] =
    ["sa-unbounded", "lsc-bounded", "indicator", "piecewise-unbounded", "pw-lsc-bounded", "hardness"];

impl Recipe {
    /// Whether every minimizer gives the same `P`, so `inf = sup` over the argmin set.
    pub fn mode_invariant(&self) -> bool {
        matches!(self, Recipe::Indicator { .. } | Recipe::PiecewiseUnbounded { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub construction: String,
    #[serde(default)]
    pub negated: bool,
    pub roles: Vec<RoleSlot>,
    /// Kept raw so programs with unfamiliar constructions still load.
    pub recipe: serde_json::Value,
}

impl Metadata {
    pub fn new(roles: Vec<RoleSlot>, recipe: &Recipe) -> Self {
        let v = serde_json::to_value(recipe).expect("recipes serialize");
        let construction = v["construction"].as_str().expect("tagged").to_string();
        Metadata { construction, negated: false, roles, recipe: v["recipe"].clone() }
    }

    pub fn recipe(&self) -> Result<Recipe> {
        if !KNOWN_CONSTRUCTIONS.contains(&self.construction.as_str()) {
            return Err(Error::UnknownConstruction(self.construction.clone()));
        }
        let tagged = serde_json::json!({ "construction": self.construction, "recipe": self.recipe });
        serde_json::from_value(tagged).map_err(|e| Error::Parse(format!("recipe for `{}`: {e}", self.construction)))
    }
}

pub type Bound = (Extended<Rational>, Extended<Rational>);

pub fn unbounded() -> Bound {
    (Extended::NegInf, Extended::PosInf)
}

pub fn interval(lo: Rational, hi: Rational) -> Bound {
    (Extended::Finite(lo), Extended::Finite(hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProgramRecord", into = "ProgramRecord")]
pub struct BilevelProgram {
    n: usize,
    m: usize,
    p: RatPoly,
    q: RatPoly,
    bounds: Vec<Bound>,
    mode: Mode,
    metadata: Option<Metadata>,
}

#[derive(Clone, Serialize, Deserialize)]
struct ProgramRecord {
    n: usize,
    m: usize,
    #[serde(rename = "P")]
    p: RatPoly,
    #[serde(rename = "Q")]
    q: RatPoly,
    #[serde(rename = "box")]
    bounds: Vec<Bound>,
    mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<Metadata>,
}

impl TryFrom<ProgramRecord> for BilevelProgram {
    type Error = Error;

    fn try_from(r: ProgramRecord) -> Result<Self> {
        let prog = BilevelProgram::new(r.n, r.m, r.p, r.q, r.bounds, r.mode)?;
        match r.metadata {
            Some(md) => prog.with_metadata(md),
            None => Ok(prog),
        }
    }
}

impl From<BilevelProgram> for ProgramRecord {
    fn from(p: BilevelProgram) -> Self {
        ProgramRecord { n: p.n, m: p.m, p: p.p, q: p.q, bounds: p.bounds, mode: p.mode, metadata: p.metadata }
    }
}

impl BilevelProgram {
    pub fn new(n: usize, m: usize, p: RatPoly, q: RatPoly, bounds: Vec<Bound>, mode: Mode) -> Result<Self> {
        for poly in [&p, &q] {
            if poly.num_vars() != n + m {
                return Err(Error::VarCountMismatch { left: n + m, right: poly.num_vars() });
            }
        }
        if bounds.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: bounds.len() });
        }
        for (k, (lo, hi)) in bounds.iter().enumerate() {
            let bad = matches!(lo, Extended::PosInf) || matches!(hi, Extended::NegInf) || lo > hi;
            if bad {
                return Err(Error::InvalidProgram(format!("box coordinate {k} is empty: [{lo}, {hi}]")));
            }
        }
        Ok(BilevelProgram { n, m, p, q, bounds, mode, metadata: None })
    }

    pub fn with_metadata(mut self, md: Metadata) -> Result<Self> {
        if md.roles.len() != self.m {
            return Err(Error::InvalidProgram(format!(
                "role table has {} entries for {} lower variables",
                md.roles.len(),
                self.m
            )));
        }
        self.metadata = Some(md);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> &RatPoly {
        &self.p
    }

    pub fn q(&self) -> &RatPoly {
        &self.q
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn metadata(&self) -> Option<&Metadata> {
        self.metadata.as_ref()
    }

    pub fn construction(&self) -> Option<&str> {
        self.metadata.as_ref().map(|m| m.construction.as_str())
    }

    /// Same `P`, `Q` and box under the other mode. Metadata is kept.
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    /// Same program over another box of the same dimension.
    pub fn with_bounds(self, bounds: Vec<Bound>) -> Result<Self> {
        let md = self.metadata.clone();
        let prog = BilevelProgram::new(self.n, self.m, self.p, self.q, bounds, self.mode)?;
        match md {
            Some(md) => prog.with_metadata(md),
            None => Ok(prog),
        }
    }

    /// Finite `[lo, hi]` per coordinate, or the first unbounded coordinate.
    pub fn finite_box(&self) -> Result<Vec<(Rational, Rational)>> {
        self.bounds
            .iter()
            .enumerate()
            .map(|(k, b)| match b {
                (Extended::Finite(lo), Extended::Finite(hi)) => Ok((lo.clone(), hi.clone())),
                _ => Err(Error::UnboundedBox(k)),
            })
            .collect()
    }

    pub fn is_bounded(&self) -> bool {
        self.finite_box().is_ok()
    }

    /// Degree of `Q` in the lower variables.
    pub fn lower_degree_q(&self) -> u32 {
        self.q.degree_in(&(self.n..self.n + self.m).collect::<Vec<_>>())
    }

    /// Whether `y` lies in the box.
    pub fn in_box(&self, y: &[Rational]) -> bool {
        y.len() == self.m
            && y.iter().zip(&self.bounds).all(|(v, (lo, hi))| {
                let above = match lo {
                    Extended::Finite(l) => v >= l,
                    Extended::NegInf => true,
                    Extended::PosInf => false,
                };
                let below = match hi {
                    Extended::Finite(h) => v <= h,
                    Extended::PosInf => true,
                    Extended::NegInf => false,
                };
                above && below
            })
    }

    /// `P` and `Q` at `(x, y)`.
    pub fn objectives_at(&self, x: &[Rational], y: &[Rational]) -> Result<(Rational, Rational)> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: x.len() });
        }
        if y.len() != self.m {
            return Err(Error::LengthMismatch { expected: self.m, got: y.len() });
        }
        let point: Vec<Rational> = x.iter().chain(y).cloned().collect();
        Ok((self.p.evaluate(&point)?, self.q.evaluate(&point)?))
    }
}

/// `sup_Θ P = -inf_Θ (-P)`: negate `P` and switch the mode.
pub fn pessimize(prog: &BilevelProgram) -> BilevelProgram {
    let mut out = prog.clone();
    out.p = -&prog.p;
    out.mode = prog.mode.flip();
    if let Some(md) = &mut out.metadata {
        md.negated = !md.negated;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Divide (forward) or multiply (backward) by `B + ‖x‖^N`. Infinities pass through.
pub fn normalize_range(
    fval: &Extended<Rational>,
    x: &[Rational],
    bounds: &GrowthBounds,
    direction: Direction,
) -> Extended<Rational> {
    let c = bounds.scale_at(x);
    fval.clone().map(|v| match direction {
        Direction::Forward => v / c,
        Direction::Backward => v * c,
    })
}

/// A forward-normalized value must lie in `[-1, 1]`.
pub fn check_unit_range(v: &Extended<Rational>, x: &[Rational]) -> Result<()> {
    match v {
        Extended::Finite(r) if r.abs() <= int(1) => Ok(()),
        _ => Err(Error::BoundsViolated(format!(
            "normalized value {v} outside [-1, 1] at x = ({})",
            x.iter().map(format_rational).collect::<Vec<_>>().join(", ")
        ))),
    }
}

/// Lower-variable index `k` in the full `(x, y)` space.
fn lower(n: usize, k: usize) -> usize {
    n + k
}

/// Embed a polynomial over `(x, t)` into `(x, y)` with `t` at lower slot `t_slot`.
fn embed_xt(p: &RatPoly, n: usize, total: usize, t_slot: usize) -> Result<RatPoly> {
    let mut map: Vec<usize> = (0..n).collect();
    map.push(lower(n, t_slot));
    p.embed(total, &map)
}
