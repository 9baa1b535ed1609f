//! Semi-algebraic sets and function specifications.
//!
//! A [`BasicSet`] is `{P = 0, Q_1 > 0, ..., Q_k > 0}`; an [`SASet`] is a finite union of them.
//! Closed sets are kept in the clause form `∪_i ∩_j {P_ij ≥ 0}` ([`ClosedSASet`]).
//! Membership is decided by exact sign evaluation.

mod disjoint;
mod eval;
pub mod sampling;
pub mod univariate;

pub use disjoint::{disjointify, CellIter, Disjointifier, SignCondition, DEFAULT_POOL_CAP};
pub use eval::{closure_fiber_min, closure_global_min, graph_closure_of, piecewise_eval, root_window, target_eval, Window};
pub use sampling::{axis, validate_partition, PartitionReport, PartitionViolation, SamplePlan};

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::RatPoly;

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::VarCountMismatch { left: expected, right: got });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicSet {
    num_vars: usize,
    equality: RatPoly,
    strict: Vec<RatPoly>,
}

impl BasicSet {
    pub fn new(equality: RatPoly, strict: Vec<RatPoly>) -> Result<Self> {
        let n = equality.num_vars();
        for q in &strict {
            check_dim(n, q.num_vars())?;
        }
        Ok(BasicSet { num_vars: n, equality, strict })
    }

    /// Only strict inequalities; the equality is `0 = 0`.
    pub fn open(num_vars: usize, strict: Vec<RatPoly>) -> Result<Self> {
        Self::new(RatPoly::zero(num_vars), strict)
    }

    /// `{P = 0}` with no inequalities.
    pub fn zero_set(equality: RatPoly) -> Self {
        BasicSet { num_vars: equality.num_vars(), equality, strict: Vec::new() }
    }

    /// All of space.
    pub fn whole(num_vars: usize) -> Self {
        Self::zero_set(RatPoly::zero(num_vars))
    }

    /// The empty set `{1 = 0}`.
    pub fn impossible(num_vars: usize) -> Self {
        Self::zero_set(RatPoly::one(num_vars))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn equality(&self) -> &RatPoly {
        &self.equality
    }

    pub fn strict(&self) -> &[RatPoly] {
        &self.strict
    }

    pub fn contains(&self, point: &[Rational]) -> Result<bool> {
        check_dim(self.num_vars, point.len())?;
        if !self.equality.evaluate(point)?.is_zero() {
            return Ok(false);
        }
        for q in &self.strict {
            if !q.evaluate(point)?.is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn padded(&self, width: usize) -> Self {
        let mut out = self.clone();
        while out.strict.len() < width {
            out.strict.push(RatPoly::one(self.num_vars));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SASet {
    num_vars: usize,
    pieces: Vec<BasicSet>,
}

impl SASet {
    pub fn new(num_vars: usize, pieces: Vec<BasicSet>) -> Result<Self> {
        for p in &pieces {
            check_dim(num_vars, p.num_vars)?;
        }
        Ok(SASet { num_vars, pieces })
    }

    pub fn single(piece: BasicSet) -> Self {
        SASet { num_vars: piece.num_vars, pieces: vec![piece] }
    }

    pub fn empty(num_vars: usize) -> Self {
        SASet { num_vars, pieces: Vec::new() }
    }

    pub fn whole(num_vars: usize) -> Self {
        Self::single(BasicSet::whole(num_vars))
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn pieces(&self) -> &[BasicSet] {
        &self.pieces
    }

    pub fn push(&mut self, piece: BasicSet) -> Result<()> {
        check_dim(self.num_vars, piece.num_vars)?;
        self.pieces.push(piece);
        Ok(())
    }

    pub fn contains(&self, point: &[Rational]) -> Result<bool> {
        check_dim(self.num_vars, point.len())?;
        for p in &self.pieces {
            if p.contains(point)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Largest inequality count over the pieces.
    pub fn max_ineqs(&self) -> usize {
        self.pieces.iter().map(|p| p.strict.len()).max().unwrap_or(0)
    }

    fn padded(&self, pieces: usize, width: usize) -> Self {
        let mut out: Vec<BasicSet> = self.pieces.iter().map(|p| p.padded(width)).collect();
        while out.len() < pieces {
            out.push(BasicSet::impossible(self.num_vars).padded(width));
        }
        SASet { num_vars: self.num_vars, pieces: out }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSASet {
    num_vars: usize,
    clauses: Vec<Vec<RatPoly>>,
}

impl ClosedSASet {
    pub fn new(num_vars: usize, clauses: Vec<Vec<RatPoly>>) -> Result<Self> {
        for c in &clauses {
            for p in c {
                check_dim(num_vars, p.num_vars())?;
            }
        }
        Ok(ClosedSASet { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<RatPoly>] {
        &self.clauses
    }

    pub fn contains(&self, point: &[Rational]) -> Result<bool> {
        check_dim(self.num_vars, point.len())?;
        for clause in &self.clauses {
            let mut all = true;
            for p in clause {
                if p.evaluate(point)?.is_negative() {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Pad every clause with `0 ≥ 0` up to the widest clause (at least one entry).
    pub fn normalize(&self) -> Self {
        let width = self.max_width().max(1);
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.resize(width, RatPoly::zero(self.num_vars));
                c
            })
            .collect();
        ClosedSASet { num_vars: self.num_vars, clauses }
    }

    pub fn is_normalized(&self) -> bool {
        let w = self.max_width();
        w >= 1 && self.clauses.iter().all(|c| c.len() == w)
    }
}

/// Growth bounds `|f(x)| ≤ B + ‖x‖^N` with `N` even.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds")]
pub struct GrowthBounds {
    #[serde(rename = "B", with = "rational_text")]
    b: Rational,
    #[serde(rename = "N")]
    n: u32,
}

#[derive(Deserialize)]
struct RawBounds {
    #[serde(rename = "B", with = "rational_text")]
    b: Rational,
    #[serde(rename = "N")]
    n: u32,
}

impl TryFrom<RawBounds> for GrowthBounds {
    type Error = Error;

    fn try_from(r: RawBounds) -> Result<Self> {
        GrowthBounds::new(r.b, r.n)
    }
}

impl GrowthBounds {
    pub fn new(b: Rational, n: u32) -> Result<Self> {
        if !b.is_positive() {
            return Err(Error::InvalidBounds(format!("B must be positive, got {}", format_rational(&b))));
        }
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidBounds(format!("N must be even and positive, got {n}")));
        }
        Ok(GrowthBounds { b, n })
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `B + ‖x‖^N`, always ≥ B > 0.
    pub fn scale_at(&self, x: &[Rational]) -> Rational {
        let sq: Rational = x.iter().map(|v| v * v).fold(Rational::zero(), |a, b| a + b);
        &self.b + num_traits::pow(sq, (self.n / 2) as usize)
    }

    /// `B + (Σ_k x_{vars[k]}^2)^{N/2}` as a polynomial over `num_vars` variables.
    pub fn scale_poly(&self, num_vars: usize, vars: &[usize]) -> RatPoly {
        let sq = RatPoly::sum(num_vars, vars.iter().map(|&v| RatPoly::var(num_vars, v).square()).collect::<Vec<_>>().iter());
        &RatPoly::constant(num_vars, self.b.clone()) + &sq.pow(self.n / 2)
    }
}

impl FromStr for GrowthBounds {
    type Err = Error;

    /// `B=1,N=2`
    fn from_str(s: &str) -> Result<Self> {
        let mut b = None;
        let mut n = None;
        for part in s.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bounds entry `{part}` is not key=value")))?;
            match k.trim() {
                "B" | "b" => b = Some(parse_rational(v)?),
                "N" | "n" => {
                    n = Some(v.trim().parse::<u32>().map_err(|e| Error::Parse(format!("N: {e}")))?)
                }
                other => return Err(Error::Parse(format!("unknown bounds key `{other}`"))),
            }
        }
        match (b, n) {
            (Some(b), Some(n)) => GrowthBounds::new(b, n),
            _ => Err(Error::Parse("bounds need both B and N".into())),
        }
    }
}

impl fmt::Display for GrowthBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B={},N={}", format_rational(&self.b), self.n)
    }
}

pub(crate) mod rational_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Extended-real valued function given by its graph and a three-way domain split.
#[derive(Debug, Clone, PartialEq)]
pub struct SAFunctionSpec {
    n: usize,
    graph: SASet,
    dom: SASet,
    dom_plus: SASet,
    dom_minus: SASet,
    growth: Option<GrowthBounds>,
    closure: Option<ClosedSASet>,
}

impl SAFunctionSpec {
    pub fn new(n: usize, graph: SASet, dom: SASet, dom_plus: SASet, dom_minus: SASet) -> Result<Self> {
        check_dim(n + 1, graph.num_vars)?;
        check_dim(n, dom.num_vars)?;
        check_dim(n, dom_plus.num_vars)?;
        check_dim(n, dom_minus.num_vars)?;
        Ok(SAFunctionSpec { n, graph, dom, dom_plus, dom_minus, growth: None, closure: None })
    }

    /// Finite everywhere: `dom` is all of space.
    pub fn finite(n: usize, graph: SASet) -> Result<Self> {
        Self::new(n, graph, SASet::whole(n), SASet::empty(n), SASet::empty(n))
    }

    /// Graph of a polynomial: `t - f(x) = 0`.
    pub fn of_polynomial(f: &RatPoly) -> Self {
        let n = f.num_vars();
        let map: Vec<usize> = (0..n).collect();
        let lifted = f.embed(n + 1, &map).expect("prefix embedding");
        let eq = &RatPoly::var(n + 1, n) - &lifted;
        Self::finite(n, SASet::single(BasicSet::zero_set(eq))).expect("dimensions agree")
    }

    pub fn with_growth(mut self, bounds: GrowthBounds) -> Self {
        self.growth = Some(bounds);
        self
    }

    pub fn without_growth(mut self) -> Self {
        self.growth = None;
        self
    }

    /// Attach a closed description of the graph's closure. Nothing here computes closures; the
    /// caller vouches for it.
    pub fn with_closure(mut self, closure: ClosedSASet) -> Result<Self> {
        check_dim(self.n + 1, closure.num_vars)?;
        self.closure = Some(closure);
        Ok(self)
    }

    pub fn closure(&self) -> Option<&ClosedSASet> {
        self.closure.as_ref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &SASet {
        &self.graph
    }

    pub fn dom(&self) -> &SASet {
        &self.dom
    }

    pub fn dom_plus(&self) -> &SASet {
        &self.dom_plus
    }

    pub fn dom_minus(&self) -> &SASet {
        &self.dom_minus
    }

    pub fn growth(&self) -> Option<&GrowthBounds> {
        self.growth.as_ref()
    }

    fn families(&self) -> [&SASet; 4] {
        [&self.graph, &self.dom, &self.dom_plus, &self.dom_minus]
    }

    /// Pad every piece to a common inequality count with `1 > 0`, and every family to a common
    /// piece count with the empty set `{1 = 0}`. Membership is unchanged.
    pub fn normalize(&self) -> Self {
        let width = self.families().iter().map(|s| s.max_ineqs()).max().unwrap_or(0).max(1);
        let pieces = self.families().iter().map(|s| s.pieces.len()).max().unwrap_or(0).max(1);
        SAFunctionSpec {
            n: self.n,
            graph: self.graph.padded(pieces, width),
            dom: self.dom.padded(pieces, width),
            dom_plus: self.dom_plus.padded(pieces, width),
            dom_minus: self.dom_minus.padded(pieces, width),
            growth: self.growth.clone(),
            closure: self.closure.clone(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        let fams = self.families();
        let pieces = fams[0].pieces.len();
        let width = fams[0].pieces.first().map_or(0, |p| p.strict.len());
        pieces >= 1
            && width >= 1
            && fams.iter().all(|s| s.pieces.len() == pieces && s.pieces.iter().all(|p| p.strict.len() == width))
    }

    /// Same function with `t` replaced by `-t` and the infinite parts swapped: the spec of `-f`.
    pub fn negated(&self) -> Self {
        let n = self.n;
        let minus_t = -&RatPoly::var(n + 1, n);
        let reflect = |p: &RatPoly| p.substitute(n, &minus_t).expect("same space");
        let graph = SASet {
            num_vars: n + 1,
            pieces: self
                .graph
                .pieces
                .iter()
                .map(|b| BasicSet {
                    num_vars: n + 1,
                    equality: reflect(&b.equality),
                    strict: b.strict.iter().map(reflect).collect(),
                })
                .collect(),
        };
        SAFunctionSpec {
            n,
            graph,
            dom: self.dom.clone(),
            dom_plus: self.dom_minus.clone(),
            dom_minus: self.dom_plus.clone(),
            growth: self.growth.clone(),
            closure: self.closure.as_ref().map(|c| ClosedSASet {
                num_vars: n + 1,
                clauses: c.clauses.iter().map(|cl| cl.iter().map(reflect).collect()).collect(),
            }),
        }
    }
}

/// `f(x) = P_i(x)` on cell `S_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolySpec {
    n: usize,
    cells: Vec<SASet>,
    polys: Vec<RatPoly>,
    closures: Option<Vec<ClosedSASet>>,
}

impl PiecewisePolySpec {
    pub fn new(n: usize, cells: Vec<SASet>, polys: Vec<RatPoly>, closures: Option<Vec<ClosedSASet>>) -> Result<Self> {
        if cells.len() != polys.len() {
            return Err(Error::LengthMismatch { expected: cells.len(), got: polys.len() });
        }
        if cells.is_empty() {
            return Err(Error::EmptyDecomposition("piecewise spec has no cells".into()));
        }
        for c in &cells {
            check_dim(n, c.num_vars)?;
        }
        for p in &polys {
            check_dim(n, p.num_vars())?;
        }
        if let Some(cl) = &closures {
            if cl.len() != cells.len() {
                return Err(Error::LengthMismatch { expected: cells.len(), got: cl.len() });
            }
            for c in cl {
                check_dim(n, c.num_vars)?;
            }
        }
        Ok(PiecewisePolySpec { n, cells, polys, closures })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[SASet] {
        &self.cells
    }

    pub fn polys(&self) -> &[RatPoly] {
        &self.polys
    }

    pub fn closures(&self) -> Option<&[ClosedSASet]> {
        self.closures.as_deref()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Indices of the cells containing `x`.
    pub fn containing_cells(&self, x: &[Rational]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            if c.contains(x)? {
                out.push(i);
            }
        }
        Ok(out)
    }
}

/// Any of the membership-testable sets.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySet {
    Basic(BasicSet),
    Union(SASet),
    Closed(ClosedSASet),
}

pub fn member(s: &AnySet, point: &[Rational]) -> Result<bool> {
    match s {
        AnySet::Basic(b) => b.contains(point),
        AnySet::Union(u) => u.contains(point),
        AnySet::Closed(c) => c.contains(point),
    }
}

// ---- interchange records ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IneqRecord {
    pub relation: String,
    pub poly: RatPoly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasicSetRecord {
    pub num_vars: usize,
    pub equality: RatPoly,
    #[serde(default)]
    pub inequalities: Vec<IneqRecord>,
}

impl From<&BasicSet> for BasicSetRecord {
    fn from(b: &BasicSet) -> Self {
        BasicSetRecord {
            num_vars: b.num_vars,
            equality: b.equality.clone(),
            inequalities: b.strict.iter().map(|q| IneqRecord { relation: ">".into(), poly: q.clone() }).collect(),
        }
    }
}

impl TryFrom<BasicSetRecord> for BasicSet {
    type Error = Error;

    fn try_from(r: BasicSetRecord) -> Result<Self> {
        check_dim(r.num_vars, r.equality.num_vars())?;
        let mut strict = Vec::with_capacity(r.inequalities.len());
        for q in r.inequalities {
            match q.relation.as_str() {
                ">" => strict.push(q.poly),
                "<" => strict.push(-q.poly),
                other => {
                    return Err(Error::Parse(format!("basic sets take strict inequalities only, got `{other}`")))
                }
            }
        }
        BasicSet::new(r.equality, strict)
    }
}

impl Serialize for BasicSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BasicSetRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasicSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        BasicSet::try_from(BasicSetRecord::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SASetRecord {
    num_vars: usize,
    pieces: Vec<BasicSet>,
}

impl Serialize for SASet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SASetRecord { num_vars: self.num_vars, pieces: self.pieces.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SASet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SASetRecord::deserialize(d)?;
        SASet::new(r.num_vars, r.pieces).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ClosedRecord {
    num_vars: usize,
    clauses: Vec<Vec<IneqRecord>>,
}

impl Serialize for ClosedSASet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ClosedRecord {
            num_vars: self.num_vars,
            clauses: self
                .clauses
                .iter()
                .map(|c| c.iter().map(|p| IneqRecord { relation: ">=".into(), poly: p.clone() }).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClosedSASet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ClosedRecord::deserialize(d)?;
        let mut clauses = Vec::with_capacity(r.clauses.len());
        for c in r.clauses {
            let mut out = Vec::with_capacity(c.len());
            for e in c {
                match e.relation.as_str() {
                    ">=" => out.push(e.poly),
                    "<=" => out.push(-e.poly),
                    other => {
                        return Err(serde::de::Error::custom(format!(
                            "closed sets take non-strict inequalities only, got `{other}`"
                        )))
                    }
                }
            }
            clauses.push(out);
        }
        ClosedSASet::new(r.num_vars, clauses).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionRecord {
    n: usize,
    graph: SASet,
    dom: SASet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dom_plus: Option<SASet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dom_minus: Option<SASet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    growth: Option<GrowthBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    closure: Option<ClosedSASet>,
}

impl Serialize for SAFunctionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionRecord {
            n: self.n,
            graph: self.graph.clone(),
            dom: self.dom.clone(),
            dom_plus: Some(self.dom_plus.clone()),
            dom_minus: Some(self.dom_minus.clone()),
            growth: self.growth.clone(),
            closure: self.closure.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SAFunctionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = FunctionRecord::deserialize(d)?;
        let n = r.n;
        let mut spec = SAFunctionSpec::new(
            n,
            r.graph,
            r.dom,
            r.dom_plus.unwrap_or_else(|| SASet::empty(n)),
            r.dom_minus.unwrap_or_else(|| SASet::empty(n)),
        )
        .map_err(serde::de::Error::custom)?;
        spec.growth = r.growth;
        match r.closure {
            Some(c) => spec.with_closure(c).map_err(serde::de::Error::custom),
            None => Ok(spec),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PiecewiseRecord {
    n: usize,
    cells: Vec<SASet>,
    polys: Vec<RatPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    closures: Option<Vec<ClosedSASet>>,
}

impl Serialize for PiecewisePolySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PiecewiseRecord {
            n: self.n,
            cells: self.cells.clone(),
            polys: self.polys.clone(),
            closures: self.closures.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiecewisePolySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = PiecewiseRecord::deserialize(d)?;
        PiecewisePolySpec::new(r.n, r.cells, r.polys, r.closures).map_err(serde::de::Error::custom)
    }
}

/// A spec file: any record above, tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpecFile {
    BasicSet(BasicSet),
    SaSet(SASet),
    ClosedSet(ClosedSASet),
    SaFunction(SAFunctionSpec),
    Piecewise(PiecewisePolySpec),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn x() -> RatPoly {
        RatPoly::var(1, 0)
    }

    #[test]
    fn membership_examples() {
        let b = BasicSet::new(x(), vec![RatPoly::one(1)]).unwrap();
        assert!(b.contains(&[int(0)]).unwrap());
        let b = BasicSet::new(x(), vec![x()]).unwrap();
        assert!(!b.contains(&[int(0)]).unwrap());
        let c = ClosedSASet::new(1, vec![vec![x()], vec![&(-&x()) - &RatPoly::one(1)]]).unwrap();
        assert!(c.contains(&[int(-1)]).unwrap());
        assert!(!c.contains(&[crate::scalar::ratio(-1, 2)]).unwrap());
        assert!(b.contains(&[int(0), int(1)]).is_err());
    }

    #[test]
    fn normalization_pads_and_is_idempotent() {
        let p1 = BasicSet::open(1, vec![x()]).unwrap();
        let p3 = BasicSet::open(1, vec![x(), &x() + &RatPoly::one(1), &RatPoly::constant(1, int(3)) - &x()]).unwrap();
        let graph = SASet::new(2, vec![BasicSet::zero_set(&RatPoly::var(2, 1) - &RatPoly::var(2, 0))]).unwrap();
        let spec = SAFunctionSpec::new(1, graph, SASet::new(1, vec![p1, p3]).unwrap(), SASet::empty(1), SASet::empty(1))
            .unwrap();
        let norm = spec.normalize();
        assert!(norm.is_normalized());
        assert!(norm.dom().pieces().iter().all(|p| p.strict().len() == 3));
        assert_eq!(norm.normalize(), norm);
        for k in -20..=20 {
            let pt = [crate::scalar::ratio(k, 4)];
            assert_eq!(spec.dom().contains(&pt).unwrap(), norm.dom().contains(&pt).unwrap());
            assert_eq!(spec.dom_plus().contains(&pt).unwrap(), norm.dom_plus().contains(&pt).unwrap());
        }
    }

    #[test]
    fn empty_inequality_list_padded() {
        let graph = SASet::single(BasicSet::zero_set(RatPoly::var(2, 1)));
        let spec = SAFunctionSpec::finite(1, graph).unwrap().normalize();
        assert_eq!(spec.graph().pieces()[0].strict(), &[RatPoly::one(2)]);
    }

    #[test]
    fn growth_bounds_parse_and_scale() {
        let g: GrowthBounds = "B=1,N=2".parse().unwrap();
        assert_eq!(g.scale_at(&[int(1)]), int(2));
        assert_eq!(g.scale_poly(1, &[0]).evaluate(&[int(3)]).unwrap(), int(10));
        assert!("B=1,N=3".parse::<GrowthBounds>().is_err());
        assert!("B=0,N=2".parse::<GrowthBounds>().is_err());
        assert_eq!(g.to_string(), "B=1/1,N=2");
    }

    #[test]
    fn spec_file_round_trip() {
        let spec = SAFunctionSpec::of_polynomial(&x().square());
        let file = SpecFile::SaFunction(spec);
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.contains("\"kind\":\"sa-function\""));
        let back: SpecFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
    }

    #[test]
    fn negated_spec_reflects_graph() {
        let spec = SAFunctionSpec::of_polynomial(&x());
        let neg = spec.negated();
        let eq = neg.graph().pieces()[0].equality();
        // -t - x = 0 at (x, t) = (2, -2)
        assert!(eq.evaluate(&[int(2), int(-2)]).unwrap().is_zero());
    }

    #[test]
    fn attached_closure_travels_with_the_spec() {
        let (px, pt) = (RatPoly::var(2, 0), RatPoly::var(2, 1));
        let closed = ClosedSASet::new(2, vec![vec![&pt - &px, &px - &pt]]).unwrap();
        let spec = SAFunctionSpec::of_polynomial(&x()).with_closure(closed).unwrap();
        let back: SpecFile = serde_json::from_str(&serde_json::to_string(&SpecFile::SaFunction(spec.clone())).unwrap()).unwrap();
        assert_eq!(back, SpecFile::SaFunction(spec.clone()));
        assert!(spec.negated().closure().unwrap().contains(&[int(3), int(-3)]).unwrap());
        assert!(SAFunctionSpec::of_polynomial(&x()).with_closure(ClosedSASet::new(1, vec![]).unwrap()).is_err());
    }
}
