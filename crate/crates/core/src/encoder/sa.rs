//! Any extended-real semi-algebraic function as the value function of an unconstrained program.
//!
//! Lower variables, in order: `t`, `z_ij`, `ν_ij`, `ν⁺_ij`, `ν⁻_ij`, `u`, `v`. With
//! `F = ∏_i (P_i² + Σ_j (1 - Q_ij z_ij²)²)` built from the graph, and `H`, `H⁺`, `H⁻` built the same
//! way from dom, dom⁺, dom⁻:
//!
//! `P = t`, `Q = H⁺H⁻F + HH⁻u² + (1 - uv)²`.
//!
//! On dom the `u, v` gadget is solved exactly and `F = 0` pins `t = f(x)`. On dom⁺ the infimum 0 of
//! `HH⁻u² + (1 - uv)²` is not attained, so the argmin set is empty and `φ_o = +∞`. On dom⁻ the
//! whole first term vanishes and `t` is free, so `φ_o = -∞`.

use num_traits::{Signed, Zero};

use crate::encoder::{embed_xt, lower, pessimize, unbounded, BilevelProgram, Metadata, Mode, Recipe, Role, RoleSlot};
use crate::error::{Error, Result};
use crate::scalar::Rational;
use crate::semialg::{SAFunctionSpec, SASet};
use crate::RatPoly;

/// Closed-form minimizer of `(1 - q z²)²`: `z*² = 1/q` when `q > 0` (value 0), else `z* = 0`
/// (value 1). Returns `(z*², value)`.
pub fn sa_block_minimizer(q: &Rational) -> (Rational, Rational) {
    if q.is_positive() {
        (q.recip(), Rational::zero())
    } else {
        (Rational::zero(), Rational::from_integer(1.into()))
    }
}

/// `∏_i (E_i² + Σ_j (1 - S_ij w_ij²)²)` with `w_ij` at lower slot `base + i·J + j`.
fn family_product(set: &SASet, n: usize, total: usize, base: usize, width: usize) -> Result<RatPoly> {
    let map: Vec<usize> = (0..set.num_vars()).collect();
    let one = RatPoly::one(total);
    let mut factors = Vec::with_capacity(set.pieces().len());
    for (i, piece) in set.pieces().iter().enumerate() {
        let e = piece.equality().embed(total, &map)?;
        let mut f = e.square();
        for (j, s) in piece.strict().iter().enumerate() {
            let s = s.embed(total, &map)?;
            let w = RatPoly::var(total, lower(n, base + i * width + j));
            f = &f + &(&one - &(&s * &w.square())).square();
        }
        factors.push(f);
    }
    Ok(RatPoly::product(total, factors.iter()))
}

fn is_syntactically_empty(set: &SASet) -> bool {
    set.pieces().iter().all(|p| p.equality().is_constant() && !p.equality().is_zero())
}

fn build(spec: &SAFunctionSpec) -> Result<BilevelProgram> {
    let n = spec.n();
    let pieces = spec.graph().pieces().len();
    let width = spec.graph().pieces()[0].strict().len();
    let ij = pieces * width;
    let m = 1 + 4 * ij + 2;
    let total = n + m;

    // The graph lives over (x, t); t is lower slot 0, so the prefix embedding already fits.
    let graph_embedded = {
        let mut pcs = Vec::new();
        for piece in spec.graph().pieces() {
            let eq = embed_xt(piece.equality(), n, total, 0)?;
            let strict = piece.strict().iter().map(|q| embed_xt(q, n, total, 0)).collect::<Result<_>>()?;
            pcs.push(crate::semialg::BasicSet::new(eq, strict)?);
        }
        SASet::new(total, pcs)?
    };
    let f = family_product(&graph_embedded, n, total, 1, width)?;
    let h = family_product(spec.dom(), n, total, 1 + ij, width)?;
    let h_plus = family_product(spec.dom_plus(), n, total, 1 + 2 * ij, width)?;
    let h_minus = family_product(spec.dom_minus(), n, total, 1 + 3 * ij, width)?;

    let u = RatPoly::var(total, lower(n, 1 + 4 * ij));
    let v = RatPoly::var(total, lower(n, 2 + 4 * ij));
    let one = RatPoly::one(total);
    let q = &(&(&h_plus * &h_minus) * &f) + &(&(&(&h * &h_minus) * &u.square()) + &(&one - &(&u * &v)).square());
    let p = RatPoly::var(total, lower(n, 0));

    let mut roles = vec![RoleSlot::new(Role::T, &[])];
    for role in [Role::Z, Role::Nu, Role::NuPlus, Role::NuMinus] {
        for i in 0..pieces {
            for j in 0..width {
                roles.push(RoleSlot::new(role, &[i, j]));
            }
        }
    }
    roles.push(RoleSlot::new(Role::U, &[]));
    roles.push(RoleSlot::new(Role::V, &[]));

    let recipe = Recipe::SaUnbounded { spec: spec.clone().without_growth() };
    BilevelProgram::new(n, m, p, q, vec![unbounded(); m], Mode::Optimistic)?.with_metadata(Metadata::new(roles, &recipe))
}

/// Compile a normalized spec. Pessimistic mode compiles `-f` and negates `P`.
pub fn encode_sa_unbounded(spec: &SAFunctionSpec, mode: Mode) -> Result<BilevelProgram> {
    if !spec.is_normalized() {
        return Err(Error::NotNormalized("function spec index sets are not uniform; normalize first".into()));
    }
    if is_syntactically_empty(spec.graph()) {
        return Err(Error::EmptyDecomposition("graph has no pieces".into()));
    }
    match mode {
        Mode::Optimistic => build(spec),
        Mode::Pessimistic => Ok(pessimize(&build(&spec.negated())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};
    use crate::semialg::BasicSet;

    fn identity_with_puncture() -> SAFunctionSpec {
        let x = RatPoly::var(1, 0);
        let one = RatPoly::one(1);
        let puncture = &x - &one;
        let graph = SASet::single(BasicSet::new(&RatPoly::var(2, 1) - &RatPoly::var(2, 0), vec![puncture.square().extend_vars(2)]).unwrap());
        let dom = SASet::single(BasicSet::open(1, vec![puncture.square()]).unwrap());
        SAFunctionSpec::new(1, graph, dom, SASet::single(BasicSet::zero_set(puncture)), SASet::empty(1))
            .unwrap()
            .normalize()
    }

    #[test]
    fn block_minimizer_table() {
        assert_eq!(sa_block_minimizer(&int(4)), (ratio(1, 4), int(0)));
        assert_eq!(sa_block_minimizer(&int(0)), (int(0), int(1)));
        assert_eq!(sa_block_minimizer(&int(-3)), (int(0), int(1)));
    }

    #[test]
    fn layout_and_roles() {
        let spec = identity_with_puncture();
        let prog = encode_sa_unbounded(&spec, Mode::Optimistic).unwrap();
        let ij = spec.graph().pieces().len() * spec.graph().pieces()[0].strict().len();
        assert_eq!(prog.m(), 1 + 3 * ij + 2 + ij);
        let md = prog.metadata().unwrap();
        assert_eq!(md.roles[0].role, Role::T);
        assert_eq!(md.roles[prog.m() - 1].role, Role::V);
        assert!(prog.bounds().iter().all(|b| b == &unbounded()));
        assert_eq!(prog.p(), &RatPoly::var(prog.n() + prog.m(), 1));
    }

    #[test]
    fn zero_certificate_on_dom() {
        // x = 2 is in dom: t = 2, z² = 1/Q, ν² = 1/S, u = v = 1 gives Q = 0 whenever the dom⁺ and
        // dom⁻ products are positive, which they are.
        let spec = identity_with_puncture();
        let prog = encode_sa_unbounded(&spec, Mode::Optimistic).unwrap();
        // q_11 = (x-1)^2 = 1 at x = 2, so z = 1 and ν = 1 solve their blocks.
        let mut y = vec![int(2)];
        y.extend(std::iter::repeat_n(int(1), 4));
        y.extend([int(1), int(1)]);
        let (p, q) = prog.objectives_at(&[int(2)], &y).unwrap();
        assert_eq!(p, int(2));
        assert_eq!(q, int(0));
    }

    #[test]
    fn rejects_unnormalized_and_empty() {
        let x = RatPoly::var(1, 0);
        let t = RatPoly::var(2, 1);
        let graph = SASet::new(
            2,
            vec![BasicSet::new(&t - &x.extend_vars(2), vec![x.extend_vars(2)]).unwrap(), BasicSet::zero_set(t.clone())],
        )
        .unwrap();
        let spec = SAFunctionSpec::finite(1, graph).unwrap();
        assert!(matches!(encode_sa_unbounded(&spec, Mode::Optimistic), Err(Error::NotNormalized(_))));
        let empty = SAFunctionSpec::finite(1, SASet::empty(2)).unwrap().normalize();
        assert!(matches!(encode_sa_unbounded(&empty, Mode::Optimistic), Err(Error::EmptyDecomposition(_))));
    }

    #[test]
    fn pessimistic_negates() {
        let spec = identity_with_puncture();
        let prog = encode_sa_unbounded(&spec, Mode::Pessimistic).unwrap();
        assert_eq!(prog.mode(), Mode::Pessimistic);
        assert!(prog.metadata().unwrap().negated);
        assert_eq!(prog.p(), &-&RatPoly::var(prog.n() + prog.m(), 1));
    }
}
