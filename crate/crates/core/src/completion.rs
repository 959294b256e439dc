//! Metric completions by fast-Cauchy sequences.
//!
//! A point of the completion is a sequence of base points with
//! `d(seq(i), seq(j)) ≤ 2⁻ⁿ` for `i, j ≥ n`. Terms are memoized.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::One;

use crate::error::{Error, Result};
use crate::metric::{MapClass, MetricMap, SeparableSpace};
use crate::numerics::{log2_ceil, pow2, rat_sup, Rational};
use crate::reals::{settle, Real};

struct Node<P> {
    seq: Box<dyn Fn(u32) -> P + Send + Sync>,
    constant: Option<P>,
    memo: RwLock<HashMap<u32, P>>,
}

/// A point of a completion, given by a fast-Cauchy sequence.
pub struct CompletionPoint<P>(Arc<Node<P>>);

impl<P> Clone for CompletionPoint<P> {
    fn clone(&self) -> Self {
        CompletionPoint(self.0.clone())
    }
}

impl<P: Clone + Send + Sync + 'static> CompletionPoint<P> {
    /// Wraps a sequence the caller knows to be fast-Cauchy.
    pub fn from_fn(seq: impl Fn(u32) -> P + Send + Sync + 'static) -> Self {
        CompletionPoint(Arc::new(Node { seq: Box::new(seq), constant: None, memo: RwLock::new(HashMap::new()) }))
    }

    /// Normalizes a Cauchy sequence with modulus `m` to a fast-Cauchy one by
    /// reindexing through `n ↦ max{m(k) : k ≤ n}`.
    pub fn from_cauchy(
        term: impl Fn(u64) -> P + Send + Sync + 'static,
        modulus: impl Fn(u32) -> u64 + Send + Sync + 'static,
    ) -> Self {
        Self::from_fn(move |n| term((0..=n).map(&modulus).max().unwrap_or(0)))
    }

    /// The constant sequence at `x`.
    pub fn embed(x: P) -> Self {
        let c = x.clone();
        CompletionPoint(Arc::new(Node {
            seq: Box::new(move |_| c.clone()),
            constant: Some(x),
            memo: RwLock::new(HashMap::new()),
        }))
    }

    pub fn term(&self, n: u32) -> P {
        if let Some(c) = &self.0.constant {
            return c.clone();
        }
        if let Some(p) = self.0.memo.read().expect("memo lock").get(&n) {
            return p.clone();
        }
        let p = (self.0.seq)(n);
        self.0.memo.write().expect("memo lock").entry(n).or_insert(p).clone()
    }

    /// The base point, for points built by [`CompletionPoint::embed`].
    pub fn as_base(&self) -> Option<&P> {
        self.0.constant.as_ref()
    }
}

pub fn embed_dense<P: Clone + Send + Sync + 'static>(x: P) -> CompletionPoint<P> {
    CompletionPoint::embed(x)
}

/// The completion of a separable space.
#[derive(Clone)]
pub struct CompletionSpace<S> {
    base: S,
}

pub fn complete<S: SeparableSpace>(base: S) -> CompletionSpace<S> {
    CompletionSpace { base }
}

impl<S: SeparableSpace> CompletionSpace<S> {
    pub fn base(&self) -> &S {
        &self.base
    }

    pub fn embed(&self, x: S::Point) -> CompletionPoint<S::Point> {
        CompletionPoint::embed(x)
    }
}

impl<S: SeparableSpace + Clone + 'static> SeparableSpace for CompletionSpace<S> {
    type Point = CompletionPoint<S::Point>;

    fn dist(&self, x: &Self::Point, y: &Self::Point) -> Real {
        if let (Some(a), Some(b)) = (x.as_base(), y.as_base()) {
            return self.base.dist(a, b);
        }
        let (base, x, y) = (self.base.clone(), x.clone(), y.clone());
        Real::from_oracle(move |n| {
            // Both terms at n + 3 are within 2^-(n+3) of their limits.
            let iv = base.dist(&x.term(n + 3), &y.term(n + 3)).approx(n + 2);
            settle(iv.pad(&pow2(-(n as i64) - 2)), n).clamp_nonneg()
        })
    }

    fn enumerate(&self, k: u64) -> Option<Self::Point> {
        self.base.enumerate(k).map(CompletionPoint::embed)
    }

    /// The base witness shifted by one: the covering radius must stay
    /// strictly below `2⁻ⁿ` for limit points too.
    fn total_bound(&self, n: u32) -> Option<u64> {
        self.base.total_bound(n + 1)
    }

    fn is_ultrametric(&self) -> bool {
        self.base.is_ultrametric()
    }

    fn distance_bound(&self) -> Option<Rational> {
        self.base.distance_bound()
    }
}

// ---------------------------------------------------------------------------
// Lipschitz extension

/// Extends a `C`-Lipschitz map from the base of a completion into a
/// complete space `Z` to the whole completion, with the same constant.
///
/// The constant is checked on pairs among the first `samples` enumerated
/// base points, at precision 12.
pub fn extend_lipschitz<S, Z>(
    base: &S,
    codomain: &CompletionSpace<Z>,
    f: MetricMap<S::Point, CompletionPoint<Z::Point>>,
    c: Rational,
    samples: u64,
) -> Result<MetricMap<CompletionPoint<S::Point>, CompletionPoint<Z::Point>>>
where
    S: SeparableSpace,
    Z: SeparableSpace + Clone + 'static,
{
    let pts: Vec<_> = (0..samples).filter_map(|k| base.enumerate(k)).collect();
    let n = 12;
    let slack = pow2(2 - n as i64);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dx = base.dist(&pts[i], &pts[j]).approx(n);
            let dy = codomain.dist(&f.apply(&pts[i]), &f.apply(&pts[j])).approx(n);
            if dy.lo > &c * &dx.hi + &slack {
                return Err(Error::Contract(format!(
                    "map is not {c}-Lipschitz on enumerated points {i} and {j}"
                )));
            }
        }
    }
    // 2^shift ≥ C, so f(p_{k+shift+2}) moves by at most 2^-(k+2).
    let shift = log2_ceil(&c);
    Ok(MetricMap::new(MapClass::Lipschitz(c), move |p: &CompletionPoint<S::Point>| {
        if let Some(x) = p.as_base() {
            return f.apply(x);
        }
        let (p, f) = (p.clone(), f.clone());
        CompletionPoint::from_fn(move |k| f.apply(&p.term(k + shift + 2)).term(k + 2))
    }))
}

// ---------------------------------------------------------------------------
// Locations

/// A location: the distance function of a (possibly ideal) point, restricted
/// to the base enumeration.
pub struct Location {
    pub values: Arc<dyn Fn(u64) -> Option<Real> + Send + Sync>,
    pub zero_approach: Option<Arc<dyn Fn(u32) -> Result<u64> + Send + Sync>>,
}

impl Clone for Location {
    fn clone(&self) -> Self {
        Location { values: self.values.clone(), zero_approach: self.zero_approach.clone() }
    }
}

/// Least index `k < stage_bound` with `values(k)` certified below `2⁻ⁿ` at
/// precision `n + 2`.
fn approach(values: &(dyn Fn(u64) -> Option<Real> + Send + Sync), n: u32, stage_bound: u64) -> Result<u64> {
    let eps = pow2(-(n as i64));
    (0..stage_bound)
        .find(|&k| values(k).is_some_and(|v| v.upper(n + 2) < eps))
        .ok_or_else(|| Error::SearchBound(format!("no enumerated point within 2^-{n} below index {stage_bound}")))
}

pub fn location_of<S>(space: &S, p: &CompletionPoint<S::Point>, stage_bound: u64) -> Location
where
    S: SeparableSpace + Clone + 'static,
{
    let c = complete(space.clone());
    let p = p.clone();
    let values: Arc<dyn Fn(u64) -> Option<Real> + Send + Sync> = Arc::new(move |i| {
        c.base().enumerate(i).map(|s| c.dist(&CompletionPoint::embed(s), &p))
    });
    let v = values.clone();
    Location { values, zero_approach: Some(Arc::new(move |n| approach(v.as_ref(), n, stage_bound))) }
}

/// Rebuilds the point a location describes. Terms run the location's search
/// lazily and panic if it fails.
pub fn point_of_location<S>(space: &S, loc: &Location) -> Result<CompletionPoint<S::Point>>
where
    S: SeparableSpace + Clone + 'static,
{
    let z = loc.zero_approach.clone().ok_or_else(|| Error::Contract("location has no zero approach".into()))?;
    let space = space.clone();
    Ok(CompletionPoint::from_fn(move |n| {
        let k = z(n + 1).unwrap_or_else(|e| panic!("location search failed at stage {}: {e}", n + 1));
        space.enumerate(k).expect("zero approach lands on a present point")
    }))
}

// ---------------------------------------------------------------------------
// Basepoint adjunction

/// `1 + X` with a new point `⋆` (written `None`) at distance
/// `sup{d(x, s_m), 1}` from every `x`, where `m` is the first index the
/// enumeration of `X` hits.
pub struct AdjoinBasepoint<S: SeparableSpace> {
    base: S,
    anchor: Arc<OnceLock<S::Point>>,
}

impl<S: SeparableSpace + Clone> Clone for AdjoinBasepoint<S> {
    fn clone(&self) -> Self {
        AdjoinBasepoint { base: self.base.clone(), anchor: self.anchor.clone() }
    }
}

pub fn adjoin_basepoint<S: SeparableSpace>(base: S) -> AdjoinBasepoint<S> {
    AdjoinBasepoint { base, anchor: Arc::new(OnceLock::new()) }
}

impl<S: SeparableSpace> AdjoinBasepoint<S> {
    fn anchor(&self) -> &S::Point {
        // Only reached with a point of X in hand, so X is inhabited and the
        // scan stops.
        self.anchor.get_or_init(|| {
            (0u64..).find_map(|k| self.base.enumerate(k)).expect("inhabited space")
        })
    }

    pub fn base(&self) -> &S {
        &self.base
    }
}

impl<S: SeparableSpace> SeparableSpace for AdjoinBasepoint<S> {
    type Point = Option<S::Point>;

    fn dist(&self, x: &Self::Point, y: &Self::Point) -> Real {
        match (x, y) {
            (None, None) => Real::zero(),
            (Some(a), Some(b)) => self.base.dist(a, b),
            (Some(a), None) | (None, Some(a)) => self.base.dist(a, self.anchor()).sup(&Real::one()),
        }
    }

    fn enumerate(&self, k: u64) -> Option<Self::Point> {
        match k {
            0 => Some(None),
            _ => self.base.enumerate(k - 1).map(Some),
        }
    }

    fn total_bound(&self, n: u32) -> Option<u64> {
        self.base.total_bound(n).map(|a| a.saturating_add(1))
    }

    fn is_ultrametric(&self) -> bool {
        self.base.is_ultrametric()
    }

    fn distance_bound(&self) -> Option<Rational> {
        self.base.distance_bound().map(|b| rat_sup(&b, &Rational::one()))
    }
}

/// Checks the fast-Cauchy law on terms `0..depth` at precision `n`, with
/// `2⁻ⁿ⁻²` slack. Returns the first failing pair.
pub fn check_fast_cauchy<S: SeparableSpace>(
    space: &S,
    p: &CompletionPoint<S::Point>,
    depth: u32,
    n: u32,
) -> std::result::Result<(), (u32, u32)> {
    for i in 0..depth {
        for j in i + 1..depth {
            let bound = pow2(-(i as i64)) + pow2(-(n as i64) - 2);
            if space.dist(&p.term(i), &p.term(j)).lower(n) > bound {
                return Err((i, j));
            }
        }
    }
    Ok(())
}

/// A real built from a fast-Cauchy sequence of reals.
pub fn real_limit_fast(terms: impl Fn(u32) -> Real + Send + Sync + 'static) -> Real {
    Real::from_oracle(move |n| {
        let iv = terms(n + 2).approx(n + 2);
        settle(iv.pad(&pow2(-(n as i64) - 2)), n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{discrete_space, FiniteRationalSpace};
    use crate::numerics::{int, rat};

    fn line3() -> FiniteRationalSpace {
        FiniteRationalSpace::from_matrix(vec![
            vec![int(0), int(1), int(5)],
            vec![int(1), int(0), int(4)],
            vec![int(5), int(4), int(0)],
        ])
        .unwrap()
    }

    #[test]
    fn embedding_is_isometric() {
        let c = complete(line3());
        let (a, b) = (embed_dense(0usize), embed_dense(2usize));
        assert_eq!(c.dist(&a, &b).as_rational(), Some(&int(5)));
        assert!(c.dist(&a, &a).approx(30).contains(&int(0)));
        assert_eq!(a.term(0), 0);
        let wobble = CompletionPoint::from_fn(|n| if n < 2 { 1usize } else { 0 });
        for n in [0, 4, 10] {
            let iv = c.dist(&wobble, &b).approx(n);
            assert!(iv.contains(&int(5)) && iv.width() <= pow2(-(n as i64)));
        }
        assert!(complete(discrete_space(0)).enumerate(3).is_none());
    }

    #[test]
    fn finite_completion_points_are_base_points() {
        let c = complete(discrete_space(3));
        let p = CompletionPoint::from_fn(|n| if n == 0 { 2usize } else { 1 });
        assert!(check_fast_cauchy(&c.base().clone(), &p, 6, 8).is_ok());
        assert!(c.dist(&p, &embed_dense(1)).approx(20).contains(&int(0)));
    }

    #[test]
    fn location_roundtrip() {
        let s = line3();
        let p = embed_dense(2usize);
        let loc = location_of(&s, &p, 10);
        assert!((loc.values)(2).unwrap().approx(8).contains(&int(0)));
        assert!((loc.values)(0).unwrap().approx(8).contains(&int(5)));
        for n in 0..6 {
            assert_eq!((loc.zero_approach.as_ref().unwrap())(n).unwrap(), 2);
        }
        let q = point_of_location(&s, &loc).unwrap();
        assert!(complete(s.clone()).dist(&p, &q).approx(12).contains(&int(0)));
        let bare = Location { values: loc.values.clone(), zero_approach: None };
        assert!(matches!(point_of_location(&s, &bare), Err(Error::Contract(_))));
        let short = location_of(&s, &p, 2);
        assert!(matches!((short.zero_approach.unwrap())(0), Err(Error::SearchBound(_))));
    }

    #[test]
    fn basepoint_examples() {
        let one = adjoin_basepoint(discrete_space(1));
        assert!(one.dist(&Some(0), &None).approx(5).contains(&int(1)));
        let empty = adjoin_basepoint(discrete_space(0));
        assert_eq!(empty.enumerate(0), Some(None));
        assert!((1..6).all(|k| empty.enumerate(k).is_none()));
        let far = adjoin_basepoint(line3());
        assert!(far.dist(&Some(2), &None).approx(5).contains(&int(5)));
        assert!(far.dist(&Some(1), &None).approx(5).contains(&int(1)));
        assert!(far.dist(&Some(0), &None).approx(5).contains(&int(1)));
        assert_eq!(far.total_bound(2), Some(4));
        assert!(far.dist(&None, &None).approx(3).contains(&rat(0, 1)));
    }
}
