//! Representations of complete separable spaces by sequence spaces, and
//! embeddings of totally bounded spaces into the Hilbert cube.
//!
//! A [`BaireQuotient`] presents a completion as a quotient of a subset `T`
//! of the Baire space: `α ∈ T` names the limit of `s_{α(0)}, s_{α(1)}, …`.
//! With a bound `α(n) < a(n)` the same construction runs over a variant of
//! the Cantor space.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};

use crate::completion::{complete, CompletionPoint, CompletionSpace};
use crate::error::{Error, Result};
use crate::metric::{diameter, MapClass, MetricMap, SeparableSpace, Seq, FACTOR_PROBE};
use crate::numerics::{pow2, Rational};
use crate::reals::{settle, Apartness, Interval, Real};
use crate::spaces::{hilbert_cube, shift, NatSeq};

/// Bound on `α(n)`; `None` is unbounded.
pub type Bound = Arc<dyn Fn(usize) -> Option<u64> + Send + Sync>;

/// How many terms of `α` [`BaireQuotient::decode`] checks up front.
pub const DEFAULT_CHECK_DEPTH: usize = 24;

struct QInner<S: SeparableSpace> {
    base: S,
    bound: Bound,
    delta: RwLock<HashMap<(u64, u64, u32), Rational>>,
    stage_bound: u64,
    check_depth: usize,
}

/// The quotient map `q: T → X̄` onto the completion of `base`.
pub struct BaireQuotient<S: SeparableSpace>(Arc<QInner<S>>);

impl<S: SeparableSpace> Clone for BaireQuotient<S> {
    fn clone(&self) -> Self {
        BaireQuotient(self.0.clone())
    }
}

/// Builds the quotient for the enumeration of `base` and the bound `a`,
/// which must be nondecreasing and at least 1.
pub fn quotient_build<S>(base: S, bound: Bound, stage_bound: u64) -> Result<BaireQuotient<S>>
where
    S: SeparableSpace + Clone + 'static,
{
    if base.enumerate(0).is_none() {
        return Err(Error::Contract("the quotient needs a point at enumeration index 0".into()));
    }
    let mut prev = 1u64;
    for n in 0..FACTOR_PROBE {
        let b = bound(n).unwrap_or(u64::MAX);
        if b < prev {
            return Err(Error::Contract(format!("bound decreases or drops below 1 at index {n}")));
        }
        prev = b;
    }
    Ok(BaireQuotient(Arc::new(QInner {
        base,
        bound,
        delta: RwLock::new(HashMap::new()),
        stage_bound,
        check_depth: DEFAULT_CHECK_DEPTH,
    })))
}

/// The unbounded quotient from the whole Baire space.
pub fn baire_quotient<S>(base: S, stage_bound: u64) -> Result<BaireQuotient<S>>
where
    S: SeparableSpace + Clone + 'static,
{
    quotient_build(base, Arc::new(|_| None), stage_bound)
}

/// The quotient from the Cantor variant `∏ 2^v(n)` of a totally bounded
/// space: `α(n) < 2^v(n)`.
pub fn cantor_quotient<S>(base: S) -> Result<(BaireQuotient<S>, CantorVariantPlan)>
where
    S: SeparableSpace + Clone + 'static,
{
    let witness = base.clone();
    let plan = cantor_variant_plan(Arc::new(move |n| witness.total_bound(n)))?;
    let p = plan.clone();
    let q = quotient_build(base, Arc::new(move |n| p.block_bound(n)), u64::MAX)?;
    Ok((q, plan))
}

impl<S> BaireQuotient<S>
where
    S: SeparableSpace + Clone + 'static,
{
    pub fn base(&self) -> &S {
        &self.0.base
    }

    pub fn completion(&self) -> CompletionSpace<S> {
        complete(self.0.base.clone())
    }

    pub fn with_check_depth(self, depth: usize) -> Self {
        let inner = &self.0;
        BaireQuotient(Arc::new(QInner {
            base: inner.base.clone(),
            bound: inner.bound.clone(),
            delta: RwLock::new(HashMap::new()),
            stage_bound: inner.stage_bound,
            check_depth: depth,
        }))
    }

    fn s(&self, i: u64) -> S::Point {
        self.0.base.enumerate(i).unwrap_or_else(|| panic!("enumeration has no point at index {i}"))
    }

    pub fn bound(&self, n: usize) -> Option<u64> {
        (self.0.bound)(n)
    }

    /// The midpoint of `d(sᵢ, sⱼ)` at precision `k + 1`, within `2^-(k+1)`.
    pub fn delta(&self, i: u64, j: u64, k: u32) -> Rational {
        let key = (i.min(j), i.max(j), k);
        if let Some(v) = self.0.delta.read().expect("delta lock").get(&key) {
            return v.clone();
        }
        let v = self.0.base.dist(&self.s(i), &self.s(j)).approx(k + 1).mid();
        self.0.delta.write().expect("delta lock").entry(key).or_insert(v).clone()
    }

    fn step_ok(&self, a: &NatSeq, k: usize) -> bool {
        self.delta(a.term(k), a.term(k + 1), k as u32) < pow2(2 - k as i64)
    }

    /// First index `< depth` where `α` leaves `A` or fails the `T` test
    /// `δ(α(k), α(k+1), k) < 2^(2−k)`.
    pub fn t_violation(&self, a: &NatSeq, depth: usize) -> Option<usize> {
        (0..depth).find(|&k| self.bound(k).is_some_and(|b| a.term(k) >= b) || !self.step_ok(a, k))
    }

    /// The retraction of the Baire space onto `A`.
    pub fn retract_a(&self, a: &NatSeq) -> NatSeq {
        let (a, me) = (a.clone(), self.clone());
        NatSeq::from_fn(move |n| match me.bound(n) {
            Some(b) => a.term(n).min(b - 1),
            None => a.term(n),
        })
    }

    /// The retraction of `A` onto `T`: follow `α` up to its first failed
    /// step, then stay put.
    pub fn retract_t(&self, a: &NatSeq) -> NatSeq {
        let (a, me) = (a.clone(), self.clone());
        NatSeq::memoized(move |k| {
            let f = (0..k).find(|&j| !me.step_ok(&a, j)).unwrap_or(k);
            a.term(f)
        })
    }

    /// `q(α)`, with terms `s_{α(n+4)}`. The `T` test is checked on the
    /// first `check_depth` steps only.
    pub fn decode(&self, a: &NatSeq) -> Result<CompletionPoint<S::Point>> {
        if let Some(k) = self.t_violation(a, self.0.check_depth) {
            return Err(Error::Contract(format!("sequence fails the T test at index {k}")));
        }
        let (a, me) = (a.clone(), self.clone());
        Ok(CompletionPoint::from_fn(move |n| me.s(a.term(n as usize + 4))))
    }

    fn search_limit(&self, n: u32) -> u64 {
        self.0.base.total_bound(n + 2).unwrap_or(self.0.stage_bound)
    }

    /// `α(n)`: the least `k` whose distance to `x` has upper bound below
    /// `2^-n` at precision `n + 2`.
    pub fn encode_term(&self, x: &CompletionPoint<S::Point>, n: u32) -> Result<u64> {
        let c = self.completion();
        let limit = self.search_limit(n);
        let target = pow2(-(n as i64));
        for k in 0..limit {
            let Some(s) = self.0.base.enumerate(k) else { continue };
            if c.dist(x, &CompletionPoint::embed(s)).upper(n + 2) < target {
                return Ok(k);
            }
        }
        Err(Error::SearchBound(format!("no enumerated point within 2^-{n} among the first {limit}")))
    }

    pub fn encode_prefix(&self, x: &CompletionPoint<S::Point>, len: usize) -> Result<Vec<u64>> {
        (0..len).map(|n| self.encode_term(x, n as u32)).collect()
    }

    /// A name of `x` in `T`, computed term by term on demand. A term whose
    /// search fails panics; use [`BaireQuotient::encode_prefix`] to get the
    /// error instead.
    pub fn encode(&self, x: &CompletionPoint<S::Point>) -> NatSeq {
        let (x, me) = (x.clone(), self.clone());
        NatSeq::memoized(move |n| me.encode_term(&x, n as u32).unwrap_or_else(|e| panic!("{e}")))
    }
}

/// The shift by four.
pub fn s4(a: &NatSeq) -> NatSeq {
    shift(4, a)
}

/// The retraction of `T` onto `B = {α ∈ T : S₄(α) ∈ A}`.
pub fn retract_b(a: &NatSeq, bound: Bound) -> NatSeq {
    let a = a.clone();
    NatSeq::from_fn(move |n| match (n >= 4).then(|| bound(n - 4)).flatten() {
        Some(b) => a.term(n).min(b - 1),
        None => a.term(n),
    })
}

/// `β` up to index `n`, `γ` afterwards.
pub fn zeta_splice(beta: &NatSeq, gamma: &NatSeq, n: usize) -> NatSeq {
    let (b, g) = (beta.clone(), gamma.clone());
    NatSeq::from_fn(move |k| if k <= n { b.term(k) } else { g.term(k) })
}

// ---------------------------------------------------------------------------
// Cube variants

/// `b(n) = min{k : n < a(k)}` and the block sizes `v` of a strictly
/// increasing `a`.
#[derive(Clone)]
pub struct CubeVariantPlan {
    a: Arc<dyn Fn(usize) -> u64 + Send + Sync>,
}

impl std::fmt::Debug for CubeVariantPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a: Vec<u64> = (0..6).map(|n| self.a(n)).collect();
        write!(f, "CubeVariantPlan {{ a: {a:?}… }}")
    }
}

pub fn cube_plan(a: Arc<dyn Fn(usize) -> u64 + Send + Sync>) -> Result<CubeVariantPlan> {
    if a(0) < 1 {
        return Err(Error::Contract("a(0) must be at least 1".into()));
    }
    if let Some(n) = (0..FACTOR_PROBE).find(|&n| a(n) >= a(n + 1)) {
        return Err(Error::Contract(format!("a is not strictly increasing at index {n}")));
    }
    Ok(CubeVariantPlan { a })
}

impl CubeVariantPlan {
    pub fn a(&self, n: usize) -> u64 {
        (self.a)(n)
    }

    pub fn b(&self, n: u64) -> u32 {
        (0..).find(|&k| n < self.a(k as usize)).expect("a is unbounded")
    }

    pub fn v(&self, n: usize) -> u64 {
        if n == 0 {
            self.a(0)
        } else {
            self.a(n) - self.a(n - 1)
        }
    }
}

/// The binary logarithm rounded up, at least 1.
pub fn bl(n: u64) -> u32 {
    (1..64).find(|&k| n <= 1u64 << k).unwrap_or(64)
}

/// The Cantor variant for a totally bounded space with witness `a`:
/// `v(n) = bl(max_{k ≤ n+4} a(k))` bits in block `n`.
#[derive(Clone)]
pub struct CantorVariantPlan {
    v: Arc<dyn Fn(usize) -> u32 + Send + Sync>,
    plan: CubeVariantPlan,
}

pub fn cantor_variant_plan(tb: Arc<dyn Fn(u32) -> Option<u64> + Send + Sync>) -> Result<CantorVariantPlan> {
    if tb(0).is_none() {
        return Err(Error::Contract("the Cantor variant needs a total-boundedness witness".into()));
    }
    let v = move |n: usize| {
        let top = (0..=n as u32 + 4).map(|k| tb(k).expect("witness present")).max().expect("nonempty");
        bl(top)
    };
    let v: Arc<dyn Fn(usize) -> u32 + Send + Sync> = Arc::new(v);
    let vv = v.clone();
    let plan = CubeVariantPlan { a: Arc::new(move |n| (0..=n).map(|k| vv(k) as u64).sum()) };
    Ok(CantorVariantPlan { v, plan })
}

impl CantorVariantPlan {
    pub fn v(&self, n: usize) -> u32 {
        (self.v)(n)
    }

    /// `a′(n) = 2^v(n)`, or `None` past `u64`.
    pub fn block_bound(&self, n: usize) -> Option<u64> {
        1u64.checked_shl(self.v(n)).filter(|_| self.v(n) < 64)
    }

    /// The coordinate plan of `∏ 2^v(n)` as a sequence of bits.
    pub fn plan(&self) -> &CubeVariantPlan {
        &self.plan
    }

    /// The bits of `α(n)`, low bit first, block by block.
    pub fn to_bits(&self, a: &NatSeq) -> NatSeq {
        let (a, me) = (a.clone(), self.clone());
        NatSeq::from_fn(move |i| {
            let n = me.plan.b(i as u64) as usize;
            let start = if n == 0 { 0 } else { me.plan.a(n - 1) };
            (a.term(n) >> (i as u64 - start)) & 1
        })
    }
}

// ---------------------------------------------------------------------------
// Hilbert cube embedding

/// The Hilbert cube with `d(α, β) = sup 2^-b(n) |αₙ − βₙ|`.
#[derive(Clone, Debug)]
pub struct HilbertVariant {
    plan: CubeVariantPlan,
}

impl HilbertVariant {
    pub fn plan(&self) -> &CubeVariantPlan {
        &self.plan
    }
}

impl SeparableSpace for HilbertVariant {
    type Point = Seq<Real>;

    fn dist(&self, x: &Seq<Real>, y: &Seq<Real>) -> Real {
        let (plan, x, y) = (self.plan.clone(), x.clone(), y.clone());
        Real::from_oracle(move |p| {
            // Coordinates from a(p+2) on carry weight at most 2^-(p+3).
            let mut iv = Interval::point(Rational::zero());
            for n in 0..plan.a(p as usize + 2) {
                let w = pow2(-(plan.b(n) as i64));
                let t = x.at(n as usize).sub(&y.at(n as usize)).abs().approx(p + 2);
                iv = Interval { lo: iv.lo.max(&t.lo * &w), hi: iv.hi.max(&t.hi * &w) };
            }
            let hi = iv.hi.max(pow2(-(p as i64) - 3));
            settle(Interval { lo: iv.lo, hi }, p)
        })
    }

    fn enumerate(&self, k: u64) -> Option<Seq<Real>> {
        hilbert_cube().enumerate(k)
    }

    fn distance_bound(&self) -> Option<Rational> {
        Some(Rational::one())
    }
}

/// `x ↦ (C·d(x, sₙ))ₙ` into the Hilbert-cube variant of the space's
/// witness, with `C = 1/max(diam, 1)`.
pub struct HilbertEmbedding<S: SeparableSpace> {
    space: S,
    c: Real,
    cube: HilbertVariant,
}

impl<S: SeparableSpace + Clone> Clone for HilbertEmbedding<S> {
    fn clone(&self) -> Self {
        HilbertEmbedding { space: self.space.clone(), c: self.c.clone(), cube: self.cube.clone() }
    }
}

/// Replaces a witness by `n ↦ max_{k ≤ n} a(k) + n`, which is strictly
/// increasing and still a witness.
pub fn repaired_witness<S: SeparableSpace + Clone + 'static>(space: &S) -> Arc<dyn Fn(usize) -> u64 + Send + Sync> {
    let s = space.clone();
    Arc::new(move |n| (0..=n as u32).map(|k| s.total_bound(k).expect("witness present")).max().expect("k = 0") + n as u64)
}

pub fn hilbert_embed<S>(space: S) -> Result<HilbertEmbedding<S>>
where
    S: SeparableSpace + Clone + 'static,
{
    if space.enumerate(0).is_none() {
        return Err(Error::Contract("the embedding needs a point at enumeration index 0".into()));
    }
    if space.total_bound(0).is_none() {
        return Err(Error::Contract("the embedding needs a total-boundedness witness".into()));
    }
    let s = space.clone();
    let raw: Arc<dyn Fn(usize) -> u64 + Send + Sync> = Arc::new(move |n| s.total_bound(n as u32).expect("witness"));
    let plan = cube_plan(raw).or_else(|_| cube_plan(repaired_witness(&space)))?;
    let c = match space.distance_bound() {
        Some(b) if b <= Rational::one() => Real::one(),
        _ => diameter(&space)?.sup(&Real::one()).recip(Apartness { n: 0 })?,
    };
    Ok(HilbertEmbedding { space, c, cube: HilbertVariant { plan } })
}

impl<S> HilbertEmbedding<S>
where
    S: SeparableSpace + Clone + 'static,
    S::Point: Clone + Send + Sync + 'static,
{
    pub fn c(&self) -> &Real {
        &self.c
    }

    pub fn cube(&self) -> &HilbertVariant {
        &self.cube
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn apply(&self, x: &S::Point) -> Seq<Real> {
        let (space, c, x) = (self.space.clone(), self.c.clone(), x.clone());
        Seq::new(move |n| {
            let s = space.enumerate(n as u64).unwrap_or_else(|| panic!("enumeration has no point at index {n}"));
            c.mul(&space.dist(&x, &s))
        })
    }

    pub fn map(&self) -> MetricMap<S::Point, Seq<Real>> {
        let me = self.clone();
        MetricMap::new(MapClass::Nonexpansive, move |x| me.apply(x))
    }

    /// `d(e(X), α)`: within `2^-m` of the minimum over `e(sᵢ)`, `i < a(m)`.
    pub fn locate(&self, alpha: &Seq<Real>) -> Real {
        let (me, alpha) = (self.clone(), alpha.clone());
        Real::from_oracle(move |p| {
            let m = p + 2;
            let mut best: Option<Interval> = None;
            for i in 0..me.cube.plan.a(m as usize) {
                let s = me.space.enumerate(i).expect("enumeration into the space");
                let iv = me.cube.dist(&me.apply(&s), &alpha).approx(m + 1);
                best = Some(match best {
                    None => iv,
                    Some(b) => Interval { lo: b.lo.min(iv.lo), hi: b.hi.min(iv.hi) },
                });
            }
            let b = best.expect("a(m) ≥ 1");
            Interval { lo: b.lo - pow2(-(m as i64)), hi: b.hi }.clamp_nonneg()
        })
    }
}
