//! The Urysohn universal space.
//!
//! Points of the rational core are finite tuples `a = (aᵢ, αᵢ)`: "a point at
//! distance `αᵢ` from `aᵢ`". The distance
//!
//! ```text
//! d(a, b) = sup({|d(aᵢ, b) − αᵢ|} ∪ {|d(a, bⱼ) − βⱼ|})
//! ```
//!
//! is only a protometric on all tuples, but a pseudometric on the
//! permissible ones. The Urysohn space is the completion of the permissible
//! tuples modulo zero distance.
//!
//! Tuples are hash-consed: structurally equal tuples share one id, and the
//! distance table is keyed by id pairs. Both tables only grow.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::completion::{complete, CompletionPoint, CompletionSpace};
use crate::error::{Error, Result};
use crate::metric::{MapClass, MetricMap, SeparableSpace};
use crate::numerics::{parse_rational, pow2, Rational};
use crate::reals::{approx_compare, Comparison, Real};

// ---------------------------------------------------------------------------
// Tuples

struct Node {
    entries: Vec<(Tuple, Rational)>,
    age: u32,
    id: u64,
}

/// An element of `W`, the set of all tuples.
#[derive(Clone)]
pub struct Tuple(Arc<Node>);

type Key = Vec<(u64, Rational)>;

fn interner() -> &'static Mutex<HashMap<Key, Tuple>> {
    static TABLE: OnceLock<Mutex<HashMap<Key, Tuple>>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

fn distance_memo() -> &'static RwLock<HashMap<(u64, u64), Rational>> {
    static TABLE: OnceLock<RwLock<HashMap<(u64, u64), Rational>>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

fn permissible_memo() -> &'static RwLock<HashMap<u64, bool>> {
    static TABLE: OnceLock<RwLock<HashMap<u64, bool>>> = OnceLock::new();
    TABLE.get_or_init(Default::default)
}

/// Number of cached distances.
pub fn memo_size() -> usize {
    distance_memo().read().expect("memo lock").len()
}

/// Drops all cached distances. Must not run concurrently with a distance
/// computation that relies on the cache for speed; results are unaffected.
pub fn clear_memo() {
    distance_memo().write().expect("memo lock").clear();
}

impl Tuple {
    fn make(entries: Vec<(Tuple, Rational)>) -> Tuple {
        let key: Key = entries.iter().map(|(t, q)| (t.id(), q.clone())).collect();
        let mut table = interner().lock().expect("interner lock");
        if let Some(t) = table.get(&key) {
            return t.clone();
        }
        let age = entries.iter().map(|(t, _)| t.age() + 1).max().unwrap_or(0);
        let t = Tuple(Arc::new(Node { entries, age, id: table.len() as u64 }));
        table.insert(key, t.clone());
        t
    }

    /// Builds `(aᵢ, αᵢ)`; every `αᵢ` must be nonnegative.
    pub fn new(entries: Vec<(Tuple, Rational)>) -> Result<Tuple> {
        if let Some((i, (_, q))) = entries.iter().enumerate().find(|(_, (_, q))| q.is_negative()) {
            return Err(Error::Domain(format!("entry {i} has negative distance {q}")));
        }
        Ok(Tuple::make(entries))
    }

    pub fn empty() -> Tuple {
        Tuple::make(Vec::new())
    }

    pub fn entries(&self) -> &[(Tuple, Rational)] {
        &self.0.entries
    }

    pub fn age(&self) -> u32 {
        self.0.age
    }

    pub fn len(&self) -> usize {
        self.0.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.entries.is_empty()
    }

    /// Structural identity: equal ids iff equal tuples.
    pub fn id(&self) -> u64 {
        self.0.id
    }

    /// The flat sequence `(age, lgt, |[a₀]|, …, [a₀], α₀, …)`.
    pub fn encode(&self) -> Vec<Rational> {
        let subs: Vec<Vec<Rational>> = self.entries().iter().map(|(t, _)| t.encode()).collect();
        let mut out = vec![Rational::from_integer(self.age().into()), Rational::from_integer(self.len().into())];
        out.extend(subs.iter().map(|s| Rational::from_integer(s.len().into())));
        for (s, (_, q)) in subs.into_iter().zip(self.entries()) {
            out.extend(s);
            out.push(q.clone());
        }
        out
    }

    /// Inverts [`Tuple::encode`]. The stated age only has to exceed the
    /// stated ages of the predecessors.
    pub fn decode(code: &[Rational]) -> Result<Tuple> {
        let bad = |why: &str| Error::Parse(format!("invalid tuple encoding: {why}"));
        let nat = |q: &Rational| -> Option<u64> { q.is_integer().then(|| q.to_integer().to_u64()).flatten() };
        if code.len() < 2 {
            return Err(bad("fewer than two terms"));
        }
        let age = nat(&code[0]).ok_or_else(|| bad("age is not a natural number"))?;
        let len = nat(&code[1]).ok_or_else(|| bad("length is not a natural number"))? as usize;
        if code.len() < 2 + len {
            return Err(bad("too short for its length table"));
        }
        let sizes =
            code[2..2 + len].iter().map(|q| nat(q).map(|v| v as usize)).collect::<Option<Vec<_>>>().ok_or_else(|| {
                bad("predecessor sizes are not natural numbers")
            })?;
        let total = sizes.iter().try_fold(2 + len, |acc, s| acc.checked_add(s + 1));
        if total != Some(code.len()) {
            return Err(bad("length does not match the size table"));
        }
        let mut pos = 2 + len;
        let mut entries = Vec::with_capacity(len);
        for s in sizes {
            let sub = &code[pos..pos + s];
            match sub.first().and_then(nat) {
                Some(a) if a < age => {}
                _ => return Err(bad("predecessor age not below the stated age")),
            }
            let alpha = code[pos + s].clone();
            if alpha.is_negative() {
                return Err(bad("negative distance"));
            }
            entries.push((Tuple::decode(sub)?, alpha));
            pos += s + 1;
        }
        Ok(Tuple::make(entries))
    }

    /// Parses `()` or `(t₁:q₁, t₂:q₂, …)`.
    pub fn parse(text: &str) -> Result<Tuple> {
        let mut p = TupleParser { s: text.as_bytes(), pos: 0, text };
        let t = p.tuple()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

impl PartialEq for Tuple {
    fn eq(&self, other: &Tuple) -> bool {
        self.id() == other.id()
    }
}

impl Eq for Tuple {}

impl std::hash::Hash for Tuple {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.id().hash(h)
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (t, q)) in self.entries().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}:{q}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn format_encoding(code: &[Rational]) -> String {
    let parts: Vec<String> = code.iter().map(Rational::to_string).collect();
    format!("[{}]", parts.join(", "))
}

struct TupleParser<'a> {
    s: &'a [u8],
    pos: usize,
    text: &'a str,
}

impl TupleParser<'_> {
    fn err(&self, why: &str) -> Error {
        Error::Parse(format!("{why} at byte {} of `{}`", self.pos, self.text))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.s.get(self.pos) != Some(&c) {
            return Err(self.err(&format!("expected `{}`", c as char)));
        }
        self.pos += 1;
        Ok(())
    }

    fn tuple(&mut self) -> Result<Tuple> {
        self.expect(b'(')?;
        let mut entries = Vec::new();
        self.skip_ws();
        if self.s.get(self.pos) == Some(&b')') {
            self.pos += 1;
            return Ok(Tuple::empty());
        }
        loop {
            let t = self.tuple()?;
            self.expect(b':')?;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && !matches!(self.s[self.pos], b',' | b')') {
                self.pos += 1;
            }
            let q = parse_rational(self.text[start..self.pos].trim())?;
            if q.is_negative() {
                return Err(self.err("negative distance"));
            }
            entries.push((t, q));
            self.skip_ws();
            match self.s.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(Tuple::make(entries));
                }
                _ => return Err(self.err("expected `,` or `)`")),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Distance and permissibility

/// The recursive tuple distance, cached by id pair.
pub fn w_distance(a: &Tuple, b: &Tuple) -> Rational {
    let key = if a.id() <= b.id() { (a.id(), b.id()) } else { (b.id(), a.id()) };
    if let Some(v) = distance_memo().read().expect("memo lock").get(&key) {
        return v.clone();
    }
    let mut best = Rational::zero();
    for (ai, alpha) in a.entries() {
        best = best.max((w_distance(ai, b) - alpha).abs());
    }
    for (bj, beta) in b.entries() {
        best = best.max((w_distance(a, bj) - beta).abs());
    }
    distance_memo().write().expect("memo lock").entry(key).or_insert(best).clone()
}

/// [`w_distance`] without the cache. Exponential in the ages.
pub fn w_distance_uncached(a: &Tuple, b: &Tuple) -> Rational {
    let mut best = Rational::zero();
    for (ai, alpha) in a.entries() {
        best = best.max((w_distance_uncached(ai, b) - alpha).abs());
    }
    for (bj, beta) in b.entries() {
        best = best.max((w_distance_uncached(a, bj) - beta).abs());
    }
    best
}

/// First pair `(i, j)` with `αᵢ − αⱼ ≤ d(aᵢ, aⱼ) ≤ αᵢ + αⱼ` failing.
fn first_violation(entries: &[(Tuple, Rational)]) -> Option<(usize, usize)> {
    for (i, (ai, alpha)) in entries.iter().enumerate() {
        for (j, (aj, beta)) in entries.iter().enumerate().skip(i + 1) {
            let d = w_distance(ai, aj);
            if (alpha - beta).abs() > d || d > alpha + beta {
                return Some((i, j));
            }
        }
    }
    None
}

pub fn is_permissible(a: &Tuple) -> bool {
    if let Some(&v) = permissible_memo().read().expect("memo lock").get(&a.id()) {
        return v;
    }
    let ok = a.entries().iter().all(|(t, _)| is_permissible(t)) && first_violation(a.entries()).is_none();
    permissible_memo().write().expect("memo lock").insert(a.id(), ok);
    ok
}

// ---------------------------------------------------------------------------
// Points of the rational core

/// A permissible tuple, standing for its zero-distance class.
#[derive(Clone)]
pub struct UPoint(Tuple);

impl UPoint {
    pub fn new(rep: Tuple) -> Result<UPoint> {
        if !is_permissible(&rep) {
            return Err(Error::Contract(format!("tuple {rep} is not permissible")));
        }
        Ok(UPoint(rep))
    }

    pub fn origin() -> UPoint {
        UPoint(Tuple::empty())
    }

    pub fn rep(&self) -> &Tuple {
        &self.0
    }
}

impl PartialEq for UPoint {
    fn eq(&self, other: &UPoint) -> bool {
        w_distance(&self.0, &other.0).is_zero()
    }
}

impl fmt::Debug for UPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0)
    }
}

/// The extension operator on the rational core: the class of `(aᵢ, χᵢ)`,
/// at distance exactly `χᵢ` from each `aᵢ`.
pub fn extend_core(targets: &[(UPoint, Rational)]) -> Result<UPoint> {
    let entries: Vec<(Tuple, Rational)> = targets.iter().map(|(p, q)| (p.0.clone(), q.clone())).collect();
    let t = Tuple::new(entries)?;
    if let Some((i, j)) = first_violation(t.entries()) {
        return Err(Error::Contract(format!("target distances are not permissible at (i, j) = ({i}, {j})")));
    }
    Ok(UPoint(t))
}

// ---------------------------------------------------------------------------
// Enumeration

/// `{p/q : 0 ≤ p ≤ k, 1 ≤ q ≤ k}` in increasing order.
fn stage_values(k: u32) -> Vec<Rational> {
    let mut set = BTreeSet::new();
    for q in 1..=k {
        for p in 0..=k {
            set.insert(Rational::new(BigInt::from(p), BigInt::from(q)));
        }
    }
    set.into_iter().collect()
}

type TupleIter = Box<dyn Iterator<Item = Tuple> + Send>;

/// The permissible tuples of stage `k` built over the previous stage:
/// `()` and every tuple of length `≤ k` with predecessors in `prev` and
/// distances in [`stage_values`].
fn stage_iter(prev: Vec<Tuple>, k: u32) -> TupleIter {
    let values = stage_values(k);
    let slots: Arc<Vec<(Tuple, Rational)>> =
        Arc::new(prev.iter().flat_map(|t| values.iter().map(move |v| (t.clone(), v.clone()))).collect());
    let rest = (1..=k).flat_map(move |len| {
        let slots = slots.clone();
        let base = slots.len() as u128;
        let count = base.checked_pow(len).unwrap_or(u128::MAX);
        (0..count).map(move |mut code| {
            let mut entries = Vec::with_capacity(len as usize);
            for _ in 0..len {
                entries.push(slots[(code % base) as usize].clone());
                code /= base;
            }
            Tuple::make(entries)
        })
    });
    Box::new(std::iter::once(Tuple::empty()).chain(rest.filter(is_permissible)))
}

/// All permissible tuples of the given stage. Stage 0 is `[()]`; stage `k`
/// has predecessors from stage `k − 1` and distances `p/q` with
/// `p, q ≤ k`. Stages are cumulative. From stage 3 on the lists are very
/// large; [`UrysohnCore::enumerate`] walks them lazily instead.
pub fn enumerate_core(stage: u32) -> Vec<UPoint> {
    let mut cur = vec![Tuple::empty()];
    for k in 1..=stage {
        cur = stage_iter(cur, k).collect();
    }
    cur.into_iter().map(UPoint).collect()
}

struct CoreEnum {
    emitted: Vec<Tuple>,
    seen: HashSet<u64>,
    stage: u32,
    current: Vec<Tuple>,
    iter: TupleIter,
}

fn core_enum() -> &'static Mutex<CoreEnum> {
    static STATE: OnceLock<Mutex<CoreEnum>> = OnceLock::new();
    STATE.get_or_init(|| {
        Mutex::new(CoreEnum {
            emitted: Vec::new(),
            seen: HashSet::new(),
            stage: 0,
            current: Vec::new(),
            iter: Box::new(std::iter::once(Tuple::empty())),
        })
    })
}

/// The `k`-th core point: the stages flattened, skipping tuples already
/// listed by an earlier stage.
fn core_point(k: u64) -> Tuple {
    let mut e = core_enum().lock().expect("enumeration lock");
    while e.emitted.len() as u64 <= k {
        match e.iter.next() {
            Some(t) => {
                e.current.push(t.clone());
                if e.seen.insert(t.id()) {
                    e.emitted.push(t);
                }
            }
            None => {
                let prev = std::mem::take(&mut e.current);
                e.stage += 1;
                e.iter = stage_iter(prev, e.stage);
            }
        }
    }
    e.emitted[k as usize].clone()
}

/// The permissible tuples with the tuple distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct UrysohnCore;

impl SeparableSpace for UrysohnCore {
    type Point = UPoint;

    fn dist(&self, x: &UPoint, y: &UPoint) -> Real {
        Real::from_rational(w_distance(&x.0, &y.0))
    }

    fn enumerate(&self, k: u64) -> Option<UPoint> {
        Some(UPoint(core_point(k)))
    }
}

pub type Urysohn = CompletionSpace<UrysohnCore>;
pub type UrysohnPoint = CompletionPoint<UPoint>;

pub fn urysohn_space() -> Urysohn {
    complete(UrysohnCore)
}

// ---------------------------------------------------------------------------
// Real extension

/// Smallest `p` with `2^-p ≤ q`, for `q > 0`.
fn precision_for(q: &Rational) -> u32 {
    let mut p = 0;
    while pow2(-(p as i64)) > *q {
        p += 1;
    }
    p
}

/// A permissible tuple `(aᵢ, αᵢ)` with `d(xᵢ, [aᵢ]) ≤ eps` and
/// `|ωᵢ − αᵢ| ≤ eps`.
///
/// With `λ = eps/(4n)`: `αᵢ` is the upper end of `ωᵢ` at resolution `λ/4`
/// plus `7λ/2`, `a′ᵢ` is a term of `xᵢ` within `λ`, and
///
/// ```text
/// a_k = (aᵢ, d(a′_k, a′ᵢ) + 3λ)_{i<k} :: (a′_k, sup_{j<k} |d(a′_k, a′ⱼ) + 3λ − d(a′_k, aⱼ)|)
/// ```
///
/// Targets whose permissibility fails by more than `eps/8` are rejected.
pub fn approx_tuple(targets: &[(UrysohnPoint, Real)], eps: &Rational) -> Result<Tuple> {
    if !eps.is_positive() {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let n = targets.len();
    if n == 0 {
        return Ok(Tuple::empty());
    }
    let u = urysohn_space();
    let lambda = eps / Rational::from_integer(BigInt::from(4 * n));

    let p = precision_for(&(eps / Rational::from_integer(32.into())));
    let margin = eps / Rational::from_integer(8.into());
    let omegas: Vec<_> = targets.iter().map(|(_, w)| w.approx(p)).collect();
    for (i, w) in omegas.iter().enumerate() {
        if w.hi < -margin.clone() {
            return Err(Error::Domain(format!("target distance {i} is negative")));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = u.dist(&targets[i].0, &targets[j].0).approx(p);
            let (wi, wj) = (&omegas[i], &omegas[j]);
            let over = [&wi.lo - &wj.hi - &d.hi, &wj.lo - &wi.hi - &d.hi, &d.lo - &wi.hi - &wj.hi];
            if over.iter().any(|v| *v > margin) {
                return Err(Error::Contract(format!("target distances are not permissible at (i, j) = ({i}, {j})")));
            }
        }
    }

    let pa = precision_for(&(&lambda / Rational::from_integer(4.into())));
    let shift = &lambda * Rational::new(7.into(), 2.into());
    let alphas: Vec<Rational> =
        targets.iter().map(|(_, w)| (w.upper(pa) + &shift).max(Rational::zero())).collect();
    let m = precision_for(&lambda);
    let near: Vec<Tuple> = targets.iter().map(|(x, _)| x.term(m).0).collect();

    let three = &lambda * Rational::from_integer(3.into());
    let dd = |k: usize, i: usize| w_distance(&near[k], &near[i]) + if k == i { Rational::zero() } else { three.clone() };
    let mut built: Vec<Tuple> = Vec::with_capacity(n);
    for k in 0..n {
        let mut entries: Vec<(Tuple, Rational)> = (0..k).map(|i| (built[i].clone(), dd(k, i))).collect();
        let last = (0..k).map(|j| (dd(k, j) - w_distance(&near[k], &built[j])).abs()).fold(Rational::zero(), Rational::max);
        entries.push((near[k].clone(), last));
        built.push(Tuple::make(entries));
    }
    let out = Tuple::make(built.into_iter().zip(alphas).collect());
    if !is_permissible(&out) {
        return Err(Error::Contract("targets are not permissible within the approximation margin".into()));
    }
    Ok(out)
}

/// The extension operator on the whole space: term `k` is
/// `approx_tuple(targets, 2^-(k+3))`. A contract failure that only shows at
/// a deep term panics when that term is demanded.
pub fn extend_real(targets: Vec<(UrysohnPoint, Real)>) -> Result<UrysohnPoint> {
    let first = approx_tuple(&targets, &pow2(-3))?;
    Ok(CompletionPoint::from_fn(move |k| {
        if k == 0 {
            return UPoint(first.clone());
        }
        match approx_tuple(&targets, &pow2(-(k as i64) - 3)) {
            Ok(t) => UPoint(t),
            Err(e) => panic!("extension targets failed at term {k}: {e}"),
        }
    }))
}

/// Exact rational targets over core points go through [`extend_core`];
/// anything else through [`extend_real`].
pub fn extend(targets: Vec<(UrysohnPoint, Real)>) -> Result<UrysohnPoint> {
    let exact: Option<Vec<(UPoint, Rational)>> = targets
        .iter()
        .map(|(p, w)| Some((p.as_base()?.clone(), w.as_rational()?.clone())))
        .collect();
    match exact {
        Some(t) => extend_core(&t).map(CompletionPoint::embed),
        None => extend_real(targets),
    }
}

// ---------------------------------------------------------------------------
// Embeddings

fn is_exact_zero(r: &Real) -> bool {
    r.as_rational().is_some_and(Zero::is_zero)
}

enum Mode<P> {
    Isometry(Vec<(P, UrysohnPoint)>),
    Located,
}

struct Inner<X: SeparableSpace> {
    space: X,
    mode: Mode<X::Point>,
    images: Mutex<Vec<Option<UrysohnPoint>>>,
}

/// An isometry from `X` into the Urysohn space, built one enumerated point
/// at a time with the extension operator.
pub struct UrysohnEmbedding<X: SeparableSpace>(Arc<Inner<X>>);

impl<X: SeparableSpace> Clone for UrysohnEmbedding<X> {
    fn clone(&self) -> Self {
        UrysohnEmbedding(self.0.clone())
    }
}

/// Scan depth for an exact zero-distance match in [`UrysohnEmbedding::apply`].
const EXACT_SCAN: u64 = 256;

impl<X: SeparableSpace + 'static> UrysohnEmbedding<X>
where
    X::Point: Clone + Send + Sync + 'static,
{
    pub fn space(&self) -> &X {
        &self.0.space
    }

    /// `f(sₙ)`, or `None` when the enumeration skips `n`.
    pub fn image(&self, n: u64) -> Result<Option<UrysohnPoint>> {
        let inner = &*self.0;
        let mut images = inner.images.lock().expect("embedding lock");
        while images.len() as u64 <= n {
            let k = images.len() as u64;
            let next = match inner.space.enumerate(k) {
                None if matches!(inner.mode, Mode::Located) => {
                    return Err(Error::Contract(format!("enumeration has no point at index {k}")));
                }
                None => None,
                Some(s) => Some(inner.step(&s, &images)?),
            };
            images.push(next);
        }
        Ok(images[n as usize].clone())
    }

    /// `f(x)` for any point: an enumerated point at exact distance zero if
    /// one shows early, otherwise the limit of images of enumerated points
    /// converging to `x`.
    pub fn apply(&self, x: &X::Point) -> UrysohnPoint {
        let space = &self.0.space;
        for n in 0..EXACT_SCAN {
            if let Some(s) = space.enumerate(n) {
                if is_exact_zero(&space.dist(x, &s)) {
                    if let Ok(Some(p)) = self.image(n) {
                        return p;
                    }
                }
            }
        }
        let (me, x) = (self.clone(), x.clone());
        CompletionPoint::from_fn(move |k| {
            let bound = pow2(-(k as i64) - 2);
            for n in 0.. {
                let Some(s) = me.0.space.enumerate(n) else { continue };
                if me.0.space.dist(&x, &s).upper(k + 3) <= bound {
                    let img = me.image(n).unwrap_or_else(|e| panic!("{e}")).expect("enumerated point");
                    return img.term(k + 2);
                }
            }
            unreachable!()
        })
    }

    pub fn map(&self) -> MetricMap<X::Point, UrysohnPoint> {
        let me = self.clone();
        MetricMap::new(MapClass::Isometry, move |x| me.apply(x))
    }

    /// For a located embedding, `inf_{k ≤ i} d(f(s_k), uᵢ)`, which is the
    /// distance from the image to the core point `uᵢ`.
    pub fn located_distance(&self, i: u64) -> Result<Real> {
        let u = urysohn_space();
        let ui = u.enumerate(i).expect("core enumeration is total");
        let mut best: Option<Real> = None;
        for k in 0..=i {
            let fk = self.image(k)?.expect("located embeddings have no gaps");
            let d = u.dist(&fk, &ui);
            best = Some(match best {
                None => d,
                Some(b) => b.inf(&d),
            });
        }
        Ok(best.expect("k = 0 is always present"))
    }
}

impl<X: SeparableSpace> Inner<X>
where
    X::Point: Clone,
{
    fn step(&self, s: &X::Point, images: &[Option<UrysohnPoint>]) -> Result<UrysohnPoint> {
        let x = &self.space;
        let previous: Vec<(UrysohnPoint, Real)> = images
            .iter()
            .enumerate()
            .filter_map(|(j, img)| {
                let img = img.as_ref()?;
                let sj = x.enumerate(j as u64)?;
                Some((img.clone(), x.dist(s, &sj)))
            })
            .collect();
        let mut targets: Vec<(UrysohnPoint, Real)> = match &self.mode {
            Mode::Isometry(pinned) => pinned.iter().map(|(y, e)| (e.clone(), x.dist(s, y))).collect(),
            Mode::Located => Vec::new(),
        };
        targets.extend(previous.iter().cloned());
        if let Some((p, _)) = targets.iter().find(|(_, d)| is_exact_zero(d)) {
            return Ok(p.clone());
        }
        if let Mode::Located = self.mode {
            let u = urysohn_space();
            let n = previous.len();
            let to_u: Vec<Vec<Real>> = (0..n)
                .map(|i| {
                    let ui = u.enumerate(i as u64).expect("core enumeration is total");
                    previous.iter().map(|(fk, _)| u.dist(fk, &ui)).collect()
                })
                .collect();
            for i in 0..n {
                let b = (0..=i).map(|k| previous[k].1.add(&to_u[i][k])).reduce(|a, c| a.inf(&c)).expect("k = 0");
                let sigma = (0..n).map(|k| previous[k].1.sub(&to_u[i][k]).abs()).fold(b, |a, c| a.sup(&c));
                targets.push((u.enumerate(i as u64).expect("core enumeration is total"), sigma));
            }
        }
        extend(targets)
    }
}

/// Extends the isometry `pinned` (points of `X` with chosen images) to all
/// of `X`. The pinned pairs are checked exactly where distances are
/// rational and to `2^-20` otherwise.
pub fn extend_finite_isometry<X>(space: X, pinned: Vec<(X::Point, UrysohnPoint)>) -> Result<UrysohnEmbedding<X>>
where
    X: SeparableSpace + 'static,
    X::Point: Clone + Send + Sync + 'static,
{
    let u = urysohn_space();
    for i in 0..pinned.len() {
        for j in i + 1..pinned.len() {
            let dx = space.dist(&pinned[i].0, &pinned[j].0);
            let du = u.dist(&pinned[i].1, &pinned[j].1);
            let ok = match (dx.as_rational(), du.as_rational()) {
                (Some(a), Some(b)) => a == b,
                _ => approx_compare(&dx, &du, 20) == Comparison::Within,
            };
            if !ok {
                return Err(Error::Contract(format!("pinned points {i} and {j} are not mapped isometrically")));
            }
        }
    }
    Ok(UrysohnEmbedding(Arc::new(Inner { space, mode: Mode::Isometry(pinned), images: Mutex::new(Vec::new()) })))
}

/// An isometric embedding with located image, together with its distance
/// function `l(i) = d(f(X), uᵢ)` on the core enumeration.
pub fn embed_located<X>(space: X) -> Result<UrysohnEmbedding<X>>
where
    X: SeparableSpace + 'static,
    X::Point: Clone + Send + Sync + 'static,
{
    if space.enumerate(0).is_none() {
        return Err(Error::Contract("embedding needs a point at enumeration index 0".into()));
    }
    let e = UrysohnEmbedding(Arc::new(Inner { space, mode: Mode::Located, images: Mutex::new(Vec::new()) }));
    e.image(0)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{discrete_space, FiniteRationalSpace};
    use crate::numerics::{int, rat};

    fn t(s: &str) -> Tuple {
        Tuple::parse(s).unwrap()
    }

    #[test]
    fn distance_examples() {
        let e = Tuple::empty();
        assert_eq!(w_distance(&e, &e), int(0));
        assert_eq!(w_distance(&t("(():1)"), &t("(():3)")), int(2));
        let a = t("(():1, ():2)");
        assert_eq!(w_distance(&a, &a), int(1));
        assert_eq!(w_distance_uncached(&a, &a), int(1));
    }

    #[test]
    fn permissibility_examples() {
        assert!(is_permissible(&Tuple::empty()));
        for q in ["0", "1/3", "7"] {
            assert!(is_permissible(&t(&format!("(():{q})"))));
        }
        assert!(!is_permissible(&t("(():1, ():2)")));
        assert!(!is_permissible(&t("((():1, ():2):0)")));
    }

    #[test]
    fn syntax_and_encoding() {
        let a = t("( (():1/2) : 3 , () : 5/2 )");
        assert_eq!(a.to_string(), "((():1/2):3, ():5/2)");
        assert_eq!(a.age(), 2);
        assert_eq!(a.len(), 2);
        assert_eq!(format_encoding(&Tuple::empty().encode()), "[0, 0]");
        assert_eq!(format_encoding(&t("(():5/2)").encode()), "[1, 1, 2, 0, 0, 5/2]");
        assert_eq!(Tuple::decode(&a.encode()).unwrap(), a);
        for bad in ["", "(", "(():)", "(():-1)", "(():1", "()x", "(1:1)"] {
            assert!(Tuple::parse(bad).is_err(), "{bad}");
        }
        // The footnote variant accepts overstated ages.
        let loose: Vec<Rational> = [5, 1, 2, 0, 0, 1].iter().map(|&v| int(v)).collect();
        assert_eq!(Tuple::decode(&loose).unwrap(), t("(():1)"));
        for bad in [vec![0, 1, 2, 0, 0, 1], vec![1, 1, 3, 0, 0, 1], vec![1], vec![1, 1, 2, 0, 0, -1]] {
            let code: Vec<Rational> = bad.iter().map(|&v| int(v)).collect();
            assert!(Tuple::decode(&code).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn hash_consing() {
        assert_eq!(t("(():1)").id(), t("(() : 1)").id());
        assert_ne!(t("(():1)").id(), t("(():2)").id());
        assert_eq!(t("(():2/4)"), t("(():1/2)"));
    }

    #[test]
    fn extend_core_examples() {
        let o = UPoint::origin();
        let p = extend_core(&[(o.clone(), rat(5, 2))]).unwrap();
        assert_eq!(w_distance(p.rep(), o.rep()), rat(5, 2));
        let q = UPoint::new(t("(():1)")).unwrap();
        let r = extend_core(&[(o.clone(), int(1)), (q.clone(), int(2))]).unwrap();
        assert_eq!(w_distance(r.rep(), o.rep()), int(1));
        assert_eq!(w_distance(r.rep(), q.rep()), int(2));
        assert_eq!(extend_core(&[]).unwrap().rep(), &Tuple::empty());
        let err = extend_core(&[(o.clone(), int(1)), (o, int(3))]).unwrap_err();
        assert!(matches!(err, Error::Contract(ref m) if m.contains("(0, 1)")), "{err}");
    }

    #[test]
    fn enumeration_stages() {
        assert_eq!(enumerate_core(0).len(), 1);
        let s1: Vec<Tuple> = enumerate_core(1).into_iter().map(|p| p.0).collect();
        assert!(s1.contains(&t("(():0)")) && s1.contains(&t("(():1)")));
        let s2 = enumerate_core(2);
        assert!(s2.iter().all(|p| is_permissible(p.rep())));
        assert!(s1.iter().all(|a| s2.iter().any(|p| p.rep() == a)));
        let u = UrysohnCore;
        assert_eq!(u.enumerate(0).unwrap().rep(), &Tuple::empty());
        let first: Vec<Tuple> = (0..40).map(|k| u.enumerate(k).unwrap().0).collect();
        let distinct: HashSet<u64> = first.iter().map(Tuple::id).collect();
        assert_eq!(distinct.len(), first.len());
    }

    #[test]
    fn approx_tuple_examples() {
        let u = urysohn_space();
        assert!(approx_tuple(&[], &rat(1, 8)).unwrap().is_empty());
        let x = u.embed(UPoint::origin());
        let a = approx_tuple(&[(x, Real::one())], &rat(1, 8)).unwrap();
        assert_eq!(a.len(), 1);
        let (a0, alpha) = &a.entries()[0];
        assert!(*alpha > rat(35, 32) && *alpha < rat(36, 32), "{alpha}");
        assert_eq!(w_distance(a0, &Tuple::empty()), int(0));
        assert!(is_permissible(&a));
    }

    #[test]
    fn approx_tuple_rejects_bad_targets() {
        let u = urysohn_space();
        let o = u.embed(UPoint::origin());
        let err = approx_tuple(&[(o.clone(), Real::one()), (o, Real::from_int(3))], &rat(1, 8)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn extend_real_agrees_with_core() {
        let u = urysohn_space();
        let o = UPoint::origin();
        let q = UPoint::new(t("(():1)")).unwrap();
        let exact = extend_core(&[(o.clone(), int(1)), (q.clone(), int(2))]).unwrap();
        let real = extend_real(vec![(u.embed(o.clone()), Real::one()), (u.embed(q.clone()), Real::from_int(2))]).unwrap();
        for n in [0, 4, 9] {
            assert!(u.dist(&real, &u.embed(exact.clone())).approx(n).contains(&int(0)));
            assert!(u.dist(&real, &u.embed(q.clone())).approx(n).contains(&int(2)));
        }
        let empty = extend_real(vec![]).unwrap();
        assert!(u.dist(&empty, &u.embed(o.clone())).approx(10).contains(&int(0)));
        let p = u.embed(q);
        let same = extend_real(vec![(p.clone(), Real::zero())]).unwrap();
        assert!(u.dist(&same, &p).approx(10).contains(&int(0)));
    }

    #[test]
    fn finite_isometry_examples() {
        let e = extend_finite_isometry(discrete_space(2), vec![]).unwrap();
        let (f0, f1) = (e.image(0).unwrap().unwrap(), e.image(1).unwrap().unwrap());
        assert_eq!(f0.as_base().unwrap().rep(), &Tuple::empty());
        assert_eq!(urysohn_space().dist(&f0, &f1).as_rational(), Some(&int(1)));

        let pin = UPoint::new(t("(():3)")).unwrap();
        let e = extend_finite_isometry(discrete_space(3), vec![(0usize, CompletionPoint::embed(pin.clone()))]).unwrap();
        assert_eq!(e.image(0).unwrap().unwrap().as_base().unwrap().rep(), pin.rep());
        let img = e.apply(&2);
        assert_eq!(urysohn_space().dist(&img, &e.apply(&0)).as_rational(), Some(&int(1)));

        let bad = vec![(0usize, CompletionPoint::embed(pin.clone())), (1usize, CompletionPoint::embed(pin))];
        assert!(matches!(extend_finite_isometry(discrete_space(2), bad), Err(Error::Contract(_))));
    }

    #[test]
    fn finite_isometry_on_a_line() {
        let m: Vec<Vec<Rational>> = (0..4).map(|i| (0..4).map(|j| int((i - j as i64).abs())).collect()).collect();
        let x = FiniteRationalSpace::from_matrix(m.clone()).unwrap();
        let e = extend_finite_isometry(x, vec![]).unwrap();
        let u = urysohn_space();
        for i in 0..4 {
            for j in 0..4 {
                let d = u.dist(&e.apply(&i), &e.apply(&j));
                assert_eq!(d.as_rational(), Some(&m[i][j]));
            }
        }
    }

    #[test]
    fn located_embedding_examples() {
        let u = urysohn_space();
        let single = FiniteRationalSpace::from_matrix(vec![vec![int(0)]]).unwrap();
        let e = embed_located(single).unwrap();
        let f0 = e.image(0).unwrap().unwrap();
        assert_eq!(u.dist(&f0, &u.embed(UPoint::origin())).as_rational(), Some(&int(0)));
        for i in 0..4 {
            let ui = u.enumerate(i).unwrap();
            assert_eq!(e.located_distance(i).unwrap().as_rational(), u.dist(&f0, &ui).as_rational());
        }

        let e = embed_located(discrete_space(2)).unwrap();
        let (a, b) = (e.image(0).unwrap().unwrap(), e.image(1).unwrap().unwrap());
        assert_eq!(u.dist(&a, &b).as_rational(), Some(&int(1)));
        for i in 0..4u64 {
            let l = e.located_distance(i).unwrap();
            for n in i + 1..8 {
                let d = u.dist(&e.image(n).unwrap().unwrap(), &u.enumerate(i).unwrap());
                assert!(d.lower(8) >= l.upper(8) - pow2(-8));
            }
        }
    }
}
