//! Separable metric spaces with explicit witnesses.
//!
//! A space supplies a real-valued distance, an enumeration `ℕ → 1 + X`
//! (absent values allow empty spaces), and optionally a total-boundedness
//! witness `a`: every point lies strictly within `2⁻ⁿ` of some enumerated
//! point with index below `a(n)`.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{parse_rational, pow2, rat_sup, tuple_enum, pair_square, unpair_square, Rational};
use crate::reals::{approx_compare, Comparison, Interval, Real};

pub trait SeparableSpace: Send + Sync {
    type Point: Clone + Send + Sync + 'static;

    fn dist(&self, x: &Self::Point, y: &Self::Point) -> Real;

    /// The dense sequence; `None` marks an absent value.
    fn enumerate(&self, k: u64) -> Option<Self::Point>;

    /// Total-boundedness witness `a(n)`, when the space has one.
    fn total_bound(&self, _n: u32) -> Option<u64> {
        None
    }

    /// Whether the strong triangle inequality is known to hold.
    fn is_ultrametric(&self) -> bool {
        false
    }

    /// A certified upper bound on all distances, when one is known.
    fn distance_bound(&self) -> Option<Rational> {
        None
    }
}

pub type DynSpace<P> = Arc<dyn SeparableSpace<Point = P>>;

impl<S: SeparableSpace + ?Sized> SeparableSpace for Arc<S> {
    type Point = S::Point;

    fn dist(&self, x: &S::Point, y: &S::Point) -> Real {
        (**self).dist(x, y)
    }

    fn enumerate(&self, k: u64) -> Option<S::Point> {
        (**self).enumerate(k)
    }

    fn total_bound(&self, n: u32) -> Option<u64> {
        (**self).total_bound(n)
    }

    fn is_ultrametric(&self) -> bool {
        (**self).is_ultrametric()
    }

    fn distance_bound(&self) -> Option<Rational> {
        (**self).distance_bound()
    }
}

/// First present enumeration value with index below `limit`.
pub fn first_present<S: SeparableSpace + ?Sized>(space: &S, limit: u64) -> Option<(u64, S::Point)> {
    (0..limit).find_map(|k| space.enumerate(k).map(|p| (k, p)))
}

// ---------------------------------------------------------------------------
// Finite rational spaces

/// A finite metric space with exact rational distances, points `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteRationalSpace {
    matrix: Arc<Vec<Vec<Rational>>>,
    ultrametric: bool,
}

impl FiniteRationalSpace {
    /// Validates a distance matrix: square, zero diagonal, symmetric,
    /// nonnegative, and the triangle inequality, in that order. The first
    /// failure is reported with its indices.
    pub fn from_matrix(matrix: Vec<Vec<Rational>>) -> Result<Self> {
        let n = matrix.len();
        if let Some(i) = matrix.iter().position(|row| row.len() != n) {
            return Err(Error::Parse(format!("row {i} has {} entries, expected {n}", matrix[i].len())));
        }
        for i in 0..n {
            if !matrix[i][i].is_zero() {
                return Err(Error::Contract(format!("nonzero diagonal at ({i}, {i})")));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::Contract(format!("asymmetric entries at ({i}, {j})")));
                }
                if matrix[i][j].is_negative() {
                    return Err(Error::Contract(format!("negative distance at ({i}, {j})")));
                }
            }
        }
        let mut ultrametric = true;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (ij, jk, ik) = (&matrix[i][j], &matrix[j][k], &matrix[i][k]);
                    if ik > &(ij + jk) {
                        return Err(Error::Contract(format!(
                            "triangle inequality violated at ({i}, {j}, {k}): d({i},{k}) = {ik} > {}",
                            ij + jk
                        )));
                    }
                    ultrametric &= ik <= &rat_sup(ij, jk);
                }
            }
        }
        Ok(FiniteRationalSpace { matrix: Arc::new(matrix), ultrametric })
    }

    /// Parses the `fms` text format: a header line `fms <n>` followed by
    /// `n` rows of `n` rationals. Blank lines and lines starting with `#`
    /// are skipped.
    pub fn load_fms(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| Error::Parse("empty input, expected `fms <n>`".into()))?;
        let size = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["fms", n] => n.parse::<usize>().map_err(|_| Error::Parse(format!("line {hl}: bad size `{n}`")))?,
            _ => return Err(Error::Parse(format!("line {hl}: expected `fms <n>`"))),
        };
        let mut rows = Vec::with_capacity(size);
        for (ln, line) in lines {
            if rows.len() == size {
                return Err(Error::Parse(format!("line {ln}: more than {size} rows")));
            }
            let row = line.split_whitespace().map(parse_rational).collect::<Result<Vec<_>>>();
            let row = row.map_err(|e| Error::Parse(format!("line {ln}: {e}")))?;
            if row.len() != size {
                return Err(Error::Parse(format!("line {ln}: {} entries, expected {size}", row.len())));
            }
            rows.push(row);
        }
        if rows.len() != size {
            return Err(Error::Parse(format!("{} rows, expected {size}", rows.len())));
        }
        Self::from_matrix(rows)
    }

    pub fn to_fms(&self) -> String {
        let mut out = format!("fms {}\n", self.size());
        for row in self.matrix.iter() {
            let cells: Vec<String> = row.iter().map(|q| q.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn d(&self, i: usize, j: usize) -> &Rational {
        &self.matrix[i][j]
    }

    pub fn checked_d(&self, i: usize, j: usize) -> Result<&Rational> {
        let n = self.size();
        if i >= n || j >= n {
            return Err(Error::Domain(format!("index out of range for a {n}-point space: ({i}, {j})")));
        }
        Ok(&self.matrix[i][j])
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn diameter_exact(&self) -> Rational {
        self.matrix.iter().flatten().fold(Rational::zero(), |m, q| rat_sup(&m, q))
    }

    pub fn as_separable(&self) -> FiniteRationalSpace {
        self.clone()
    }
}

impl SeparableSpace for FiniteRationalSpace {
    type Point = usize;

    fn dist(&self, x: &usize, y: &usize) -> Real {
        Real::from_rational(self.matrix[*x][*y].clone())
    }

    fn enumerate(&self, k: u64) -> Option<usize> {
        let n = self.size() as u64;
        (n > 0).then(|| (k % n) as usize)
    }

    fn total_bound(&self, _n: u32) -> Option<u64> {
        Some(self.size() as u64)
    }

    fn is_ultrametric(&self) -> bool {
        self.ultrametric
    }

    fn distance_bound(&self) -> Option<Rational> {
        Some(self.diameter_exact())
    }
}

/// The `n`-point space with all off-diagonal distances equal to 1.
pub fn discrete_space(n: usize) -> FiniteRationalSpace {
    let m = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::zero() } else { Rational::one() }).collect())
        .collect();
    FiniteRationalSpace::from_matrix(m).expect("discrete metric is valid")
}

// ---------------------------------------------------------------------------
// Maps

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapClass {
    Isometry,
    Lipschitz(Rational),
    Nonexpansive,
    EpsDelta,
}

impl MapClass {
    pub fn lipschitz_constant(&self) -> Option<Rational> {
        match self {
            MapClass::Isometry | MapClass::Nonexpansive => Some(Rational::one()),
            MapClass::Lipschitz(c) => Some(c.clone()),
            MapClass::EpsDelta => None,
        }
    }
}

pub struct MetricMap<A, B> {
    f: Arc<dyn Fn(&A) -> B + Send + Sync>,
    class: MapClass,
}

impl<A, B> Clone for MetricMap<A, B> {
    fn clone(&self) -> Self {
        MetricMap { f: self.f.clone(), class: self.class.clone() }
    }
}

impl<A, B> fmt::Debug for MetricMap<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetricMap({:?})", self.class)
    }
}

impl<A: 'static, B: 'static> MetricMap<A, B> {
    pub fn new(class: MapClass, f: impl Fn(&A) -> B + Send + Sync + 'static) -> Self {
        MetricMap { f: Arc::new(f), class }
    }

    pub fn apply(&self, x: &A) -> B {
        (self.f)(x)
    }

    pub fn class(&self) -> &MapClass {
        &self.class
    }

    /// Checks the declared class on the given pairs at precision `n`, with
    /// `2⁻ⁿ⁺²` slack. Returns the index of the first failing pair.
    pub fn check_on<X, Y>(&self, dom: &X, cod: &Y, pairs: &[(A, A)], n: u32) -> std::result::Result<(), usize>
    where
        X: SeparableSpace<Point = A> + ?Sized,
        Y: SeparableSpace<Point = B> + ?Sized,
        A: Clone + Send + Sync,
        B: Clone + Send + Sync,
    {
        let slack = pow2(2 - n as i64);
        for (idx, (x, y)) in pairs.iter().enumerate() {
            let dx = dom.dist(x, y).approx(n);
            let dy = cod.dist(&self.apply(x), &self.apply(y)).approx(n);
            let fine = match &self.class {
                MapClass::EpsDelta => true,
                MapClass::Isometry => dy.lo <= &dx.hi + &slack && dx.lo <= &dy.hi + &slack,
                c => {
                    let k = c.lipschitz_constant().expect("lipschitz class");
                    dy.lo <= &k * &dx.hi + &slack
                }
            };
            if !fine {
                return Err(idx);
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Products

/// `X × Y` with the supremum metric.
#[derive(Clone)]
pub struct BinaryProduct<X, Y> {
    pub left: X,
    pub right: Y,
}

pub fn product_binary<X: SeparableSpace, Y: SeparableSpace>(left: X, right: Y) -> BinaryProduct<X, Y> {
    BinaryProduct { left, right }
}

impl<X: SeparableSpace, Y: SeparableSpace> SeparableSpace for BinaryProduct<X, Y> {
    type Point = (X::Point, Y::Point);

    fn dist(&self, x: &Self::Point, y: &Self::Point) -> Real {
        self.left.dist(&x.0, &y.0).sup(&self.right.dist(&x.1, &y.1))
    }

    fn enumerate(&self, k: u64) -> Option<Self::Point> {
        let (i, j) = pair_square(k);
        Some((self.left.enumerate(i)?, self.right.enumerate(j)?))
    }

    fn total_bound(&self, n: u32) -> Option<u64> {
        let m = self.left.total_bound(n)?.max(self.right.total_bound(n)?);
        m.checked_mul(m).or(Some(u64::MAX))
    }

    fn is_ultrametric(&self) -> bool {
        self.left.is_ultrametric() && self.right.is_ultrametric()
    }

    fn distance_bound(&self) -> Option<Rational> {
        Some(rat_sup(&self.left.distance_bound()?, &self.right.distance_bound()?))
    }
}

/// A point of a countable product: a lazily evaluated sequence.
pub struct Seq<P>(Arc<dyn Fn(usize) -> P + Send + Sync>);

impl<P> Clone for Seq<P> {
    fn clone(&self) -> Self {
        Seq(self.0.clone())
    }
}

impl<P: 'static> Seq<P> {
    pub fn new(f: impl Fn(usize) -> P + Send + Sync + 'static) -> Self {
        Seq(Arc::new(f))
    }

    pub fn at(&self, l: usize) -> P {
        (self.0)(l)
    }
}

impl<P: Clone + Send + Sync + 'static> Seq<P> {
    pub fn constant(p: P) -> Self {
        Seq::new(move |_| p.clone())
    }
}

/// Gauge `h` applied to factor distances in a countable product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// `h(t) = t / (1 + t)`.
    Canonical,
    /// `h(t) = t`; only for factors whose distances are at most 1.
    Identity,
}

impl Gauge {
    fn apply(self, t: &Rational) -> Rational {
        match self {
            Gauge::Identity => t.clone(),
            Gauge::Canonical => t / (t + Rational::one()),
        }
    }
}

/// How many factors are inspected when a property of all factors is
/// checked up front.
pub const FACTOR_PROBE: usize = 64;

pub type FactorFamily<P> = Arc<dyn Fn(usize) -> DynSpace<P> + Send + Sync>;

/// `∏ Xₙ` with `d(x, y) = sup 2⁻ⁿ h(dₙ(xₙ, yₙ))`.
pub struct CountableProduct<P> {
    factors: FactorFamily<P>,
    gauge: Gauge,
    ultrametric: bool,
}

impl<P> Clone for CountableProduct<P> {
    fn clone(&self) -> Self {
        CountableProduct { factors: self.factors.clone(), gauge: self.gauge, ultrametric: self.ultrametric }
    }
}

/// Builds a countable product. Every factor must be inhabited with
/// `enumerate(0)` present (it fills the tail of enumerated points), and the
/// identity gauge needs factor distances certified at most 1. Both
/// conditions are checked on the first [`FACTOR_PROBE`] factors.
pub fn product_countable<P: Clone + Send + Sync + 'static>(
    factors: FactorFamily<P>,
    gauge: Gauge,
) -> Result<CountableProduct<P>> {
    let mut ultrametric = true;
    for l in 0..FACTOR_PROBE {
        let f = factors(l);
        if f.enumerate(0).is_none() {
            return Err(Error::Domain(format!("factor {l} has no point at enumeration index 0")));
        }
        if gauge == Gauge::Identity && !f.distance_bound().is_some_and(|b| b <= Rational::one()) {
            return Err(Error::Domain(format!("identity gauge needs factor distances ≤ 1; factor {l} is not certified")));
        }
        ultrametric &= f.is_ultrametric();
    }
    Ok(CountableProduct { factors, gauge, ultrametric })
}

impl<P: Clone + Send + Sync + 'static> CountableProduct<P> {
    pub fn factor(&self, l: usize) -> DynSpace<P> {
        (self.factors)(l)
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// The enumerated point whose first coordinates are `indices` and whose
    /// tail is each factor's point at index 0.
    pub fn point_from_indices(&self, indices: &[u64]) -> Option<Seq<P>> {
        let head: Vec<P> = indices
            .iter()
            .enumerate()
            .map(|(l, &i)| self.factor(l).enumerate(i))
            .collect::<Option<_>>()?;
        let factors = self.factors.clone();
        Some(Seq::new(move |l| match head.get(l) {
            Some(p) => p.clone(),
            None => factors(l).enumerate(0).expect("factor enumeration starts with a point"),
        }))
    }

    /// The enumeration index of [`Self::point_from_indices`]`(indices)`.
    pub fn index_of(indices: &[u64]) -> u64 {
        if indices.is_empty() {
            0
        } else {
            unpair_square(indices.len() as u64, crate::numerics::tuple_rank(indices))
        }
    }
}

/// The total-boundedness witness of a countable product at `n`, given the
/// factor witnesses `a_l(n)`.
///
/// With `K = max{a_l(n) : l ≤ n}` every point is covered by an enumerated
/// point agreeing with it up to `2⁻ⁿ` in coordinates `0..=n`, and those have
/// index below `1 + max(⟨n+1, 0⟩, ⟨n+1, K^(n+1) − 1⟩)` where `⟨·,·⟩` is the
/// square pairing. When `K = 1` the first point already covers everything.
/// Saturates at `u64::MAX`.
pub fn countable_tb_witness(n: u32, factor_bound: impl Fn(usize) -> Option<u64>) -> Option<u64> {
    let mut k = 0u64;
    for l in 0..=n as usize {
        k = k.max(factor_bound(l)?);
    }
    if k <= 1 {
        return Some(k);
    }
    let arity = n as u64 + 1;
    let j = (0..arity).try_fold(1u64, |acc, _| acc.checked_mul(k));
    let Some(j) = j else { return Some(u64::MAX) };
    // ⟨i, j⟩ = m² + i + m − j with m = max(i, j), evaluated without overflow.
    let pair = |i: u64, j: u64| -> Option<u64> {
        let m = i.max(j);
        m.checked_mul(m)?.checked_add(i)?.checked_add(m)?.checked_sub(j)
    };
    let top = pair(arity, 0).max(pair(arity, j - 1));
    Some(top.and_then(|t| t.checked_add(1)).unwrap_or(u64::MAX))
}

impl<P: Clone + Send + Sync + 'static> SeparableSpace for CountableProduct<P> {
    type Point = Seq<P>;

    fn dist(&self, x: &Seq<P>, y: &Seq<P>) -> Real {
        let (x, y, factors, gauge) = (x.clone(), y.clone(), self.factors.clone(), self.gauge);
        Real::from_oracle(move |p| {
            let tail = pow2(-(p as i64) - 3);
            let mut lo = Rational::zero();
            let mut hi = tail;
            for l in 0..=(p as usize + 2) {
                let iv = factors(l).dist(&x.at(l), &y.at(l)).approx(p + 2).clamp_nonneg();
                let w = pow2(-(l as i64));
                let (a, b) = (gauge.apply(&iv.lo) * &w, gauge.apply(&iv.hi) * &w);
                lo = rat_sup(&lo, &a);
                hi = rat_sup(&hi, &b);
            }
            Interval::new(lo, hi)
        })
    }

    fn enumerate(&self, k: u64) -> Option<Seq<P>> {
        let (arity, j) = pair_square(k);
        let indices = if arity == 0 { Vec::new() } else { tuple_enum(arity as usize, j) };
        self.point_from_indices(&indices)
    }

    fn total_bound(&self, n: u32) -> Option<u64> {
        countable_tb_witness(n, |l| self.factor(l).total_bound(n))
    }

    fn is_ultrametric(&self) -> bool {
        self.ultrametric
    }

    fn distance_bound(&self) -> Option<Rational> {
        match self.gauge {
            Gauge::Identity | Gauge::Canonical => Some(Rational::one()),
        }
    }
}

// ---------------------------------------------------------------------------
// Located distance, diameter, apartness

/// `d(x, A)` for a totally bounded, inhabited `A`. The point `x` lives in
/// the space `A`'s distance is taken from.
pub fn dist_to_tb_subset<S>(a: &S, x: &S::Point) -> Result<Real>
where
    S: SeparableSpace + Clone + 'static,
{
    let a0 = a.total_bound(0).ok_or_else(|| Error::Domain("subset has no total-boundedness witness".into()))?;
    if first_present(a, a0).is_none() {
        return Err(Error::Domain("distance to an empty subset".into()));
    }
    let (a, x) = (a.clone(), x.clone());
    Ok(Real::from_oracle(move |p| {
        let m = p + 2;
        let bound = a.total_bound(m).expect("witness present");
        let mut best: Option<Interval> = None;
        for k in 0..bound {
            let Some(s) = a.enumerate(k) else { continue };
            let iv = a.dist(&x, &s).approx(m + 1);
            best = Some(match best {
                None => iv,
                Some(b) => Interval { lo: b.lo.min(iv.lo), hi: b.hi.min(iv.hi) },
            });
        }
        let b = best.expect("inhabited subset");
        Interval { lo: b.lo - pow2(-(m as i64)), hi: b.hi }.clamp_nonneg()
    }))
}

/// The supremum of all distances in a totally bounded space; 0 when the
/// space is empty.
pub fn diameter<S>(space: &S) -> Result<Real>
where
    S: SeparableSpace + Clone + 'static,
{
    if space.total_bound(0).is_none() {
        return Err(Error::Domain("diameter needs a total-boundedness witness".into()));
    }
    let space = space.clone();
    Ok(Real::from_oracle(move |p| {
        let m = p + 2;
        let bound = space.total_bound(m).expect("witness present");
        let pts: Vec<_> = (0..bound).filter_map(|k| space.enumerate(k)).collect();
        if pts.is_empty() {
            return Interval::point(Rational::zero());
        }
        let (mut lo, mut hi) = (Rational::zero(), Rational::zero());
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let iv = space.dist(&pts[i], &pts[j]).approx(m + 1);
                lo = rat_sup(&lo, &iv.lo);
                hi = rat_sup(&hi, &iv.hi);
            }
        }
        Interval { lo, hi: hi + pow2(1 - m as i64) }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Apart {
    Apart,
    WithinTolerance,
}

pub fn kolmogorov_apart<S: SeparableSpace + ?Sized>(space: &S, x: &S::Point, y: &S::Point, n: u32) -> Apart {
    match approx_compare(&space.dist(x, y), &Real::zero(), n) {
        Comparison::Greater => Apart::Apart,
        _ => Apart::WithinTolerance,
    }
}

// ---------------------------------------------------------------------------
// Retracts

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Separable,
    TotallyBounded,
}

/// The image of a retraction `r: X → A`, enumerated by `r ∘ enum_X`.
pub struct Retract<S: SeparableSpace> {
    base: S,
    r: MetricMap<S::Point, S::Point>,
    keep_tb: bool,
}

impl<S: SeparableSpace + Clone> Clone for Retract<S> {
    fn clone(&self) -> Self {
        Retract { base: self.base.clone(), r: self.r.clone(), keep_tb: self.keep_tb }
    }
}

/// Transports witnesses from `X` to the retract `A = r(X)`. Keeping the
/// total-boundedness witness needs a nonexpansive `r`.
pub fn transport_witness_retract<S: SeparableSpace>(
    base: S,
    r: MetricMap<S::Point, S::Point>,
    kind: WitnessKind,
) -> Result<Retract<S>> {
    let keep_tb = kind == WitnessKind::TotallyBounded;
    if keep_tb && !r.class().lipschitz_constant().is_some_and(|c| c <= Rational::one()) {
        return Err(Error::Contract(format!("a {:?} retraction cannot carry a total-boundedness witness", r.class())));
    }
    Ok(Retract { base, r, keep_tb })
}

impl<S: SeparableSpace> Retract<S> {
    pub fn retraction(&self) -> &MetricMap<S::Point, S::Point> {
        &self.r
    }

    pub fn base(&self) -> &S {
        &self.base
    }
}

impl<S: SeparableSpace> SeparableSpace for Retract<S> {
    type Point = S::Point;

    fn dist(&self, x: &S::Point, y: &S::Point) -> Real {
        self.base.dist(x, y)
    }

    fn enumerate(&self, k: u64) -> Option<S::Point> {
        self.base.enumerate(k).map(|p| self.r.apply(&p))
    }

    fn total_bound(&self, n: u32) -> Option<u64> {
        if self.keep_tb { self.base.total_bound(n) } else { None }
    }

    fn is_ultrametric(&self) -> bool {
        self.base.is_ultrametric()
    }

    fn distance_bound(&self) -> Option<Rational> {
        self.base.distance_bound()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, rat};

    fn unit2() -> FiniteRationalSpace {
        discrete_space(2)
    }

    #[test]
    fn fms_examples() {
        let s = FiniteRationalSpace::load_fms("fms 2\n0 1\n1 0\n").unwrap();
        assert_eq!(s.size(), 2);
        let bad = FiniteRationalSpace::load_fms("# demo\nfms 3\n0 1 5\n1 0 1\n5 1 0\n").unwrap_err();
        assert!(matches!(&bad, Error::Contract(m) if m.contains("(0, 1, 2)")), "{bad}");
        let one = FiniteRationalSpace::load_fms("fms 1\n0\n").unwrap();
        assert_eq!(one.diameter_exact(), int(0));
        assert!(matches!(FiniteRationalSpace::load_fms("fms 2\n0 1\n"), Err(Error::Parse(_))));
        assert!(matches!(FiniteRationalSpace::load_fms("fms 2\n0 1/0\n1 0\n"), Err(Error::Parse(_))));
        assert!(matches!(FiniteRationalSpace::load_fms("fms 2\n0 1\n2 0\n"), Err(Error::Contract(_))));
        assert!(matches!(FiniteRationalSpace::load_fms("fms 1\n1\n"), Err(Error::Contract(_))));
        let round = FiniteRationalSpace::load_fms(&s.to_fms()).unwrap();
        assert_eq!(round, s);
    }

    #[test]
    fn separable_examples() {
        let one = discrete_space(1);
        assert!((0..10).all(|k| one.enumerate(k) == Some(0)));
        let empty = discrete_space(0);
        assert!((0..10).all(|k| empty.enumerate(k).is_none()));
        let three = discrete_space(3);
        assert!((0..10).all(|n| three.total_bound(n) == Some(3)));
    }

    #[test]
    fn binary_product_examples() {
        let p = product_binary(unit2(), unit2());
        let pts: Vec<_> = (0..4).map(|k| p.enumerate(k).unwrap()).collect();
        for i in 0..4 {
            for j in 0..4 {
                let d = p.dist(&pts[i], &pts[j]).approx(10);
                let want = if i == j { int(0) } else { int(1) };
                assert!(d.contains(&want));
            }
        }
        let single = product_binary(discrete_space(1), discrete_space(1));
        assert!((0..5).all(|k| single.enumerate(k) == Some((0, 0))));
        assert_eq!(p.total_bound(3), Some(4));
    }

    fn cantor_like(gauge: Gauge) -> CountableProduct<usize> {
        let f: FactorFamily<usize> = Arc::new(|_| Arc::new(unit2()) as DynSpace<usize>);
        product_countable(f, gauge).unwrap()
    }

    #[test]
    fn countable_examples() {
        let p = cantor_like(Gauge::Identity);
        let zero = Seq::constant(0usize);
        for n in [0, 5, 12] {
            assert!(p.dist(&zero, &zero).approx(n).contains(&int(0)));
        }
        let x = Seq::new(|l| usize::from(l == 1));
        assert!(p.dist(&zero, &x).approx(8).contains(&rat(1, 2)));
        let ones = Seq::constant(1usize);
        assert!(p.dist(&zero, &ones).approx(8).contains(&int(1)));
        let q = cantor_like(Gauge::Canonical);
        assert!(q.dist(&zero, &ones).approx(8).contains(&rat(1, 2)));
    }

    #[test]
    fn countable_witness_examples() {
        assert_eq!(countable_tb_witness(4, |_| Some(1)), Some(1));
        assert_eq!(countable_tb_witness(0, |_| Some(2)), Some(4));
        let f: FactorFamily<usize> = Arc::new(|l| Arc::new(discrete_space(if l == 0 { 0 } else { 2 })) as DynSpace<usize>);
        assert!(matches!(product_countable(f, Gauge::Identity), Err(Error::Domain(_))));
        let g: FactorFamily<usize> =
            Arc::new(|_| Arc::new(FiniteRationalSpace::from_matrix(vec![vec![int(0), int(2)], vec![int(2), int(0)]]).unwrap()) as DynSpace<usize>);
        assert!(matches!(product_countable(g.clone(), Gauge::Identity), Err(Error::Domain(_))));
        assert!(product_countable(g, Gauge::Canonical).is_ok());
    }

    #[test]
    fn countable_index_roundtrip() {
        let p = cantor_like(Gauge::Identity);
        for idx in [vec![], vec![1], vec![0, 1], vec![1, 1, 0], vec![1, 0, 1, 1]] {
            let k = CountableProduct::<usize>::index_of(&idx);
            let s = p.enumerate(k).unwrap();
            for (l, &i) in idx.iter().enumerate() {
                assert_eq!(s.at(l) as u64, i);
            }
        }
    }

    #[test]
    fn located_distance_examples() {
        let s = FiniteRationalSpace::from_matrix(vec![
            vec![int(0), rat(1, 4), rat(3, 4)],
            vec![rat(1, 4), int(0), int(1)],
            vec![rat(3, 4), int(1), int(0)],
        ])
        .unwrap();
        let r = MetricMap::new(MapClass::EpsDelta, |&i: &usize| i);
        let sep = transport_witness_retract(s.clone(), r, WitnessKind::Separable).unwrap();
        assert!(matches!(dist_to_tb_subset(&sep, &0), Err(Error::Domain(_))));
        let whole = dist_to_tb_subset(&s, &2).unwrap();
        assert!(whole.approx(10).contains(&int(0)));
        assert!(matches!(dist_to_tb_subset(&discrete_space(0), &0), Err(Error::Domain(_))));
    }

    #[test]
    fn diameter_examples() {
        assert!(diameter(&discrete_space(0)).unwrap().approx(5).contains(&int(0)));
        assert_eq!(diameter(&discrete_space(0)).unwrap().approx(5).width(), int(0));
        for n in [0, 4, 9] {
            let d = diameter(&unit2()).unwrap().approx(n);
            assert!(d.contains(&int(1)) && d.width() <= pow2(-(n as i64)));
        }
    }

    #[test]
    fn apartness_examples() {
        let s = unit2();
        assert_eq!(kolmogorov_apart(&s, &0, &1, 2), Apart::Apart);
        for n in 0..10 {
            assert_eq!(kolmogorov_apart(&s, &1, &1, n), Apart::WithinTolerance);
        }
        let t = FiniteRationalSpace::from_matrix(vec![vec![int(0), pow2(-10)], vec![pow2(-10), int(0)]]).unwrap();
        assert_eq!(kolmogorov_apart(&t, &0, &1, 4), Apart::WithinTolerance);
    }

    #[test]
    fn retract_examples() {
        let s = discrete_space(3);
        let id = transport_witness_retract(s.clone(), MetricMap::new(MapClass::Isometry, |&i: &usize| i), WitnessKind::TotallyBounded).unwrap();
        assert!((0..9).all(|k| id.enumerate(k) == s.enumerate(k) && id.total_bound(k as u32) == Some(3)));
        let c = transport_witness_retract(s, MetricMap::new(MapClass::Nonexpansive, |_: &usize| 2), WitnessKind::TotallyBounded).unwrap();
        assert!((0..9).all(|k| c.enumerate(k) == Some(2) && c.total_bound(1) == Some(3)));
        let e = transport_witness_retract(discrete_space(2), MetricMap::new(MapClass::EpsDelta, |&i: &usize| i), WitnessKind::TotallyBounded);
        assert!(matches!(e, Err(Error::Contract(_))));
    }
}
