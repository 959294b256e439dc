//! The Baire space, Cantor space, ℕ•, the unit interval and the Hilbert cube.
//!
//! Sequence spaces carry the comparison metric `d_C(α, β) = 2^-k` where `k`
//! is the first index at which `α` and `β` differ. ℕ• holds the decreasing
//! binary sequences: `n` ones followed by zeros encodes `n`, all ones is `∞`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::completion::CompletionPoint;
use crate::error::{Error, Result};
use crate::metric::{
    countable_tb_witness, product_countable, transport_witness_retract, CountableProduct, DynSpace, FactorFamily, Gauge,
    MapClass, MetricMap, Retract, SeparableSpace, Seq, WitnessKind,
};
use crate::numerics::{floor_scaled, pair_square, pow2, tuple_enum, Rational};
use crate::reals::{settle, Interval, Real};

// ---------------------------------------------------------------------------
// Sequences of naturals

/// A point of the Baire space (also used for Cantor and ℕ• points).
#[derive(Clone)]
pub struct NatSeq(Arc<dyn Fn(usize) -> u64 + Send + Sync>);

pub type BairePoint = NatSeq;
pub type CantorPoint = NatSeq;

impl NatSeq {
    pub fn from_fn(f: impl Fn(usize) -> u64 + Send + Sync + 'static) -> Self {
        NatSeq(Arc::new(f))
    }

    /// Caches every computed term; for expensive term functions.
    pub fn memoized(f: impl Fn(usize) -> u64 + Send + Sync + 'static) -> Self {
        let memo: RwLock<HashMap<usize, u64>> = RwLock::new(HashMap::new());
        NatSeq::from_fn(move |n| {
            if let Some(&v) = memo.read().expect("memo lock").get(&n) {
                return v;
            }
            let v = f(n);
            *memo.write().expect("memo lock").entry(n).or_insert(v)
        })
    }

    pub fn constant(c: u64) -> Self {
        NatSeq::from_fn(move |_| c)
    }

    /// `prefix` followed by its last value forever; the empty prefix gives
    /// all zeros.
    pub fn eventually_constant(prefix: Vec<u64>) -> Self {
        let last = prefix.last().copied().unwrap_or(0);
        NatSeq::from_fn(move |n| prefix.get(n).copied().unwrap_or(last))
    }

    /// `prefix` followed by zeros.
    pub fn finite_support(prefix: Vec<u64>) -> Self {
        NatSeq::from_fn(move |n| prefix.get(n).copied().unwrap_or(0))
    }

    pub fn term(&self, n: usize) -> u64 {
        (self.0)(n)
    }

    pub fn prefix(&self, len: usize) -> Vec<u64> {
        (0..len).map(|n| self.term(n)).collect()
    }

    /// Parses a literal such as `1,1,0,*`: a comma-separated prefix, then
    /// `*` to repeat the last value forever.
    pub fn parse_literal(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let (body, tail) = parts.split_at(parts.len() - 1);
        if tail != ["*"] || body.is_empty() {
            return Err(Error::Parse(format!("sequence literal `{text}` must look like `a,b,…,*`")));
        }
        let prefix = body
            .iter()
            .map(|s| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad term `{s}` in `{text}`"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(NatSeq::eventually_constant(prefix))
    }

    /// Renders terms `0..len` as a literal, folding a constant tail into `*`.
    /// Only exact for sequences constant from index `len − 1` on.
    pub fn to_literal(&self, len: usize) -> String {
        let p = self.prefix(len.max(1));
        format_literal(&p)
    }
}

/// Renders a prefix as a literal, folding a repeated tail into `*`.
pub fn format_literal(prefix: &[u64]) -> String {
    let mut keep = prefix.len();
    while keep > 1 && prefix[keep - 2] == prefix[keep - 1] {
        keep -= 1;
    }
    let mut parts: Vec<String> = prefix[..keep].iter().map(u64::to_string).collect();
    parts.push("*".into());
    parts.join(",")
}

impl fmt::Debug for NatSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NatSeq({:?}…)", self.prefix(8))
    }
}

/// First index `< limit` where the sequences differ.
pub fn first_mismatch(a: &NatSeq, b: &NatSeq, limit: usize) -> Option<usize> {
    (0..limit).find(|&k| a.term(k) != b.term(k))
}

/// The comparison metric. At precision `n` the terms `0..=n+1` decide it:
/// a mismatch at `k` gives exactly `2^-k`, otherwise the value lies in
/// `[0, 2^-(n+1)]`.
pub fn comparison_dist(a: &NatSeq, b: &NatSeq) -> Real {
    let (a, b) = (a.clone(), b.clone());
    Real::from_oracle(move |n| match first_mismatch(&a, &b, n as usize + 2) {
        Some(k) => Interval::point(pow2(-(k as i64))),
        None => Interval::new(Rational::zero(), pow2(-(n as i64) - 1)),
    })
}

pub fn shift(m: usize, a: &NatSeq) -> NatSeq {
    let a = a.clone();
    NatSeq::from_fn(move |n| a.term(n + m))
}

pub fn retract_baire_cantor(a: &NatSeq) -> CantorPoint {
    let a = a.clone();
    NatSeq::from_fn(move |n| u64::from(a.term(n) != 0))
}

pub fn retract_cantor_nbullet(a: &CantorPoint) -> NBullet {
    let a = a.clone();
    NBullet(NatSeq::from_fn(move |n| u64::from((0..=n).all(|k| a.term(k) != 0))))
}

// ---------------------------------------------------------------------------
// ℕ•

/// A point of ℕ•.
#[derive(Clone, Debug)]
pub struct NBullet(NatSeq);

impl NBullet {
    /// Wraps a sequence without checking; see [`NBullet::term_checked`].
    pub fn from_seq(s: NatSeq) -> Self {
        NBullet(s)
    }

    pub fn of_nat(n: u64) -> Self {
        NBullet(NatSeq::from_fn(move |k| u64::from((k as u64) < n)))
    }

    pub fn infinity() -> Self {
        NBullet(NatSeq::constant(1))
    }

    pub fn seq(&self) -> &NatSeq {
        &self.0
    }

    pub fn term(&self, n: usize) -> u64 {
        self.0.term(n)
    }

    /// The term at `n`, after checking that the prefix up to `n` is binary
    /// and decreasing.
    pub fn term_checked(&self, n: usize) -> Result<u64> {
        let mut prev = 1;
        for k in 0..=n {
            let t = self.0.term(k);
            if t > 1 || t > prev {
                return Err(Error::Invariant(format!("ℕ• sequence not binary and decreasing at index {k}")));
            }
            prev = t;
        }
        Ok(prev)
    }

    /// `n < t`.
    pub fn exceeds(&self, n: usize) -> bool {
        self.0.term(n) == 1
    }

    /// The finite value if it shows within the first `limit` terms.
    pub fn value_within(&self, limit: usize) -> Option<u64> {
        (0..limit).find(|&k| self.0.term(k) == 0).map(|k| k as u64)
    }

    pub fn succ(&self) -> Self {
        let t = self.0.clone();
        NBullet(NatSeq::from_fn(move |n| if n == 0 { 1 } else { t.term(n - 1) }))
    }

    pub fn pred(&self) -> Self {
        NBullet(shift(1, &self.0))
    }

    pub fn sup(&self, u: &NBullet) -> Self {
        let (a, b) = (self.0.clone(), u.0.clone());
        NBullet(NatSeq::from_fn(move |n| a.term(n).max(b.term(n))))
    }

    pub fn inf(&self, u: &NBullet) -> Self {
        let (a, b) = (self.0.clone(), u.0.clone());
        NBullet(NatSeq::from_fn(move |n| a.term(n).min(b.term(n))))
    }
}

// ---------------------------------------------------------------------------
// Sequence spaces

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Baire,
    Cantor,
    NBullet,
}

/// The Baire or Cantor space, enumerated by finitely supported sequences in
/// the order of the countable-product enumeration.
#[derive(Debug, Clone, Copy)]
pub struct SequenceSpace {
    kind: SequenceKind,
}

pub fn baire_space() -> SequenceSpace {
    SequenceSpace { kind: SequenceKind::Baire }
}

pub fn cantor_space() -> SequenceSpace {
    SequenceSpace { kind: SequenceKind::Cantor }
}

pub type NBulletSpace = Retract<SequenceSpace>;

/// ℕ• as the retract of the Cantor space under
/// [`retract_cantor_nbullet`].
pub fn nbullet_space() -> NBulletSpace {
    let r = MetricMap::new(MapClass::Nonexpansive, |a: &NatSeq| retract_cantor_nbullet(a).0);
    transport_witness_retract(cantor_space(), r, WitnessKind::TotallyBounded).expect("nonexpansive retraction")
}

impl SequenceSpace {
    pub fn kind(&self) -> SequenceKind {
        self.kind
    }
}

impl SeparableSpace for SequenceSpace {
    type Point = NatSeq;

    fn dist(&self, x: &NatSeq, y: &NatSeq) -> Real {
        comparison_dist(x, y)
    }

    fn enumerate(&self, k: u64) -> Option<NatSeq> {
        let (arity, j) = pair_square(k);
        let mut t = if arity == 0 { Vec::new() } else { tuple_enum(arity as usize, j) };
        if self.kind != SequenceKind::Baire {
            t.iter_mut().for_each(|v| *v %= 2);
        }
        Some(NatSeq::finite_support(t))
    }

    fn total_bound(&self, n: u32) -> Option<u64> {
        match self.kind {
            SequenceKind::Baire => None,
            _ => countable_tb_witness(n, |_| Some(2)),
        }
    }

    fn is_ultrametric(&self) -> bool {
        true
    }

    fn distance_bound(&self) -> Option<Rational> {
        Some(Rational::one())
    }
}

/// ℕ with the discrete metric.
#[derive(Debug, Clone, Copy, Default)]
pub struct DiscreteNaturals;

impl SeparableSpace for DiscreteNaturals {
    type Point = u64;

    fn dist(&self, x: &u64, y: &u64) -> Real {
        Real::from_int(i64::from(x != y))
    }

    fn enumerate(&self, k: u64) -> Option<u64> {
        Some(k)
    }

    fn is_ultrametric(&self) -> bool {
        true
    }

    fn distance_bound(&self) -> Option<Rational> {
        Some(Rational::one())
    }
}

/// The Baire space as a generic countable product of discrete copies of ℕ,
/// with coordinates as `Seq<u64>`; agrees with [`baire_space`] up to the
/// point representation.
pub fn baire_as_product() -> CountableProduct<u64> {
    let f: FactorFamily<u64> = Arc::new(|_| Arc::new(DiscreteNaturals) as DynSpace<u64>);
    product_countable(f, Gauge::Identity).expect("discrete factors have distances ≤ 1")
}

pub fn as_product_point(a: &NatSeq) -> Seq<u64> {
    let a = a.clone();
    Seq::new(move |l| a.term(l))
}

/// The nonexpansive retraction onto the closed ball of radius `2^-t`
/// around `beta`.
pub fn ball_retract(kind: SequenceKind, beta: &NatSeq, t: &NBullet) -> MetricMap<NatSeq, NatSeq> {
    let (beta, t) = (beta.clone(), t.clone());
    MetricMap::new(MapClass::Nonexpansive, move |a: &NatSeq| {
        let (a, beta, t) = (a.clone(), beta.clone(), t.clone());
        NatSeq::from_fn(move |n| {
            if t.exceeds(n) {
                beta.term(n)
            } else if kind == SequenceKind::NBullet {
                (0..n).filter(|&k| t.exceeds(k)).map(|k| beta.term(k)).fold(a.term(n), u64::min)
            } else {
                a.term(n)
            }
        })
    })
}

/// The limit of a fast-Cauchy sequence of Baire points: term `n` is read
/// off stage `n + 1`, where all later stages already agree.
pub fn baire_limit(p: &CompletionPoint<NatSeq>) -> NatSeq {
    let p = p.clone();
    NatSeq::from_fn(move |n| p.term(n as u32 + 1).term(n))
}

/// Extends a convergent sequence `seq` in a complete space to ℕ•:
/// `f(t) = lim seq(min{n, t})`. For finite `t` the result sits at distance
/// 0 from `seq(t)`.
pub fn nbullet_extend<P: Clone + Send + Sync + 'static>(
    seq: Arc<dyn Fn(u64) -> CompletionPoint<P> + Send + Sync>,
    t: &NBullet,
) -> CompletionPoint<P> {
    let t = t.clone();
    CompletionPoint::from_fn(move |k| {
        let j = t.value_within(k as usize + 2).unwrap_or(k as u64 + 2);
        seq(j).term(k + 2)
    })
}

// ---------------------------------------------------------------------------
// The unit interval and the Hilbert cube

/// Index of the `k`-th point of the concatenated dyadic grids: grid `n`
/// lists `i/2^n` for `i = 0..=2^n` and starts at index `2^n − 1 + n`.
pub fn dyadic_grid_point(k: u64) -> Rational {
    let mut n = 0u32;
    while (1u64 << (n + 1)) + n as u64 <= k {
        n += 1;
    }
    let start = (1u64 << n) - 1 + n as u64;
    Rational::new(BigInt::from(k - start), BigInt::one() << n as usize)
}

fn unit_tb(n: u32) -> Option<u64> {
    1u64.checked_shl(n + 1).and_then(|p| p.checked_add(n as u64)).or(Some(u64::MAX))
}

/// `[0, 1]` with points given as reals.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitInterval;

pub fn unit_interval_space() -> UnitInterval {
    UnitInterval
}

impl UnitInterval {
    /// Admits `x` as a point unless its precision-4 interval leaves
    /// `[−2⁻⁴, 1 + 2⁻⁴]`.
    pub fn point(&self, x: Real) -> Result<Real> {
        let iv = x.approx(4);
        let eps = pow2(-4);
        if iv.lo < -eps.clone() || iv.hi > Rational::one() + eps {
            return Err(Error::Domain(format!("{iv} is not inside the unit interval")));
        }
        Ok(x)
    }
}

impl SeparableSpace for UnitInterval {
    type Point = Real;

    fn dist(&self, x: &Real, y: &Real) -> Real {
        x.sub(y).abs()
    }

    fn enumerate(&self, k: u64) -> Option<Real> {
        Some(Real::from_rational(dyadic_grid_point(k)))
    }

    fn total_bound(&self, n: u32) -> Option<u64> {
        unit_tb(n)
    }

    fn distance_bound(&self) -> Option<Rational> {
        Some(Rational::one())
    }
}

/// The rationals of `[0, 1]` with exact distances and the dyadic
/// enumeration of [`UnitInterval`]. Its completion is the unit interval.
#[derive(Debug, Clone, Copy, Default)]
pub struct DyadicGrid;

impl SeparableSpace for DyadicGrid {
    type Point = Rational;

    fn dist(&self, x: &Rational, y: &Rational) -> Real {
        Real::from_rational((x - y).abs())
    }

    fn enumerate(&self, k: u64) -> Option<Rational> {
        Some(dyadic_grid_point(k))
    }

    fn total_bound(&self, n: u32) -> Option<u64> {
        unit_tb(n)
    }

    fn distance_bound(&self) -> Option<Rational> {
        Some(Rational::one())
    }
}

/// All rationals with the Euclidean metric.
#[derive(Debug, Clone, Copy, Default)]
pub struct RationalLine;

impl SeparableSpace for RationalLine {
    type Point = Rational;

    fn dist(&self, x: &Rational, y: &Rational) -> Real {
        Real::from_rational((x - y).abs())
    }

    fn enumerate(&self, k: u64) -> Option<Rational> {
        let (a, b) = pair_square(k);
        let z = if a % 2 == 0 { (a / 2) as i64 } else { -(a.div_ceil(2) as i64) };
        Some(Rational::new(BigInt::from(z), BigInt::from(b + 1)))
    }
}

/// A fast-Cauchy sequence of rationals converging to `x`, with terms on the
/// grid `2^-(n+2)` and, when `clamp` is set, inside `[0, 1]`.
pub fn point_of_real(x: &Real, clamp: bool) -> CompletionPoint<Rational> {
    let x = x.clone();
    CompletionPoint::from_fn(move |n| {
        let q = Rational::new(floor_scaled(&x.lower(n + 2), n + 2), BigInt::one() << (n as usize + 2));
        if clamp {
            q.max(Rational::zero()).min(Rational::one())
        } else {
            q
        }
    })
}

/// The real a fast-Cauchy sequence of rationals converges to.
pub fn real_of_point(p: &CompletionPoint<Rational>) -> Real {
    if let Some(q) = p.as_base() {
        return Real::from_rational(q.clone());
    }
    let p = p.clone();
    Real::from_oracle(move |n| settle(Interval::point(p.term(n + 2)).pad(&pow2(-(n as i64) - 2)), n))
}

pub type HilbertCube = CountableProduct<Real>;

/// `𝕀^ℕ` with `d(x, y) = sup 2⁻ⁿ |xₙ − yₙ|`.
pub fn hilbert_cube() -> HilbertCube {
    let f: FactorFamily<Real> = Arc::new(|_| Arc::new(UnitInterval) as DynSpace<Real>);
    product_countable(f, Gauge::Identity).expect("unit interval distances are at most 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::complete;
    use crate::metric::dist_to_tb_subset;
    use crate::numerics::{int, rat};

    fn lit(s: &str) -> NatSeq {
        NatSeq::parse_literal(s).unwrap()
    }

    fn exact(r: &Real, n: u32) -> Option<Rational> {
        let iv = r.approx(n);
        (iv.lo == iv.hi).then_some(iv.lo)
    }

    #[test]
    fn literals() {
        assert_eq!(lit("1,1,0,*").prefix(5), vec![1, 1, 0, 0, 0]);
        assert_eq!(lit("1,*").prefix(3), vec![1, 1, 1]);
        assert_eq!(lit("3, 4,*").prefix(4), vec![3, 4, 4, 4]);
        for bad in ["", "*", "1,2", "1,x,*", "1,*,2"] {
            assert!(NatSeq::parse_literal(bad).is_err(), "{bad}");
        }
        assert_eq!(lit("1,0,0,*").to_literal(6), "1,0,*");
        assert_eq!(NatSeq::constant(1).to_literal(64), "1,*");
    }

    #[test]
    fn comparison_examples() {
        let a = lit("4,2,*");
        for n in [0, 5, 30] {
            assert!(comparison_dist(&a, &a).approx(n).contains(&int(0)));
        }
        let (two, five) = (NBullet::of_nat(2), NBullet::of_nat(5));
        assert_eq!(exact(&comparison_dist(two.seq(), five.seq()), 3), Some(rat(1, 4)));
        let x = NatSeq::from_fn(|n| n as u64);
        let y = NatSeq::from_fn(|n| if n == 10 { 99 } else { n as u64 });
        assert_eq!(exact(&comparison_dist(&x, &y), 9), Some(pow2(-10)));
        assert_eq!(exact(&comparison_dist(&x, &y), 3), None);
    }

    #[test]
    fn retraction_examples() {
        assert_eq!(retract_baire_cantor(&NatSeq::constant(0)).prefix(4), vec![0; 4]);
        let r = retract_cantor_nbullet(&NatSeq::eventually_constant(vec![1, 0, 1, 1]));
        assert_eq!(r.value_within(10), Some(1));
        assert_eq!(retract_baire_cantor(&lit("3,0,5,*")).prefix(4), vec![1, 0, 1, 1]);
    }

    #[test]
    fn nbullet_examples() {
        assert_eq!(NBullet::of_nat(3).succ().value_within(10), Some(4));
        assert_eq!(NBullet::infinity().succ().value_within(50), None);
        assert_eq!(NBullet::of_nat(0).pred().value_within(10), Some(0));
        assert_eq!(NBullet::of_nat(2).inf(&NBullet::infinity()).value_within(10), Some(2));
        assert_eq!(NBullet::of_nat(2).sup(&NBullet::of_nat(6)).value_within(10), Some(6));
        let bad = NBullet::from_seq(lit("1,0,1,*"));
        assert_eq!(bad.term_checked(1), Ok(0));
        assert!(matches!(bad.term_checked(2), Err(Error::Invariant(_))));
        assert!(matches!(NBullet::from_seq(lit("2,*")).term_checked(0), Err(Error::Invariant(_))));
    }

    #[test]
    fn shift_examples() {
        let a = NatSeq::from_fn(|n| n as u64 + 7);
        assert_eq!(shift(0, &a).prefix(5), a.prefix(5));
        assert_eq!(shift(2, &a).prefix(2), vec![9, 10]);
        assert_eq!(shift(4, &shift(3, &a)).prefix(9), shift(7, &a).prefix(9));
    }

    #[test]
    fn unit_interval_examples() {
        let i = unit_interval_space();
        assert_eq!(i.dist(&Real::zero(), &Real::one()).as_rational(), Some(&int(1)));
        assert_eq!(i.total_bound(3), Some(19));
        let grid: Vec<Rational> = (0..5).map(dyadic_grid_point).collect();
        assert_eq!(grid, vec![int(0), int(1), int(0), rat(1, 2), int(1)]);
        assert!(i.point(Real::from_rational(rat(17, 16))).is_ok());
        assert!(matches!(i.point(Real::from_rational(rat(9, 8))), Err(Error::Domain(_))));
        assert!(matches!(i.point(Real::from_int(-1)), Err(Error::Domain(_))));
        // The n = 2 grid starts right after index 2^2 - 1 + 2 - 1.
        assert_eq!(dyadic_grid_point(5), int(0));
        assert_eq!(dyadic_grid_point(6), rat(1, 4));
    }

    #[test]
    fn located_distance_in_unit_interval() {
        // A = {0, 1} as the retract t ↦ 0 if t < 1/2 else 1 of the grid.
        let r = MetricMap::new(MapClass::EpsDelta, |q: &Rational| if q < &rat(1, 2) { int(0) } else { int(1) });
        let a = transport_witness_retract(DyadicGrid, r, WitnessKind::Separable).unwrap();
        let a = WithWitness { inner: a, bound: |_| 2 };
        let d = dist_to_tb_subset(&a, &rat(1, 4)).unwrap();
        for n in [0, 4, 10] {
            let iv = d.approx(n);
            assert!(iv.contains(&rat(1, 4)) && iv.width() <= pow2(-(n as i64)), "{iv}");
        }
        assert!(dist_to_tb_subset(&a, &int(1)).unwrap().approx(8).contains(&int(0)));
    }

    /// Attaches a hand-checked witness to a space.
    #[derive(Clone)]
    struct WithWitness<S, F> {
        inner: S,
        bound: F,
    }

    impl<S: SeparableSpace, F: Fn(u32) -> u64 + Send + Sync> SeparableSpace for WithWitness<S, F> {
        type Point = S::Point;
        fn dist(&self, x: &S::Point, y: &S::Point) -> Real {
            self.inner.dist(x, y)
        }
        fn enumerate(&self, k: u64) -> Option<S::Point> {
            self.inner.enumerate(k)
        }
        fn total_bound(&self, n: u32) -> Option<u64> {
            Some((self.bound)(n))
        }
    }

    #[test]
    fn hilbert_cube_examples() {
        let h = hilbert_cube();
        let (z, o) = (Seq::constant(Real::zero()), Seq::constant(Real::one()));
        for n in [0, 6, 12] {
            let iv = h.dist(&z, &o).approx(n);
            assert!(iv.contains(&int(1)) && iv.width() <= pow2(-(n as i64)));
        }
    }

    #[test]
    fn baire_completeness() {
        // Stage m copies the target on 0..m and is arbitrary afterwards.
        let target = NatSeq::from_fn(|n| (n * n % 7) as u64);
        let t2 = target.clone();
        let p = CompletionPoint::from_fn(move |m| {
            let t = t2.clone();
            NatSeq::from_fn(move |n| if n < m as usize { t.term(n) } else { 42 })
        });
        let lim = baire_limit(&p);
        assert_eq!(lim.prefix(20), target.prefix(20));
    }

    #[test]
    fn nbullet_enumeration() {
        let s = nbullet_space();
        let mut seen = std::collections::BTreeSet::new();
        for k in 0..400 {
            let p = NBullet::from_seq(s.enumerate(k).unwrap());
            assert!(p.term_checked(12).is_ok());
            seen.insert(p.value_within(12));
        }
        assert!((0..5).all(|v| seen.contains(&Some(v))), "{seen:?}");
        // Points approaching ∞.
        let far = (0..10).map(NBullet::of_nat).map(|p| comparison_dist(p.seq(), NBullet::infinity().seq()));
        for (v, d) in far.enumerate() {
            assert_eq!(exact(&d, 12), Some(pow2(-(v as i64))));
        }
    }

    #[test]
    fn ball_retract_examples() {
        let beta = NatSeq::constant(1);
        let zeros = NatSeq::constant(0);
        let r = ball_retract(SequenceKind::Cantor, &beta, &NBullet::of_nat(2));
        assert_eq!(r.apply(&zeros).prefix(5), vec![1, 1, 0, 0, 0]);
        let id = ball_retract(SequenceKind::Baire, &beta, &NBullet::of_nat(0));
        let a = lit("5,3,2,*");
        assert_eq!(id.apply(&a).prefix(6), a.prefix(6));
        let c = ball_retract(SequenceKind::Baire, &lit("9,8,*"), &NBullet::infinity());
        assert_eq!(c.apply(&a).prefix(6), vec![9, 8, 8, 8, 8, 8]);
        // ℕ•: the tail may not rise above β's prefix.
        let rb = ball_retract(SequenceKind::NBullet, NBullet::of_nat(1).seq(), &NBullet::of_nat(2));
        let out = NBullet::from_seq(rb.apply(NBullet::of_nat(5).seq()));
        assert!(out.term_checked(10).is_ok());
        assert_eq!(out.value_within(10), Some(1));
    }

    #[test]
    fn nbullet_extension() {
        let c = complete(DyadicGrid);
        // seq(i) = 1 - 2^-i, converging to 1.
        let seq: Arc<dyn Fn(u64) -> CompletionPoint<Rational> + Send + Sync> =
            Arc::new(|i| CompletionPoint::embed(int(1) - pow2(-(i as i64))));
        let at3 = nbullet_extend(seq.clone(), &NBullet::of_nat(3));
        assert!(c.dist(&at3, &CompletionPoint::embed(rat(7, 8))).approx(14).contains(&int(0)));
        let at_inf = nbullet_extend(seq, &NBullet::infinity());
        assert!(c.dist(&at_inf, &CompletionPoint::embed(int(1))).approx(14).contains(&int(0)));
        let konst: Arc<dyn Fn(u64) -> CompletionPoint<Rational> + Send + Sync> =
            Arc::new(|_| CompletionPoint::embed(rat(1, 3)));
        for t in [NBullet::of_nat(0), NBullet::of_nat(4), NBullet::infinity()] {
            let p = nbullet_extend(konst.clone(), &t);
            assert!(c.dist(&p, &CompletionPoint::embed(rat(1, 3))).approx(14).contains(&int(0)));
        }
    }

    #[test]
    fn real_points_roundtrip() {
        let x = Real::from_rational(rat(1, 3));
        let p = point_of_real(&x, true);
        let back = real_of_point(&p);
        for n in [0, 8, 20] {
            assert!(back.approx(n).contains(&rat(1, 3)));
        }
    }
}
