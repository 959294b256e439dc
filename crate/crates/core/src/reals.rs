//! Real numbers as precision-indexed oracles returning rational intervals.
//!
//! A query at precision `n` yields a closed interval of width at most `2⁻ⁿ`
//! containing the number. Answers at different precisions always intersect
//! but need not nest. Every answer is memoized, so repeated queries are
//! deterministic and cheap.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{ceil_scaled, floor_scaled, format_decimal, format_decimal_up, log2_ceil, pow2, rat_inf, rat_sup, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(q: Rational) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(BigInt::from(2))
    }

    pub fn radius(&self) -> Rational {
        self.width() / Rational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn magnitude(&self) -> Rational {
        rat_sup(&self.lo.abs(), &self.hi.abs())
    }

    /// Widens by `pad` on both sides.
    pub fn pad(&self, pad: &Rational) -> Interval {
        Interval { lo: &self.lo - pad, hi: &self.hi + pad }
    }

    /// Raises a negative lower end to zero, for quantities known to be
    /// nonnegative.
    pub fn clamp_nonneg(self) -> Interval {
        if self.lo.is_negative() {
            let hi = if self.hi.is_negative() { Rational::zero() } else { self.hi };
            Interval { lo: Rational::zero(), hi }
        } else {
            self
        }
    }

    fn mul(&self, other: &Interval) -> Interval {
        let c = [&self.lo * &other.lo, &self.lo * &other.hi, &self.hi * &other.lo, &self.hi * &other.hi];
        let lo = c.iter().min().cloned().unwrap_or_default();
        let hi = c.iter().max().cloned().unwrap_or_default();
        Interval { lo, hi }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

type Oracle = Box<dyn Fn(u32) -> Interval + Send + Sync>;

enum Kind {
    Exact(Rational),
    Oracle(Oracle),
}

struct Node {
    kind: Kind,
    memo: RwLock<HashMap<u32, Interval>>,
}

/// An effective real number.
#[derive(Clone)]
pub struct Real(Arc<Node>);

/// Certificate that `|x| ≥ 2⁻ⁿ`, checked on the interval at precision `n + 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Apartness {
    pub n: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    Within,
}

/// A Cauchy sequence of reals: `|term(i) − term(j)| < 2⁻ⁿ` whenever
/// `i, j ≥ modulus(n)`.
#[derive(Clone)]
pub struct RealSeq {
    pub term: Arc<dyn Fn(u64) -> Real + Send + Sync>,
    pub modulus: Arc<dyn Fn(u32) -> u64 + Send + Sync>,
}

impl RealSeq {
    pub fn new(
        term: impl Fn(u64) -> Real + Send + Sync + 'static,
        modulus: impl Fn(u32) -> u64 + Send + Sync + 'static,
    ) -> Self {
        RealSeq { term: Arc::new(term), modulus: Arc::new(modulus) }
    }

    pub fn constant(x: Real) -> Self {
        RealSeq::new(move |_| x.clone(), |n| n as u64)
    }
}

/// Rounds outward onto the grid `2^-(n+3)`. An interval of width at most
/// `¾·2⁻ⁿ` stays within `2⁻ⁿ`.
pub(crate) fn settle(iv: Interval, n: u32) -> Interval {
    let k = n + 3;
    let lo = Rational::new(floor_scaled(&iv.lo, k), BigInt::one() << k as usize);
    let hi = Rational::new(ceil_scaled(&iv.hi, k), BigInt::one() << k as usize);
    Interval { lo, hi }
}

impl Real {
    pub fn from_rational(q: Rational) -> Real {
        Real(Arc::new(Node { kind: Kind::Exact(q), memo: RwLock::new(HashMap::new()) }))
    }

    pub fn from_int(n: i64) -> Real {
        Real::from_rational(Rational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Real {
        Real::from_int(0)
    }

    pub fn one() -> Real {
        Real::from_int(1)
    }

    /// Wraps a raw oracle. The caller guarantees the width and consistency
    /// laws.
    pub fn from_oracle(f: impl Fn(u32) -> Interval + Send + Sync + 'static) -> Real {
        Real(Arc::new(Node { kind: Kind::Oracle(Box::new(f)), memo: RwLock::new(HashMap::new()) }))
    }

    /// The rational value, when this real was built from one exactly.
    pub fn as_rational(&self) -> Option<&Rational> {
        match &self.0.kind {
            Kind::Exact(q) => Some(q),
            Kind::Oracle(_) => None,
        }
    }

    pub fn approx(&self, n: u32) -> Interval {
        let f = match &self.0.kind {
            Kind::Exact(q) => return Interval::point(q.clone()),
            Kind::Oracle(f) => f,
        };
        if let Some(iv) = self.0.memo.read().expect("memo lock").get(&n) {
            return iv.clone();
        }
        let iv = f(n);
        debug_assert!(iv.lo <= iv.hi && iv.width() <= pow2(-(n as i64)), "oracle broke width law at {n}");
        let mut memo = self.0.memo.write().expect("memo lock");
        memo.entry(n).or_insert(iv).clone()
    }

    pub fn lower(&self, n: u32) -> Rational {
        self.approx(n).lo
    }

    pub fn upper(&self, n: u32) -> Rational {
        self.approx(n).hi
    }

    pub fn add(&self, y: &Real) -> Real {
        if let (Some(a), Some(b)) = (self.as_rational(), y.as_rational()) {
            return Real::from_rational(a + b);
        }
        let (x, y) = (self.clone(), y.clone());
        Real::from_oracle(move |n| {
            let (a, b) = (x.approx(n + 2), y.approx(n + 2));
            settle(Interval { lo: a.lo + b.lo, hi: a.hi + b.hi }, n)
        })
    }

    pub fn neg(&self) -> Real {
        if let Some(a) = self.as_rational() {
            return Real::from_rational(-a);
        }
        let x = self.clone();
        Real::from_oracle(move |n| {
            let a = x.approx(n);
            Interval { lo: -a.hi, hi: -a.lo }
        })
    }

    pub fn sub(&self, y: &Real) -> Real {
        self.add(&y.neg())
    }

    pub fn mul(&self, y: &Real) -> Real {
        if let (Some(a), Some(b)) = (self.as_rational(), y.as_rational()) {
            return Real::from_rational(a * b);
        }
        let (x, y) = (self.clone(), y.clone());
        Real::from_oracle(move |n| {
            let bound = x.approx(0).magnitude() + y.approx(0).magnitude() + Rational::from_integer(BigInt::from(2));
            let p = n + 1 + log2_ceil(&bound);
            settle(x.approx(p).mul(&y.approx(p)), n)
        })
    }

    /// Multiplication by an exact rational.
    pub fn scale(&self, q: &Rational) -> Real {
        if let Some(a) = self.as_rational() {
            return Real::from_rational(a * q);
        }
        if q.is_zero() {
            return Real::zero();
        }
        let (x, q) = (self.clone(), q.clone());
        let extra = log2_ceil(&q) + 1;
        Real::from_oracle(move |n| {
            let a = x.approx(n + extra);
            let (l, h) = (&a.lo * &q, &a.hi * &q);
            settle(Interval { lo: rat_inf(&l, &h), hi: rat_sup(&l, &h) }, n)
        })
    }

    pub fn sup(&self, y: &Real) -> Real {
        if let (Some(a), Some(b)) = (self.as_rational(), y.as_rational()) {
            return Real::from_rational(rat_sup(a, b));
        }
        let (x, y) = (self.clone(), y.clone());
        Real::from_oracle(move |n| {
            let (a, b) = (x.approx(n), y.approx(n));
            Interval { lo: rat_sup(&a.lo, &b.lo), hi: rat_sup(&a.hi, &b.hi) }
        })
    }

    pub fn inf(&self, y: &Real) -> Real {
        if let (Some(a), Some(b)) = (self.as_rational(), y.as_rational()) {
            return Real::from_rational(rat_inf(a, b));
        }
        let (x, y) = (self.clone(), y.clone());
        Real::from_oracle(move |n| {
            let (a, b) = (x.approx(n), y.approx(n));
            Interval { lo: rat_inf(&a.lo, &b.lo), hi: rat_inf(&a.hi, &b.hi) }
        })
    }

    pub fn abs(&self) -> Real {
        if let Some(a) = self.as_rational() {
            return Real::from_rational(a.abs());
        }
        let x = self.clone();
        Real::from_oracle(move |n| {
            let a = x.approx(n);
            if !a.lo.is_negative() {
                a
            } else if !a.hi.is_positive() {
                Interval { lo: -a.hi, hi: -a.lo }
            } else {
                Interval { lo: Rational::zero(), hi: rat_sup(&-a.lo, &a.hi) }
            }
        })
    }

    /// Clamps negative approximations to zero; for values known to be `≥ 0`.
    pub fn nonneg(&self) -> Real {
        if self.as_rational().is_some() {
            return self.clone();
        }
        let x = self.clone();
        Real::from_oracle(move |n| x.approx(n).clamp_nonneg())
    }

    /// Checks an apartness witness against this number.
    pub fn check_apart(&self, w: Apartness) -> bool {
        let iv = self.approx(w.n + 2);
        let eps = pow2(-(w.n as i64));
        iv.lo >= eps || iv.hi <= -eps
    }

    pub fn recip(&self, w: Apartness) -> Result<Real> {
        if !self.check_apart(w) {
            return Err(Error::Witness(format!("interval at precision {} meets (-2^-{}, 2^-{})", w.n + 2, w.n, w.n)));
        }
        if let Some(a) = self.as_rational() {
            return Ok(Real::from_rational(a.recip()));
        }
        let x = self.clone();
        let wn = w.n;
        Ok(Real::from_oracle(move |n| {
            // |x| ≥ 2^-w, so every point of a finer interval has |t| ≥ 2^-(w+1).
            let p = (n + 3 + 2 * wn).max(wn + 2);
            let a = x.approx(p);
            let (l, h) = (a.hi.recip(), a.lo.recip());
            settle(Interval { lo: l, hi: h }, n)
        }))
    }

    /// The limit of a Cauchy sequence.
    pub fn limit(s: &RealSeq) -> Real {
        let s = s.clone();
        Real::from_oracle(move |n| {
            let t = (s.term)((s.modulus)(n + 2));
            settle(t.approx(n + 2).pad(&pow2(-(n as i64) - 2)), n)
        })
    }

    /// Renders the midpoint of a fine approximation with `digits` decimals,
    /// followed by an upper bound on the error.
    pub fn render(&self, digits: usize) -> String {
        let p = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 2;
        let iv = self.approx(p);
        let mid = iv.mid();
        let shown = format_decimal(&mid, digits);
        let shown_q = crate::numerics::parse_decimal(&shown);
        let err = iv.radius() + (&mid - &shown_q).abs();
        if err.is_zero() {
            format!("{shown} ± 0")
        } else {
            format!("{shown} ± {}", format_decimal_up(&err, digits))
        }
    }
}

/// Decides `x < y`, `x > y`, or `|x − y| < 2⁻ⁿ⁺¹` from approximations at
/// precision `n + 2`.
pub fn approx_compare(x: &Real, y: &Real, n: u32) -> Comparison {
    let (a, b) = (x.approx(n + 2), y.approx(n + 2));
    let gap = pow2(-(n as i64));
    if &b.lo - &a.hi > gap {
        Comparison::Less
    } else if &a.lo - &b.hi > gap {
        Comparison::Greater
    } else {
        Comparison::Within
    }
}

/// Least `n ≤ max_n` certifying `|x| ≥ 2⁻ⁿ`.
pub fn find_apartness(x: &Real, max_n: u32) -> Option<Apartness> {
    (0..=max_n).map(|n| Apartness { n }).find(|&w| x.check_apart(w))
}

impl From<Rational> for Real {
    fn from(q: Rational) -> Real {
        Real::from_rational(q)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(q) => write!(f, "Real({q})"),
            None => write!(f, "Real(≈{})", self.approx(16)),
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                Real::$m(self, rhs)
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                Real::$m(&self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::neg(self)
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real::neg(&self)
    }
}
