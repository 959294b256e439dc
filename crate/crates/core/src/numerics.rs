//! Exact rationals and the pairing bijections on the naturals.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

/// Binary operations on rationals, as accepted by [`rat_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatOp {
    Add,
    Sub,
    Mul,
    Div,
    Sup,
    Inf,
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^k` for any integer `k`.
pub fn pow2(k: i64) -> Rational {
    let p = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

pub fn rat_arith(op: RatOp, a: &Rational, b: &Rational) -> Result<Rational> {
    Ok(match op {
        RatOp::Add => a + b,
        RatOp::Sub => a - b,
        RatOp::Mul => a * b,
        RatOp::Div => checked_div(a, b)?,
        RatOp::Sup => rat_sup(a, b),
        RatOp::Inf => rat_inf(a, b),
    })
}

pub fn checked_div(a: &Rational, b: &Rational) -> Result<Rational> {
    if b.is_zero() {
        return Err(Error::Domain(format!("division of {a} by zero")));
    }
    Ok(a / b)
}

pub fn rat_sup(a: &Rational, b: &Rational) -> Rational {
    if a >= b { a.clone() } else { b.clone() }
}

pub fn rat_inf(a: &Rational, b: &Rational) -> Rational {
    if a <= b { a.clone() } else { b.clone() }
}

pub fn rat_cmp(a: &Rational, b: &Rational) -> Ordering {
    a.cmp(b)
}

/// Parses `[+-]digits[/digits]`; the denominator must be positive.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("malformed rational `{text}`"));
    let (neg, body) = match text.as_bytes().first() {
        Some(b'-') => (true, &text[1..]),
        Some(b'+') => (false, &text[1..]),
        _ => (false, text),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let digits = |s: &str| -> Result<BigUint> {
        if s.is_empty() || !s.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse::<BigUint>().map_err(|_| bad())
    };
    let n = BigInt::from(digits(num)?);
    let d = match den {
        Some(d) => {
            let d = digits(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{text}`")));
            }
            BigInt::from(d)
        }
        None => BigInt::one(),
    };
    let q = Rational::new(n, d);
    Ok(if neg { -q } else { q })
}

/// Floor of `q · 2^k` as an integer.
pub fn floor_scaled(q: &Rational, k: u32) -> BigInt {
    (q.numer() << k as usize).div_floor(q.denom())
}

/// Ceiling of `q · 2^k` as an integer.
pub fn ceil_scaled(q: &Rational, k: u32) -> BigInt {
    -((-q.numer() << k as usize).div_floor(q.denom()))
}

/// Smallest `k` with `|q| ≤ 2^k`, clamped below at 0.
pub fn log2_ceil(q: &Rational) -> u32 {
    let a = q.abs();
    if a <= Rational::one() {
        return 0;
    }
    let c = a.ceil().to_integer();
    let bits = c.bits() as u32;
    if c == BigInt::one() << (bits - 1) { bits - 1 } else { bits }
}

/// Decimal expansion of `q` with `digits` fractional digits, rounding half
/// away from zero.
pub fn format_decimal(q: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = q * Rational::from_integer(scale);
    let r = scaled.abs().round().to_integer();
    decimal_digits(&r, q.is_negative() && !r.is_zero(), digits)
}

/// Like [`format_decimal`] for nonnegative `q`, rounding up.
pub fn format_decimal_up(q: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let r = (q * Rational::from_integer(scale)).ceil().to_integer();
    decimal_digits(&r, false, digits)
}

fn decimal_digits(r: &BigInt, neg: bool, digits: usize) -> String {
    let s = r.to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (whole, frac) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 { format!("{sign}{whole}") } else { format!("{sign}{whole}.{frac}") }
}

/// Inverse of [`format_decimal`] for its own output.
pub fn parse_decimal(text: &str) -> Rational {
    let (neg, body) = match text.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, text),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits: BigInt = format!("{whole}{frac}").parse().expect("decimal digits");
    let q = Rational::new(digits, BigInt::from(10u32).pow(frac.len() as u32));
    if neg { -q } else { q }
}

/// `2^n (2m + 1) − 1`.
///
/// Panics if the result does not fit in a `u64`.
pub fn pair_cantor(n: u32, m: u64) -> u64 {
    let odd = (m as u128) * 2 + 1;
    let v = 1u128
        .checked_shl(n)
        .filter(|_| n < 128)
        .and_then(|p| p.checked_mul(odd))
        .map(|v| v - 1)
        .filter(|&v| v <= u64::MAX as u128);
    v.expect("pair_cantor overflows u64") as u64
}

pub fn unpair_cantor(k: u64) -> (u32, u64) {
    let v = k as u128 + 1;
    let n = v.trailing_zeros();
    let m = ((v >> n) - 1) / 2;
    (n, m as u64)
}

/// The square-filling bijection `ℕ → ℕ × ℕ`: the first `k²` naturals land
/// exactly on the `k × k` grid.
pub fn pair_square(n: u64) -> (u64, u64) {
    let r = n.sqrt();
    let first = (n - r * r).min(r);
    let second = ((r + 1) * (r + 1) - n - 1).min(r);
    (first, second)
}

pub fn unpair_square(i: u64, j: u64) -> u64 {
    let m = i.max(j);
    m * m + i + m - j
}

fn checked_pow(base: u64, exp: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Bijection `ℕ → ℕ^arity` enumerating the cubes `(ℕ_{<k})^arity` shell by
/// shell, so its first `k^arity` values are exactly that cube.
///
/// Arity 2 uses the order of [`pair_square`]; other arities list each shell
/// lexicographically.
pub fn tuple_enum(arity: usize, n: u64) -> Vec<u64> {
    assert!(arity >= 1, "tuple_enum needs arity ≥ 1");
    match arity {
        1 => vec![n],
        2 => {
            let (i, j) = pair_square(n);
            vec![i, j]
        }
        _ => {
            // Shell k holds the tuples with maximum coordinate k − 1.
            let k = shell_of(arity, n);
            let mut offset = n - checked_pow(k - 1, arity).expect("inside shell bound");
            let mut hit = false;
            let mut out = Vec::with_capacity(arity);
            for pos in 0..arity {
                let rem = arity - pos - 1;
                let full = checked_pow(k, rem);
                if hit {
                    // An overflowing block size exceeds the offset.
                    if let Some(full) = full {
                        out.push(offset / full);
                        offset %= full;
                    } else {
                        out.push(0);
                    }
                    continue;
                }
                match open_count(k, rem) {
                    Some(0) => {
                        out.push(k - 1);
                        hit = true;
                    }
                    Some(cnt) if offset < (k - 1).saturating_mul(cnt) => {
                        out.push(offset / cnt);
                        offset %= cnt;
                    }
                    Some(cnt) => {
                        offset -= (k - 1) * cnt;
                        out.push(k - 1);
                        hit = true;
                    }
                    // More open tuples than any u64 offset.
                    None => out.push(0),
                }
            }
            out
        }
    }
}

/// Inverse of [`tuple_enum`].
pub fn tuple_rank(t: &[u64]) -> u64 {
    assert!(!t.is_empty(), "tuple_rank needs arity ≥ 1");
    match t.len() {
        1 => t[0],
        2 => unpair_square(t[0], t[1]),
        arity => {
            let k = t.iter().copied().max().unwrap_or(0) + 1;
            let mut rank = checked_pow(k - 1, arity).expect("rank fits u64");
            let mut hit = false;
            for (pos, &c) in t.iter().enumerate() {
                let rem = arity - pos - 1;
                if hit {
                    if c > 0 {
                        rank += c * checked_pow(k, rem).expect("rank fits u64");
                    }
                } else if c == k - 1 {
                    rank += (k - 1) * open_count(k, rem).expect("rank fits u64");
                    hit = true;
                } else if c > 0 {
                    rank += c * open_count(k, rem).expect("rank fits u64");
                }
            }
            rank
        }
    }
}

/// `k^rem − (k−1)^rem`, the number of tuples of length `rem` with
/// coordinates below `k` and at least one equal to `k − 1`.
fn open_count(k: u64, rem: usize) -> Option<u64> {
    match (checked_pow(k, rem), checked_pow(k - 1, rem)) {
        (Some(f), Some(i)) => Some(f - i),
        _ => {
            let big = |b: u64| BigUint::from(b).pow(rem as u32);
            (big(k) - big(k - 1)).to_u64()
        }
    }
}

fn shell_of(arity: usize, n: u64) -> u64 {
    // Least k with n < k^arity.
    let mut k = (n as f64).powf(1.0 / arity as f64).floor() as u64;
    k = k.saturating_sub(2).max(1);
    while checked_pow(k, arity).is_some_and(|p| p <= n) {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_examples() {
        assert_eq!(rat_arith(RatOp::Add, &rat(1, 2), &rat(1, 3)).unwrap(), rat(5, 6));
        assert_eq!(rat_arith(RatOp::Sup, &rat(-2, 3), &rat(1, 5)).unwrap(), rat(1, 5));
        assert!(matches!(
            rat_arith(RatOp::Div, &rat(3, 4), &int(0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_rational("-3/7").unwrap(), rat(-3, 7));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(parse_rational("+6/4").unwrap(), rat(3, 2));
        for bad in ["", "-", "1/0", "1/-2", "a", "1.5", "1/", "/2", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn decimals() {
        assert_eq!(format_decimal(&rat(1, 3), 3), "0.333");
        assert_eq!(format_decimal(&rat(-2, 3), 2), "-0.67");
        assert_eq!(format_decimal(&rat(-1, 1000), 2), "0.00");
        assert_eq!(format_decimal(&int(12), 0), "12");
        assert_eq!(format_decimal_up(&rat(1, 1000), 2), "0.01");
    }

    #[test]
    fn scaled_rounding() {
        assert_eq!(floor_scaled(&rat(-1, 3), 2), BigInt::from(-2));
        assert_eq!(ceil_scaled(&rat(-1, 3), 2), BigInt::from(-1));
        assert_eq!(log2_ceil(&int(4)), 2);
        assert_eq!(log2_ceil(&rat(9, 2)), 3);
        assert_eq!(log2_ceil(&rat(1, 2)), 0);
    }

    #[test]
    fn cantor_examples() {
        assert_eq!(pair_cantor(0, 0), 0);
        assert_eq!(pair_cantor(2, 1), 11);
        assert_eq!(pair_cantor(0, 1), 2);
        assert_eq!(unpair_cantor(0), (0, 0));
        assert_eq!(unpair_cantor(11), (2, 1));
        assert_eq!(unpair_cantor(5), (1, 1));
    }

    #[test]
    fn square_examples() {
        assert_eq!(pair_square(0), (0, 0));
        assert_eq!(pair_square(1), (0, 1));
        assert_eq!(pair_square(4), (0, 2));
        assert_eq!(unpair_square(1, 0), 3);
        assert_eq!(unpair_square(0, 0), 0);
        assert_eq!(unpair_square(0, 2), 4);
    }

    #[test]
    fn tuple_examples() {
        assert_eq!(tuple_enum(1, 7), vec![7]);
        assert_eq!(tuple_enum(2, 3), vec![1, 0]);
        assert_eq!(tuple_enum(3, 0), vec![0, 0, 0]);
        assert_eq!(tuple_enum(3, 1), vec![0, 0, 1]);
        assert_eq!(tuple_enum(3, 7), vec![1, 1, 1]);
    }

    #[test]
    fn tuple_enum_long_arity() {
        // Shell sizes overflow u64 here while the indices stay small.
        for arity in [64, 70, 200] {
            for n in [0, 1, 2, 5, 1000, 123_456_789] {
                let t = tuple_enum(arity, n);
                assert_eq!(t.len(), arity);
                assert!(t.iter().all(|&c| c <= 1 || n >= 1000));
                assert_eq!(tuple_rank(&t), n);
            }
        }
        let mut t = vec![0; 80];
        t[79] = 1;
        assert_eq!(tuple_rank(&t), 1);
    }
}
