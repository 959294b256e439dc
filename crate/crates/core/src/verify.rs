//! Seeded randomized checks of the module invariants.
//!
//! Every suite draws from a ChaCha generator seeded by the caller, so a
//! report is a pure function of `(suite, trials, seed)`.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::completion::{CompletionPoint, CompletionSpace};
use crate::error::{Error, Result};
use crate::metric::{FiniteRationalSpace, SeparableSpace};
use crate::numerics::{int, pair_square, pow2, rat, tuple_enum, tuple_rank, unpair_square, Rational};
use crate::reals::{find_apartness, Interval, Real, RealSeq};
use crate::representations::{baire_quotient, hilbert_embed};
use crate::spaces::{as_product_point, baire_as_product, baire_space, comparison_dist, first_mismatch, NBullet, NatSeq};
use crate::urysohn::{enumerate_core, extend_core, is_permissible, w_distance, w_distance_uncached, Tuple, UPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Urysohn,
    Reals,
    Spaces,
    Representations,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Suite> {
        match s {
            "urysohn" => Ok(Suite::Urysohn),
            "reals" => Ok(Suite::Reals),
            "spaces" => Ok(Suite::Spaces),
            "representations" => Ok(Suite::Representations),
            "all" => Ok(Suite::All),
            _ => Err(Error::Parse(format!("unknown suite `{s}`"))),
        }
    }
}

/// Pass counts per property, in a fixed order.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    pub first_failure: Option<String>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed == r.total)
    }

    fn record(&mut self, name: &str, results: impl IntoIterator<Item = std::result::Result<(), String>>) {
        let mut row = Row { name: name.to_string(), passed: 0, total: 0, first_failure: None };
        for r in results {
            row.total += 1;
            match r {
                Ok(()) => row.passed += 1,
                Err(m) => {
                    row.first_failure.get_or_insert(m);
                }
            }
        }
        self.rows.push(row);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let tag = if r.passed == r.total { "PASS" } else { "FAIL" };
            write!(f, "{tag} {} {}/{}", r.name, r.passed, r.total)?;
            if let Some(m) = &r.first_failure {
                write!(f, " first failure: {m}")?;
            }
            writeln!(f)?;
        }
        let failed = self.rows.iter().filter(|r| r.passed != r.total).count();
        write!(f, "{} properties, {} failed", self.rows.len(), failed)
    }
}

pub fn run(suite: Suite, trials: usize, seed: u64) -> Report {
    let mut report = Report::default();
    let suites: &[Suite] = match suite {
        Suite::All => &[Suite::Urysohn, Suite::Reals, Suite::Spaces, Suite::Representations],
        ref s => std::slice::from_ref(s),
    };
    for s in suites {
        // Each suite gets its own stream so `all` agrees with the single runs.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match s {
            Suite::Urysohn => urysohn_suite(&mut report, trials, &mut rng),
            Suite::Reals => reals_suite(&mut report, trials, &mut rng),
            Suite::Spaces => spaces_suite(&mut report, trials, &mut rng),
            Suite::Representations => representations_suite(&mut report, trials, &mut rng),
            Suite::All => unreachable!(),
        }
    }
    report
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational `p/q` with `|p| ≤ num`, `1 ≤ q ≤ den`.
pub fn random_rational(rng: &mut impl Rng, num: i64, den: i64) -> Rational {
    rat(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

pub fn random_nonneg(rng: &mut impl Rng, num: i64, den: i64) -> Rational {
    rat(rng.gen_range(0..=num), rng.gen_range(1..=den))
}

/// A random metric on `n` points: positive random weights, closed under
/// shortest paths.
pub fn random_metric(rng: &mut impl Rng, n: usize) -> FiniteRationalSpace {
    let mut m = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rat(rng.gen_range(1..=8), rng.gen_range(1..=4));
            m[i][j] = w.clone();
            m[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &m[i][k] + &m[k][j];
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
    FiniteRationalSpace::from_matrix(m).expect("shortest-path closure is a metric")
}

const ALPHAS: [(i64, i64); 6] = [(0, 1), (1, 2), (1, 1), (3, 2), (2, 1), (3, 1)];

/// An arbitrary tuple, permissible or not, of age at most `age` and length
/// at most 3.
pub fn random_tuple(rng: &mut impl Rng, age: u32) -> Tuple {
    if age == 0 {
        return Tuple::empty();
    }
    let len = rng.gen_range(0..=3);
    let entries = (0..len)
        .map(|_| {
            let sub = rng.gen_range(0..age);
            let (p, q) = ALPHAS[rng.gen_range(0..ALPHAS.len())];
            (random_tuple(rng, sub), rat(p, q))
        })
        .collect();
    Tuple::new(entries).expect("nonnegative entries")
}

/// Points of stage 2 of the core enumeration.
pub fn core_pool() -> &'static [UPoint] {
    static POOL: OnceLock<Vec<UPoint>> = OnceLock::new();
    POOL.get_or_init(|| enumerate_core(2))
}

/// Targets `ω_i = d(p_i, q) + c` for pool points `p_i`, `q`: always
/// permissible.
pub fn random_targets(rng: &mut impl Rng, n: usize) -> Vec<(UPoint, Rational)> {
    let pool = core_pool();
    let q = pool.choose(rng).unwrap();
    let c = rat(rng.gen_range(0..=4), rng.gen_range(1..=2));
    (0..n)
        .map(|_| {
            let p = pool.choose(rng).unwrap().clone();
            let w = w_distance(p.rep(), q.rep()) + &c;
            (p, w)
        })
        .collect()
}

/// A permissible tuple built by extension from random targets.
pub fn random_permissible(rng: &mut impl Rng) -> Tuple {
    let n = rng.gen_range(0..=3);
    extend_core(&random_targets(rng, n)).expect("targets are permissible").rep().clone()
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn urysohn_suite(report: &mut Report, trials: usize, rng: &mut ChaCha8Rng) {
    let triples: Vec<_> = (0..trials).map(|_| [0; 3].map(|_| random_tuple(rng, 3))).collect();
    report.record(
        "urysohn/triangle",
        triples.iter().map(|[a, b, c]| {
            check(w_distance(a, b) + w_distance(b, c) >= w_distance(a, c), || format!("{a} {b} {c}"))
        }),
    );
    report.record(
        "urysohn/symmetry",
        triples.iter().map(|[a, b, _]| check(w_distance(a, b) == w_distance(b, a), || format!("{a} {b}"))),
    );
    report.record(
        "urysohn/memo-transparency",
        triples.iter().map(|[a, b, _]| {
            check(w_distance(a, b) == w_distance_uncached(a, b), || format!("{a} {b}"))
        }),
    );

    let perm: Vec<Tuple> = (0..trials).map(|_| random_permissible(rng)).collect();
    report.record(
        "urysohn/self-distance",
        perm.iter().map(|a| {
            let ok = w_distance(a, a).is_zero()
                && a.entries().iter().all(|(ai, alpha)| &w_distance(a, ai) == alpha);
            check(ok, || a.to_string())
        }),
    );
    report.record(
        "urysohn/encoding-roundtrip",
        perm.iter().map(|a| check(Tuple::decode(&a.encode()).as_ref() == Ok(a), || a.to_string())),
    );

    // Perturbing predecessors and targets moves the tuple by at most the sum
    // of the two perturbations.
    let pairs: Vec<_> = (0..trials)
        .map(|_| {
            let n = rng.gen_range(1..=3);
            (random_targets(rng, n), random_targets(rng, n))
        })
        .collect();
    report.record(
        "urysohn/perturbation-bound",
        pairs.iter().map(|(s, t)| {
            let a = extend_core(s).unwrap();
            let b = extend_core(t).unwrap();
            let e1 = s.iter().zip(t).map(|(x, y)| w_distance(x.0.rep(), y.0.rep())).max().unwrap();
            let e2 = s.iter().zip(t).map(|(x, y)| (&x.1 - &y.1).abs()).max().unwrap();
            check(w_distance(a.rep(), b.rep()) <= &e1 + &e2, || format!("{} {}", a.rep(), b.rep()))
        }),
    );
    report.record(
        "urysohn/zero-perturbation",
        pairs.iter().map(|(s, _)| {
            let a = extend_core(s).unwrap();
            let moved: Vec<(UPoint, Rational)> = s
                .iter()
                .map(|(p, w)| (UPoint::new(Tuple::new(vec![(p.rep().clone(), int(0))]).unwrap()).unwrap(), w.clone()))
                .collect();
            let b = extend_core(&moved).unwrap();
            check(w_distance(a.rep(), b.rep()).is_zero(), || format!("{} {}", a.rep(), b.rep()))
        }),
    );
    report.record(
        "urysohn/extension-exact",
        pairs.iter().map(|(s, _)| {
            let a = extend_core(s).unwrap();
            let ok = is_permissible(a.rep()) && s.iter().all(|(p, w)| &w_distance(a.rep(), p.rep()) == w);
            check(ok, || a.rep().to_string())
        }),
    );
}

/// A real equal to `q` that hides its exact value from the fast paths.
pub fn opaque(q: Rational) -> Real {
    Real::from_oracle(move |n| Interval::point(q.clone()).pad(&pow2(-(n as i64) - 1)))
}

fn encloses(x: &Real, q: &Rational, n: u32) -> bool {
    let iv = x.approx(n);
    iv.contains(q) && iv.width() <= pow2(-(n as i64))
}

fn reals_suite(report: &mut Report, trials: usize, rng: &mut ChaCha8Rng) {
    const P: u32 = 16;
    let pairs: Vec<(Rational, Rational)> =
        (0..trials).map(|_| (random_rational(rng, 1000, 1000), random_rational(rng, 1000, 1000))).collect();
    type Op = (&'static str, fn(&Real, &Real) -> Real, fn(&Rational, &Rational) -> Rational);
    let ops: [Op; 6] = [
        ("add", |x, y| x.add(y), |a, b| a + b),
        ("sub", |x, y| x.sub(y), |a, b| a - b),
        ("mul", |x, y| x.mul(y), |a, b| a * b),
        ("sup", |x, y| x.sup(y), |a, b| a.max(b).clone()),
        ("inf", |x, y| x.inf(y), |a, b| a.min(b).clone()),
        ("abs-diff", |x, y| x.sub(y).abs(), |a, b| (a - b).abs()),
    ];
    for (name, lifted, exact) in ops {
        report.record(
            &format!("reals/{name}"),
            pairs.iter().map(|(a, b)| {
                let v = lifted(&opaque(a.clone()), &opaque(b.clone()));
                check(encloses(&v, &exact(a, b), P), || format!("{a} {b}"))
            }),
        );
    }
    report.record(
        "reals/div",
        pairs.iter().filter(|(_, b)| !b.is_zero()).map(|(a, b)| {
            let y = opaque(b.clone());
            let r = find_apartness(&y, 40).ok_or_else(|| format!("no apartness for {b}"))?;
            let v = opaque(a.clone()).mul(&y.recip(r).map_err(|e| e.to_string())?);
            check(encloses(&v, &(a / b), P), || format!("{a} {b}"))
        }),
    );
    report.record(
        "reals/limit-of-constant",
        pairs.iter().map(|(a, _)| {
            let v = Real::limit(&RealSeq::constant(opaque(a.clone())));
            check(encloses(&v, a, P), || a.to_string())
        }),
    );
}

/// An eventually constant sequence with a short random prefix, and a second
/// one agreeing with it on a random initial segment.
pub fn random_sequence_pair(rng: &mut impl Rng) -> (Vec<u64>, Vec<u64>) {
    let len = rng.gen_range(1..=8);
    let a: Vec<u64> = (0..len).map(|_| rng.gen_range(0..3)).collect();
    let keep = rng.gen_range(0..=len);
    let mut b: Vec<u64> = a[..keep].to_vec();
    let extra = rng.gen_range(0..=8 - keep.min(8));
    b.extend((0..extra.max(1)).map(|_| rng.gen_range(0..3)));
    (a, b)
}

fn spaces_suite(report: &mut Report, trials: usize, rng: &mut ChaCha8Rng) {
    let pairs: Vec<_> = (0..trials).map(|_| random_sequence_pair(rng)).collect();
    report.record(
        "spaces/prefix-law",
        pairs.iter().map(|(a, b)| {
            let (x, y) = (NatSeq::eventually_constant(a.clone()), NatSeq::eventually_constant(b.clone()));
            let limit = a.len().max(b.len()) + 1;
            // Past the longer prefix both sequences are constant.
            let exact = match first_mismatch(&x, &y, limit) {
                Some(k) => pow2(-(k as i64)),
                None => Rational::zero(),
            };
            let d = comparison_dist(&x, &y);
            for n in 0..=limit + 2 {
                let agree = (0..n).all(|k| x.term(k) == y.term(k));
                if agree != (exact <= pow2(-(n as i64))) || !d.approx(n as u32).contains(&exact) {
                    return Err(format!("{a:?} {b:?} n={n}"));
                }
            }
            Ok(())
        }),
    );
    let product = baire_as_product();
    let space = baire_space();
    report.record(
        "spaces/product-agreement",
        pairs.iter().map(|(a, b)| {
            let (x, y) = (NatSeq::eventually_constant(a.clone()), NatSeq::eventually_constant(b.clone()));
            let fast = space.dist(&x, &y).approx(14);
            let slow = product.dist(&as_product_point(&x), &as_product_point(&y)).approx(14);
            check((fast.mid() - slow.mid()).abs() <= pow2(-12), || format!("{a:?} {b:?}"))
        }),
    );
    let ns: Vec<u64> = (0..trials).map(|_| rng.gen_range(0..1_000_000)).collect();
    report.record(
        "spaces/pairing-roundtrip",
        ns.iter().map(|&n| {
            let (i, j) = pair_square(n);
            let ok = unpair_square(i, j) == n && (1..=3).all(|ar| tuple_rank(&tuple_enum(ar, n)) == n);
            check(ok, || n.to_string())
        }),
    );
    report.record(
        "spaces/nbullet-pred-succ",
        ns.iter().map(|&n| {
            let t = NBullet::of_nat(n % 50);
            let back = t.succ().pred();
            check(back.seq().prefix(60) == t.seq().prefix(60), || n.to_string())
        }),
    );
}

fn representations_suite(report: &mut Report, trials: usize, rng: &mut ChaCha8Rng) {
    let spaces: Vec<FiniteRationalSpace> = (0..trials)
        .map(|_| {
            let n = rng.gen_range(1..=4);
            random_metric(rng, n)
        })
        .collect();
    report.record(
        "representations/hilbert-sandwich",
        spaces.iter().map(|x| {
            let e = hilbert_embed(x.clone()).map_err(|e| e.to_string())?;
            let c = e.c().approx(20);
            let slack = pow2(-10);
            for i in 0..x.size() {
                for j in 0..x.size() {
                    let d = x.d(i, j);
                    let de = e.cube().dist(&e.apply(&i), &e.apply(&j)).approx(12);
                    let low = &c.lo * d * d / int(32) - &slack;
                    let high = &c.hi * d + &slack;
                    if de.hi < low || de.lo > high {
                        return Err(format!("pair ({i}, {j}) of\n{}", x.to_fms()));
                    }
                }
            }
            Ok(())
        }),
    );
    report.record(
        "representations/quotient-roundtrip",
        spaces.iter().map(|x| quotient_roundtrip(x, 8).map_err(|e| e.to_string())?),
    );
}

/// Checks `d(decode(encode(x)), x) ≤ 2⁻ᵖ` for every point of a finite space.
pub fn quotient_roundtrip(x: &FiniteRationalSpace, p: u32) -> Result<std::result::Result<(), String>> {
    let q = baire_quotient(x.clone(), 64)?;
    let c: CompletionSpace<FiniteRationalSpace> = q.completion();
    for i in 0..x.size() {
        let pt = CompletionPoint::embed(i);
        let back = q.decode(&q.encode(&pt))?;
        if c.dist(&back, &pt).upper(p) > pow2(-(p as i64)) {
            return Ok(Err(format!("point {i} of\n{}", x.to_fms())));
        }
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_metrics_are_valid() {
        let mut r = rng(7);
        for _ in 0..20 {
            let n = r.gen_range(1..=6);
            let x = random_metric(&mut r, n);
            assert_eq!(x.size(), n);
        }
    }

    #[test]
    fn random_targets_are_permissible() {
        let mut r = rng(3);
        for _ in 0..20 {
            assert!(is_permissible(&random_permissible(&mut r)));
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run(Suite::Spaces, 20, 11).to_string();
        let b = run(Suite::Spaces, 20, 11).to_string();
        assert_eq!(a, b);
        assert!(run(Suite::Reals, 20, 5).all_passed());
    }
}
