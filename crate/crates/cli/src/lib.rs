//! Command implementations behind the `cmetric` binary.
//!
//! Each command returns its stdout and exit code, so the binary is a thin
//! clap wrapper and the commands can be tested in-process.

use std::path::Path;

use cmetric::completion::CompletionPoint;
use cmetric::metric::{FiniteRationalSpace, SeparableSpace};
use cmetric::numerics::{format_decimal, format_decimal_up, parse_rational};
use cmetric::representations::{baire_quotient, hilbert_embed};
use cmetric::spaces::{format_literal, NatSeq};
use cmetric::urysohn::{extend_core, extend_finite_isometry, w_distance, UPoint, UrysohnEmbedding};
use cmetric::verify::{self, Suite};
use cmetric::{Error, Rational, Real, Result};

/// Settings shared by all commands.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub seed: u64,
    pub precision: u32,
    pub stage_bound: u64,
    /// `None` prints rationals exactly.
    pub digits: Option<usize>,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig { seed: 0, precision: 10, stage_bound: 64, digits: None }
    }
}

impl CliConfig {
    pub fn check(&self) -> Result<()> {
        if self.precision == 0 {
            return Err(Error::Domain("precision must be at least 1".into()));
        }
        if self.digits == Some(0) {
            return Err(Error::Domain("digits must be at least 1".into()));
        }
        Ok(())
    }

    fn rational(&self, q: &Rational) -> String {
        match self.digits {
            None => q.to_string(),
            Some(d) => format_decimal(q, d),
        }
    }

    /// `mid ± radius` of the interval at the configured precision.
    fn real(&self, x: &Real) -> String {
        let iv = x.approx(self.precision);
        let digits = self.digits.unwrap_or((self.precision as usize * 3).div_ceil(10) + 1);
        format!("{} ± {}", format_decimal(&iv.mid(), digits), format_decimal_up(&iv.radius(), digits))
    }
}

/// What a command prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { stdout, code: 0 }
    }
}

pub fn load(path: &Path) -> Result<FiniteRationalSpace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    FiniteRationalSpace::load_fms(&text)
}

fn index(x: &FiniteRationalSpace, i: usize) -> Result<usize> {
    if i < x.size() {
        Ok(i)
    } else {
        Err(Error::Domain(format!("index {i} out of range for a space of size {}", x.size())))
    }
}

pub fn cmd_validate(path: &Path, cfg: &CliConfig) -> Result<Outcome> {
    let x = load(path)?;
    Ok(Outcome::ok(format!("OK n={} diameter={}\n", x.size(), cfg.rational(&x.diameter_exact()))))
}

pub fn cmd_dist(path: &Path, i: usize, j: usize, cfg: &CliConfig) -> Result<Outcome> {
    let x = load(path)?;
    Ok(Outcome::ok(format!("{}\n", cfg.rational(x.checked_d(i, j)?))))
}

fn embedding(x: &FiniteRationalSpace) -> Result<(UrysohnEmbedding<FiniteRationalSpace>, Vec<UPoint>)> {
    let e = extend_finite_isometry(x.clone(), Vec::new())?;
    let mut images = Vec::with_capacity(x.size());
    for i in 0..x.size() {
        let img = e.image(i as u64)?.ok_or_else(|| Error::Invariant(format!("no image for point {i}")))?;
        let p = img.as_base().cloned().ok_or_else(|| Error::Invariant(format!("image of point {i} is not a core point")))?;
        images.push(p);
    }
    Ok((e, images))
}

/// Embeds every point into the Urysohn core and rechecks all pairwise
/// distances exactly.
pub fn cmd_urysohn_embed(path: &Path) -> Result<Outcome> {
    let x = load(path)?;
    let (_, images) = embedding(&x)?;
    let mut out = String::new();
    for p in &images {
        out.push_str(&format!("{}\n", p.rep()));
    }
    let mut pairs = 0;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            let d = w_distance(images[i].rep(), images[j].rep());
            if &d != x.d(i, j) {
                return Err(Error::Invariant(format!(
                    "embedding not isometric at ({i}, {j}): {d} != {}",
                    x.d(i, j)
                )));
            }
            pairs += 1;
        }
    }
    out.push_str(&format!("VERIFIED {pairs} pairs\n"));
    Ok(Outcome::ok(out))
}

pub fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    split_list(text)
        .map(|s| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad index `{s}`"))))
        .collect()
}

pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    split_list(text).map(parse_rational).collect()
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// The point at the given exact distances from the images of `base`.
pub fn cmd_urysohn_extend(path: &Path, base: &[usize], dists: &[Rational], cfg: &CliConfig) -> Result<Outcome> {
    let x = load(path)?;
    if base.len() != dists.len() {
        return Err(Error::Domain(format!("{} base points but {} distances", base.len(), dists.len())));
    }
    for &b in base {
        index(&x, b)?;
    }
    let (_, images) = embedding(&x)?;
    let targets: Vec<(UPoint, Rational)> = base.iter().zip(dists).map(|(&b, d)| (images[b].clone(), d.clone())).collect();
    let p = extend_core(&targets)?;
    let mut out = format!("{}\n", p.rep());
    for &b in base {
        out.push_str(&format!("d(·, f({b})) = {}\n", cfg.rational(&w_distance(p.rep(), images[b].rep()))));
    }
    Ok(Outcome::ok(out))
}

/// The first `coords` coordinates of the Hilbert cube image of a point.
pub fn cmd_hilbert(path: &Path, point: usize, coords: usize, cfg: &CliConfig) -> Result<Outcome> {
    let x = load(path)?;
    if x.size() == 0 {
        return Err(Error::Domain("the space is empty".into()));
    }
    index(&x, point)?;
    let e = hilbert_embed(x)?;
    let img = e.apply(&point);
    let parts: Vec<String> = (0..coords).map(|n| cfg.real(&img.at(n))).collect();
    let out = if parts.is_empty() { String::new() } else { format!("{}\n", parts.join(", ")) };
    Ok(Outcome::ok(out))
}

pub enum BaireMode {
    Encode { point: usize },
    Decode { literal: String },
}

pub fn cmd_baire(path: &Path, mode: &BaireMode, cfg: &CliConfig) -> Result<Outcome> {
    let x = load(path)?;
    let n = x.size();
    let q = baire_quotient(x, cfg.stage_bound)?;
    let c = q.completion();
    let bound = |d: Real| cfg.rational(&d.upper(cfg.precision));
    match mode {
        BaireMode::Encode { point } => {
            if *point >= n {
                return Err(Error::Domain(format!("index {point} out of range for a space of size {n}")));
            }
            let p = CompletionPoint::embed(*point);
            let prefix = q.encode_prefix(&p, cfg.stage_bound as usize)?;
            let alpha = NatSeq::eventually_constant(prefix.clone());
            let back = q.decode(&alpha)?;
            Ok(Outcome::ok(format!(
                "{}\nroundtrip distance <= {}\n",
                format_literal(&prefix),
                bound(c.dist(&back, &p))
            )))
        }
        BaireMode::Decode { literal } => {
            let alpha = NatSeq::parse_literal(literal)?;
            let depth = cfg.stage_bound as usize;
            if let Some(k) = q.t_violation(&alpha, depth) {
                return Err(Error::Contract(format!("sequence leaves T at index {k}")));
            }
            let back = q.decode(&alpha)?;
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..n {
                let u = c.dist(&back, &CompletionPoint::embed(i)).upper(cfg.precision);
                if best.as_ref().is_none_or(|(_, b)| &u < b) {
                    best = Some((i, u));
                }
            }
            let (i, u) = best.expect("space is inhabited");
            Ok(Outcome::ok(format!(
                "in T: all prefixes up to length {depth}\nnearest base point {i} at distance <= {}\n",
                cfg.rational(&u)
            )))
        }
    }
}

pub fn cmd_verify(suite: &str, trials: usize, seed: u64) -> Result<Outcome> {
    let report = verify::run(Suite::parse(suite)?, trials, seed);
    Ok(Outcome { stdout: format!("{report}\n"), code: if report.all_passed() { 0 } else { 1 } })
}
