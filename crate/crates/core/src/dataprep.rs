//! Party A's data-preparation protocols and the sample-set wire format.
//!
//! The quantum-style protocol labels each drawn input with
//! `A(x) . s` for a noisy feature oracle `A`; corrupted labels are silent.
//! The permutation protocol draws `y`, publishes `x = forward(y)` and labels
//! it with `y . s`, which is exact by construction.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::BitVector;
use crate::oracles::{FeatureMap, InputDistribution, NoisyFeatureOracle, OwpInstance, OwpKind};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleKind {
    Exact,
    Noisy,
    OwpModexp,
    OwpIdentity,
    OwpLinear,
}

impl OracleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleKind::Exact => "exact",
            OracleKind::Noisy => "noisy",
            OracleKind::OwpModexp => "owp-modexp",
            OracleKind::OwpIdentity => "owp-identity",
            OracleKind::OwpLinear => "owp-linear",
        }
    }

    fn for_owp(kind: OwpKind) -> Self {
        match kind {
            OwpKind::Identity => OracleKind::OwpIdentity,
            OwpKind::LinearBijection => OracleKind::OwpLinear,
            OwpKind::Modexp => OracleKind::OwpModexp,
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => OracleKind::Exact,
            "noisy" => OracleKind::Noisy,
            "owp-modexp" => OracleKind::OwpModexp,
            "owp-identity" => OracleKind::OwpIdentity,
            "owp-linear" => OracleKind::OwpLinear,
            other => return Err(Error::parse(3, format!("unknown oracle kind {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleMeta {
    pub seed: u64,
    pub oracle: OracleKind,
    pub mu: f64,
    pub nu: f64,
}

/// The `m` labeled pairs party A sends to party B.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSampleSet {
    pub n: usize,
    pub d: usize,
    pub samples: Vec<(BitVector, bool)>,
    pub meta: SampleMeta,
}

impl LabeledSampleSet {
    pub fn m(&self) -> usize {
        self.samples.len()
    }
}

/// Runs the noisy-oracle protocol with `m` draws from `dist`.
///
/// `oracle` must satisfy `mu, nu <= delta / (2m)`. The draws and oracle
/// randomness come from the stream seeded by `seed`, which is recorded in
/// the set's metadata.
pub fn prepare_quantum(
    m: usize,
    s: &BitVector,
    dist: &InputDistribution,
    oracle: &NoisyFeatureOracle,
    delta: f64,
    seed: u64,
) -> Result<LabeledSampleSet> {
    let map = oracle.map();
    if s.len() != map.d() {
        return Err(Error::DimensionMismatch(format!(
            "secret of length {} for {} features",
            s.len(),
            map.d()
        )));
    }
    if m > 0 {
        let bound = delta / (2.0 * m as f64);
        if oracle.mu() > bound * (1.0 + 1e-12) || oracle.nu() > bound * (1.0 + 1e-12) {
            return Err(Error::BadParam(format!(
                "oracle (mu={}, nu={}) exceeds delta/(2m) = {bound}",
                oracle.mu(),
                oracle.nu()
            )));
        }
    }
    let mut rng = rng::stream(seed, 0);
    let mut samples = Vec::with_capacity(m);
    for _ in 0..m {
        let x = dist.sample(&mut rng).clone();
        let label = oracle.query(&x, &mut rng)?.dot(s)?;
        samples.push((x, label));
    }
    Ok(LabeledSampleSet {
        n: map.n(),
        d: map.d(),
        samples,
        meta: SampleMeta {
            seed,
            oracle: if oracle.is_noiseless() { OracleKind::Exact } else { OracleKind::Noisy },
            mu: oracle.mu(),
            nu: oracle.nu(),
        },
    })
}

/// Runs the permutation protocol: `y ~ y_dist`, `x = forward(y)`, label `y . s`.
pub fn prepare_classical_owp(
    m: usize,
    s: &BitVector,
    inst: &OwpInstance,
    y_dist: &InputDistribution,
    seed: u64,
) -> Result<LabeledSampleSet> {
    let n = inst.n();
    if s.len() != n || y_dist.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "secret of length {} and distribution over {} bits for a {n}-bit permutation",
            s.len(),
            y_dist.n()
        )));
    }
    if let Some((y, _)) = y_dist.support().iter().find(|(y, _)| !inst.in_domain(y)) {
        return Err(Error::OutOfDomain(format!("{y} is outside the permutation domain")));
    }
    let mut rng = rng::stream(seed, 0);
    let mut samples = Vec::with_capacity(m);
    for _ in 0..m {
        let y = y_dist.sample(&mut rng);
        samples.push((inst.forward(y)?, y.dot(s)?));
    }
    Ok(LabeledSampleSet {
        n,
        d: n,
        samples,
        meta: SampleMeta {
            seed,
            oracle: OracleKind::for_owp(inst.kind()),
            mu: 0.0,
            nu: 0.0,
        },
    })
}

/// Counts labels that disagree with the ground truth `f(x) . s`.
pub fn verify_sample_set(set: &LabeledSampleSet, s: &BitVector, map: &FeatureMap) -> Result<(usize, Vec<usize>)> {
    if map.d() != s.len() {
        return Err(Error::DimensionMismatch(format!(
            "secret of length {} for {} features",
            s.len(),
            map.d()
        )));
    }
    let mut wrong = Vec::new();
    for (i, (x, label)) in set.samples.iter().enumerate() {
        if map.exact_feature(x)?.dot(s)? != *label {
            wrong.push(i);
        }
    }
    Ok((wrong.len(), wrong))
}

const MAGIC: &str = "PACF2";
const VERSION: &str = "v1";

pub fn write_samples<W: Write>(set: &LabeledSampleSet, mut sink: W) -> Result<()> {
    writeln!(sink, "{MAGIC} {VERSION}")?;
    writeln!(sink, "n={} d={} m={}", set.n, set.d, set.m())?;
    writeln!(
        sink,
        "oracle={} mu={} nu={} seed={}",
        set.meta.oracle, set.meta.mu, set.meta.nu, set.meta.seed
    )?;
    for (x, label) in &set.samples {
        writeln!(sink, "{x} {}", u8::from(*label))?;
    }
    sink.flush()?;
    Ok(())
}

pub fn samples_to_string(set: &LabeledSampleSet) -> String {
    let mut buf = Vec::new();
    write_samples(set, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_fields<'a, const K: usize>(line: &'a str, lineno: usize, keys: [&str; K]) -> Result<[&'a str; K]> {
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.len() != K {
        return Err(Error::parse(lineno, format!("expected {K} fields, got {}", fields.len())));
    }
    let mut out = [""; K];
    for (i, (field, key)) in fields.iter().zip(keys).enumerate() {
        out[i] = field
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| Error::parse(lineno, format!("expected `{key}=`")))?;
    }
    Ok(out)
}

fn parse_num<T: FromStr>(v: &str, lineno: usize, what: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::parse(lineno, format!("invalid {what} {v:?}")))
}

pub fn read_samples<R: BufRead>(source: R) -> Result<LabeledSampleSet> {
    let mut lines = source.lines();
    let mut next_line = |lineno: usize, what: &str| -> Result<String> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(lineno, format!("missing {what}")))
    };

    let header = next_line(1, "header")?;
    match header.split_once(' ') {
        Some((MAGIC, VERSION)) => {}
        Some((MAGIC, other)) => return Err(Error::VersionMismatch(other.to_string())),
        _ => return Err(Error::parse(1, "expected `PACF2 v1` header")),
    }

    let dims = next_line(2, "dimension line")?;
    let [n, d, m] = parse_fields(&dims, 2, ["n", "d", "m"])?;
    let n: usize = parse_num(n, 2, "n")?;
    let d: usize = parse_num(d, 2, "d")?;
    let m: usize = parse_num(m, 2, "m")?;

    let meta = next_line(3, "oracle line")?;
    let [oracle, mu, nu, seed] = parse_fields(&meta, 3, ["oracle", "mu", "nu", "seed"])?;
    let meta = SampleMeta {
        oracle: oracle.parse()?,
        mu: parse_num(mu, 3, "mu")?,
        nu: parse_num(nu, 3, "nu")?,
        seed: parse_num(seed, 3, "seed")?,
    };

    let mut samples = Vec::with_capacity(m.min(1 << 20));
    for i in 0..m {
        let lineno = i + 4;
        let line = next_line(lineno, "sample line")?;
        let (xs, ls) = line
            .split_once(' ')
            .ok_or_else(|| Error::parse(lineno, "expected `<bitvector> <0|1>`"))?;
        let x: BitVector = xs
            .parse()
            .map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
        if x.len() != n {
            return Err(Error::parse(lineno, format!("input of length {} in an n={n} set", x.len())));
        }
        let label = match ls {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(lineno, format!("invalid label {other:?}"))),
        };
        samples.push((x, label));
    }
    if let Some(extra) = lines.next().transpose()? {
        if !extra.is_empty() {
            return Err(Error::parse(m + 4, "trailing data after the last sample"));
        }
    }
    Ok(LabeledSampleSet { n, d, samples, meta })
}
