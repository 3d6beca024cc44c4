//! Learning a concept parameter from labeled samples and evaluating the
//! resulting hypothesis.
//!
//! The learner queries the noisy feature oracle once per sample and solves
//! `A(x_m) . s~ = label_m` by Gaussian elimination, taking the solution with
//! all free variables zero. Evaluation is a single oracle query followed by
//! an inner product.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, LearnFailure, Result};
use crate::linalg::{solve_f2, BitMatrix, BitVector};
use crate::oracles::{ExampleOracle, FeatureMap, InputDistribution, NoisyFeatureOracle};

/// Support sizes up to this are summed exactly in [`estimate_error`].
pub const EXACT_ERROR_LIMIT: usize = 1 << 20;

/// Slack used when comparing an oracle's configured parameters against the
/// ones a routine requires.
const PARAM_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LearnParams {
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub m: usize,
    pub mu: f64,
    pub nu: f64,
}

fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParam(format!("{name} = {v} outside (0, 1)")))
    }
}

/// `ceil(x)`, treating values within a few ulps of an integer as that integer
/// so that e.g. `10 / 0.1 - 1` yields 99 regardless of rounding in the division.
fn robust_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

impl LearnParams {
    /// `M = max(1, ceil(D / eps - 1))` samples and `mu = nu = delta / (2M)`.
    pub fn paper(d: usize, epsilon: f64, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::BadParam("feature dimension must be at least 1".into()));
        }
        check_open_unit("epsilon", epsilon)?;
        check_open_unit("delta", delta)?;
        let m = robust_ceil(d as f64 / epsilon - 1.0).max(1.0);
        if m > u32::MAX as f64 {
            return Err(Error::TooLarge(format!("sample count {m}")));
        }
        let m = m as usize;
        let mu = delta / (2.0 * m as f64);
        Ok(Self { d, epsilon, delta, m, mu, nu: mu })
    }

    /// Arbitrary sample count and oracle parameters.
    pub fn custom(d: usize, epsilon: f64, delta: f64, m: usize, mu: f64, nu: f64) -> Self {
        Self { d, epsilon, delta, m, mu, nu }
    }
}

/// Free-standing form of [`LearnParams::paper`].
pub fn paper_params(d: usize, epsilon: f64, delta: f64) -> Result<LearnParams> {
    LearnParams::paper(d, epsilon, delta)
}

/// The hypothesis `h(x) = f(x) . param`, bound to a feature map by id.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    pub param: BitVector,
    pub map_id: String,
}

impl Hypothesis {
    pub fn new(param: BitVector, map_id: impl Into<String>) -> Self {
        Self { param, map_id: map_id.into() }
    }

    pub fn d(&self) -> usize {
        self.param.len()
    }

    /// Noiseless value at `x` under `map`.
    pub fn value(&self, map: &FeatureMap, x: &BitVector) -> Result<bool> {
        map.exact_feature(x)?.dot(&self.param)
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HYP v1 d={} map={} s={}", self.param.len(), self.map_id, self.param)
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut fields = line.split_whitespace();
        if fields.next() != Some("HYP") {
            return Err(Error::parse(1, "expected `HYP` record"));
        }
        match fields.next() {
            Some("v1") => {}
            Some(v) => return Err(Error::VersionMismatch(v.to_string())),
            None => return Err(Error::parse(1, "missing version")),
        }
        let mut take = |key: &str| -> Result<&str> {
            fields
                .next()
                .and_then(|f| f.strip_prefix(key))
                .ok_or_else(|| Error::parse(1, format!("expected `{key}` field")))
        };
        let d: usize = take("d=")?
            .parse()
            .map_err(|_| Error::parse(1, "invalid `d`"))?;
        let map_id = take("map=")?.to_string();
        let param: BitVector = take("s=")?.parse()?;
        if param.len() != d {
            return Err(Error::parse(1, format!("parameter length {} disagrees with d={d}", param.len())));
        }
        if fields.next().is_some() {
            return Err(Error::parse(1, "trailing fields after hypothesis"));
        }
        Ok(Self { param, map_id })
    }
}

fn check_oracle(oracle: &NoisyFeatureOracle, d: usize, mu: f64, nu: f64) -> Result<()> {
    if oracle.map().d() != d {
        return Err(Error::DimensionMismatch(format!(
            "oracle produces {} features, expected {d}",
            oracle.map().d()
        )));
    }
    if oracle.mu() > mu + PARAM_SLACK || oracle.nu() > nu + PARAM_SLACK {
        return Err(Error::BadParam(format!(
            "oracle (mu={}, nu={}) is noisier than required (mu={mu}, nu={nu})",
            oracle.mu(),
            oracle.nu()
        )));
    }
    Ok(())
}

/// Solves the system formed by oracle features of `samples` and their labels.
pub fn learn_from_samples<R: Rng + ?Sized>(
    params: &LearnParams,
    samples: &[(BitVector, bool)],
    oracle: &NoisyFeatureOracle,
    rng: &mut R,
) -> Result<Hypothesis> {
    check_oracle(oracle, params.d, params.mu, params.nu)?;
    let mut rows = Vec::with_capacity(samples.len());
    for (x, _) in samples {
        rows.push(oracle.query(x, rng)?);
    }
    let system = BitMatrix::new(params.d, rows)?;
    let rhs = BitVector::from_bits(samples.iter().map(|(_, label)| *label));
    let outcome = solve_f2(&system, &rhs)?;
    match outcome.particular {
        Some(param) => Ok(Hypothesis::new(param, oracle.map().id())),
        None => Err(Error::Learn(LearnFailure::Inconsistent)),
    }
}

/// Draws `params.m` fresh samples from `ex` and learns from them.
pub fn learn<R: Rng + ?Sized>(
    params: &LearnParams,
    ex: &ExampleOracle,
    oracle: &NoisyFeatureOracle,
    rng: &mut R,
) -> Result<Hypothesis> {
    let samples: Vec<_> = (0..params.m).map(|_| ex.draw(rng)).collect();
    learn_from_samples(params, &samples, oracle, rng)
}

/// One oracle query at `x`, then the inner product with the hypothesis
/// parameter. The oracle must be configured with `mu <= epsilon` and
/// `nu <= delta`.
pub fn evaluate<R: Rng + ?Sized>(
    h: &Hypothesis,
    x: &BitVector,
    oracle: &NoisyFeatureOracle,
    epsilon: f64,
    delta: f64,
    rng: &mut R,
) -> Result<bool> {
    check_oracle(oracle, h.d(), epsilon, delta)?;
    oracle.query(x, rng)?.dot(&h.param)
}

/// Probability mass of inputs where `h` and `c_s` disagree.
///
/// Exact over enumerable supports; otherwise a Monte Carlo estimate from
/// `trials` draws.
pub fn estimate_error<R: Rng + ?Sized>(
    h: &Hypothesis,
    concept_param: &BitVector,
    map: &FeatureMap,
    dist: &InputDistribution,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    // h(x) != c(x) iff f(x) . (s~ + s) = 1
    let diff = h.param.xor(concept_param)?;
    if diff.is_zero() {
        return Ok(0.0);
    }
    if dist.len() <= EXACT_ERROR_LIMIT {
        let mut masses = Vec::new();
        for (x, m) in dist.support() {
            if map.exact_feature(x)?.dot(&diff)? {
                masses.push(*m);
            }
        }
        return Ok(crate::oracles::precise_sum(masses));
    }
    if trials == 0 {
        return Err(Error::BadParam("Monte Carlo error estimate needs trials >= 1".into()));
    }
    let mut wrong = 0usize;
    for _ in 0..trials {
        if map.exact_feature(dist.sample(rng))?.dot(&diff)? {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / trials as f64)
}
