//! Reconstructing a feature vector bit by bit from hypotheses for the
//! standard-basis concepts.
//!
//! For the basis parameter `e_k`, the concept `c_{e_k}(x) = f(x) . e_k` is
//! bit `k` of `f(x)`. Given an advice string holding hypotheses for all `d`
//! basis concepts and an evaluator for those hypotheses, the estimate of
//! `f(x)` is the vector of the `d` evaluated bits.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{Error, Result};
use crate::learner::{estimate_error, Hypothesis};
use crate::linalg::BitVector;
use crate::oracles::{build_hard_set, FeatureMap, HardSet, InputDistribution};

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionParams {
    pub d: usize,
    pub mu: f64,
    pub nu: f64,
    pub eps_learn: f64,
    /// Only feeds the existence argument for the advice; unused at runtime.
    pub delta_learn: f64,
    pub eps_eval: f64,
    pub delta_eval: f64,
}

impl ReductionParams {
    pub fn new(d: usize, mu: f64, nu: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::BadParam("dimension must be at least 1".into()));
        }
        for (name, v) in [("mu", mu), ("nu", nu)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::BadParam(format!("{name} = {v} outside (0, 1)")));
            }
        }
        let d_f = d as f64;
        Ok(Self {
            d,
            mu,
            nu,
            eps_learn: mu / (2.0 * d_f),
            delta_learn: 0.5,
            eps_eval: mu / (2.0 * d_f),
            delta_eval: nu / d_f,
        })
    }
}

pub fn reduction_params(d: usize, mu: f64, nu: f64) -> Result<ReductionParams> {
    ReductionParams::new(d, mu, nu)
}

/// Hypotheses for the `d` standard-basis concepts, in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct AdviceString {
    pub d: usize,
    pub reps: Vec<Hypothesis>,
    /// Measured error of each entry against its basis concept.
    pub entry_errors: Vec<f64>,
}

impl AdviceString {
    pub fn total_bits(&self) -> usize {
        self.reps.iter().map(Hypothesis::d).sum()
    }

    pub fn write<W: Write>(&self, mut sink: W) -> Result<()> {
        writeln!(sink, "ADV v1 d={}", self.d)?;
        for h in &self.reps {
            writeln!(sink, "{h}")?;
        }
        Ok(())
    }

    /// Reads the advice file. Entry errors are not stored in the file and
    /// come back as `NaN`.
    pub fn read<R: BufRead>(source: R) -> Result<Self> {
        let mut lines = source.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(1, "empty advice file"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("ADV") {
            return Err(Error::parse(1, "expected `ADV` header"));
        }
        match fields.next() {
            Some("v1") => {}
            Some(v) => return Err(Error::VersionMismatch(v.to_string())),
            None => return Err(Error::parse(1, "missing version")),
        }
        let d: usize = fields
            .next()
            .and_then(|f| f.strip_prefix("d="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(1, "expected `d=<int>`"))?;
        let mut reps = Vec::with_capacity(d);
        for k in 0..d {
            let lineno = k + 2;
            let line = lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::parse(lineno, "missing hypothesis line"))?;
            let h: Hypothesis = line.parse().map_err(|e| match e {
                Error::Parse { message, .. } => Error::parse(lineno, message),
                other => other,
            })?;
            if h.d() != d {
                return Err(Error::parse(lineno, format!("hypothesis of dimension {} in d={d} advice", h.d())));
            }
            reps.push(h);
        }
        Ok(Self {
            d,
            reps,
            entry_errors: vec![f64::NAN; d],
        })
    }
}

/// The exact basis hypotheses `h_{e_k} = c_{e_k}` for `map`.
pub fn exact_basis_hypotheses(map: &FeatureMap) -> impl Fn(usize) -> Result<Hypothesis> + '_ {
    move |k| Ok(Hypothesis::new(BitVector::basis(map.d(), k), map.id()))
}

/// Collects one hypothesis per basis vector from `source` and checks each
/// against its basis concept; any entry with error above `eps_learn` is a
/// `SourceFailure`.
pub fn build_advice<F>(
    map: &FeatureMap,
    dist: &InputDistribution,
    params: &ReductionParams,
    mut source: F,
) -> Result<AdviceString>
where
    F: FnMut(usize) -> Result<Hypothesis>,
{
    let d = map.d();
    if params.d != d {
        return Err(Error::DimensionMismatch(format!(
            "reduction parameters for d={} with a {d}-feature map",
            params.d
        )));
    }
    let mut reps = Vec::with_capacity(d);
    let mut entry_errors = Vec::with_capacity(d);
    // fixed stream; only used if the support is too large to enumerate
    let mut rng = crate::rng::stream(0, 0);
    for k in 0..d {
        let h = source(k).map_err(|e| Error::SourceFailure { entry: k, reason: e.to_string() })?;
        if h.d() != d {
            return Err(Error::SourceFailure {
                entry: k,
                reason: format!("hypothesis of dimension {}", h.d()),
            });
        }
        let err = estimate_error(&h, &BitVector::basis(d, k), map, dist, 100_000, &mut rng)?;
        if err > params.eps_learn {
            return Err(Error::SourceFailure {
                entry: k,
                reason: format!("error {err} exceeds eps_learn = {}", params.eps_learn),
            });
        }
        reps.push(h);
        entry_errors.push(err);
    }
    Ok(AdviceString { d, reps, entry_errors })
}

/// Evaluates one hypothesis representation at an input.
pub trait HypothesisEvaluator {
    fn evaluate(
        &self,
        entry: usize,
        x: &BitVector,
        rep: &Hypothesis,
        eps_eval: f64,
        delta_eval: f64,
        rng: &mut dyn rand::RngCore,
    ) -> Result<bool>;
}

impl<F> HypothesisEvaluator for F
where
    F: Fn(usize, &BitVector, &Hypothesis, &mut dyn rand::RngCore) -> Result<bool>,
{
    fn evaluate(
        &self,
        entry: usize,
        x: &BitVector,
        rep: &Hypothesis,
        _eps_eval: f64,
        _delta_eval: f64,
        rng: &mut dyn rand::RngCore,
    ) -> Result<bool> {
        self(entry, x, rep, rng)
    }
}

/// The noiseless evaluator `h(x) = f(x) . param`.
#[derive(Clone, Copy, Debug)]
pub struct ExactEvaluator<'a> {
    pub map: &'a FeatureMap,
}

impl HypothesisEvaluator for ExactEvaluator<'_> {
    fn evaluate(
        &self,
        _entry: usize,
        x: &BitVector,
        rep: &Hypothesis,
        _eps_eval: f64,
        _delta_eval: f64,
        _rng: &mut dyn rand::RngCore,
    ) -> Result<bool> {
        rep.value(self.map, x)
    }
}

/// An evaluator obeying the per-entry `(eps_eval, delta_eval)` contract at
/// its worst: for entry `k` it always answers wrong on a hard set of mass at
/// most `eps_eval`, and elsewhere flips the exact answer with probability
/// `delta_eval`.
#[derive(Clone, Debug)]
pub struct ContractEvaluator<'a> {
    map: &'a FeatureMap,
    delta_eval: f64,
    hard_sets: Vec<HardSet>,
}

impl<'a> ContractEvaluator<'a> {
    pub fn new(map: &'a FeatureMap, dist: &InputDistribution, params: &ReductionParams, seed: u64) -> Result<Self> {
        let hard_sets = (0..params.d)
            .map(|k| build_hard_set(dist, params.eps_eval, crate::rng::derive_seed(seed, k as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            map,
            delta_eval: params.delta_eval,
            hard_sets,
        })
    }

    pub fn hard_sets(&self) -> &[HardSet] {
        &self.hard_sets
    }
}

impl HypothesisEvaluator for ContractEvaluator<'_> {
    fn evaluate(
        &self,
        entry: usize,
        x: &BitVector,
        rep: &Hypothesis,
        _eps_eval: f64,
        _delta_eval: f64,
        rng: &mut dyn rand::RngCore,
    ) -> Result<bool> {
        let exact = rep.value(self.map, x)?;
        let hard = self.hard_sets.get(entry).is_some_and(|h| h.contains(x));
        let flip = hard || rng.random::<f64>() < self.delta_eval;
        Ok(exact ^ flip)
    }
}

/// Assembles the estimate of `f(x)` from the `d` evaluated basis hypotheses.
pub fn reduce_evaluate<E, R>(
    advice: &AdviceString,
    x: &BitVector,
    evaluator: &E,
    params: &ReductionParams,
    rng: &mut R,
) -> Result<BitVector>
where
    E: HypothesisEvaluator + ?Sized,
    R: rand::RngCore,
{
    let mut out = BitVector::zeros(advice.d);
    for (k, rep) in advice.reps.iter().enumerate() {
        let bit = evaluator
            .evaluate(k, x, rep, params.eps_eval, params.delta_eval, rng)
            .map_err(|e| Error::EvaluatorFailure { entry: k, reason: e.to_string() })?;
        out.set(k, bit);
    }
    Ok(out)
}
