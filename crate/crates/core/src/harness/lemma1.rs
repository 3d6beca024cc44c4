//! Monte Carlo check of the span bound: a fresh feature vector drawn from the
//! same distribution as `M` earlier ones falls outside their span with
//! probability at most `D / (M + 1)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::report::{binomial_sigma, Lemma1Report, Lemma1Row};
use super::run_indexed;
use crate::error::{Error, Result};
use crate::linalg::{BitVector, SpanBasis};
use crate::rng::{self, TrialRng};

pub const MIN_LEMMA1_TRIALS: usize = 10_000;

/// Trials per work unit; cells are split into chunks with their own streams.
const CHUNK: usize = 1_000;

/// Feature-vector distributions over `F_2^D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lemma1Family {
    Uniform,
    /// Each `e_i` with mass `min(1/(M+1), 1/D)`, the zero vector otherwise.
    BasisPlusZero,
    /// Uniform over the span of the first `max(1, D/2)` basis vectors.
    RankDeficient,
    /// Zero with mass `1 - 1/(M+1)`, all-ones with `1/(M+1)`.
    TwoPoint,
    /// Point mass on `e_0`.
    Point,
}

impl Lemma1Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Lemma1Family::Uniform => "uniform",
            Lemma1Family::BasisPlusZero => "basis-plus-zero",
            Lemma1Family::RankDeficient => "rank-deficient",
            Lemma1Family::TwoPoint => "two-point",
            Lemma1Family::Point => "point",
        }
    }

    pub fn shipped() -> [Lemma1Family; 4] {
        [
            Lemma1Family::Uniform,
            Lemma1Family::BasisPlusZero,
            Lemma1Family::RankDeficient,
            Lemma1Family::TwoPoint,
        ]
    }

    fn sample(self, d: usize, m: usize, rng: &mut TrialRng) -> BitVector {
        match self {
            Lemma1Family::Uniform => BitVector::random(d, rng),
            Lemma1Family::BasisPlusZero => {
                let q = (1.0 / (m as f64 + 1.0)).min(1.0 / d as f64);
                let u: f64 = rng.random();
                let i = (u / q) as usize;
                if i < d {
                    BitVector::basis(d, i)
                } else {
                    BitVector::zeros(d)
                }
            }
            Lemma1Family::RankDeficient => {
                let r = (d / 2).max(1);
                BitVector::from_bits((0..d).map(|i| i < r && rng.random::<bool>()))
            }
            Lemma1Family::TwoPoint => {
                if rng.random::<f64>() < 1.0 / (m as f64 + 1.0) {
                    BitVector::ones(d)
                } else {
                    BitVector::zeros(d)
                }
            }
            Lemma1Family::Point => BitVector::basis(d, 0),
        }
    }
}

impl fmt::Display for Lemma1Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Lemma1Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform" => Lemma1Family::Uniform,
            "basis-plus-zero" => Lemma1Family::BasisPlusZero,
            "rank-deficient" => Lemma1Family::RankDeficient,
            "two-point" => Lemma1Family::TwoPoint,
            "point" => Lemma1Family::Point,
            other => return Err(Error::Config(format!("unknown lemma1 family {other:?}"))),
        })
    }
}

/// Whether the last of `m + 1` draws falls outside the span of the rest.
fn fresh_outside_span(family: Lemma1Family, d: usize, m: usize, rng: &mut TrialRng) -> bool {
    let mut basis = SpanBasis::new(d);
    for _ in 0..m {
        basis.insert(&family.sample(d, m, rng));
        if basis.rank() == d {
            return false;
        }
    }
    !basis.contains(&family.sample(d, m, rng))
}

/// One row per `(family, m)` cell, in the order given.
pub fn verify_lemma1(
    d: usize,
    m_values: &[usize],
    families: &[Lemma1Family],
    trials: usize,
    master_seed: u64,
    workers: usize,
) -> Result<Lemma1Report> {
    if trials < MIN_LEMMA1_TRIALS {
        return Err(Error::BadParam(format!("lemma1 needs at least {MIN_LEMMA1_TRIALS} trials, got {trials}")));
    }
    if d == 0 || m_values.contains(&0) {
        return Err(Error::BadParam("lemma1 needs d >= 1 and every m >= 1".into()));
    }
    let cells: Vec<(Lemma1Family, usize)> = families
        .iter()
        .flat_map(|&f| m_values.iter().map(move |&m| (f, m)))
        .collect();
    let chunks = trials.div_ceil(CHUNK);
    let counts = run_indexed(workers, cells.len() * chunks, |job| {
        let (cell, chunk) = (job / chunks, job % chunks);
        let (family, m) = cells[cell];
        let mut rng = rng::stream(rng::derive_seed(master_seed, cell as u64), chunk as u64);
        let size = CHUNK.min(trials - chunk * CHUNK);
        (0..size).filter(|_| fresh_outside_span(family, d, m, &mut rng)).count()
    })?;

    let rows: Vec<Lemma1Row> = cells
        .iter()
        .enumerate()
        .map(|(cell, &(family, m))| {
            let failures: usize = counts[cell * chunks..(cell + 1) * chunks].iter().sum();
            let empirical = failures as f64 / trials as f64;
            let bound = d as f64 / (m as f64 + 1.0);
            let sigma = binomial_sigma(bound.min(1.0), trials);
            Lemma1Row {
                family: family.as_str().to_string(),
                d,
                m,
                trials,
                failures,
                empirical_fail: empirical,
                bound,
                sigma,
                violated: empirical > bound + 3.0 * sigma,
            }
        })
        .collect();
    let passed = rows.iter().all(|r| !r.violated);
    Ok(Lemma1Report {
        master_seed,
        rows,
        passed,
    })
}
