use std::collections::HashMap;
use std::io::BufRead;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::BitVector;

/// Tolerance on the total probability mass.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Largest `n` for which [`InputDistribution::uniform`] enumerates the cube.
pub const MAX_UNIFORM_BITS: usize = 20;

/// A distribution over `n`-bit inputs with explicit, finite support.
#[derive(Clone, Debug)]
pub struct InputDistribution {
    n: usize,
    support: Vec<(BitVector, f64)>,
    cumulative: Vec<f64>,
    index: HashMap<BitVector, usize>,
}

/// Compensated (Neumaier) summation.
pub(crate) fn precise_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl InputDistribution {
    pub fn new(n: usize, support: Vec<(BitVector, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::BadParam("distribution with empty support".into()));
        }
        let mut index = HashMap::with_capacity(support.len());
        for (i, (x, mass)) in support.iter().enumerate() {
            if x.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "support point of length {} in a distribution over {n} bits",
                    x.len()
                )));
            }
            if !(mass.is_finite() && *mass > 0.0) {
                return Err(Error::BadParam(format!("mass {mass} of {x} is not positive")));
            }
            if index.insert(x.clone(), i).is_some() {
                return Err(Error::BadParam(format!("duplicate support point {x}")));
            }
        }
        let total = precise_sum(support.iter().map(|(_, m)| *m));
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::BadParam(format!("masses sum to {total}, not 1")));
        }
        let cumulative = support
            .iter()
            .scan(0.0, |acc, (_, m)| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            n,
            support,
            cumulative,
            index,
        })
    }

    /// Normalizes nonnegative weights; zero-weight points are dropped.
    pub fn from_weights(n: usize, weights: Vec<(BitVector, f64)>) -> Result<Self> {
        let total = precise_sum(weights.iter().map(|(_, w)| *w));
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::BadParam(format!("total weight {total} is not positive")));
        }
        let support = weights
            .into_iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(x, w)| (x, w / total))
            .collect();
        Self::new(n, support)
    }

    pub fn point(x: BitVector) -> Self {
        let n = x.len();
        Self::new(n, vec![(x, 1.0)]).expect("point mass is valid")
    }

    /// Uniform over the listed (distinct) points.
    pub fn uniform_over(n: usize, points: Vec<BitVector>) -> Result<Self> {
        let weights = points.into_iter().map(|x| (x, 1.0)).collect();
        Self::from_weights(n, weights)
    }

    /// Uniform over all of `{0,1}^n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_UNIFORM_BITS {
            return Err(Error::TooLarge(format!(
                "uniform support over {n} bits (limit {MAX_UNIFORM_BITS})"
            )));
        }
        let mass = 1.0 / (1u64 << n) as f64;
        let support = (0..1u64 << n)
            .map(|v| (BitVector::from_u64(n, v), mass))
            .collect();
        Self::new(n, support)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[(BitVector, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, x: &BitVector) -> bool {
        self.index.contains_key(x)
    }

    /// Probability of `x`; zero off the support.
    pub fn mass(&self, x: &BitVector) -> f64 {
        self.index.get(x).map_or(0.0, |&i| self.support[i].1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &BitVector {
        let total = *self.cumulative.last().expect("nonempty support");
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        &self.support[i.min(self.support.len() - 1)].0
    }

    /// The image of this distribution under `f`, with masses of colliding
    /// images merged. Support order follows first appearance.
    pub fn pushforward<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&BitVector) -> Result<BitVector>,
    {
        let mut order: Vec<(BitVector, f64)> = Vec::with_capacity(self.support.len());
        let mut seen: HashMap<BitVector, usize> = HashMap::with_capacity(self.support.len());
        let mut n = None;
        for (x, m) in &self.support {
            let y = f(x)?;
            n.get_or_insert(y.len());
            match seen.get(&y) {
                Some(&i) => order[i].1 += m,
                None => {
                    seen.insert(y.clone(), order.len());
                    order.push((y, *m));
                }
            }
        }
        Self::new(n.unwrap_or(0), order)
    }

    /// Reads the text format: one `<len>:<hex> <mass>` pair per line, `#` comments.
    pub fn read<R: BufRead>(source: R) -> Result<Self> {
        let mut support = Vec::new();
        let mut n = None;
        for (lineno, line) in source.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            let (Some(xs), Some(ms), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(lineno, "expected `<bitvector> <mass>`"));
            };
            let x: BitVector = xs
                .parse()
                .map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
            let mass: f64 = ms
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid mass {ms:?}")))?;
            if *n.get_or_insert(x.len()) != x.len() {
                return Err(Error::parse(lineno, "inconsistent bit lengths"));
            }
            support.push((x, mass));
        }
        let n = n.ok_or_else(|| Error::parse(1, "distribution file has no entries"))?;
        Self::new(n, support)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (x, m) in &self.support {
            out.push_str(&format!("{x} {m}\n"));
        }
        out
    }
}
