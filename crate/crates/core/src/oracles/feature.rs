use std::collections::HashMap;

use sha2::{Digest, Sha256};

use super::distribution::InputDistribution;
use super::owp::OwpInstance;
use crate::error::{Error, Result};
use crate::linalg::{BitMatrix, BitVector};

/// Largest permutation domain for which the inverse table is precomputed.
const INVERSE_TABLE_LIMIT: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    Table,
    Linear,
    OwpInverse,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Table => "table",
            FeatureKind::Linear => "linear",
            FeatureKind::OwpInverse => "owp-inverse",
        }
    }
}

#[derive(Clone, Debug)]
enum Repr {
    Table(HashMap<BitVector, BitVector>),
    /// `x -> x^T G` for an `n x d` generator.
    Linear(BitMatrix),
    /// `x -> y` with `forward(y) = x`. The table is one full forward sweep of
    /// the domain, i.e. brute-force inversion amortized over all queries.
    OwpInverse {
        inst: OwpInstance,
        table: Option<HashMap<BitVector, BitVector>>,
    },
}

/// An exact feature map `f: {0,1}^n -> F_2^d`.
#[derive(Clone, Debug)]
pub struct FeatureMap {
    n: usize,
    d: usize,
    repr: Repr,
    id: String,
}

fn fingerprint(parts: &[String]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update(b"\n");
    }
    let digest = h.finalize();
    digest[..4].iter().map(|b| format!("{b:02x}")).collect()
}

impl FeatureMap {
    pub fn table(n: usize, d: usize, entries: HashMap<BitVector, BitVector>) -> Result<Self> {
        for (x, y) in &entries {
            if x.len() != n || y.len() != d {
                return Err(Error::DimensionMismatch(format!(
                    "table entry {x} -> {y} in a {n} -> {d} map"
                )));
            }
        }
        let mut lines: Vec<String> = entries.iter().map(|(x, y)| format!("{x} {y}")).collect();
        lines.sort();
        let id = format!("table-{n}x{d}-{}", fingerprint(&lines));
        Ok(Self { n, d, repr: Repr::Table(entries), id })
    }

    pub fn linear(generator: BitMatrix) -> Self {
        let (n, d) = (generator.rows(), generator.cols());
        let lines: Vec<String> = generator.row_vectors().iter().map(|r| r.to_string()).collect();
        let id = format!("linear-{n}x{d}-{}", fingerprint(&lines));
        Self { n, d, repr: Repr::Linear(generator), id }
    }

    pub fn identity(n: usize) -> Self {
        Self::linear(BitMatrix::identity(n))
    }

    /// Maps every input to the zero feature.
    pub fn zero(n: usize, d: usize) -> Self {
        Self::linear(BitMatrix::zeros(n, d))
    }

    pub fn owp_inverse(inst: OwpInstance) -> Result<Self> {
        let n = inst.n();
        let table = if inst.domain_size() <= INVERSE_TABLE_LIMIT && !inst.has_closed_form_inverse() {
            let mut t = HashMap::with_capacity(inst.domain_size() as usize);
            for y in inst.domain()? {
                t.insert(inst.forward(&y)?, y);
            }
            Some(t)
        } else {
            None
        };
        let mut parts = vec![inst.kind().as_str().to_string()];
        if let Some((p, g)) = inst.modexp_params() {
            parts.push(format!("{p} {g}"));
        }
        if let Some(m) = inst.matrix() {
            parts.extend(m.row_vectors().iter().map(|r| r.to_string()));
        }
        parts.push(n.to_string());
        let id = format!("owp-{}-{n}-{}", inst.kind().as_str(), fingerprint(&parts));
        Ok(Self {
            n,
            d: n,
            repr: Repr::OwpInverse { inst, table },
            id,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> FeatureKind {
        match self.repr {
            Repr::Table(_) => FeatureKind::Table,
            Repr::Linear(_) => FeatureKind::Linear,
            Repr::OwpInverse { .. } => FeatureKind::OwpInverse,
        }
    }

    /// Stable identifier derived from the map's contents.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn owp(&self) -> Option<&OwpInstance> {
        match &self.repr {
            Repr::OwpInverse { inst, .. } => Some(inst),
            _ => None,
        }
    }

    pub fn exact_feature(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.n {
            return Err(Error::OutOfDomain(format!(
                "input of length {} for a map on {} bits",
                x.len(),
                self.n
            )));
        }
        match &self.repr {
            Repr::Table(t) => t
                .get(x)
                .cloned()
                .ok_or_else(|| Error::OutOfDomain(format!("{x} is not in the feature table"))),
            Repr::Linear(g) => g.left_mul(x),
            Repr::OwpInverse { inst, table } => match table {
                Some(t) => t
                    .get(x)
                    .cloned()
                    .ok_or_else(|| Error::NotInImage(format!("{x}"))),
                None => inst.invert(x).map(|inv| inv.preimage),
            }
            .map_err(|e| match e {
                Error::NotInImage(m) => Error::OutOfDomain(format!("{m} is not in the image")),
                other => other,
            }),
        }
    }

    /// Fails unless the map is defined on every support point of `dist`.
    pub fn check_covers(&self, dist: &InputDistribution) -> Result<()> {
        if dist.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "distribution over {} bits for a map on {} bits",
                dist.n(),
                self.n
            )));
        }
        for (x, _) in dist.support() {
            self.exact_feature(x)?;
        }
        Ok(())
    }
}
