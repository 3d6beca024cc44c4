//! Permutations that are cheap to evaluate forward and are inverted here only
//! by exhaustive search (or, when flagged, a closed-form inverse).
//!
//! Three families are provided: the identity, invertible linear maps over
//! GF(2)^n, and modular exponentiation `y -> g^y mod p` on `{1, ..., p-1}`
//! for a prime `p` with primitive root `g`. None of them is a secure one-way
//! function at the sizes used here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BitMatrix, BitVector};

/// Largest domain that brute-force inversion will scan.
pub const MAX_BRUTE_FORCE_DOMAIN: u128 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OwpKind {
    Identity,
    LinearBijection,
    Modexp,
}

impl OwpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OwpKind::Identity => "identity",
            OwpKind::LinearBijection => "linear",
            OwpKind::Modexp => "modexp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Identity,
    Linear {
        matrix: BitMatrix,
        inverse: Option<BitMatrix>,
    },
    Modexp {
        p: u64,
        g: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OwpInstance {
    n: usize,
    repr: Repr,
}

/// A preimage together with the number of forward evaluations spent finding it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inversion {
    pub preimage: BitVector,
    pub probes: u64,
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut result: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result as u64
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut v: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= v {
        if v.is_multiple_of(d) {
            out.push(d);
            while v.is_multiple_of(d) {
                v /= d;
            }
        }
        d += 1;
    }
    if v > 1 {
        out.push(v);
    }
    out
}

/// Whether `g` generates the multiplicative group modulo the prime `p`.
pub fn is_generator(g: u64, p: u64) -> bool {
    if g == 0 || g >= p {
        return false;
    }
    if p == 2 {
        return g == 1;
    }
    prime_factors(p - 1)
        .into_iter()
        .all(|q| mod_pow(g, (p - 1) / q, p) != 1)
}

fn bits_for(value: u64) -> usize {
    (64 - value.leading_zeros()) as usize
}

impl OwpInstance {
    pub fn identity(n: usize) -> Self {
        Self { n, repr: Repr::Identity }
    }

    /// `y -> y^T A` for an invertible square `A`. With `closed_form`, inversion
    /// uses the precomputed inverse instead of scanning.
    pub fn linear(matrix: BitMatrix, closed_form: bool) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::BadParam(format!(
                "linear permutation needs a square matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let inverse = matrix
            .inverse()
            .ok_or_else(|| Error::BadParam("linear permutation matrix is singular".into()))?;
        Ok(Self {
            n: matrix.rows(),
            repr: Repr::Linear {
                matrix,
                inverse: closed_form.then_some(inverse),
            },
        })
    }

    /// `y -> g^y mod p` on `{1, ..., p-1}`, encoded in `ceil(log2 p)` bits.
    pub fn modexp(p: u64, g: u64) -> Result<Self> {
        if p >= 1 << 62 {
            return Err(Error::TooLarge(format!("modulus {p}")));
        }
        if !is_prime(p) {
            return Err(Error::BadParam(format!("modulus {p} is not prime")));
        }
        if !is_generator(g, p) {
            return Err(Error::BadParam(format!("{g} does not generate the group mod {p}")));
        }
        Ok(Self {
            n: bits_for(p - 1),
            repr: Repr::Modexp { p, g },
        })
    }

    /// The largest prime below `2^bits` together with its smallest primitive root.
    pub fn modexp_for_bits(bits: usize) -> Result<Self> {
        if !(2..=40).contains(&bits) {
            return Err(Error::BadParam(format!("modexp bit size {bits} outside 2..=40")));
        }
        let mut p = (1u64 << bits) - 1;
        while !is_prime(p) {
            p -= 1;
        }
        let g = (1..p).find(|&g| is_generator(g, p)).expect("prime has a primitive root");
        Self::modexp(p, g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> OwpKind {
        match self.repr {
            Repr::Identity => OwpKind::Identity,
            Repr::Linear { .. } => OwpKind::LinearBijection,
            Repr::Modexp { .. } => OwpKind::Modexp,
        }
    }

    pub fn has_closed_form_inverse(&self) -> bool {
        matches!(self.repr, Repr::Linear { inverse: Some(_), .. })
    }

    pub fn modexp_params(&self) -> Option<(u64, u64)> {
        match self.repr {
            Repr::Modexp { p, g } => Some((p, g)),
            _ => None,
        }
    }

    pub fn matrix(&self) -> Option<&BitMatrix> {
        match &self.repr {
            Repr::Linear { matrix, .. } => Some(matrix),
            _ => None,
        }
    }

    pub fn domain_size(&self) -> u128 {
        match self.repr {
            Repr::Modexp { p, .. } => (p - 1) as u128,
            _ => 1u128.checked_shl(self.n as u32).unwrap_or(u128::MAX),
        }
    }

    /// Domain elements in scan order: `0..2^n`, or `1..p` for modexp.
    pub fn domain(&self) -> Result<impl Iterator<Item = BitVector> + '_> {
        if self.n > 63 {
            return Err(Error::TooLarge(format!("cannot enumerate a {}-bit domain", self.n)));
        }
        let (lo, hi) = match self.repr {
            Repr::Modexp { p, .. } => (1u64, p),
            _ => (0u64, 1u64 << self.n),
        };
        Ok((lo..hi).map(move |v| BitVector::from_u64(self.n, v)))
    }

    pub fn in_domain(&self, y: &BitVector) -> bool {
        if y.len() != self.n {
            return false;
        }
        match self.repr {
            Repr::Modexp { p, .. } => y.to_u64().is_some_and(|v| v >= 1 && v < p),
            _ => true,
        }
    }

    pub fn forward(&self, y: &BitVector) -> Result<BitVector> {
        if !self.in_domain(y) {
            return Err(Error::OutOfDomain(format!("{y} for a {} permutation", self.kind().as_str())));
        }
        Ok(self.forward_unchecked(y))
    }

    fn forward_unchecked(&self, y: &BitVector) -> BitVector {
        match &self.repr {
            Repr::Identity => y.clone(),
            Repr::Linear { matrix, .. } => matrix.left_mul(y).expect("length checked"),
            Repr::Modexp { p, g } => {
                BitVector::from_u64(self.n, mod_pow(*g, y.to_u64().expect("checked"), *p))
            }
        }
    }

    fn check_image_candidate(&self, x: &BitVector) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::OutOfDomain(format!("{x} has length {}, expected {}", x.len(), self.n)));
        }
        if let Repr::Modexp { p, .. } = self.repr {
            if !x.to_u64().is_some_and(|v| v >= 1 && v < p) {
                return Err(Error::NotInImage(format!("{x} is not a unit modulo {p}")));
            }
        }
        Ok(())
    }

    /// Exhaustive inversion: scans the domain in order until `forward(y) == x`.
    pub fn invert_bruteforce(&self, x: &BitVector) -> Result<Inversion> {
        self.check_image_candidate(x)?;
        if self.domain_size() > MAX_BRUTE_FORCE_DOMAIN {
            return Err(Error::TooLarge(format!(
                "domain of size {} exceeds the brute-force limit {MAX_BRUTE_FORCE_DOMAIN}",
                self.domain_size()
            )));
        }
        let mut probes = 0u64;
        for y in self.domain()? {
            probes += 1;
            if &self.forward_unchecked(&y) == x {
                return Ok(Inversion { preimage: y, probes });
            }
        }
        Err(Error::NotInImage(format!("{x} after {probes} probes")))
    }

    /// Inverts with the closed form when one is flagged, otherwise by scanning.
    pub fn invert(&self, x: &BitVector) -> Result<Inversion> {
        match &self.repr {
            Repr::Linear { inverse: Some(inv), .. } => {
                self.check_image_candidate(x)?;
                Ok(Inversion {
                    preimage: inv.left_mul(x)?,
                    probes: 1,
                })
            }
            _ => self.invert_bruteforce(x),
        }
    }
}

/// Configuration form: `kind`, `n`, `p`, `g`, `matrix` (hex rows), `closed_form`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OwpSpec {
    pub kind: String,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub p: Option<u64>,
    #[serde(default)]
    pub g: Option<u64>,
    #[serde(default)]
    pub matrix: Option<Vec<String>>,
    #[serde(default)]
    pub closed_form: bool,
}

impl OwpSpec {
    pub fn build(&self) -> Result<OwpInstance> {
        match self.kind.as_str() {
            "identity" => {
                let n = self
                    .n
                    .ok_or_else(|| Error::Config("identity permutation needs `n`".into()))?;
                Ok(OwpInstance::identity(n))
            }
            "linear" | "linear-bijection" => {
                let rows = self
                    .matrix
                    .as_ref()
                    .ok_or_else(|| Error::Config("linear permutation needs `matrix`".into()))?;
                let n = rows.len();
                let rows = rows
                    .iter()
                    .map(|r| {
                        if r.contains(':') {
                            r.parse::<BitVector>()
                        } else {
                            BitVector::from_hex(n, r)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Config(format!("matrix row: {e}")))?;
                OwpInstance::linear(BitMatrix::new(n, rows)?, self.closed_form)
            }
            "modexp" => {
                let (Some(p), Some(g)) = (self.p, self.g) else {
                    return Err(Error::Config("modexp permutation needs `p` and `g`".into()));
                };
                OwpInstance::modexp(p, g)
            }
            other => Err(Error::Config(format!("unknown permutation kind {other:?}"))),
        }
    }
}
