use std::sync::Arc;

use rand::Rng;

use super::distribution::InputDistribution;
use super::feature::FeatureMap;
use crate::error::{Error, Result};
use crate::linalg::BitVector;

/// The labeled-sample oracle for the concept `c_s(x) = f(x) . s`.
#[derive(Clone, Debug)]
pub struct ExampleOracle {
    dist: Arc<InputDistribution>,
    map: Arc<FeatureMap>,
    concept: BitVector,
}

impl ExampleOracle {
    pub fn new(dist: Arc<InputDistribution>, map: Arc<FeatureMap>, concept: BitVector) -> Result<Self> {
        if concept.len() != map.d() {
            return Err(Error::DimensionMismatch(format!(
                "concept parameter of length {} for {} features",
                concept.len(),
                map.d()
            )));
        }
        map.check_covers(&dist)?;
        Ok(Self { dist, map, concept })
    }

    pub fn dist(&self) -> &Arc<InputDistribution> {
        &self.dist
    }

    pub fn map(&self) -> &Arc<FeatureMap> {
        &self.map
    }

    pub fn concept(&self) -> &BitVector {
        &self.concept
    }

    /// The concept value at `x`.
    pub fn label(&self, x: &BitVector) -> Result<bool> {
        self.map.exact_feature(x)?.dot(&self.concept)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (BitVector, bool) {
        let x = self.dist.sample(rng).clone();
        let label = self.label(&x).expect("map covers the support");
        (x, label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::OwpInstance;
    use crate::rng::stream;

    #[test]
    fn zero_concept_labels_zero() {
        let dist = Arc::new(InputDistribution::uniform(4).unwrap());
        let ex = ExampleOracle::new(dist, Arc::new(FeatureMap::identity(4)), BitVector::zeros(4)).unwrap();
        let mut rng = stream(1, 0);
        assert!((0..200).all(|_| !ex.draw(&mut rng).1));
    }

    #[test]
    fn identity_label() {
        let x = BitVector::from_bit_str("10").unwrap();
        let ex = ExampleOracle::new(
            Arc::new(InputDistribution::point(x.clone())),
            Arc::new(FeatureMap::identity(2)),
            BitVector::ones(2),
        )
        .unwrap();
        assert_eq!(ex.draw(&mut stream(2, 0)), (x, true));
    }

    #[test]
    fn modexp_label_uses_preimage_bit() {
        let map = Arc::new(FeatureMap::owp_inverse(OwpInstance::modexp(11, 2).unwrap()).unwrap());
        let x = BitVector::from_u64(4, 8);
        let ex = ExampleOracle::new(
            Arc::new(InputDistribution::point(x.clone())),
            map,
            BitVector::basis(4, 0),
        )
        .unwrap();
        assert_eq!(ex.draw(&mut stream(3, 0)), (x, true));
    }

    #[test]
    fn labels_are_exact() {
        let mut rng = stream(4, 0);
        let map = Arc::new(FeatureMap::linear(crate::linalg::BitMatrix::random(6, 9, &mut rng)));
        let s = BitVector::random(9, &mut rng);
        let ex = ExampleOracle::new(Arc::new(InputDistribution::uniform(6).unwrap()), map.clone(), s.clone()).unwrap();
        for _ in 0..10_000 {
            let (x, label) = ex.draw(&mut rng);
            assert_eq!(label, map.exact_feature(&x).unwrap().dot(&s).unwrap());
        }
    }

    #[test]
    fn rejects_mismatched_concept() {
        let dist = Arc::new(InputDistribution::uniform(3).unwrap());
        assert!(ExampleOracle::new(dist, Arc::new(FeatureMap::identity(3)), BitVector::zeros(2)).is_err());
    }
}
