use std::collections::HashSet;
use std::sync::Arc;

use rand::Rng;

use super::distribution::{precise_sum, InputDistribution};
use super::feature::FeatureMap;
use crate::error::{Error, Result};
use crate::linalg::BitVector;
use crate::rng;

/// Inputs on which a noisy oracle is always wrong.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HardSet {
    pub members: HashSet<BitVector>,
    pub mass: f64,
}

impl HardSet {
    pub fn contains(&self, x: &BitVector) -> bool {
        self.members.contains(x)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Greedily takes support points in ascending mass order (ties broken by a
/// seeded shuffle) while the accumulated mass stays within `mu`.
pub fn build_hard_set(dist: &InputDistribution, mu: f64, seed: u64) -> Result<HardSet> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::BadParam(format!("mu = {mu} outside [0, 1)")));
    }
    if mu == 0.0 {
        return Ok(HardSet::default());
    }
    let mut tiebreak = rng::stream(seed, 0);
    let mut order: Vec<(f64, u64, usize)> = dist
        .support()
        .iter()
        .enumerate()
        .map(|(i, (_, m))| (*m, tiebreak.random::<u64>(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut set = HardSet::default();
    let mut masses = Vec::new();
    for (m, _, i) in order {
        if set.mass + m > mu {
            break;
        }
        set.mass += m;
        masses.push(m);
        set.members.insert(dist.support()[i].0.clone());
    }
    set.mass = precise_sum(masses);
    Ok(set)
}

/// An exact feature map behind the two-level `(mu, nu)` error contract: on a
/// hard set of mass at most `mu` every answer is wrong; elsewhere each call is
/// correct with probability `1 - nu`. Wrong answers are uniform over the
/// `2^d - 1` incorrect vectors.
#[derive(Clone, Debug)]
pub struct NoisyFeatureOracle {
    map: Arc<FeatureMap>,
    mu: f64,
    nu: f64,
    hard_set: HardSet,
    seed: u64,
}

impl NoisyFeatureOracle {
    pub fn new(map: Arc<FeatureMap>, dist: &InputDistribution, mu: f64, nu: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&nu) {
            return Err(Error::BadParam(format!("nu = {nu} outside [0, 1)")));
        }
        map.check_covers(dist)?;
        let hard_set = build_hard_set(dist, mu, seed)?;
        Ok(Self { map, mu, nu, hard_set, seed })
    }

    /// The oracle with `mu = nu = 0`: identical to the exact map.
    pub fn noiseless(map: Arc<FeatureMap>) -> Self {
        Self {
            map,
            mu: 0.0,
            nu: 0.0,
            hard_set: HardSet::default(),
            seed: 0,
        }
    }

    /// A fresh oracle over the same map with new contract parameters.
    pub fn reconfigure(&self, dist: &InputDistribution, mu: f64, nu: f64) -> Result<Self> {
        Self::new(self.map.clone(), dist, mu, nu, self.seed)
    }

    pub fn map(&self) -> &Arc<FeatureMap> {
        &self.map
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hard_set(&self) -> &HardSet {
        &self.hard_set
    }

    pub fn is_noiseless(&self) -> bool {
        self.nu == 0.0 && self.hard_set.is_empty()
    }

    pub fn query<R: Rng + ?Sized>(&self, x: &BitVector, rng: &mut R) -> Result<BitVector> {
        let exact = self.map.exact_feature(x)?;
        let wrong = if self.hard_set.contains(x) {
            true
        } else {
            self.nu > 0.0 && rng.random::<f64>() < self.nu
        };
        if !wrong {
            return Ok(exact);
        }
        let mut out = exact;
        out.xor_assign(&BitVector::random_nonzero(self.map.d(), rng))?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn uniform_points(n: usize, count: u64) -> InputDistribution {
        InputDistribution::uniform_over(n, (0..count).map(|v| BitVector::from_u64(n, v)).collect()).unwrap()
    }

    #[test]
    fn hard_set_examples() {
        let ten = uniform_points(4, 10);
        assert!(build_hard_set(&ten, 0.0, 1).unwrap().is_empty());
        let h = build_hard_set(&ten, 0.25, 1).unwrap();
        assert_eq!(h.len(), 2);
        assert!((h.mass - 0.2).abs() < 1e-15);
        let point = InputDistribution::point(BitVector::zeros(3));
        assert!(build_hard_set(&point, 0.5, 1).unwrap().is_empty());
        assert!(build_hard_set(&ten, 1.0, 1).is_err());
    }

    #[test]
    fn hard_set_prefers_light_points() {
        let pts: Vec<_> = (0..4).map(|v| BitVector::from_u64(2, v)).collect();
        let dist = InputDistribution::new(
            2,
            vec![(pts[0].clone(), 0.5), (pts[1].clone(), 0.3), (pts[2].clone(), 0.15), (pts[3].clone(), 0.05)],
        )
        .unwrap();
        let h = build_hard_set(&dist, 0.21, 9).unwrap();
        assert!(h.contains(&pts[3]) && h.contains(&pts[2]));
        assert_eq!(h.len(), 2);
    }

    #[test]
    fn hard_set_tiebreak_is_seeded() {
        let dist = uniform_points(5, 32);
        let a = build_hard_set(&dist, 0.2, 3).unwrap();
        let b = build_hard_set(&dist, 0.2, 3).unwrap();
        assert_eq!(a, b);
        let others: Vec<_> = (4..12).map(|s| build_hard_set(&dist, 0.2, s).unwrap()).collect();
        assert!(others.iter().any(|o| o.members != a.members));
    }

    #[test]
    fn noiseless_matches_exact() {
        let map = Arc::new(FeatureMap::identity(4));
        let dist = InputDistribution::uniform(4).unwrap();
        let o = NoisyFeatureOracle::new(map.clone(), &dist, 0.0, 0.0, 0).unwrap();
        let mut rng = stream(1, 0);
        for (x, _) in dist.support() {
            assert_eq!(o.query(x, &mut rng).unwrap(), map.exact_feature(x).unwrap());
        }
    }

    #[test]
    fn easy_input_correct_fraction() {
        let map = Arc::new(FeatureMap::identity(6));
        let dist = InputDistribution::uniform(6).unwrap();
        let o = NoisyFeatureOracle::new(map.clone(), &dist, 0.0, 0.3, 0).unwrap();
        let x = BitVector::from_u64(6, 13);
        let mut rng = stream(2, 0);
        let calls = 100_000;
        let correct = (0..calls).filter(|_| o.query(&x, &mut rng).unwrap() == x).count();
        let f = correct as f64 / calls as f64;
        assert!(f >= 0.7 - 0.005, "correct fraction {f}");
    }

    #[test]
    fn hard_inputs_always_wrong() {
        let map = Arc::new(FeatureMap::identity(3));
        let dist = InputDistribution::uniform(3).unwrap();
        let o = NoisyFeatureOracle::new(map, &dist, 0.3, 0.0, 5).unwrap();
        assert_eq!(o.hard_set().len(), 2);
        let mut rng = stream(3, 0);
        for x in o.hard_set().members.clone() {
            for _ in 0..1000 {
                assert_ne!(o.query(&x, &mut rng).unwrap(), x);
            }
        }
    }

    #[test]
    fn query_out_of_domain() {
        let o = NoisyFeatureOracle::noiseless(Arc::new(FeatureMap::identity(3)));
        let mut rng = stream(3, 0);
        assert!(matches!(o.query(&BitVector::zeros(2), &mut rng), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn same_stream_same_answers() {
        let map = Arc::new(FeatureMap::identity(5));
        let dist = InputDistribution::uniform(5).unwrap();
        let o = NoisyFeatureOracle::new(map, &dist, 0.1, 0.4, 8).unwrap();
        let run = || {
            let mut rng = stream(8, 1);
            (0..200)
                .map(|i| o.query(&BitVector::from_u64(5, i % 32), &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
