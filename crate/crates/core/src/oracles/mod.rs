//! Input distributions, exact and noisy feature oracles, the labeled-sample
//! oracle, and permutation instances.

mod distribution;
mod example;
mod feature;
mod noisy;
mod owp;

pub use distribution::{InputDistribution, MASS_TOLERANCE, MAX_UNIFORM_BITS};
pub use example::ExampleOracle;
pub use feature::{FeatureKind, FeatureMap};
pub use noisy::{build_hard_set, HardSet, NoisyFeatureOracle};
pub use owp::{is_generator, is_prime, mod_pow, Inversion, OwpInstance, OwpKind, OwpSpec, MAX_BRUTE_FORCE_DOMAIN};

pub(crate) use distribution::precise_sum;
