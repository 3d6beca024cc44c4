//! Experiment configuration (TOML) and the validated setup built from it.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BitMatrix, BitVector};
use crate::oracles::{FeatureMap, InputDistribution, OwpInstance, OwpSpec};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    TwoParty,
    Lemma1,
    LearnEval,
    Extrapolate,
    Reduce,
    Dataprep,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::TwoParty => "two-party",
            Mode::Lemma1 => "lemma1",
            Mode::LearnEval => "learn-eval",
            Mode::Extrapolate => "extrapolate",
            Mode::Reduce => "reduce",
            Mode::Dataprep => "dataprep",
        }
    }
}

/// Feature map description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    /// `identity`, `linear`, `zero` or `owp-inverse`.
    pub kind: String,
    /// Generator rows for `linear`; a random generator is drawn when absent.
    #[serde(default)]
    pub matrix: Option<Vec<String>>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for MapSpec {
    fn default() -> Self {
        Self {
            kind: "identity".into(),
            matrix: None,
            seed: None,
        }
    }
}

/// Input distribution description. For `owp-inverse` maps `uniform` means
/// uniform over the permutation's domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSpec {
    /// `uniform`, `point`, `file` or `subspace`.
    pub kind: String,
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Bit vector for `point`.
    #[serde(default)]
    pub value: Option<String>,
    /// Dimension of the coordinate subspace for `subspace`.
    #[serde(default)]
    pub rank: Option<usize>,
}

impl Default for DistSpec {
    fn default() -> Self {
        Self {
            kind: "uniform".into(),
            path: None,
            value: None,
            rank: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleChoice {
    /// Contract-compliant noisy oracle at the routine's parameters.
    #[default]
    Noisy,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataprepChoice {
    #[default]
    Quantum,
    Classical,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default)]
    pub kind: OracleChoice,
    #[serde(default)]
    pub dataprep: DataprepChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma1Spec {
    #[serde(default = "Lemma1Spec::default_m_values")]
    pub m_values: Vec<usize>,
    #[serde(default = "Lemma1Spec::default_families")]
    pub families: Vec<String>,
}

impl Lemma1Spec {
    fn default_m_values() -> Vec<usize> {
        vec![7, 15, 31, 63]
    }

    fn default_families() -> Vec<String> {
        ["uniform", "basis-plus-zero", "rank-deficient", "two-point"]
            .into_iter()
            .map(String::from)
            .collect()
    }
}

impl Default for Lemma1Spec {
    fn default() -> Self {
        Self {
            m_values: Self::default_m_values(),
            families: Self::default_families(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtrapolateSpec {
    /// `identity`, `linear`, `linear-closed-form` or `modexp`.
    #[serde(default = "ExtrapolateSpec::default_family")]
    pub family: String,
    #[serde(default = "ExtrapolateSpec::default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "ExtrapolateSpec::default_predict_n")]
    pub predict_n: usize,
    #[serde(default = "ExtrapolateSpec::default_budget")]
    pub probes_budget: u64,
}

impl ExtrapolateSpec {
    fn default_family() -> String {
        "identity".into()
    }
    fn default_sizes() -> Vec<usize> {
        vec![8, 10, 12]
    }
    fn default_predict_n() -> usize {
        32
    }
    fn default_budget() -> u64 {
        1 << 24
    }
}

impl Default for ExtrapolateSpec {
    fn default() -> Self {
        Self {
            family: Self::default_family(),
            sizes: Self::default_sizes(),
            predict_n: Self::default_predict_n(),
            probes_budget: Self::default_budget(),
        }
    }
}

fn default_eval_samples() -> usize {
    1000
}

fn default_workers() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Fixed secret parameter; sampled uniformly per trial when absent.
    #[serde(default)]
    pub secret: Option<String>,
    /// Fresh inputs per trial for evaluation checks.
    #[serde(default = "default_eval_samples")]
    pub eval_samples: usize,
    #[serde(default)]
    pub map: MapSpec,
    #[serde(default)]
    pub dist: DistSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub owp: Option<OwpSpec>,
    #[serde(default)]
    pub lemma1: Lemma1Spec,
    #[serde(default)]
    pub extrapolate: ExtrapolateSpec,
    /// Directory used to resolve relative paths; not part of the file.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

/// Everything a campaign needs, built and validated once up front.
#[derive(Clone, Debug)]
pub struct Setup {
    pub n: usize,
    pub d: usize,
    pub map: Arc<FeatureMap>,
    /// Distribution of the learner's inputs `x`.
    pub dist: Arc<InputDistribution>,
    pub owp: Option<OwpInstance>,
    /// Distribution of permutation preimages, for the classical protocol.
    pub y_dist: Option<Arc<InputDistribution>>,
    pub secret: Option<BitVector>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Checks scalar parameters that every mode shares.
    pub fn validate_scalars(&self) -> Result<()> {
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    fn owp_instance(&self) -> Result<OwpInstance> {
        let spec = self
            .owp
            .as_ref()
            .ok_or_else(|| Error::Config("an [owp] table is required".into()))?;
        let mut spec = spec.clone();
        if spec.n.is_none() {
            spec.n = self.n;
        }
        spec.build().map_err(|e| Error::Config(format!("owp: {e}")))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Builds the feature map, distributions and secret.
    pub fn setup(&self) -> Result<Setup> {
        self.validate_scalars()?;
        let cfg_err = |what: &str, e: Error| Error::Config(format!("{what}: {e}"));

        let (map, owp) = match self.map.kind.as_str() {
            "owp-inverse" => {
                let inst = self.owp_instance()?;
                let map = FeatureMap::owp_inverse(inst.clone()).map_err(|e| cfg_err("map", e))?;
                (map, Some(inst))
            }
            kind => {
                let n = self.n.ok_or_else(|| Error::Config("`n` is required".into()))?;
                let d = self.d.unwrap_or(n);
                let map = match kind {
                    "identity" => {
                        if d != n {
                            return Err(Error::Config("identity map needs d = n".into()));
                        }
                        FeatureMap::identity(n)
                    }
                    "zero" => FeatureMap::zero(n, d),
                    "linear" => match &self.map.matrix {
                        Some(rows) => {
                            let rows = rows
                                .iter()
                                .map(|r| if r.contains(':') { r.parse() } else { BitVector::from_hex(d, r) })
                                .collect::<Result<Vec<_>>>()
                                .map_err(|e| cfg_err("map.matrix", e))?;
                            let g = BitMatrix::new(d, rows).map_err(|e| cfg_err("map.matrix", e))?;
                            if g.rows() != n {
                                return Err(Error::Config(format!("map.matrix needs {n} rows")));
                            }
                            FeatureMap::linear(g)
                        }
                        None => {
                            let seed = self.map.seed.unwrap_or(self.master_seed);
                            FeatureMap::linear(BitMatrix::random(n, d, &mut rng::stream(seed, u64::MAX)))
                        }
                    },
                    other => return Err(Error::Config(format!("unknown map kind {other:?}"))),
                };
                (map, None)
            }
        };
        let (n, d) = (map.n(), map.d());
        if self.n.is_some_and(|v| v != n) || self.d.is_some_and(|v| v != d) {
            return Err(Error::Config(format!(
                "declared dimensions disagree with the feature map ({n} -> {d})"
            )));
        }

        let base = match self.dist.kind.as_str() {
            "uniform" => match &owp {
                Some(inst) => {
                    let points: Vec<BitVector> = inst
                        .domain()
                        .map_err(|e| cfg_err("dist", e))?
                        .collect();
                    InputDistribution::uniform_over(n, points)
                }
                None => InputDistribution::uniform(n),
            },
            "point" => {
                let v = self
                    .dist
                    .value
                    .as_deref()
                    .ok_or_else(|| Error::Config("point distribution needs `value`".into()))?;
                v.parse().map(InputDistribution::point)
            }
            "file" => {
                let path = self
                    .dist
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("file distribution needs `path`".into()))?;
                let path = self.resolve(path);
                let f = std::fs::File::open(&path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                InputDistribution::read(std::io::BufReader::new(f))
            }
            "subspace" => {
                let r = self.dist.rank.unwrap_or(n / 2).clamp(1, n.min(20));
                let points = (0..1u64 << r).map(|v| BitVector::from_u64(n, v)).collect();
                InputDistribution::uniform_over(n, points)
            }
            other => return Err(Error::Config(format!("unknown distribution kind {other:?}"))),
        }
        .map_err(|e| cfg_err("dist", e))?;
        if base.n() != n {
            return Err(Error::Config(format!("distribution over {} bits, map expects {n}", base.n())));
        }

        // with an owp feature map the configured distribution is over
        // preimages, and inputs are its image under the permutation
        let (dist, y_dist) = match &owp {
            Some(inst) => {
                let pushed = base
                    .pushforward(|y| inst.forward(y))
                    .map_err(|e| cfg_err("dist", e))?;
                (pushed, Some(Arc::new(base)))
            }
            None => (base, None),
        };
        map.check_covers(&dist).map_err(|e| cfg_err("map", e))?;

        if self.oracle.dataprep == DataprepChoice::Classical && owp.is_none() {
            return Err(Error::Config("classical data preparation needs map.kind = \"owp-inverse\"".into()));
        }

        let secret = match &self.secret {
            Some(s) => {
                let v: BitVector = s.parse().map_err(|e| cfg_err("secret", e))?;
                if v.len() != d {
                    return Err(Error::Config(format!("secret has length {}, expected {d}", v.len())));
                }
                Some(v)
            }
            None => None,
        };

        Ok(Setup {
            n,
            d,
            map: Arc::new(map),
            dist: Arc::new(dist),
            owp,
            y_dist,
            secret,
        })
    }
}
