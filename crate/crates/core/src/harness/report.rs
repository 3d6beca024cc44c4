//! Report types and their CSV / JSON emission.
//!
//! Field order is fixed by declaration order, rows are ordered by trial
//! index (or table position), and wall-clock columns are only written on
//! request, so identical campaigns produce byte-identical output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "pacf2-report-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Inconsistent,
    OracleCorruption,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::Inconsistent => "inconsistent",
            FailureKind::OracleCorruption => "oracle-corruption",
        }
    }
}

/// One end-to-end learning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial_index: usize,
    /// Learned parameter in `<len>:<hex>` form.
    pub learned_param: Option<String>,
    pub empirical_error: Option<f64>,
    pub success: bool,
    pub failure_kind: Option<FailureKind>,
    /// Labels that disagree with the ground truth (instrumentation only).
    pub corrupted_labels: usize,
    /// Fraction of fresh evaluations that disagreed with the hypothesis.
    pub eval_disagreement: Option<f64>,
    /// Error message when the trial aborted before producing a hypothesis.
    pub error: Option<String>,
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub trials: usize,
    pub successes: usize,
    pub success_fraction: f64,
    /// 95% Wilson score interval for the success probability.
    pub success_ci_low: f64,
    pub success_ci_high: f64,
    /// Fraction of trials with error above epsilon (or no hypothesis).
    pub failure_fraction: f64,
    /// `delta + 3 sqrt(delta (1 - delta) / trials)`.
    pub failure_bound: f64,
    pub total_corrupted_labels: usize,
    pub mean_eval_disagreement: Option<f64>,
    pub eval_disagreement_bound: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub mode: String,
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub m: usize,
    pub mu: f64,
    pub nu: f64,
    pub master_seed: u64,
    pub dataprep: String,
    pub trials: Vec<TrialReport>,
    pub summary: CampaignSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Row {
    pub family: String,
    pub d: usize,
    pub m: usize,
    pub trials: usize,
    pub failures: usize,
    pub empirical_fail: f64,
    pub bound: f64,
    pub sigma: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub master_seed: u64,
    pub rows: Vec<Lemma1Row>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub n: usize,
    /// Saturates at `u64::MAX`.
    pub domain_size: u64,
    pub targets: usize,
    pub mean_probes: f64,
    pub log2_mean_probes: f64,
    pub residual: f64,
    pub mean_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: String,
    pub master_seed: u64,
    pub points: Vec<FitPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub predict_n: usize,
    pub predicted_log2_probes: f64,
    pub predicted_probes: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReduceTrial {
    pub trial_index: usize,
    /// Sampled inputs where the noiseless reconstruction differed from `f(x)`.
    pub exact_mismatches: usize,
    /// Mass of inputs on which some basis evaluation is always wrong.
    pub bad_mass: f64,
    pub good_calls: usize,
    pub good_successes: usize,
    pub good_success_rate: f64,
    pub success_bound: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReduceReport {
    pub d: usize,
    pub mu: f64,
    pub nu: f64,
    pub eps_learn: f64,
    pub delta_learn: f64,
    pub eps_eval: f64,
    pub delta_eval: f64,
    pub advice_bits: usize,
    /// Mismatches of the noiseless reconstruction over the whole support,
    /// when it is small enough to enumerate.
    pub exhaustive_mismatches: Option<usize>,
    pub master_seed: u64,
    pub trials: Vec<ReduceTrial>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Report {
    Campaign(CampaignReport),
    Lemma1(Lemma1Report),
    Extrapolation(FitReport),
    Reduce(ReduceReport),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    schema: String,
    #[serde(flatten)]
    report: Report,
}

impl Report {
    /// Whether every acceptance check carried by the report held.
    pub fn passed(&self) -> bool {
        match self {
            Report::Campaign(c) => c.summary.passed,
            Report::Lemma1(l) => l.passed,
            Report::Extrapolation(_) => true,
            Report::Reduce(r) => r.passed,
        }
    }

    /// Drops every wall-clock field.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        match &mut r {
            Report::Campaign(c) => c.trials.iter_mut().for_each(|t| t.runtime_ms = None),
            Report::Extrapolation(f) => f.points.iter_mut().for_each(|p| p.mean_ms = None),
            Report::Lemma1(_) | Report::Reduce(_) => {}
        }
        r
    }

    pub fn to_json(&self) -> String {
        let env = Envelope {
            schema: SCHEMA.to_string(),
            report: self.clone(),
        };
        serde_json::to_string_pretty(&env).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        let env: Envelope = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        if env.schema != SCHEMA {
            return Err(Error::VersionMismatch(env.schema));
        }
        Ok(env.report)
    }

    fn csv_table(&self, timing: bool) -> (Vec<&'static str>, Vec<Vec<String>>) {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(ToString::to_string).unwrap_or_default()
        }
        match self {
            Report::Campaign(c) => {
                let mut header = vec![
                    "trial_index",
                    "learned_param",
                    "empirical_error",
                    "success",
                    "failure_kind",
                    "corrupted_labels",
                    "eval_disagreement",
                    "error",
                ];
                if timing {
                    header.push("runtime_ms");
                }
                let mut trials: Vec<&TrialReport> = c.trials.iter().collect();
                trials.sort_by_key(|t| t.trial_index);
                let rows = trials
                    .into_iter()
                    .map(|t| {
                        let mut row = vec![
                            t.trial_index.to_string(),
                            opt(&t.learned_param),
                            opt(&t.empirical_error),
                            t.success.to_string(),
                            t.failure_kind.map(|k| k.as_str().to_string()).unwrap_or_default(),
                            t.corrupted_labels.to_string(),
                            opt(&t.eval_disagreement),
                            t.error.clone().unwrap_or_default(),
                        ];
                        if timing {
                            row.push(opt(&t.runtime_ms));
                        }
                        row
                    })
                    .collect();
                (header, rows)
            }
            Report::Lemma1(l) => {
                let header = vec![
                    "family", "d", "m", "trials", "failures", "empirical_fail", "bound", "sigma", "violated",
                ];
                let rows = l
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.family.clone(),
                            r.d.to_string(),
                            r.m.to_string(),
                            r.trials.to_string(),
                            r.failures.to_string(),
                            r.empirical_fail.to_string(),
                            r.bound.to_string(),
                            r.sigma.to_string(),
                            r.violated.to_string(),
                        ]
                    })
                    .collect();
                (header, rows)
            }
            Report::Extrapolation(f) => {
                let mut header = vec![
                    "n",
                    "domain_size",
                    "targets",
                    "mean_probes",
                    "log2_mean_probes",
                    "residual",
                    "slope",
                    "intercept",
                ];
                if timing {
                    header.push("mean_ms");
                }
                let rows = f
                    .points
                    .iter()
                    .map(|p| {
                        let mut row = vec![
                            p.n.to_string(),
                            p.domain_size.to_string(),
                            p.targets.to_string(),
                            p.mean_probes.to_string(),
                            p.log2_mean_probes.to_string(),
                            p.residual.to_string(),
                            f.slope.to_string(),
                            f.intercept.to_string(),
                        ];
                        if timing {
                            row.push(opt(&p.mean_ms));
                        }
                        row
                    })
                    .collect();
                (header, rows)
            }
            Report::Reduce(r) => {
                let header = vec![
                    "trial_index",
                    "exact_mismatches",
                    "bad_mass",
                    "good_calls",
                    "good_successes",
                    "good_success_rate",
                    "success_bound",
                    "passed",
                ];
                let rows = r
                    .trials
                    .iter()
                    .map(|t| {
                        vec![
                            t.trial_index.to_string(),
                            t.exact_mismatches.to_string(),
                            t.bad_mass.to_string(),
                            t.good_calls.to_string(),
                            t.good_successes.to_string(),
                            t.good_success_rate.to_string(),
                            t.success_bound.to_string(),
                            t.passed.to_string(),
                        ]
                    })
                    .collect();
                (header, rows)
            }
        }
    }

    pub fn to_csv(&self, timing: bool) -> String {
        let (header, rows) = self.csv_table(timing);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&header).expect("in-memory write");
        for row in rows {
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Writes `report` in the requested format. Wall-clock fields are included
/// only when `timing` is set.
pub fn emit_report<W: Write>(report: &Report, format: Format, timing: bool, mut sink: W) -> Result<()> {
    let report = if timing { report.clone() } else { report.without_timing() };
    match format {
        Format::Csv => sink.write_all(report.to_csv(timing).as_bytes())?,
        Format::Json => {
            sink.write_all(report.to_json().as_bytes())?;
            sink.write_all(b"\n")?;
        }
    }
    sink.flush()?;
    Ok(())
}

/// Binomial sigma `sqrt(p (1 - p) / trials)`.
pub fn binomial_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Wilson score interval with `z = 1.96`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.96f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
