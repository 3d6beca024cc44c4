//! Trial-level campaigns: the two-party protocol, learn-then-evaluate,
//! standalone data preparation and the basis-reconstruction check.

use std::collections::HashSet;
use std::time::Instant;

use rand::Rng;

use super::config::{DataprepChoice, ExperimentConfig, Mode, OracleChoice, Setup};
use super::report::{
    binomial_sigma, wilson_interval, CampaignReport, CampaignSummary, FailureKind, ReduceReport, ReduceTrial,
    TrialReport,
};
use super::run_indexed;
use crate::dataprep::{prepare_classical_owp, prepare_quantum, read_samples, samples_to_string, verify_sample_set};
use crate::dataprep::LabeledSampleSet;
use crate::error::{Error, LearnFailure, Result};
use crate::learner::{estimate_error, evaluate, learn, learn_from_samples, paper_params, LearnParams, EXACT_ERROR_LIMIT};
use crate::linalg::BitVector;
use crate::oracles::{ExampleOracle, NoisyFeatureOracle};
use crate::reduction::{build_advice, exact_basis_hypotheses, reduce_evaluate, reduction_params, ContractEvaluator, ExactEvaluator};
use crate::rng::{self, TrialRng};

/// Draws for Monte Carlo error estimates on supports too large to sum.
const MC_ERROR_DRAWS: usize = 100_000;

fn require_mode(cfg: &ExperimentConfig, mode: Mode) -> Result<()> {
    if cfg.mode != mode {
        return Err(Error::Config(format!(
            "config mode is {}, expected {}",
            cfg.mode.as_str(),
            mode.as_str()
        )));
    }
    Ok(())
}

fn millis(start: Instant) -> Option<f64> {
    Some(start.elapsed().as_secs_f64() * 1e3)
}

fn secret_for(setup: &Setup, rng: &mut TrialRng) -> BitVector {
    setup
        .secret
        .clone()
        .unwrap_or_else(|| BitVector::random(setup.d, rng))
}

fn oracle_for(
    cfg: &ExperimentConfig,
    setup: &Setup,
    mu: f64,
    nu: f64,
    seed: u64,
) -> Result<NoisyFeatureOracle> {
    match cfg.oracle.kind {
        OracleChoice::Exact => Ok(NoisyFeatureOracle::noiseless(setup.map.clone())),
        OracleChoice::Noisy => NoisyFeatureOracle::new(setup.map.clone(), &setup.dist, mu, nu, seed),
    }
}

/// Party A's side: `m` labeled samples for secret `s`. The quantum-style
/// oracle runs at `mu = nu = delta_a / (2m)`.
fn prepare(
    cfg: &ExperimentConfig,
    setup: &Setup,
    m: usize,
    s: &BitVector,
    delta_a: f64,
    rng: &mut TrialRng,
) -> Result<LabeledSampleSet> {
    let data_seed: u64 = rng.random();
    let oracle_seed: u64 = rng.random();
    match cfg.oracle.dataprep {
        DataprepChoice::Classical => {
            let inst = setup.owp.as_ref().ok_or_else(|| Error::Config("no permutation configured".into()))?;
            let y_dist = setup
                .y_dist
                .as_ref()
                .ok_or_else(|| Error::Config("no preimage distribution".into()))?;
            prepare_classical_owp(m, s, inst, y_dist, data_seed)
        }
        DataprepChoice::Quantum => {
            let bound = delta_a / (2.0 * m.max(1) as f64);
            let oracle = oracle_for(cfg, setup, bound, bound, oracle_seed)?;
            prepare_quantum(m, s, &setup.dist, &oracle, delta_a, data_seed)
        }
    }
}

/// The sample set party A would publish in trial `index`, with its secret.
pub fn prepare_trial_set(cfg: &ExperimentConfig, setup: &Setup, index: usize) -> Result<(LabeledSampleSet, BitVector)> {
    let params = paper_params(setup.d, cfg.epsilon, cfg.delta)?;
    let mut rng = rng::stream(cfg.master_seed, index as u64);
    let s = secret_for(setup, &mut rng);
    let set = prepare(cfg, setup, params.m, &s, cfg.delta, &mut rng)?;
    Ok((set, s))
}

fn blank_trial(index: usize) -> TrialReport {
    TrialReport {
        trial_index: index,
        learned_param: None,
        empirical_error: None,
        success: false,
        failure_kind: None,
        corrupted_labels: 0,
        eval_disagreement: None,
        error: None,
        runtime_ms: None,
    }
}

fn record_failure(report: &mut TrialReport, e: Error) {
    match e {
        Error::Learn(LearnFailure::Inconsistent) => report.failure_kind = Some(FailureKind::Inconsistent),
        other => report.error = Some(other.to_string()),
    }
}

fn summarize(trials: &[TrialReport], delta: f64, eval_bound: Option<f64>, strict: bool) -> CampaignSummary {
    let t = trials.len();
    let successes = trials.iter().filter(|r| r.success).count();
    let (lo, hi) = wilson_interval(successes, t);
    let failure_fraction = if t == 0 { 0.0 } else { (t - successes) as f64 / t as f64 };
    let failure_bound = if strict { 0.0 } else { delta + 3.0 * binomial_sigma(delta, t.max(1)) };
    let evals: Vec<f64> = trials.iter().filter_map(|r| r.eval_disagreement).collect();
    let mean_eval = (!evals.is_empty()).then(|| evals.iter().sum::<f64>() / evals.len() as f64);
    let eval_ok = match (mean_eval, eval_bound) {
        (Some(m), Some(b)) => m <= b,
        _ => true,
    };
    let aborted = trials.iter().any(|r| r.error.is_some());
    CampaignSummary {
        trials: t,
        successes,
        success_fraction: if t == 0 { 0.0 } else { successes as f64 / t as f64 },
        success_ci_low: lo,
        success_ci_high: hi,
        failure_fraction,
        failure_bound,
        total_corrupted_labels: trials.iter().map(|r| r.corrupted_labels).sum(),
        mean_eval_disagreement: mean_eval,
        eval_disagreement_bound: eval_bound,
        passed: !aborted && failure_fraction <= failure_bound && eval_ok,
    }
}

fn campaign_report(
    cfg: &ExperimentConfig,
    setup: &Setup,
    params: &LearnParams,
    trials: Vec<TrialReport>,
    summary: CampaignSummary,
) -> CampaignReport {
    CampaignReport {
        mode: cfg.mode.as_str().to_string(),
        n: setup.n,
        d: setup.d,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        m: params.m,
        mu: params.mu,
        nu: params.nu,
        master_seed: cfg.master_seed,
        dataprep: match cfg.oracle.dataprep {
            DataprepChoice::Quantum => "quantum",
            DataprepChoice::Classical => "classical",
        }
        .to_string(),
        trials,
        summary,
    }
}

/// How the failure budget `delta` is split between A's data preparation and
/// B's learner. A noisy oracle on both sides gets half each so the union
/// bound still gives `delta` overall.
fn split_delta(cfg: &ExperimentConfig) -> (f64, f64) {
    match (cfg.oracle.kind, cfg.oracle.dataprep) {
        (OracleChoice::Noisy, DataprepChoice::Quantum) => (cfg.delta / 2.0, cfg.delta / 2.0),
        _ => (cfg.delta, cfg.delta),
    }
}

fn two_party_trial(cfg: &ExperimentConfig, setup: &Setup, params: &LearnParams, delta_a: f64, index: usize) -> TrialReport {
    let start = Instant::now();
    let mut report = blank_trial(index);
    let mut rng = rng::stream(cfg.master_seed, index as u64);
    let s = secret_for(setup, &mut rng);
    let mut body = || -> Result<()> {
        // party A
        let set = prepare(cfg, setup, params.m, &s, delta_a, &mut rng)?;
        let wire = samples_to_string(&set);
        // party B only sees the wire transcript
        let received = read_samples(wire.as_bytes())?;
        report.corrupted_labels = verify_sample_set(&received, &s, &setup.map)?.0;
        let oracle_seed: u64 = rng.random();
        let oracle = oracle_for(cfg, setup, params.mu, params.nu, oracle_seed)?;
        let h = learn_from_samples(params, &received.samples, &oracle, &mut rng)?;
        let err = estimate_error(&h, &s, &setup.map, &setup.dist, MC_ERROR_DRAWS, &mut rng)?;
        report.learned_param = Some(h.param.to_string());
        report.empirical_error = Some(err);
        report.success = err <= cfg.epsilon;
        if !report.success && report.corrupted_labels > 0 {
            report.failure_kind = Some(FailureKind::OracleCorruption);
        }
        Ok(())
    };
    if let Err(e) = body() {
        record_failure(&mut report, e);
    }
    report.runtime_ms = millis(start);
    report
}

/// Party A prepares samples for a secret, ships them through the wire
/// format, and party B learns from the transcript. Each trial's exact error
/// is measured against the ground-truth concept.
pub fn run_two_party(cfg: &ExperimentConfig) -> Result<CampaignReport> {
    require_mode(cfg, Mode::TwoParty)?;
    let setup = cfg.setup()?;
    let (delta_a, delta_b) = split_delta(cfg);
    let params = paper_params(setup.d, cfg.epsilon, delta_b)?;
    let trials = run_indexed(cfg.workers, cfg.trials, |i| two_party_trial(cfg, &setup, &params, delta_a, i))?;
    let summary = summarize(&trials, cfg.delta, None, false);
    Ok(campaign_report(cfg, &setup, &params, trials, summary))
}

fn learn_eval_trial(cfg: &ExperimentConfig, setup: &Setup, params: &LearnParams, index: usize) -> TrialReport {
    let start = Instant::now();
    let mut report = blank_trial(index);
    let mut rng = rng::stream(cfg.master_seed, index as u64);
    let s = secret_for(setup, &mut rng);
    let mut body = || -> Result<()> {
        let ex = ExampleOracle::new(setup.dist.clone(), setup.map.clone(), s.clone())?;
        let learn_seed: u64 = rng.random();
        let eval_seed: u64 = rng.random();
        let oracle = oracle_for(cfg, setup, params.mu, params.nu, learn_seed)?;
        let h = learn(params, &ex, &oracle, &mut rng)?;
        let err = estimate_error(&h, &s, &setup.map, &setup.dist, MC_ERROR_DRAWS, &mut rng)?;
        report.learned_param = Some(h.param.to_string());
        report.empirical_error = Some(err);
        report.success = err <= cfg.epsilon;

        let eval_oracle = oracle_for(cfg, setup, cfg.epsilon, cfg.delta, eval_seed)?;
        let mut disagree = 0usize;
        for _ in 0..cfg.eval_samples {
            let x = setup.dist.sample(&mut rng).clone();
            let got = evaluate(&h, &x, &eval_oracle, cfg.epsilon, cfg.delta, &mut rng)?;
            if got != h.value(&setup.map, &x)? {
                disagree += 1;
            }
        }
        if cfg.eval_samples > 0 {
            report.eval_disagreement = Some(disagree as f64 / cfg.eval_samples as f64);
        }
        Ok(())
    };
    if let Err(e) = body() {
        record_failure(&mut report, e);
    }
    report.runtime_ms = millis(start);
    report
}

/// Learns with `paper_params` from exact examples, then evaluates the
/// hypothesis on fresh inputs through an oracle at `mu = epsilon`,
/// `nu = delta`, comparing against the noiseless hypothesis value.
pub fn run_learn_eval(cfg: &ExperimentConfig) -> Result<CampaignReport> {
    require_mode(cfg, Mode::LearnEval)?;
    let setup = cfg.setup()?;
    let params = paper_params(setup.d, cfg.epsilon, cfg.delta)?;
    let trials = run_indexed(cfg.workers, cfg.trials, |i| learn_eval_trial(cfg, &setup, &params, i))?;
    let evaluated = trials.iter().filter(|t| t.eval_disagreement.is_some()).count();
    let p = (cfg.epsilon + cfg.delta).min(1.0);
    let eval_bound =
        (evaluated > 0).then(|| p + 3.0 * binomial_sigma(p, evaluated * cfg.eval_samples.max(1)));
    let summary = summarize(&trials, cfg.delta, eval_bound, false);
    Ok(campaign_report(cfg, &setup, &params, trials, summary))
}

fn dataprep_trial(cfg: &ExperimentConfig, setup: &Setup, index: usize) -> TrialReport {
    let start = Instant::now();
    let mut report = blank_trial(index);
    let body = || -> Result<usize> {
        let (set, s) = prepare_trial_set(cfg, setup, index)?;
        Ok(verify_sample_set(&set, &s, &setup.map)?.0)
    };
    match body() {
        Ok(wrong) => {
            report.corrupted_labels = wrong;
            report.success = wrong == 0;
            if wrong > 0 {
                report.failure_kind = Some(FailureKind::OracleCorruption);
            }
        }
        Err(e) => record_failure(&mut report, e),
    }
    report.runtime_ms = millis(start);
    report
}

/// Prepares one sample set per trial and counts wrong labels against the
/// ground truth. The permutation protocol and the noiseless oracle must never
/// produce a wrong label; the noisy oracle may, in at most a `delta` fraction
/// of runs.
pub fn run_dataprep(cfg: &ExperimentConfig) -> Result<CampaignReport> {
    require_mode(cfg, Mode::Dataprep)?;
    let setup = cfg.setup()?;
    let params = paper_params(setup.d, cfg.epsilon, cfg.delta)?;
    let trials = run_indexed(cfg.workers, cfg.trials, |i| dataprep_trial(cfg, &setup, i))?;
    let strict = cfg.oracle.dataprep == DataprepChoice::Classical || cfg.oracle.kind == OracleChoice::Exact;
    let summary = summarize(&trials, cfg.delta, None, strict);
    // quantum preparation runs its oracle at delta / (2m)
    let rate = if strict { 0.0 } else { cfg.delta / (2.0 * params.m as f64) };
    let shown = LearnParams { mu: rate, nu: rate, ..params };
    let report = campaign_report(cfg, &setup, &shown, trials, summary);
    Ok(report)
}

/// Reconstructs `f(x)` from exact basis hypotheses. The noiseless evaluator
/// must reproduce `f` everywhere; a worst-case contract evaluator must be
/// right on inputs outside its hard sets with probability at least `1 - nu`.
/// Here `mu = epsilon` and `nu = delta` from the config.
pub fn run_reduce(cfg: &ExperimentConfig) -> Result<ReduceReport> {
    require_mode(cfg, Mode::Reduce)?;
    let setup = cfg.setup()?;
    let map = setup.map.as_ref();
    let dist = setup.dist.as_ref();
    let params = reduction_params(setup.d, cfg.epsilon, cfg.delta)?;
    let advice = build_advice(map, dist, &params, exact_basis_hypotheses(map))?;
    let exact = ExactEvaluator { map };

    let exhaustive_mismatches = if dist.len() <= EXACT_ERROR_LIMIT {
        let mut rng = rng::stream(cfg.master_seed, u64::MAX);
        let mut wrong = 0usize;
        for (x, _) in dist.support() {
            if reduce_evaluate(&advice, x, &exact, &params, &mut rng)? != map.exact_feature(x)? {
                wrong += 1;
            }
        }
        Some(wrong)
    } else {
        None
    };

    let trial = |index: usize| -> Result<ReduceTrial> {
        let mut rng = rng::stream(cfg.master_seed, index as u64);
        let contract = ContractEvaluator::new(map, dist, &params, rng.random())?;
        let mut bad: HashSet<&BitVector> = HashSet::new();
        for h in contract.hard_sets() {
            bad.extend(h.members.iter());
        }
        let bad_mass = crate::oracles::precise_sum(bad.iter().map(|x| dist.mass(x)));
        let (mut exact_mismatches, mut good_calls, mut good_successes) = (0usize, 0usize, 0usize);
        for _ in 0..cfg.eval_samples {
            let x = dist.sample(&mut rng).clone();
            let truth = map.exact_feature(&x)?;
            if reduce_evaluate(&advice, &x, &exact, &params, &mut rng)? != truth {
                exact_mismatches += 1;
            }
            if bad.contains(&x) {
                continue;
            }
            good_calls += 1;
            if reduce_evaluate(&advice, &x, &contract, &params, &mut rng)? == truth {
                good_successes += 1;
            }
        }
        let rate = if good_calls == 0 { 1.0 } else { good_successes as f64 / good_calls as f64 };
        let success_bound = 1.0 - params.nu - 3.0 * binomial_sigma(params.nu, good_calls.max(1));
        let passed = exact_mismatches == 0
            && bad_mass <= params.mu * (1.0 + 1e-12)
            && (good_calls == 0 || rate >= success_bound);
        Ok(ReduceTrial {
            trial_index: index,
            exact_mismatches,
            bad_mass,
            good_calls,
            good_successes,
            good_success_rate: rate,
            success_bound,
            passed,
        })
    };
    let trials = run_indexed(cfg.workers, cfg.trials, trial)?
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let passed = exhaustive_mismatches.unwrap_or(0) == 0 && trials.iter().all(|t| t.passed);
    Ok(ReduceReport {
        d: params.d,
        mu: params.mu,
        nu: params.nu,
        eps_learn: params.eps_learn,
        delta_learn: params.delta_learn,
        eps_eval: params.eps_eval,
        delta_eval: params.delta_eval,
        advice_bits: advice.total_bits(),
        exhaustive_mismatches,
        master_seed: cfg.master_seed,
        trials,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(text).unwrap()
    }

    #[test]
    fn noiseless_two_party_succeeds() {
        let c = cfg(r#"
mode = "two-party"
n = 8
epsilon = 0.25
delta = 0.1
trials = 200
master_seed = 3
oracle = { kind = "exact" }
"#);
        let r = run_two_party(&c).unwrap();
        assert_eq!(r.m, 31);
        let sigma = binomial_sigma(0.9, 200);
        assert!(r.summary.success_fraction >= 0.9 - 3.0 * sigma);
        assert_eq!(r.summary.total_corrupted_labels, 0);
        assert!(r.summary.passed);
    }

    #[test]
    fn classical_identity_has_no_corruption() {
        let c = cfg(r#"
mode = "two-party"
epsilon = 0.25
delta = 0.1
trials = 50
master_seed = 4
map = { kind = "owp-inverse" }
owp = { kind = "identity", n = 6 }
oracle = { dataprep = "classical" }
"#);
        let r = run_two_party(&c).unwrap();
        assert_eq!(r.summary.total_corrupted_labels, 0);
        assert!(r.trials.iter().all(|t| t.error.is_none()));
    }

    #[test]
    fn single_feature_point_mass_always_succeeds() {
        let c = cfg(r#"
mode = "two-party"
n = 1
epsilon = 0.5
delta = 0.1
trials = 30
master_seed = 5
dist = { kind = "point", value = "1:1" }
"#);
        let r = run_two_party(&c).unwrap();
        assert_eq!(r.summary.success_fraction, 1.0);
    }

    #[test]
    fn wrong_mode_rejected() {
        let c = cfg("mode = \"lemma1\"\nn = 4\nepsilon = 0.5\ndelta = 0.5\ntrials = 1\nmaster_seed = 0\n");
        assert!(matches!(run_two_party(&c), Err(Error::Config(_))));
    }

    #[test]
    fn learn_eval_within_bounds() {
        let c = cfg(r#"
mode = "learn-eval"
n = 8
epsilon = 0.2
delta = 0.1
trials = 40
master_seed = 6
eval_samples = 500
"#);
        let r = run_learn_eval(&c).unwrap();
        assert!(r.summary.passed, "{:?}", r.summary);
        assert!(r.summary.mean_eval_disagreement.unwrap() > 0.0);
    }

    #[test]
    fn reduce_identity_and_linear() {
        for map in ["identity", "linear"] {
            let c = cfg(&format!(
                "mode = \"reduce\"\nn = 8\nepsilon = 0.2\ndelta = 0.1\ntrials = 4\nmaster_seed = 7\neval_samples = 400\nmap = {{ kind = \"{map}\" }}\n"
            ));
            let r = run_reduce(&c).unwrap();
            assert_eq!(r.exhaustive_mismatches, Some(0));
            assert!(r.passed, "{map}: {:?}", r.trials);
            assert_eq!(r.advice_bits, 64);
        }
    }

    #[test]
    fn dataprep_modes() {
        let classical = cfg(r#"
mode = "dataprep"
epsilon = 0.25
delta = 0.1
trials = 20
master_seed = 8
map = { kind = "owp-inverse" }
owp = { kind = "modexp", p = 251, g = 6 }
oracle = { dataprep = "classical" }
"#);
        let r = run_dataprep(&classical).unwrap();
        assert_eq!(r.summary.total_corrupted_labels, 0);
        assert!(r.summary.passed);

        let quantum = cfg("mode = \"dataprep\"\nn = 8\nepsilon = 0.16\ndelta = 0.1\ntrials = 300\nmaster_seed = 9\n");
        let r = run_dataprep(&quantum).unwrap();
        assert_eq!(r.m, 49);
        assert!(r.summary.passed, "{:?}", r.summary);
    }
}
