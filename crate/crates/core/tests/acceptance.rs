//! Acceptance checks. Runs as a plain binary and prints one PASS/FAIL line
//! per criterion; exits non-zero if any criterion fails.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use pacf2::dataprep::{
    prepare_classical_owp, prepare_quantum, read_samples, samples_to_string, verify_sample_set, LabeledSampleSet,
    OracleKind, SampleMeta,
};
use pacf2::harness::report::{binomial_sigma, emit_report, Format};
use pacf2::harness::{
    extrapolate_classical, family_instances, run, run_indexed, verify_lemma1, ExperimentConfig, Lemma1Family,
};
use pacf2::learner::{estimate_error, learn, paper_params};
use pacf2::linalg::{brute_force_solutions, solve_f2, BitMatrix, BitVector, MAX_LEN};
use pacf2::oracles::{ExampleOracle, FeatureMap, InputDistribution, NoisyFeatureOracle, OwpInstance};
use pacf2::reduction::{build_advice, exact_basis_hypotheses, reduce_evaluate, reduction_params, ExactEvaluator};
use pacf2::rng::stream;

const WORKERS: usize = 8;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn span_bound() -> Outcome {
    let report = verify_lemma1(8, &[7, 15, 31, 63], &Lemma1Family::shipped(), 100_000, 0x5eed_0001, WORKERS).unwrap();
    let worst = report
        .rows
        .iter()
        .map(|r| (r.empirical_fail - r.bound) / r.sigma.max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    let cells: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{}/M={}: {:.4}<={:.4}", r.family, r.m, r.empirical_fail, r.bound))
        .collect();
    outcome(
        report.passed && report.rows.len() == 16,
        format!("16 cells x 1e5 trials, worst excess {worst:.2} sigma; {}", cells.join(", ")),
    )
}

fn parameter_formulas() -> Outcome {
    let p = paper_params(10, 0.1, 0.2).unwrap();
    let r = reduction_params(5, 0.2, 0.1).unwrap();
    let learn_ok = p.m == 99 && p.mu == 0.2 / 198.0 && p.nu == 0.2 / 198.0;
    let red_ok = (r.eps_learn, r.delta_learn, r.eps_eval, r.delta_eval) == (0.02, 0.5, 0.02, 0.02);
    outcome(
        learn_ok && red_ok,
        format!(
            "M={} mu={:e} nu={:e}; reduction=({}, {}, {}, {})",
            p.m, p.mu, p.nu, r.eps_learn, r.delta_learn, r.eps_eval, r.delta_eval
        ),
    )
}

fn end_to_end_learnability() -> Outcome {
    const TRIALS: usize = 200;
    let (n, d, eps, delta) = (16, 16, 0.1, 0.1);
    let params = paper_params(d, eps, delta).unwrap();
    let map = Arc::new(FeatureMap::linear(BitMatrix::random(n, d, &mut stream(0x5eed_0003, u64::MAX))));
    let dist = Arc::new(InputDistribution::uniform(n).unwrap());
    let failures = run_indexed(WORKERS, TRIALS, |i| {
        let mut rng = stream(0x5eed_0003, i as u64);
        let s = BitVector::random(d, &mut rng);
        let ex = ExampleOracle::new(dist.clone(), map.clone(), s.clone()).unwrap();
        let oracle = NoisyFeatureOracle::new(map.clone(), &dist, params.mu, params.nu, rng.random()).unwrap();
        match learn(&params, &ex, &oracle, &mut rng) {
            Ok(h) => estimate_error(&h, &s, &map, &dist, 0, &mut rng).unwrap() > eps,
            Err(_) => true,
        }
    })
    .unwrap()
    .into_iter()
    .filter(|&f| f)
    .count();
    let frac = failures as f64 / TRIALS as f64;
    let bound = delta + 3.0 * binomial_sigma(delta, TRIALS);
    outcome(
        frac <= bound,
        format!("M={} mu=nu={:e}; failure fraction {frac:.3} <= {bound:.3} over {TRIALS} trials", params.m, params.mu),
    )
}

fn solver_equivalence() -> Outcome {
    const SYSTEMS: usize = 10_000;
    let mismatches: usize = run_indexed(WORKERS, SYSTEMS, |i| {
        let mut rng = stream(0x5eed_0004, i as u64);
        let cols = rng.random_range(1..=12);
        let rows = rng.random_range(0..=16);
        let m = if rng.random_bool(0.3) {
            // low-rank systems exercise the free-variable path
            let base = BitMatrix::random(rng.random_range(1..=3), cols, &mut rng);
            let mut m = BitMatrix::zeros(0, cols);
            for _ in 0..rows {
                let mut row = BitVector::zeros(cols);
                for b in base.row_vectors() {
                    if rng.random_bool(0.5) {
                        row.xor_assign(b).unwrap();
                    }
                }
                m.push_row(row).unwrap();
            }
            m
        } else {
            BitMatrix::random(rows, cols, &mut rng)
        };
        let rhs = if rng.random_bool(0.5) && rows > 0 {
            m.mul_vec(&BitVector::random(cols, &mut rng)).unwrap()
        } else {
            BitVector::random(rows, &mut rng)
        };
        let out = solve_f2(&m, &rhs).unwrap();
        let brute = brute_force_solutions(&m, &rhs).unwrap();
        let consistent_ok = out.consistent == !brute.is_empty();
        let particular_ok = match &out.particular {
            Some(p) => brute.contains(p),
            None => brute.is_empty(),
        };
        let count_ok = !out.consistent || out.solution_count(cols) == brute.len() as u128;
        usize::from(!(consistent_ok && particular_ok && count_ok))
    })
    .unwrap()
    .into_iter()
    .sum();
    outcome(mismatches == 0, format!("{SYSTEMS} systems, {mismatches} mismatches"))
}

fn reduction_identity() -> Outcome {
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for n in 1..=12 {
        let mut rng = stream(0x5eed_0005, n as u64);
        let maps = [FeatureMap::identity(n), FeatureMap::linear(BitMatrix::random(n, n, &mut rng))];
        let dist = InputDistribution::uniform(n).unwrap();
        let params = reduction_params(n, 0.2, 0.1).unwrap();
        for map in &maps {
            let advice = build_advice(map, &dist, &params, exact_basis_hypotheses(map)).unwrap();
            let eval = ExactEvaluator { map };
            for (x, _) in dist.support() {
                checked += 1;
                if reduce_evaluate(&advice, x, &eval, &params, &mut rng).unwrap() != map.exact_feature(x).unwrap() {
                    mismatches += 1;
                }
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("identity and random-linear maps, n=d=1..12: {checked} inputs, {mismatches} mismatches"),
    )
}

fn permutation_exactness() -> Outcome {
    const SETS: usize = 1_000;
    let instances = [OwpInstance::modexp(251, 6).unwrap(), OwpInstance::identity(8)];
    let mut wrong = 0usize;
    let mut round_trip_failures = 0usize;
    let mut domain_points = 0usize;
    for (k, inst) in instances.iter().enumerate() {
        let map = FeatureMap::owp_inverse(inst.clone()).unwrap();
        let y_dist = InputDistribution::uniform_over(inst.n(), inst.domain().unwrap().collect()).unwrap();
        wrong += run_indexed(WORKERS, SETS, |i| {
            let mut rng = stream(0x5eed_0006 + k as u64, i as u64);
            let s = BitVector::random(inst.n(), &mut rng);
            let set = prepare_classical_owp(50, &s, inst, &y_dist, rng.random()).unwrap();
            verify_sample_set(&set, &s, &map).unwrap().0
        })
        .unwrap()
        .into_iter()
        .sum::<usize>();
        for y in inst.domain().unwrap() {
            domain_points += 1;
            let x = inst.forward(&y).unwrap();
            if inst.invert_bruteforce(&x).unwrap().preimage != y || map.exact_feature(&x).unwrap() != y {
                round_trip_failures += 1;
            }
        }
    }
    outcome(
        wrong == 0 && round_trip_failures == 0,
        format!(
            "modexp(251,6) and identity(8): {} sets with {wrong} wrong labels; {domain_points} domain points, {round_trip_failures} round-trip failures",
            2 * SETS
        ),
    )
}

fn data_prep_union_bound() -> Outcome {
    const RUNS: usize = 1_000;
    let (d, m, delta) = (8, 50, 0.1);
    let map = Arc::new(FeatureMap::identity(d));
    let dist = InputDistribution::uniform(d).unwrap();
    let rate = delta / (2.0 * m as f64);
    let bad_runs = run_indexed(WORKERS, RUNS, |i| {
        let mut rng = stream(0x5eed_0007, i as u64);
        let s = BitVector::random(d, &mut rng);
        let oracle = NoisyFeatureOracle::new(map.clone(), &dist, rate, rate, rng.random()).unwrap();
        let set = prepare_quantum(m, &s, &dist, &oracle, delta, rng.random()).unwrap();
        verify_sample_set(&set, &s, &map).unwrap().0 > 0
    })
    .unwrap()
    .into_iter()
    .filter(|&b| b)
    .count();
    let freq = bad_runs as f64 / RUNS as f64;
    let bound = delta + 3.0 * binomial_sigma(delta, RUNS);
    outcome(freq <= bound, format!("{RUNS} runs, any-wrong frequency {freq:.3} <= {bound:.4}"))
}

fn random_set(i: usize) -> LabeledSampleSet {
    let mut rng = stream(0x5eed_0008, i as u64);
    let n = match i {
        0 | 1 => MAX_LEN,
        _ if i.is_multiple_of(97) => 1,
        _ => rng.random_range(1..=200),
    };
    let m = match i {
        0 | 2 => 0,
        1 => 3,
        _ if i.is_multiple_of(50) => 0,
        _ => rng.random_range(0..=40),
    };
    let kinds = [
        OracleKind::Exact,
        OracleKind::Noisy,
        OracleKind::OwpModexp,
        OracleKind::OwpIdentity,
        OracleKind::OwpLinear,
    ];
    let kind = kinds[rng.random_range(0..kinds.len())];
    let (mu, nu) = if rng.random_bool(0.2) {
        (0.0, 0.0)
    } else {
        (rng.random::<f64>() * 0.01, rng.random::<f64>() * 0.01)
    };
    LabeledSampleSet {
        n,
        d: rng.random_range(1..=200),
        samples: (0..m)
            .map(|_| (BitVector::random(n, &mut rng), rng.random_bool(0.5)))
            .collect(),
        meta: SampleMeta {
            seed: rng.random(),
            oracle: kind,
            mu,
            nu,
        },
    }
}

fn wire_round_trip() -> Outcome {
    const SETS: usize = 1_000;
    let failures = run_indexed(WORKERS, SETS, |i| {
        let set = random_set(i);
        let text = samples_to_string(&set);
        match read_samples(text.as_bytes()) {
            Ok(back) => back != set || samples_to_string(&back) != text,
            Err(_) => true,
        }
    })
    .unwrap()
    .into_iter()
    .filter(|&f| f)
    .count();
    outcome(
        failures == 0,
        format!("{SETS} sets including m=0 and n={MAX_LEN}, {failures} failures"),
    )
}

const DETERMINISM_CONFIGS: [&str; 3] = [
    r#"
mode = "two-party"
n = 10
epsilon = 0.2
delta = 0.1
trials = 60
master_seed = 20261014
map = { kind = "linear" }
"#,
    r#"
mode = "learn-eval"
n = 8
epsilon = 0.25
delta = 0.1
trials = 40
master_seed = 77
eval_samples = 200
"#,
    r#"
mode = "two-party"
epsilon = 0.25
delta = 0.1
trials = 40
master_seed = 5
map = { kind = "owp-inverse" }
owp = { kind = "modexp", p = 251, g = 6 }
oracle = { dataprep = "classical" }
"#,
];

fn csv_for(text: &str, workers: usize) -> Vec<u8> {
    let mut cfg = ExperimentConfig::from_toml(text).unwrap();
    cfg.workers = workers;
    let report = run(&cfg).unwrap();
    let mut out = Vec::new();
    emit_report(&report, Format::Csv, false, &mut out).unwrap();
    out
}

fn determinism() -> Outcome {
    let mut identical = 0usize;
    for text in DETERMINISM_CONFIGS {
        let runs = [csv_for(text, 1), csv_for(text, 8), csv_for(text, 1), csv_for(text, 8)];
        if runs.iter().all(|r| r == &runs[0]) && runs[0].len() > 100 {
            identical += 1;
        }
    }
    outcome(
        identical == DETERMINISM_CONFIGS.len(),
        format!(
            "{identical}/{} campaigns byte-identical across reruns with workers 1 and 8",
            DETERMINISM_CONFIGS.len()
        ),
    )
}

fn extrapolation_slope() -> Outcome {
    let instances = family_instances("identity", &[8, 10, 12], 0x5eed_0010).unwrap();
    let fit = extrapolate_classical("identity", &instances, 1_000, 1 << 24, 32, 0x5eed_0010).unwrap();
    outcome(
        (0.8..=1.2).contains(&fit.slope),
        format!("slope {:.4}, intercept {:.4}", fit.slope, fit.intercept),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("span bound", span_bound),
        ("parameter formulas", parameter_formulas),
        ("end-to-end learnability", end_to_end_learnability),
        ("solver equivalence", solver_equivalence),
        ("reduction identity", reduction_identity),
        ("permutation data-prep exactness", permutation_exactness),
        ("noisy data-prep union bound", data_prep_union_bound),
        ("wire-format round trip", wire_round_trip),
        ("determinism", determinism),
        ("extrapolation slope", extrapolation_slope),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {:>2}. {name} ({:.1}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
