use pacf2::harness::report::{emit_report, Format, Report};
use pacf2::harness::{run, verify_lemma1, ExperimentConfig, Lemma1Family};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

const NOISY_TWO_PARTY: &str = r#"
mode = "two-party"
n = 10
epsilon = 0.2
delta = 0.1
trials = 200
master_seed = 42
"#;

#[test]
fn noisy_two_party_meets_failure_budget() {
    let report = run(&config(NOISY_TWO_PARTY)).unwrap();
    let Report::Campaign(c) = &report else { panic!("expected a campaign report") };
    assert_eq!(c.m, 49);
    assert_eq!(c.mu, 0.05 / 98.0);
    assert!(c.summary.failure_fraction <= c.summary.failure_bound, "{:?}", c.summary);
    assert!(c.summary.success_ci_low <= c.summary.success_fraction);
    assert!(report.passed());
}

#[test]
fn json_reports_are_worker_independent() {
    let mut one = config(NOISY_TWO_PARTY);
    one.trials = 30;
    let mut many = one.clone();
    many.workers = 6;
    let render = |cfg: &ExperimentConfig| {
        let mut buf = Vec::new();
        emit_report(&run(cfg).unwrap(), Format::Json, false, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let a = render(&one);
    assert_eq!(a, render(&many));
    assert!(a.starts_with("{\n  \"schema\": \"pacf2-report-v1\""));
    assert!(!a.contains("runtime_ms\": 0") && a.contains("\"runtime_ms\": null"));
    let back = Report::from_json(&a).unwrap();
    assert_eq!(back.to_json(), a.trim_end());
}

#[test]
fn timing_only_on_request() {
    let mut cfg = config(NOISY_TWO_PARTY);
    cfg.trials = 3;
    let report = run(&cfg).unwrap();
    let mut plain = Vec::new();
    let mut timed = Vec::new();
    emit_report(&report, Format::Csv, false, &mut plain).unwrap();
    emit_report(&report, Format::Csv, true, &mut timed).unwrap();
    let plain = String::from_utf8(plain).unwrap();
    let timed = String::from_utf8(timed).unwrap();
    assert_eq!(plain.lines().count(), 4);
    assert!(!plain.contains("runtime_ms"));
    assert!(timed.lines().next().unwrap().ends_with("runtime_ms"));
}

#[test]
fn lemma1_rows_worker_independent() {
    let a = verify_lemma1(6, &[3, 11], &Lemma1Family::shipped(), 20_000, 9, 1).unwrap();
    let b = verify_lemma1(6, &[3, 11], &Lemma1Family::shipped(), 20_000, 9, 5).unwrap();
    assert_eq!(a, b);
    assert!(a.passed);
    assert_eq!(a.rows.len(), 8);
}

#[test]
fn lemma1_mode_through_config() {
    let cfg = config(
        "mode = \"lemma1\"\nd = 4\nepsilon = 0.5\ndelta = 0.5\ntrials = 10000\nmaster_seed = 1\n[lemma1]\nm_values = [7]\nfamilies = [\"uniform\", \"point\"]\n",
    );
    let Report::Lemma1(r) = run(&cfg).unwrap() else { panic!("expected lemma1 report") };
    assert_eq!(r.rows[0].bound, 0.5);
    assert_eq!(r.rows[1].failures, 0);
}

#[test]
fn extrapolate_mode_through_config() {
    let cfg = config(
        "mode = \"extrapolate\"\nepsilon = 0.5\ndelta = 0.5\ntrials = 200\nmaster_seed = 3\n[extrapolate]\nfamily = \"modexp\"\nsizes = [6, 8, 10]\npredict_n = 64\n",
    );
    let Report::Extrapolation(fit) = run(&cfg).unwrap() else { panic!("expected fit report") };
    assert_eq!(fit.points.len(), 3);
    assert!(fit.slope > 0.5);
    let csv = Report::Extrapolation(fit).to_csv(false);
    assert_eq!(csv.lines().count(), 4);
}
