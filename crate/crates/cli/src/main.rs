use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pacf2::dataprep::write_samples;
use pacf2::harness::{self, emit_report, ExperimentConfig, Format, Mode, Report};
use pacf2::Error;

#[derive(Parser)]
#[command(name = "pacf2", version, about = "PAC-learning experiments over GF(2) feature maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Data preparation by party A, learning by party B, exact error check.
    TwoParty(RunArgs),
    /// Monte Carlo check of the span bound D/(M+1).
    Lemma1(RunArgs),
    /// Learn, then evaluate the hypothesis through a noisy oracle.
    LearnEval(RunArgs),
    /// Reconstruct feature vectors from basis-concept hypotheses.
    Reduce(RunArgs),
    /// Prepare sample sets and count wrong labels.
    Dataprep {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the first prepared sample set to this file.
        #[arg(long)]
        samples: Option<PathBuf>,
    },
    /// Fit brute-force inversion cost against instance size.
    Extrapolate(RunArgs),
    /// Re-emit a saved JSON report.
    Report {
        /// JSON report written by an earlier run.
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Include wall-clock columns.
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn load(args: &RunArgs, mode: Mode) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.mode != mode {
        return Err(Error::Config(format!(
            "{} sets mode = {:?}, but the subcommand is {}",
            args.config.display(),
            cfg.mode.as_str(),
            mode.as_str()
        )));
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    cfg.validate_scalars()?;
    Ok(cfg)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(report: &Report, out: &OutputArgs) -> Result<(), Error> {
    emit_report(report, out.format.into(), out.timing, sink(out.out.as_deref())?)
}

fn summary_line(report: &Report) -> String {
    match report {
        Report::Campaign(c) => format!(
            "{}: {}/{} trials succeeded, failure fraction {:.4} (bound {:.4}), {} corrupted labels",
            c.mode,
            c.summary.successes,
            c.summary.trials,
            c.summary.failure_fraction,
            c.summary.failure_bound,
            c.summary.total_corrupted_labels
        ),
        Report::Lemma1(l) => format!(
            "lemma1: {} cells, {} violated",
            l.rows.len(),
            l.rows.iter().filter(|r| r.violated).count()
        ),
        Report::Extrapolation(f) => format!(
            "extrapolate ({}): slope {:.4}, intercept {:.4}, predicted log2 probes at n={} is {:.2}",
            f.family, f.slope, f.intercept, f.predict_n, f.predicted_log2_probes
        ),
        Report::Reduce(r) => format!(
            "reduce: d={}, advice {} bits, exhaustive mismatches {}, {}/{} trials passed",
            r.d,
            r.advice_bits,
            r.exhaustive_mismatches.map_or("n/a".to_string(), |m| m.to_string()),
            r.trials.iter().filter(|t| t.passed).count(),
            r.trials.len()
        ),
    }
}

fn execute(cmd: Command) -> Result<bool, Error> {
    let (run, mode, samples) = match cmd {
        Command::Report { input, output } => {
            let text = std::fs::read_to_string(&input)?;
            let report = Report::from_json(&text)?;
            emit(&report, &output)?;
            return Ok(report.passed());
        }
        Command::TwoParty(r) => (r, Mode::TwoParty, None),
        Command::Lemma1(r) => (r, Mode::Lemma1, None),
        Command::LearnEval(r) => (r, Mode::LearnEval, None),
        Command::Reduce(r) => (r, Mode::Reduce, None),
        Command::Extrapolate(r) => (r, Mode::Extrapolate, None),
        Command::Dataprep { run, samples } => (run, Mode::Dataprep, samples),
    };
    let cfg = load(&run, mode)?;
    if let Some(path) = samples {
        let setup = cfg.setup()?;
        let (set, _secret) = harness::prepare_trial_set(&cfg, &setup, 0)?;
        write_samples(&set, BufWriter::new(File::create(&path)?))?;
    }
    let report = harness::run(&cfg)?;
    emit(&report, &run.output)?;
    eprintln!("{}", summary_line(&report));
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("acceptance check violated");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
