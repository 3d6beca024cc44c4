//! Experiment engine: campaigns, Monte Carlo checks and report emission.
//!
//! Each trial draws from its own stream `(master_seed, trial_index)` and
//! shares only immutable inputs, so results do not depend on the worker
//! count.

mod campaign;
pub mod config;
mod extrapolate;
mod lemma1;
pub mod report;

pub use campaign::{prepare_trial_set, run_dataprep, run_learn_eval, run_reduce, run_two_party};
pub use config::{DataprepChoice, ExperimentConfig, Mode, OracleChoice, Setup};
pub use extrapolate::{extrapolate_classical, family_instances, least_squares};
pub use lemma1::{verify_lemma1, Lemma1Family, MIN_LEMMA1_TRIALS};
pub use report::{emit_report, Format, Report};

use crate::error::{Error, Result};

/// Runs `f(0..count)` on `workers` threads and returns results in index order.
pub fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 {
        return Ok((0..count).map(f).collect());
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| (0..count).into_par_iter().map(f).collect()))
}

/// Runs the experiment selected by `cfg.mode`.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate_scalars()?;
    match cfg.mode {
        Mode::TwoParty => run_two_party(cfg).map(Report::Campaign),
        Mode::LearnEval => run_learn_eval(cfg).map(Report::Campaign),
        Mode::Dataprep => run_dataprep(cfg).map(Report::Campaign),
        Mode::Reduce => run_reduce(cfg).map(Report::Reduce),
        Mode::Lemma1 => {
            let d = cfg
                .d
                .or(cfg.n)
                .ok_or_else(|| Error::Config("lemma1 needs `d`".into()))?;
            let families = cfg
                .lemma1
                .families
                .iter()
                .map(|f| f.parse())
                .collect::<Result<Vec<Lemma1Family>>>()?;
            verify_lemma1(d, &cfg.lemma1.m_values, &families, cfg.trials, cfg.master_seed, cfg.workers)
                .map(Report::Lemma1)
        }
        Mode::Extrapolate => {
            let spec = &cfg.extrapolate;
            let instances = family_instances(&spec.family, &spec.sizes, cfg.master_seed)?;
            extrapolate_classical(
                &spec.family,
                &instances,
                cfg.trials,
                spec.probes_budget,
                spec.predict_n,
                cfg.master_seed,
            )
            .map(Report::Extrapolation)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexed_results_keep_order() {
        let seq = run_indexed(1, 50, |i| i * i).unwrap();
        let par = run_indexed(8, 50, |i| i * i).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
        assert!(run_indexed(4, 0, |i| i).unwrap().is_empty());
    }
}
