//! Classical inversion cost versus instance size, with a log-linear fit.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::Rng;

use super::report::{FitPoint, FitReport};
use crate::error::{Error, Result};
use crate::linalg::{BitMatrix, BitVector};
use crate::oracles::OwpInstance;
use crate::rng::{self, TrialRng};

/// Ordinary least squares `y = intercept + slope * x`; returns `(slope, intercept)`.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::Config("a fit needs at least two points".into()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("a fit needs distinct x values".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Instances of a named family at each bit size: `identity`, `linear`
/// (random bijection, brute-force inversion), `linear-closed-form`, or
/// `modexp` (largest prime below `2^n`).
pub fn family_instances(family: &str, sizes: &[usize], seed: u64) -> Result<Vec<OwpInstance>> {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mut rng = rng::stream(seed, (1 << 32) + i as u64);
            match family {
                "identity" => Ok(OwpInstance::identity(n)),
                "linear" => OwpInstance::linear(BitMatrix::random_invertible(n, &mut rng), false),
                "linear-closed-form" => OwpInstance::linear(BitMatrix::random_invertible(n, &mut rng), true),
                "modexp" => OwpInstance::modexp_for_bits(n),
                other => Err(Error::Config(format!("unknown extrapolation family {other:?}"))),
            }
        })
        .collect()
}

fn random_domain_element(inst: &OwpInstance, rng: &mut TrialRng) -> BitVector {
    match inst.modexp_params() {
        Some((p, _)) => BitVector::from_u64(inst.n(), rng.random_range(1..p)),
        None => BitVector::random(inst.n(), rng),
    }
}

/// Inverts `targets` uniformly drawn images per instance, records the mean
/// probe count, and fits `log2(mean probes)` against `n`.
pub fn extrapolate_classical(
    family: &str,
    instances: &[OwpInstance],
    targets: usize,
    probes_budget: u64,
    predict_n: usize,
    seed: u64,
) -> Result<FitReport> {
    let sizes: BTreeSet<usize> = instances.iter().map(OwpInstance::n).collect();
    if sizes.len() < 3 {
        return Err(Error::Config(format!(
            "extrapolation needs at least 3 distinct instance sizes, got {}",
            sizes.len()
        )));
    }
    if targets == 0 {
        return Err(Error::Config("extrapolation needs at least one target per size".into()));
    }
    for inst in instances {
        if !inst.has_closed_form_inverse() && inst.domain_size() > probes_budget as u128 {
            return Err(Error::BudgetExceeded(format!(
                "{}-bit {} instance has domain {} above the budget {probes_budget}",
                inst.n(),
                inst.kind().as_str(),
                inst.domain_size()
            )));
        }
    }

    let mut points = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let mut rng = rng::stream(seed, i as u64);
        let start = Instant::now();
        let mut total = 0u64;
        for _ in 0..targets {
            let y = random_domain_element(inst, &mut rng);
            let x = inst.forward(&y)?;
            let inv = inst.invert(&x)?;
            debug_assert_eq!(inv.preimage, y);
            total += inv.probes;
        }
        let mean = total as f64 / targets as f64;
        points.push(FitPoint {
            n: inst.n(),
            domain_size: u64::try_from(inst.domain_size()).unwrap_or(u64::MAX),
            targets,
            mean_probes: mean,
            log2_mean_probes: mean.log2(),
            residual: 0.0,
            mean_ms: Some(start.elapsed().as_secs_f64() * 1e3 / targets as f64),
        });
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.log2_mean_probes)).collect();
    let (slope, intercept) = least_squares(&xy)?;
    for p in &mut points {
        p.residual = p.log2_mean_probes - (intercept + slope * p.n as f64);
    }
    let predicted = intercept + slope * predict_n as f64;
    Ok(FitReport {
        family: family.to_string(),
        master_seed: seed,
        points,
        slope,
        intercept,
        predict_n,
        predicted_log2_probes: predicted,
        predicted_probes: predicted.exp2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_slope_near_one() {
        let inst = family_instances("identity", &[8, 10, 12], 1).unwrap();
        let r = extrapolate_classical("identity", &inst, 500, 1 << 24, 32, 1).unwrap();
        assert!((r.slope - 1.0).abs() < 0.2, "slope {}", r.slope);
        assert!(r.predicted_log2_probes > 28.0);
    }

    #[test]
    fn closed_form_slope_zero() {
        let inst = family_instances("linear-closed-form", &[8, 10, 12], 2).unwrap();
        let r = extrapolate_classical("linear-closed-form", &inst, 50, 1, 32, 2).unwrap();
        assert_eq!(r.slope, 0.0);
        assert!(r.points.iter().all(|p| p.mean_probes == 1.0));
    }

    #[test]
    fn errors() {
        let one = family_instances("identity", &[8], 1).unwrap();
        assert!(matches!(extrapolate_classical("identity", &one, 10, 1 << 24, 32, 1), Err(Error::Config(_))));
        let inst = family_instances("modexp", &[8, 10, 12], 1).unwrap();
        assert!(matches!(
            extrapolate_classical("modexp", &inst, 10, 1000, 32, 1),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(family_instances("bogus", &[8], 1).is_err());
    }

    #[test]
    fn fit_is_exact_on_a_line() {
        let (m, b) = least_squares(&[(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]).unwrap();
        assert!((m - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }
}
