//! Monte Carlo harness and statistical verdicts: empirical KS distances,
//! mean and standard error, the drift check on removed caravans, and the
//! two convergence experiments comparing finite covering processes against
//! the fragmentation of their limit paths.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limit::{
    extreme_bridge_with, fragmentation, scaled_limit_bridge_with, LimitPath,
};
use crate::model::{CirclePoint, ThetaSequence};
use crate::parking;
use crate::rng::{replica_rng, stream};
use crate::samplers::{make_instance_with, CaravanLaw};

/// Two-sample Kolmogorov–Smirnov statistic: the sup distance between the
/// empirical distribution functions.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("empty sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(sup)
}

/// Sample mean and standard error `s/√n`.
pub fn mc_mean_se(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter("need at least 2 values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// One KS verdict of a report.
#[derive(Debug, Clone, Serialize)]
pub struct KsEntry {
    pub t: f64,
    pub rank: usize,
    pub value: f64,
}

/// Experiment report, serialized as
/// `{"experiment":…, "params":…, "ks":[{"t":…,"rank":…,"value":…}], "pass":…}`.
#[derive(Debug, Clone, Serialize)]
pub struct KsReport {
    pub experiment: String,
    pub params: serde_json::Value,
    pub ks: Vec<KsEntry>,
    pub pass: bool,
}

/// Default acceptance threshold for 2000-vs-2000 KS comparisons (the 99%
/// critical value there is about 0.0515).
pub const KS_THRESHOLD: f64 = 0.05;

/// Median sup-norm deviation of the removed-caravan sum from its drift.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    pub eps: f64,
    pub t: f64,
    pub replicas: usize,
    pub median_sup: f64,
}

/// Lemma-style drift check: the rescaled sum of the last `⌊t·ε^(-1/α)⌋`
/// caravans' jumps should follow the pure drift `t·μ₁·x`. The sup deviation
/// is evaluated exactly at the jump breakpoints; the median over replicas
/// is reported.
pub fn drift_check(
    law: &CaravanLaw,
    t: f64,
    eps: f64,
    replicas: usize,
    seed: u64,
) -> Result<DriftReport> {
    law.validate()?;
    if replicas == 0 {
        return Err(Error::InvalidParameter("need replicas".into()));
    }
    let alpha = law.stable_index();
    let mu1 = law.mu1();
    let mut sups: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replica_rng(seed, stream::INSTANCE, k);
            let instance = make_instance_with(law, eps, &mut rng).expect("valid law and eps");
            let m = instance.len();
            let cut = parking::backward_index(m, eps, alpha, t).unwrap_or(0);
            let scale = eps.powf(1.0 / alpha - 1.0);
            // removed jumps sorted by arrival point
            let mut removed: Vec<(f64, f64)> = (cut..m)
                .map(|i| (instance.arrival(i).get(), instance.mass(i) * scale))
                .collect();
            removed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let drift = t * mu1;
            let mut acc = 0.0f64;
            let mut sup = 0.0f64;
            for &(x, jump) in &removed {
                sup = sup.max((acc - drift * x).abs());
                acc += jump;
                sup = sup.max((acc - drift * x).abs());
            }
            sup = sup.max((acc - drift).abs());
            sup
        })
        .collect();
    sups.sort_unstable_by(f64::total_cmp);
    Ok(DriftReport {
        eps,
        t,
        replicas,
        median_sup: sups[replicas / 2],
    })
}

/// Configuration of the covering-vs-limit convergence experiment.
#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub law: CaravanLaw,
    pub t_list: Vec<f64>,
    pub eps: f64,
    pub replicas: usize,
    /// Grid resolution for Brownian limits.
    pub grid: usize,
    /// Atom truncation for jump limits.
    pub delta: f64,
    pub ks_threshold: f64,
    pub seed: u64,
}

impl ConvergenceConfig {
    pub fn new(law: CaravanLaw, eps: f64, seed: u64) -> Self {
        ConvergenceConfig {
            law,
            t_list: vec![0.5, 1.0, 2.0],
            eps,
            replicas: 2000,
            grid: crate::limit::DEFAULT_GRID,
            delta: crate::limit::DEFAULT_ATOM_DELTA,
            ks_threshold: KS_THRESHOLD,
            seed,
        }
    }
}

/// Largest and second-largest masses of the covering process at the
/// backward times in `t_list`, one row per replica.
pub fn covering_marginals(cfg: &ConvergenceConfig) -> Result<Vec<Vec<(f64, f64)>>> {
    let alpha = cfg.law.stable_index();
    (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replica_rng(cfg.seed, stream::INSTANCE, k);
            let instance = make_instance_with(&cfg.law, cfg.eps, &mut rng)?;
            let m = instance.len();
            // a backward time reaching past the first caravan clamps to the
            // empty initial state (possible for heavy-tailed lengths whose
            // caravan count undershoots the mean)
            let indices: Vec<usize> = cfg
                .t_list
                .iter()
                .map(|&t| parking::backward_index(m, cfg.eps, alpha, t).unwrap_or(0))
                .collect();
            let parts = parking::ranked_at_indices(&instance, &indices)?;
            Ok(parts.iter().map(|p| (p.mass(0), p.mass(1))).collect())
        })
        .collect()
}

/// Largest and second-largest fragment masses of the limit path at drift
/// `μ₁·t` for the times in `t_list`, one row per replica. One path serves
/// all times.
pub fn limit_marginals(cfg: &ConvergenceConfig) -> Result<Vec<Vec<(f64, f64)>>> {
    let mu1 = cfg.law.mu1();
    (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replica_rng(cfg.seed, stream::LIMIT, k);
            let path = scaled_limit_bridge_with(&cfg.law, cfg.grid, cfg.delta, &mut rng)?;
            Ok(cfg
                .t_list
                .iter()
                .map(|&t| {
                    let f = fragmentation(&path, mu1 * t);
                    (f.mass(0), f.mass(1))
                })
                .collect())
        })
        .collect()
}

/// Compares the covering marginals against the limit fragmentation
/// marginals by the two-sample KS distance of the largest (rank 1) and
/// second-largest (rank 2) masses, per time. The verdict gates rank 1.
pub fn convergence_experiment(cfg: &ConvergenceConfig) -> Result<KsReport> {
    let covering = covering_marginals(cfg)?;
    let limit = limit_marginals(cfg)?;
    let mut ks = Vec::new();
    let mut pass = true;
    for (ti, &t) in cfg.t_list.iter().enumerate() {
        for rank in 0..2 {
            let a: Vec<f64> = covering
                .iter()
                .map(|row| if rank == 0 { row[ti].0 } else { row[ti].1 })
                .collect();
            let b: Vec<f64> = limit
                .iter()
                .map(|row| if rank == 0 { row[ti].0 } else { row[ti].1 })
                .collect();
            let value = ks_statistic(&a, &b)?;
            if rank == 0 {
                pass &= value <= cfg.ks_threshold;
            }
            ks.push(KsEntry {
                t,
                rank: rank + 1,
                value,
            });
        }
    }
    Ok(KsReport {
        experiment: "converge".into(),
        params: serde_json::json!({
            "law": cfg.law,
            "alpha": cfg.law.stable_index(),
            "eps": cfg.eps,
            "replicas": cfg.replicas,
            "grid": cfg.grid,
            "delta": cfg.delta,
            "threshold": cfg.ks_threshold,
            "seed": cfg.seed,
        }),
        ks,
        pass,
    })
}

/// `σ(p) = sqrt(Σ p_i²)`.
pub fn sigma(masses: &[f64]) -> f64 {
    masses.iter().map(|p| p * p).sum::<f64>().sqrt()
}

/// Finite mass vectors against the extreme coalescent: parks a uniformly
/// permuted copy of `masses` up to the first index whose remaining tail
/// mass is at most `t·σ(p)` (the time scale carried by the normalized
/// bridge), and compares the largest block against the largest fragment of
/// the theta-bridge at drift `t`.
pub fn extreme_convergence_experiment(
    masses: &[f64],
    theta: &ThetaSequence,
    t: f64,
    replicas: usize,
    grid: usize,
    ks_threshold: f64,
    seed: u64,
) -> Result<KsReport> {
    if masses.is_empty() {
        return Err(Error::InvalidParameter("empty mass vector".into()));
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter("masses must sum to 1".into()));
    }
    let tail_threshold = t * sigma(masses);
    let covering: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replica_rng(seed, stream::PERMUTATION, k);
            let mut permuted = masses.to_vec();
            permuted.shuffle(&mut rng);
            // first index (1-based) whose tail is at most t·σ(p)
            let mut tail = total;
            let mut idx = masses.len();
            for (i, &p) in permuted.iter().enumerate() {
                tail -= p;
                if tail <= tail_threshold {
                    idx = i + 1;
                    break;
                }
            }
            let mut engine = parking::ParkingEngine::new();
            for &p in &permuted[..idx] {
                let s = CirclePoint::new(rng.random::<f64>());
                engine.step(s, p).expect("masses sum to 1");
            }
            engine.ranked_masses().largest()
        })
        .collect();
    let limit: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = replica_rng(seed, stream::BRIDGE, k);
            let path = extreme_bridge_with(theta, grid, &mut rng).expect("valid theta");
            fragmentation(&LimitPath::Grid(path), t).largest()
        })
        .collect();
    let value = ks_statistic(&covering, &limit)?;
    Ok(KsReport {
        experiment: "extreme".into(),
        params: serde_json::json!({
            "masses": masses.len(),
            "theta0": theta.theta0(),
            "atoms": theta.atoms().len(),
            "replicas": replicas,
            "grid": grid,
            "threshold": ks_threshold,
            "seed": seed,
        }),
        ks: vec![KsEntry {
            t,
            rank: 1,
            value,
        }],
        pass: value <= ks_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_statistic(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.5]).unwrap(), 0.5);
        assert!(ks_statistic(&[], &[1.0]).is_err());
    }

    /// Brute-force oracle: sup over all jump points of the ECDF difference.
    fn ks_brute(a: &[f64], b: &[f64]) -> f64 {
        let mut points: Vec<f64> = a.iter().chain(b).copied().collect();
        points.sort_unstable_by(f64::total_cmp);
        let mut sup = 0.0f64;
        for &x in &points {
            let fa = a.iter().filter(|&&v| v <= x).count() as f64 / a.len() as f64;
            let fb = b.iter().filter(|&&v| v <= x).count() as f64 / b.len() as f64;
            sup = sup.max((fa - fb).abs());
        }
        sup
    }

    #[test]
    fn ks_agrees_with_brute_force() {
        let mut rng = replica_rng(9, stream::PERMUTATION, 3);
        for trial in 0..200 {
            let na = 1 + (trial % 50);
            let nb = 1 + ((trial * 7) % 50);
            let a: Vec<f64> = (0..na).map(|_| (rng.random::<f64>() * 8.0).round() / 4.0).collect();
            let b: Vec<f64> = (0..nb).map(|_| (rng.random::<f64>() * 8.0).round() / 4.0).collect();
            let fast = ks_statistic(&a, &b).unwrap();
            let brute = ks_brute(&a, &b);
            assert_abs_diff_eq!(fast, brute, epsilon = 1e-12);
        }
    }

    #[test]
    fn mean_se_examples() {
        let (m, se) = mc_mean_se(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!((m, se), (1.0, 0.0));
        let (m, se) = mc_mean_se(&[0.0, 2.0]).unwrap();
        assert_eq!((m, se), (1.0, 1.0));
        let (m, se) = mc_mean_se(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert_relative_eq!(se, 1.0 / 3.0f64.sqrt(), max_relative = 1e-12);
        assert!(mc_mean_se(&[1.0]).is_err());
    }

    #[test]
    fn drift_zero_time() {
        let law = CaravanLaw::Deterministic { value: 1.0 };
        let r = drift_check(&law, 0.0, 1e-2, 8, 1).unwrap();
        assert_eq!(r.median_sup, 0.0);
    }

    #[test]
    fn drift_shrinks_with_eps() {
        let law = CaravanLaw::Deterministic { value: 1.0 };
        let sups: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| drift_check(&law, 1.0, eps, 15, 2).unwrap().median_sup)
            .collect();
        assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
    }

    #[test]
    fn sigma_values() {
        assert_relative_eq!(sigma(&[0.6, 0.8]), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn experiment_report_shape() {
        let mut cfg = ConvergenceConfig::new(CaravanLaw::Deterministic { value: 1.0 }, 0.05, 3);
        cfg.replicas = 60;
        cfg.grid = 1 << 12;
        cfg.t_list = vec![0.5, 1.0];
        cfg.ks_threshold = 1.0; // shape test only
        let report = convergence_experiment(&cfg).unwrap();
        assert_eq!(report.ks.len(), 4);
        assert_eq!(report.ks[0].t, 0.5);
        assert_eq!(report.ks[0].rank, 1);
        assert!(report.pass);
        let json = serde_json::to_value(&report).unwrap();
        assert!(json.get("experiment").is_some());
        assert!(json.get("ks").unwrap().as_array().unwrap().len() == 4);
        // determinism given (config, seed)
        let again = convergence_experiment(&cfg).unwrap();
        for (a, b) in report.ks.iter().zip(&again.ks) {
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn extreme_index_at_large_t() {
        // at t·σ(p) ≥ 1 the first caravan already satisfies the tail bound,
        // so every covering replica parks exactly one caravan
        let masses = vec![0.25; 4];
        // σ = 0.5, so t = 2 gives threshold 1
        let theta = ThetaSequence::brownian();
        let report =
            extreme_convergence_experiment(&masses, &theta, 2.0, 50, 1 << 10, 1.0, 9).unwrap();
        assert_eq!(report.ks.len(), 1);
        let covering: Vec<f64> = (0..50u64)
            .map(|k| {
                let mut rng = replica_rng(9, stream::PERMUTATION, k);
                let mut permuted = masses.clone();
                permuted.shuffle(&mut rng);
                permuted[0]
            })
            .collect();
        assert!(covering.iter().all(|&p| p == 0.25));
    }
}
