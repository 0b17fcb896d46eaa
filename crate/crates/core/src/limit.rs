//! The limiting objects: truncated stable loops, scaled Brownian bridges,
//! drifted excursions and the fragmentation they encode, the time-shift
//! constants of the coalescent embedding, extreme theta-bridges, and a
//! small-state rate oracle for the merge dynamics.
//!
//! Everything with only jumps is exact and grid-free; grids appear only
//! where a Brownian component forces them.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::bridge::{sweep_constancy, vervaat};
use crate::error::{Error, Result};
use crate::model::{GridPath, JumpDriftPath, RankedMassPartition, ThetaSequence};
use crate::numeric::gamma;
use crate::rng::{replica_rng, stream};
use crate::samplers::{brownian_bridge_with, poisson_atoms_with, CaravanLaw};

/// Default grid resolution for paths with a Brownian component.
pub const DEFAULT_GRID: usize = 1 << 20;

/// Default atom truncation for the jump-path limits used in experiments.
pub const DEFAULT_ATOM_DELTA: f64 = 1e-3;

/// A limit path: exact jump-drift for stable indices below 2, grid for the
/// Brownian case.
#[derive(Debug, Clone)]
pub enum LimitPath {
    Jump(JumpDriftPath),
    Grid(GridPath),
}

/// A truncated stable loop `ΣΔ_i(1{x ≥ U_i} - x)` over the atoms above
/// `delta` of the intensity `(αc/μ₁)·x^(-1-α) dx`, at iid uniform
/// locations. Compensation makes the endpoint exactly zero.
pub fn stable_loop_path(
    alpha: f64,
    c: f64,
    mu1: f64,
    delta: f64,
    seed: u64,
) -> Result<JumpDriftPath> {
    stable_loop_path_with(alpha, c, mu1, delta, &mut replica_rng(seed, stream::LIMIT, 0))
}

/// Same as [`stable_loop_path`] from the caller's generator.
pub fn stable_loop_path_with<R: Rng + ?Sized>(
    alpha: f64,
    c: f64,
    mu1: f64,
    delta: f64,
    rng: &mut R,
) -> Result<JumpDriftPath> {
    let atoms = poisson_atoms_with(alpha, c, mu1, delta, rng)?;
    let mut jumps: Vec<(f64, f64)> = atoms
        .into_iter()
        .map(|a| (rng.random::<f64>(), a))
        .collect();
    if jumps.is_empty() {
        // degenerate truncation: an empty loop needs some drift to be a path
        return JumpDriftPath::new(-f64::MIN_POSITIVE, vec![]);
    }
    // summing in the path's own jump order keeps the endpoint exactly zero
    jumps.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = jumps.iter().map(|&(_, s)| s).sum();
    JumpDriftPath::new(-total, jumps)
}

/// The weak limit of the rescaled parking bridges for the given law: a
/// scaled Brownian bridge when the second moment is finite, a stable loop
/// with the law's tail intensity otherwise.
pub fn scaled_limit_bridge(
    law: &CaravanLaw,
    grid: usize,
    delta: f64,
    seed: u64,
) -> Result<LimitPath> {
    scaled_limit_bridge_with(law, grid, delta, &mut replica_rng(seed, stream::LIMIT, 0))
}

/// Same as [`scaled_limit_bridge`] from the caller's generator.
pub fn scaled_limit_bridge_with<R: Rng + ?Sized>(
    law: &CaravanLaw,
    grid: usize,
    delta: f64,
    rng: &mut R,
) -> Result<LimitPath> {
    law.validate()?;
    match law {
        CaravanLaw::Pareto { alpha, .. } => {
            let c = law.tail_constant().expect("pareto has a tail constant");
            Ok(LimitPath::Jump(stable_loop_path_with(
                *alpha,
                c,
                law.mu1(),
                delta,
                rng,
            )?))
        }
        _ => {
            let mu2 = law
                .mu2()
                .ok_or_else(|| Error::InvalidLaw("infinite second moment".into()))?;
            let scale = (mu2 / law.mu1()).sqrt();
            Ok(LimitPath::Grid(brownian_bridge_with(grid, rng)?.scaled(scale)))
        }
    }
}

/// Bridge scale constant of the limit: `sqrt(μ₂/μ₁)` in the Brownian case,
/// `(Γ(2-α)·c/((α-1)·μ₁))^(1/α)` in the stable case.
pub fn limit_scale_constant(law: &CaravanLaw) -> Result<f64> {
    law.validate()?;
    match law {
        CaravanLaw::Pareto { alpha, .. } => {
            let c = law.tail_constant().unwrap();
            Ok((gamma(2.0 - alpha) * c / ((alpha - 1.0) * law.mu1())).powf(1.0 / alpha))
        }
        _ => {
            let mu2 = law
                .mu2()
                .ok_or_else(|| Error::InvalidLaw("infinite second moment".into()))?;
            Ok((mu2 / law.mu1()).sqrt())
        }
    }
}

/// Additive time shift such that the time-changed covering process matches
/// the shifted standard coalescent: `log(scale) - log(μ₁)`.
pub fn coalescent_time_shift(law: &CaravanLaw) -> Result<f64> {
    Ok(limit_scale_constant(law)?.ln() - law.mu1().ln())
}

/// Vervaat transform followed by an extra downward drift `t`, landing the
/// path at `-t`.
pub fn excursion_with_drift(path: &LimitPath, t: f64) -> LimitPath {
    match path {
        LimitPath::Jump(p) => LimitPath::Jump(vervaat(p).with_added_drift(t)),
        LimitPath::Grid(g) => LimitPath::Grid(grid_excursion_with_drift(g, t)),
    }
}

fn grid_excursion_with_drift(g: &GridPath, t: f64) -> GridPath {
    let n = g.grid_size();
    let vals = g.values();
    let mut k_min = 0usize;
    let mut best = f64::INFINITY;
    for (k, &v) in vals.iter().enumerate().take(n) {
        if v < best {
            best = v;
            k_min = k;
        }
    }
    let inv = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let idx = (k_min + j) % n;
        let rotated = vals[idx] - best;
        out.push(rotated - t * (j as f64 * inv));
    }
    out[0] = 0.0;
    GridPath::new(out).expect("same resolution")
}

/// Constancy intervals `(start, len)` of the running infimum of the drifted
/// excursion built from `path`, in sweep order.
pub fn fragment_intervals(path: &LimitPath, t: f64) -> Vec<(f64, f64)> {
    match excursion_with_drift(path, t) {
        LimitPath::Jump(p) => sweep_constancy(-p.slope(), p.jumps()),
        LimitPath::Grid(g) => grid_fragment_intervals(&g),
    }
}

/// Ranked masses of the fragmentation at drift `t`: the constancy-interval
/// lengths of the running infimum of the drifted excursion.
pub fn fragmentation(path: &LimitPath, t: f64) -> RankedMassPartition {
    RankedMassPartition::from_unsorted(
        fragment_intervals(path, t)
            .into_iter()
            .map(|(_, len)| len)
            .collect(),
    )
}

/// Grid fragments: maximal runs of grid steps on which the running minimum
/// does not move. A grid Brownian path lowers its running minimum only by
/// attaining a new minimum exactly, so flatness is exact float equality and
/// each reported length is within 2/G of the true constancy interval.
fn grid_fragment_intervals(g: &GridPath) -> Vec<(f64, f64)> {
    let n = g.grid_size();
    let inv = 1.0 / n as f64;
    let vals = g.values();
    let mut out = Vec::new();
    let mut run_min = vals[0];
    let mut run_start = 0usize;
    let mut in_run = true;
    for (k, &v) in vals.iter().enumerate().skip(1) {
        if v < run_min {
            if in_run && k - 1 > run_start {
                out.push((run_start as f64 * inv, (k - 1 - run_start) as f64 * inv));
            }
            run_min = v;
            run_start = k;
            in_run = true;
        }
    }
    if in_run && n > run_start {
        out.push((run_start as f64 * inv, (n - run_start) as f64 * inv));
    }
    out
}

/// The extreme bridge `θ₀·β(x) + Σθ_i(1{x ≥ U_i} - x)` evaluated on a grid,
/// with `β` a standard Brownian bridge and `U_i` iid uniforms.
pub fn extreme_bridge(theta: &ThetaSequence, grid: usize, seed: u64) -> Result<GridPath> {
    extreme_bridge_with(theta, grid, &mut replica_rng(seed, stream::BRIDGE, 0))
}

/// Same as [`extreme_bridge`] from the caller's generator.
pub fn extreme_bridge_with<R: Rng + ?Sized>(
    theta: &ThetaSequence,
    grid: usize,
    rng: &mut R,
) -> Result<GridPath> {
    let brownian = if theta.theta0() > 0.0 {
        Some(brownian_bridge_with(grid, rng)?)
    } else {
        None
    };
    let atoms: Vec<(f64, f64)> = theta
        .atoms()
        .iter()
        .map(|&size| (rng.random::<f64>(), size))
        .collect();
    extreme_bridge_from_parts(theta.theta0(), brownian.as_ref(), &atoms, grid)
}

/// Deterministic assembly of the extreme bridge from explicit parts; the
/// entry point the reproduction identities test against.
pub fn extreme_bridge_from_parts(
    theta0: f64,
    brownian: Option<&GridPath>,
    atoms: &[(f64, f64)],
    grid: usize,
) -> Result<GridPath> {
    if grid < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 cells".into()));
    }
    let mut sorted: Vec<(f64, f64)> = atoms.to_vec();
    sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = sorted.iter().map(|&(_, s)| s).sum();
    let inv = 1.0 / grid as f64;
    let mut out = Vec::with_capacity(grid + 1);
    let mut acc = 0.0f64;
    let mut next = 0usize;
    for k in 0..=grid {
        let x = k as f64 * inv;
        while next < sorted.len() && sorted[next].0 <= x {
            acc += sorted[next].1;
            next += 1;
        }
        let mut v = acc - x * total;
        if let Some(b) = brownian {
            if b.grid_size() != grid {
                return Err(Error::InvalidParameter("grid mismatch".into()));
            }
            v += theta0 * b.value_at(k);
        }
        out.push(v);
    }
    out[0] = 0.0;
    out[grid] = 0.0;
    GridPath::new(out)
}

/// One step of the additive-coalescent jump chain on finitely many masses:
/// a pair `(i, j)` merges at rate `s_i + s_j`, so the chain waits an
/// exponential time of total rate `(k-1)·Σs` and merges a pair chosen with
/// probability proportional to its rate.
pub fn merge_dynamics_step(
    partition: &RankedMassPartition,
    seed: u64,
) -> Result<(RankedMassPartition, f64)> {
    merge_dynamics_step_with(partition, &mut replica_rng(seed, stream::MERGE, 0))
}

/// Same as [`merge_dynamics_step`] from the caller's generator.
pub fn merge_dynamics_step_with<R: Rng + ?Sized>(
    partition: &RankedMassPartition,
    rng: &mut R,
) -> Result<(RankedMassPartition, f64)> {
    let masses = partition.masses();
    let k = masses.len();
    if k < 2 {
        return Err(Error::NothingToMerge);
    }
    let total: f64 = masses.iter().sum();
    let rate = (k as f64 - 1.0) * total;
    let e: f64 = Exp1.sample(rng);
    let waiting = e / rate;

    let mut threshold: f64 = rng.random::<f64>() * rate;
    let mut chosen = (0, 1);
    'outer: for i in 0..k {
        for j in (i + 1)..k {
            threshold -= masses[i] + masses[j];
            if threshold <= 0.0 {
                chosen = (i, j);
                break 'outer;
            }
        }
    }
    let mut next: Vec<f64> = Vec::with_capacity(k - 1);
    for (idx, &m) in masses.iter().enumerate() {
        if idx == chosen.0 {
            next.push(masses[chosen.0] + masses[chosen.1]);
        } else if idx != chosen.1 {
            next.push(m);
        }
    }
    Ok((RankedMassPartition::from_unsorted(next), waiting))
}
