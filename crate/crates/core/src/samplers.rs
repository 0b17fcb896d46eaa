//! Seeded generators for every stochastic ingredient: caravan lengths,
//! budget truncation, uniform arrivals, Brownian bridges, spectrally
//! positive stable variables, heavy-tailed Poisson atoms, and the mixing
//! variables of the extreme decomposition.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CaravanInstance, CirclePoint, GridPath, ThetaSequence};
use crate::rng::{replica_rng, stream};

/// Caravan length laws. Pareto with index `alpha ∈ (1, 2)` has the heavy
/// tail `P(ℓ > x) = c·x^(-α)` for `x ≥ x_m` with `c = x_m^α`; the other
/// families have finite second moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum CaravanLaw {
    Pareto { alpha: f64, xm: f64 },
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Geometric { q: f64 },
}

impl CaravanLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CaravanLaw::Pareto { alpha, xm } => {
                if !(alpha > 1.0 && alpha < 2.0) {
                    return Err(Error::InvalidLaw(format!("pareto alpha {alpha} not in (1,2)")));
                }
                if !(xm > 0.0) {
                    return Err(Error::InvalidLaw(format!("pareto xm {xm}")));
                }
            }
            CaravanLaw::Exponential { rate } => {
                if !(rate > 0.0) {
                    return Err(Error::InvalidLaw(format!("exponential rate {rate}")));
                }
            }
            CaravanLaw::Deterministic { value } => {
                if !(value > 0.0) {
                    return Err(Error::InvalidLaw(format!("deterministic value {value}")));
                }
            }
            CaravanLaw::Geometric { q } => {
                if !(q > 0.0 && q < 1.0) {
                    return Err(Error::InvalidLaw(format!("geometric q {q} not in (0,1)")));
                }
            }
        }
        Ok(())
    }

    /// First moment.
    pub fn mu1(&self) -> f64 {
        match *self {
            CaravanLaw::Pareto { alpha, xm } => alpha * xm / (alpha - 1.0),
            CaravanLaw::Exponential { rate } => 1.0 / rate,
            CaravanLaw::Deterministic { value } => value,
            CaravanLaw::Geometric { q } => 1.0 / (1.0 - q),
        }
    }

    /// Second moment; `None` when infinite.
    pub fn mu2(&self) -> Option<f64> {
        match *self {
            CaravanLaw::Pareto { .. } => None,
            CaravanLaw::Exponential { rate } => Some(2.0 / (rate * rate)),
            CaravanLaw::Deterministic { value } => Some(value * value),
            CaravanLaw::Geometric { q } => Some((1.0 + q) / ((1.0 - q) * (1.0 - q))),
        }
    }

    /// Tail constant `c` with `P(ℓ > x) ~ c·x^(-α)`; `None` for light tails.
    pub fn tail_constant(&self) -> Option<f64> {
        match *self {
            CaravanLaw::Pareto { alpha, xm } => Some(xm.powf(alpha)),
            _ => None,
        }
    }

    /// The stability index the law belongs to: `α` for Pareto, 2 otherwise.
    pub fn stable_index(&self) -> f64 {
        match *self {
            CaravanLaw::Pareto { alpha, .. } => alpha,
            _ => 2.0,
        }
    }

    pub fn is_integer_valued(&self) -> bool {
        match *self {
            CaravanLaw::Deterministic { value } => value.fract() == 0.0,
            CaravanLaw::Geometric { .. } => true,
            _ => false,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CaravanLaw::Pareto { alpha, xm } => {
                let u: f64 = rng.random();
                xm * (1.0 - u).powf(-1.0 / alpha)
            }
            CaravanLaw::Exponential { rate } => {
                let u: f64 = rng.random();
                -(1.0 - u).ln() / rate
            }
            CaravanLaw::Deterministic { value } => value,
            CaravanLaw::Geometric { q } => {
                // support {1, 2, ...}, P(ℓ = k) = (1-q)·q^(k-1)
                let u: f64 = rng.random();
                1.0 + ((1.0 - u).ln() / q.ln()).floor()
            }
        }
    }
}

impl FromStr for CaravanLaw {
    type Err = Error;

    /// Parses `family:params`, e.g. `pareto:1.5,1`, `exponential:1`,
    /// `deterministic:1`, `geometric:0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidLaw(format!("expected family:params, got {s}")))?;
        let nums: Vec<f64> = params
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidLaw(format!("bad parameter {p}")))
            })
            .collect::<Result<_>>()?;
        let law = match (family, nums.as_slice()) {
            ("pareto", [alpha, xm]) => CaravanLaw::Pareto { alpha: *alpha, xm: *xm },
            ("pareto", [alpha]) => CaravanLaw::Pareto { alpha: *alpha, xm: 1.0 },
            ("exponential", [rate]) => CaravanLaw::Exponential { rate: *rate },
            ("deterministic", [value]) => CaravanLaw::Deterministic { value: *value },
            ("geometric", [q]) => CaravanLaw::Geometric { q: *q },
            _ => return Err(Error::InvalidLaw(format!("unknown law {s}"))),
        };
        law.validate()?;
        Ok(law)
    }
}

/// `n` iid caravan lengths, deterministic in the seed.
pub fn sample_lengths(law: &CaravanLaw, n: usize, seed: u64) -> Result<Vec<f64>> {
    law.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one draw".into()));
    }
    let mut rng = replica_rng(seed, stream::LENGTHS, 0);
    Ok((0..n).map(|_| law.sample(&mut rng)).collect())
}

/// Truncates a length stream to a budget: returns `(ℓ*, T)` where `T` is the
/// first index whose partial sum reaches the budget and the last entry of
/// `ℓ*` is clipped so the total equals the budget.
pub fn truncate_to_budget<I: IntoIterator<Item = f64>>(lengths: I, budget: f64) -> (Vec<f64>, usize) {
    let mut out = Vec::new();
    let mut acc = 0.0f64;
    for l in lengths {
        if acc + l >= budget {
            out.push(budget - acc);
            break;
        }
        acc += l;
        out.push(l);
    }
    let t = out.len();
    (out, t)
}

/// A complete instance with budget `1/ε`: masses `ε·ℓ*_i` (the last one
/// clipped so the total is exactly 1) at iid uniform arrival points.
pub fn make_instance(law: &CaravanLaw, eps: f64, seed: u64) -> Result<CaravanInstance> {
    make_instance_with(law, eps, &mut replica_rng(seed, stream::INSTANCE, 0))
}

/// Same as [`make_instance`] but drawing from the caller's generator.
pub fn make_instance_with<R: Rng + ?Sized>(
    law: &CaravanLaw,
    eps: f64,
    rng: &mut R,
) -> Result<CaravanInstance> {
    law.validate()?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {eps} not in (0,1)")));
    }
    let budget = 1.0 / eps;
    let mut masses = Vec::new();
    let mut acc = 0.0f64;
    loop {
        let l = law.sample(rng);
        if acc + l >= budget {
            break;
        }
        acc += l;
        masses.push(eps * l);
    }
    let partial: f64 = masses.iter().sum();
    masses.push(1.0 - partial);
    let arrivals = (0..masses.len())
        .map(|_| CirclePoint::new(rng.random::<f64>()))
        .collect();
    CaravanInstance::new(masses, arrivals)
}

/// A complete instance of exactly `m` caravans: iid lengths normalized to
/// total mass 1, at iid uniform arrival points.
pub fn normalized_instance_with<R: Rng + ?Sized>(
    law: &CaravanLaw,
    m: usize,
    rng: &mut R,
) -> Result<CaravanInstance> {
    law.validate()?;
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one caravan".into()));
    }
    let raw: Vec<f64> = (0..m).map(|_| law.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    let mut masses: Vec<f64> = raw.iter().map(|l| l / total).collect();
    let partial: f64 = masses[..m - 1].iter().sum();
    masses[m - 1] = 1.0 - partial;
    let arrivals = (0..m).map(|_| CirclePoint::new(rng.random::<f64>())).collect();
    CaravanInstance::new(masses, arrivals)
}

/// Standard Brownian bridge on a grid of `g` cells, by pinning a Gaussian
/// random walk: `values[k] = W_k - (k/g)·W_g` with step variance `1/g`.
pub fn brownian_bridge(g: usize, seed: u64) -> Result<GridPath> {
    let mut rng = replica_rng(seed, stream::BRIDGE, 0);
    brownian_bridge_with(g, &mut rng)
}

/// Same as [`brownian_bridge`] from the caller's generator.
pub fn brownian_bridge_with<R: Rng + ?Sized>(g: usize, rng: &mut R) -> Result<GridPath> {
    if g < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 cells".into()));
    }
    let step_sd = (1.0 / g as f64).sqrt();
    let mut values = Vec::with_capacity(g + 1);
    values.push(0.0);
    let mut w = 0.0f64;
    for _ in 0..g {
        let z: f64 = StandardNormal.sample(rng);
        w += step_sd * z;
        values.push(w);
    }
    let wg = values[g];
    let inv = 1.0 / g as f64;
    for (k, v) in values.iter_mut().enumerate() {
        *v -= k as f64 * inv * wg;
    }
    values[g] = 0.0;
    GridPath::new(values)
}

/// One draw of the spectrally positive stable variable normalized so that
/// `E exp(-λσ) = exp(λ^α)`.
///
/// Chambers–Mallows–Stuck specialized to total positive skew; the scale
/// `|cos(πα/2)|^(1/α)` of the skewed unit variable cancels against the
/// normalization, leaving the bare trigonometric kernel.
pub fn sample_stable_one<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let half_pi = PI / 2.0;
    let b = (alpha * half_pi).tan().atan() / alpha;
    let u: f64 = rng.random();
    let v = PI * (clamp_open(u) - 0.5);
    let e: f64 = rng.random();
    let w = -clamp_open(e).ln();
    let phi = alpha * (v + b);
    let num = phi.sin();
    let den = v.cos().powf(1.0 / alpha);
    let tail = ((v - phi).cos() / w).max(f64::MIN_POSITIVE);
    num / den * tail.powf((1.0 - alpha) / alpha)
}

fn clamp_open(x: f64) -> f64 {
    x.clamp(1e-16, 1.0 - 1e-16)
}

/// `n` iid copies of the normalized spectrally positive stable variable.
pub fn stable_spectrally_positive(alpha: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} not in (1,2)")));
    }
    let mut rng = replica_rng(seed, stream::STABLE, 0);
    Ok((0..n).map(|_| sample_stable_one(alpha, &mut rng)).collect())
}

/// Hard cap on the expected atom count of a truncated heavy-tailed Poisson
/// measure; finer truncations are refused.
pub const ATOM_COUNT_CAP: f64 = 5e7;

/// All atoms above `delta` of the Poisson measure with intensity
/// `(αc/μ₁)·x^(-1-α) dx`, ranked decreasing. The count is Poisson with mean
/// `(c/μ₁)·δ^(-α)`.
pub fn poisson_atoms(alpha: f64, c: f64, mu1: f64, delta: f64, seed: u64) -> Result<Vec<f64>> {
    poisson_atoms_with(alpha, c, mu1, delta, &mut replica_rng(seed, stream::ATOMS, 0))
}

/// Same as [`poisson_atoms`] from the caller's generator.
pub fn poisson_atoms_with<R: Rng + ?Sized>(
    alpha: f64,
    c: f64,
    mu1: f64,
    delta: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} not in (1,2)")));
    }
    if !(delta > 0.0) || !(c > 0.0) || !(mu1 > 0.0) {
        return Err(Error::InvalidParameter(
            "delta, c and mu1 must be positive".into(),
        ));
    }
    let mean = c / mu1 * delta.powf(-alpha);
    if mean > ATOM_COUNT_CAP {
        return Err(Error::TruncationTooFine);
    }
    let n = Poisson::new(mean.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))? // mean validated above
        .sample(rng) as usize;
    let mut atoms: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            delta * clamp_open(1.0 - u).powf(-1.0 / alpha)
        })
        .collect();
    atoms.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(atoms)
}

/// Default truncation threshold for a target expected atom count.
pub fn delta_for_atom_count(alpha: f64, c: f64, mu1: f64, count: f64) -> f64 {
    (c / mu1 / count).powf(1.0 / alpha)
}

/// The mixing variables of the extreme decomposition recovered from ranked
/// atoms: `e^(2t*) = ΣΔ²`, `θ*_i = Δ_i·e^(-t*)`, `θ₀* = 0`.
pub fn theta_star(atoms: &[f64]) -> Result<(f64, ThetaSequence)> {
    if atoms.is_empty() {
        return Err(Error::InvalidParameter("no atoms".into()));
    }
    if atoms.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidParameter("atoms must be positive".into()));
    }
    let e2t: f64 = atoms.iter().map(|a| a * a).sum();
    let et = e2t.sqrt();
    let t_star = et.ln();
    let theta = ThetaSequence::new(0.0, atoms.iter().map(|a| a / et).collect(), true)?;
    Ok((t_star, theta))
}
