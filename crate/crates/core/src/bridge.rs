//! The bridge encoding of the parking state.
//!
//! A parking state after `i` caravans is encoded by the drift-minus-jumps
//! path `b_i(x) = -x + Σ_{j≤i} p_j·1{x ≥ s_j}`. Rotating at the first
//! location `V` where the full bridge reaches its infimum (through left
//! limits) turns block structure into the constancy intervals of the
//! running infimum, which an exact forward sweep extracts: a fragment opens
//! when a jump lifts the path above its running minimum and closes when the
//! drift drains the excess back down.

use crate::error::{Error, Result};
use crate::model::{CaravanInstance, CirclePoint, JumpDriftPath, RankedMassPartition, TOL};
use crate::parking;

/// The bridge of the first `i` caravans (1-based, `1 ≤ i ≤ m`).
pub fn build_bridge(instance: &CaravanInstance, i: usize) -> Result<JumpDriftPath> {
    if i == 0 || i > instance.len() {
        return Err(Error::InvalidParameter(format!(
            "bridge step {i} outside 1..={}",
            instance.len()
        )));
    }
    let jumps = (0..i)
        .map(|j| (instance.arrival(j).get(), instance.mass(j)))
        .collect();
    JumpDriftPath::new(-1.0, jumps)
}

/// First location where the path infimum is reached, through left limits.
///
/// Between jumps the path strictly decreases, so the candidates are exactly
/// the left limits at the jump locations plus the value at `1-`; ties break
/// to the smallest location. The left limit at a jump sitting at 0 is read
/// over the period, i.e. it is the base value 0.
pub fn path_argmin(path: &JumpDriftPath) -> (CirclePoint, f64) {
    let mut best_x = 1.0;
    let mut best = path.end_value();
    for &(loc, _) in path.jumps() {
        let left = path.value_left(loc);
        if left < best {
            best = left;
            best_x = loc;
        }
    }
    // a candidate at an earlier location with equal value wins
    for &(loc, _) in path.jumps() {
        if loc >= best_x {
            break;
        }
        if path.value_left(loc) == best {
            best_x = loc;
            break;
        }
    }
    (CirclePoint::new(best_x), best)
}

/// Vervaat transform: the path re-rooted at its infimum location. The jump
/// at `V` (when there is one) moves to location 0, so the returned path
/// starts from base value 0 and its left limits are all nonnegative for a
/// bridge input.
pub fn vervaat(path: &JumpDriftPath) -> JumpDriftPath {
    let (v, _) = path_argmin(path);
    path.rotated(v.get())
}

/// Ranked lengths of the constancy intervals of `x ↦ inf_{[V, V+x]} path`,
/// read over one period from `V`.
///
/// Requires the total jump mass to be at most `|slope|` over the period
/// (otherwise the running infimum could not drain the jumps and the sweep
/// is meaningless): violations give [`Error::SupercriticalMass`].
pub fn constancy_blocks(path: &JumpDriftPath, v: CirclePoint) -> Result<RankedMassPartition> {
    let sigma = -path.slope();
    if path.total_jump_mass() > sigma + TOL {
        return Err(Error::SupercriticalMass);
    }
    let rotated = path.rotated(v.get());
    let intervals = sweep_constancy(sigma, rotated.jumps());
    Ok(RankedMassPartition::from_unsorted(
        intervals.into_iter().map(|(_, len)| len).collect(),
    ))
}

/// Constancy intervals `(start, len)` of the running infimum of the path
/// `x ↦ -sigma·x + Σ{size_j : loc_j ≤ x}` over `[0, 1)`, in sweep order.
///
/// `excess` tracks `value - running_min`; a fragment is open exactly while
/// it is positive. When the drift drains the excess to zero within
/// tolerance of a jump location the fragment continues through the jump:
/// blocks touching at a point are one block.
pub(crate) fn sweep_constancy(sigma: f64, jumps: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut excess = 0.0f64; // value − running min
    let mut open: Option<f64> = None; // fragment start while one is open
    let mut prev = 0.0f64;

    for &(loc, size) in jumps.iter().chain(std::iter::once(&(1.0, 0.0))) {
        let gap = loc - prev;
        if let Some(start) = open {
            let drain = excess / sigma;
            if drain < gap - TOL {
                // closes strictly inside the free stretch
                out.push((start, prev + drain - start));
                open = None;
                excess = 0.0;
            } else if drain <= gap + TOL {
                // reaches the running min within tolerance of this event;
                // a jump here means the blocks touch and stay one fragment
                excess = 0.0;
                if size == 0.0 {
                    out.push((start, loc - start));
                    open = None;
                }
            } else {
                excess -= sigma * gap;
            }
        }
        if size > 0.0 {
            if open.is_none() {
                open = Some(loc);
            }
            excess += size;
        } else if let Some(start) = open {
            // period end with the fragment still open
            out.push((start, loc - start));
            open = None;
        }
        prev = loc;
    }
    out
}

/// Differential report of the block/bridge equivalence on one instance.
#[derive(Debug, Clone)]
pub struct BlockBridgeReport {
    pub steps: usize,
    pub max_discrepancy: f64,
    pub pass: bool,
}

/// Compares, for every step `i`, the ranked block masses from the direct
/// simulation against the constancy-interval masses of the step-`i` bridge
/// read from the full bridge's infimum location. Passes at 1e-9.
pub fn block_bridge_check(instance: &CaravanInstance) -> Result<BlockBridgeReport> {
    if !instance.is_complete() {
        return Err(Error::InvalidParameter(
            "block/bridge equivalence needs a complete instance".into(),
        ));
    }
    let m = instance.len();
    let trajectory = parking::run_parking(instance)?;
    let full = build_bridge(instance, m)?;
    let (v, _) = path_argmin(&full);

    // rotated jump positions tagged with the caravan index, sorted once;
    // the step-i sweep filters by index
    let vpos = v.get();
    let mut tagged: Vec<(f64, f64, usize)> = (0..m)
        .map(|j| (rot_pos(instance.arrival(j).get(), vpos), instance.mass(j), j))
        .collect();
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut max_disc = 0.0f64;
    let mut buf: Vec<(f64, f64)> = Vec::with_capacity(m);
    for i in 1..=m {
        buf.clear();
        buf.extend(
            tagged
                .iter()
                .filter(|&&(_, _, car)| car < i)
                .map(|&(loc, size, _)| (loc, size)),
        );
        let masses: Vec<f64> = sweep_constancy(1.0, &buf)
            .into_iter()
            .map(|(_, len)| len)
            .collect();
        let bridge_side = RankedMassPartition::from_unsorted(masses);
        let disc = bridge_side.max_discrepancy(&trajectory.partitions[i]);
        max_disc = max_disc.max(disc);
    }
    Ok(BlockBridgeReport {
        steps: m,
        max_discrepancy: max_disc,
        pass: max_disc <= 1e-9,
    })
}

fn rot_pos(loc: f64, v: f64) -> f64 {
    let mut p = (loc - v).rem_euclid(1.0);
    if loc == v || p >= 1.0 {
        p = 0.0;
    }
    p
}
