//! Exact sequential simulation of the covering process.
//!
//! Each caravan of mass `p` arriving at `s` fills the free space clockwise
//! from `s`, skipping painted blocks, and lands at the point `t` where its
//! last car parks. The landing point is found by an event-driven scan over
//! block boundaries: free gaps are consumed until the mass is exhausted, so
//! a step costs O(log m) amortized on the ordered block index and the
//! arithmetic is exact (no grids, no root finding).

use crate::error::{Error, Result};
use crate::model::{
    ArcSet, CaravanInstance, CaravanPiece, CirclePoint, PieceSegment, Profile,
    RankedMassPartition, TOL,
};

/// Outcome of one parking step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// Where the caravan's last car parks.
    pub landing: CirclePoint,
    /// The caravan's contribution to the profile.
    pub piece: CaravanPiece,
}

/// Mutable parking state with an ordered block index.
#[derive(Debug, Clone, Default)]
pub struct ParkingEngine {
    occupied: ArcSet,
}

impl ParkingEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn occupied(&self) -> &ArcSet {
        &self.occupied
    }

    pub fn ranked_masses(&self) -> RankedMassPartition {
        self.occupied.ranked_lengths()
    }

    /// Parks one caravan of mass `p` arriving at `s`.
    pub fn step(&mut self, s: CirclePoint, p: f64) -> Result<StepOutcome> {
        let s = s.get();
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!("caravan mass {p}")));
        }
        let free = 1.0 - self.occupied.total_len();
        if p > free + TOL {
            return Err(Error::CapacityExceeded);
        }

        let mut segments: Vec<PieceSegment> = Vec::new();
        // Unwrapped coordinates y >= s; positions on the circle are y mod 1.
        // When s sits inside a block the scan starts at that block's right
        // end and the block joins the caravan's covering arc. The covering
        // arc length is accumulated additively (consumed blocks plus the
        // caravan mass) so total occupied length tracks the mass sums.
        let mut consumed = 0.0f64;
        let (anchor, mut y) = match self.occupied.seg_at(s) {
            Some((bs, blen)) => {
                self.occupied.remove_seg(bs);
                consumed += blen;
                segments.push(PieceSegment {
                    start: s,
                    end: bs + blen,
                    slope: 0.0,
                });
                (bs, bs + blen)
            }
            None => (s, s),
        };

        let mut remaining = p;
        // landing kept both unwrapped (for the piece's domain) and as an
        // exact circle point: a caravan touching a block lands exactly on
        // the stored block start, and a complete fill lands exactly on the
        // covering arc's own start
        let (landing_y, landing_circ) = loop {
            let cur = wrap(y);
            match self.occupied.next_seg_after(cur) {
                Some((bs, blen)) => {
                    let mut gap = (bs - cur).rem_euclid(1.0);
                    if gap >= 1.0 - 2.0 * TOL {
                        // the block start sits within rounding of the cursor
                        gap = 0.0;
                    }
                    let block_start_y = y + gap;
                    if remaining < gap - TOL {
                        segments.push(PieceSegment {
                            start: y,
                            end: y + remaining,
                            slope: -1.0,
                        });
                        break (y + remaining, wrap(y + remaining));
                    }
                    if gap > 0.0 {
                        segments.push(PieceSegment {
                            start: y,
                            end: block_start_y,
                            slope: -1.0,
                        });
                    }
                    remaining = (remaining - gap).max(0.0);
                    self.occupied.remove_seg(bs);
                    consumed += blen;
                    if remaining <= TOL {
                        // lands exactly on the block's left end; the block
                        // merges into the covering arc (touch rule)
                        break (block_start_y, bs);
                    }
                    segments.push(PieceSegment {
                        start: block_start_y,
                        end: block_start_y + blen,
                        slope: 0.0,
                    });
                    y = block_start_y + blen;
                }
                None => {
                    // only free space remains ahead
                    let to_full = anchor + 1.0 - y;
                    if remaining >= to_full - TOL {
                        // the caravan fills the lot and wraps back to the
                        // covering arc's start
                        segments.push(PieceSegment {
                            start: y,
                            end: anchor + 1.0,
                            slope: -1.0,
                        });
                        break (anchor + 1.0, wrap(anchor));
                    }
                    segments.push(PieceSegment {
                        start: y,
                        end: y + remaining,
                        slope: -1.0,
                    });
                    break (y + remaining, wrap(y + remaining));
                }
            }
        };

        self.occupied.insert(wrap(anchor), (consumed + p).min(1.0))?;

        Ok(StepOutcome {
            landing: CirclePoint::new(landing_circ),
            piece: CaravanPiece::new(s, p, landing_y, segments),
        })
    }
}

fn wrap(y: f64) -> f64 {
    if y >= 1.0 {
        y - 1.0
    } else {
        y
    }
}

/// Pure single-step flavour: parks one caravan on a copy of `occupied`.
pub fn park_caravan(
    occupied: &ArcSet,
    s: CirclePoint,
    p: f64,
) -> Result<(ArcSet, CirclePoint, CaravanPiece)> {
    let mut engine = ParkingEngine {
        occupied: occupied.clone(),
    };
    let out = engine.step(s, p)?;
    Ok((engine.occupied, out.landing, out.piece))
}

/// Full trajectory of a parking run: states, landing points, ranked block
/// masses after each step, and the profile pieces.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `states[i]` is the painted set after `i` caravans (so `states[0]` is
    /// empty and there are `m + 1` entries).
    pub states: Vec<ArcSet>,
    pub landings: Vec<CirclePoint>,
    /// `partitions[i]` ranks the blocks of `states[i]`.
    pub partitions: Vec<RankedMassPartition>,
    pub pieces: Vec<CaravanPiece>,
}

/// Runs the whole instance, recording every intermediate state.
pub fn run_parking(instance: &CaravanInstance) -> Result<Trajectory> {
    let m = instance.len();
    let mut engine = ParkingEngine::new();
    let mut states = Vec::with_capacity(m + 1);
    let mut landings = Vec::with_capacity(m);
    let mut partitions = Vec::with_capacity(m + 1);
    let mut pieces = Vec::with_capacity(m);
    states.push(engine.occupied.clone());
    partitions.push(RankedMassPartition::default());
    for i in 0..m {
        let out = engine.step(instance.arrival(i), instance.mass(i))?;
        landings.push(out.landing);
        pieces.push(out.piece);
        states.push(engine.occupied.clone());
        partitions.push(engine.ranked_masses());
    }
    Ok(Trajectory {
        states,
        landings,
        partitions,
        pieces,
    })
}

/// The profile after `i` caravans: the sum of the first `i` pieces.
pub fn profile(instance: &CaravanInstance, i: usize) -> Result<Profile> {
    if i > instance.len() {
        return Err(Error::InvalidParameter(format!(
            "step {i} beyond instance of size {}",
            instance.len()
        )));
    }
    let mut engine = ParkingEngine::new();
    let mut pieces = Vec::with_capacity(i);
    for j in 0..i {
        pieces.push(engine.step(instance.arrival(j), instance.mass(j))?.piece);
    }
    Ok(Profile::new(pieces))
}

/// Ranked block masses at the given step indices, in one pass and without
/// keeping intermediate states. Indices must be at most `instance.len()`.
pub fn ranked_at_indices(
    instance: &CaravanInstance,
    indices: &[usize],
) -> Result<Vec<RankedMassPartition>> {
    let m = instance.len();
    if indices.iter().any(|&i| i > m) {
        return Err(Error::InvalidParameter("step index beyond instance".into()));
    }
    let mut order: Vec<usize> = (0..indices.len()).collect();
    order.sort_unstable_by_key(|&k| indices[k]);
    let mut out = vec![RankedMassPartition::default(); indices.len()];
    let mut engine = ParkingEngine::new();
    let mut step = 0usize;
    for k in order {
        while step < indices[k] {
            engine.step(instance.arrival(step), instance.mass(step))?;
            step += 1;
        }
        out[k] = engine.ranked_masses();
    }
    Ok(out)
}

/// Exactness report of the profile structure over a full run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProfileReport {
    pub steps: usize,
    /// Largest of: landing left limits, jump-size errors, block-identity
    /// residuals, off-support values.
    pub max_deviation: f64,
    /// Painted-set mismatch between the profile support and the direct
    /// state, worst over all steps.
    pub max_support_mismatch: f64,
    pub slopes_ok: bool,
    pub pass: bool,
}

/// Verifies the profile structure against the direct simulation at every
/// step: the support of the summed pieces is the painted set; the landing
/// left limit vanishes; the profile jumps at each arrival by the caravan
/// mass; the slope is -1 on the painted set and 0 off it; and on every
/// maximal block the value satisfies the jumps-minus-drift identity.
pub fn profile_report(instance: &CaravanInstance) -> Result<ProfileReport> {
    let m = instance.len();
    let trajectory = run_parking(instance)?;
    let mut max_dev = 0.0f64;
    let mut max_support = 0.0f64;
    let mut slopes_ok = true;

    // per step: support equals the painted set and the landing left limit
    // vanishes (the support build itself fails on doubled painted stretches)
    for i in 1..=m {
        let profile = Profile::new(trajectory.pieces[..i].to_vec());
        let support = profile.support()?;
        let expected = &trajectory.states[i];
        let sa = support.arcs();
        let sb = expected.arcs();
        if sa.len() != sb.len() {
            max_support = f64::INFINITY;
        } else {
            for (x, y) in sa.iter().zip(&sb) {
                max_support = max_support
                    .max((x.start - y.start).abs())
                    .max((x.len - y.len).abs());
            }
        }
        max_dev = max_dev.max(profile.value_left(trajectory.landings[i - 1].get()).abs());
    }

    // final profile: jumps, slopes at all breakpoints, block identity
    let profile = Profile::new(trajectory.pieces.clone());
    let state = trajectory.states.last().unwrap();
    for j in 0..m {
        let s = instance.arrival(j).get();
        let jump = profile.value(s) - profile.value_left(s);
        max_dev = max_dev.max((jump - instance.mass(j)).abs());
    }
    // slopes are checked at the midpoints of the intervals between
    // consecutive breakpoints: segment boundaries are ambiguous at the
    // last-bit level after re-wrapping piece coordinates, interiors are not
    let breakpoints = profile.breakpoints();
    for w in breakpoints.windows(2).map(Some).chain(std::iter::once(None)) {
        let mid = match w {
            Some([a, b]) => {
                if b - a <= TOL {
                    continue;
                }
                0.5 * (a + b)
            }
            _ => {
                // wrap interval from the last breakpoint around to the first
                let a = *breakpoints.last().unwrap();
                let b = breakpoints[0] + 1.0;
                if b - a <= TOL {
                    continue;
                }
                (0.5 * (a + b)).rem_euclid(1.0)
            }
        };
        let slope = profile.slope_right(mid);
        let expected = if state.contains(mid) { -1.0 } else { 0.0 };
        slopes_ok &= slope == expected;
        if !state.contains(mid) {
            max_dev = max_dev.max(profile.value(mid).abs());
        }
    }
    // on every maximal block [v, v'): H(v + x) = H(v-) - x + Σ p_j over
    // arrivals in [v, v + x], checked at the profile breakpoints inside
    for arc in state.arcs() {
        let v = arc.start;
        let base = profile.value_left(v);
        let mut arrivals: Vec<(f64, f64)> = (0..m)
            .map(|j| {
                let s = instance.arrival(j).get();
                let off = (s - v).rem_euclid(1.0);
                (off, instance.mass(j))
            })
            .filter(|&(off, _)| off <= arc.len + TOL)
            .collect();
        arrivals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        for &bp in &breakpoints {
            let x = (bp - v).rem_euclid(1.0);
            if x >= arc.len {
                continue;
            }
            let jumps: f64 = arrivals
                .iter()
                .take_while(|&&(off, _)| off <= x)
                .map(|&(_, p)| p)
                .sum();
            let residual = profile.value(bp) - (base - x + jumps);
            max_dev = max_dev.max(residual.abs());
        }
    }

    let pass = slopes_ok && max_dev <= 1e-12 && max_support <= 1e-12;
    Ok(ProfileReport {
        steps: m,
        max_deviation: max_dev,
        max_support_mismatch: max_support,
        slopes_ok,
        pass,
    })
}

/// Backward marginal of the covering process: the ranked masses
/// `⌊t·ε^(-1/α)⌋` caravans before the end of an instance built with budget
/// `1/ε`.
pub fn backward_marginal(
    instance: &CaravanInstance,
    eps: f64,
    alpha: f64,
    t: f64,
) -> Result<RankedMassPartition> {
    let idx = backward_index(instance.len(), eps, alpha, t)?;
    Ok(ranked_at_indices(instance, &[idx])?.pop().unwrap())
}

/// The index `T - ⌊t·ε^(-1/α)⌋`, or an error when it falls before 0.
pub fn backward_index(m: usize, eps: f64, alpha: f64, t: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {eps}")));
    }
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("time {t}")));
    }
    let shift = (t * eps.powf(-1.0 / alpha)).floor();
    let idx = m as f64 - shift;
    if idx < 0.0 {
        return Err(Error::TimeBeyondStart);
    }
    Ok(idx as usize)
}
