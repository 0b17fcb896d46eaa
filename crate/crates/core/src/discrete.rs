//! Caravan parking on the discrete circle `Z/nZ` and its exact
//! correspondence with the continuous model under `ε = 1/n`,
//! `s_i = ⌊n·U_i⌋/n`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{CaravanInstance, CirclePoint};
use crate::parking;
use crate::rng::{replica_rng, stream};
use crate::samplers::CaravanLaw;

/// A caravan on the discrete lot: `size` cars probing clockwise from `spot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteCaravan {
    pub size: usize,
    pub spot: usize,
}

/// Per-step occupancy and ranked circular block sizes.
#[derive(Debug, Clone)]
pub struct DiscreteTrajectory {
    /// `occupied[i]` is the lot after `i` caravans (`m + 1` entries).
    pub occupied: Vec<Vec<bool>>,
    /// `blocks[i]` ranks the circular block sizes after `i` caravans.
    pub blocks: Vec<Vec<usize>>,
}

/// Union-find engine: each car takes the first free spot clockwise from its
/// caravan's spot. `next[i]` points toward the next free slot at or after
/// `i`, collapsing under path compression, so a full run costs
/// `O(m·α(n))` besides the per-step block snapshots.
pub fn knuth_park(n: usize, caravans: &[DiscreteCaravan]) -> Result<DiscreteTrajectory> {
    validate(n, caravans)?;
    let mut next: Vec<usize> = (0..n).collect();
    let mut occupied = vec![false; n];
    // blocks tracked through a second union-find over occupied runs
    let mut parent: Vec<usize> = (0..n).collect();
    let mut size: Vec<usize> = vec![0; n];

    fn find_block(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    let mut trajectory = DiscreteTrajectory {
        occupied: vec![occupied.clone()],
        blocks: vec![Vec::new()],
    };

    let mut free = n;
    for caravan in caravans {
        let mut probe = caravan.spot;
        for _ in 0..caravan.size {
            let slot = find_free(&mut next, probe, n);
            occupied[slot] = true;
            free -= 1;
            next[slot] = if free == 0 { slot } else { (slot + 1) % n };
            size[slot] = 1;
            // merge with occupied neighbours
            let left = (slot + n - 1) % n;
            if n > 1 && occupied[left] {
                union_blocks(&mut parent, &mut size, left, slot);
            }
            let right = (slot + 1) % n;
            if n > 1 && right != left && occupied[right] {
                union_blocks(&mut parent, &mut size, slot, right);
            }
            probe = slot;
        }
        let mut sizes: Vec<usize> = (0..n)
            .filter(|&i| occupied[i] && find_block(&mut parent, i) == i)
            .map(|i| size[i].min(n))
            .collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        trajectory.occupied.push(occupied.clone());
        trajectory.blocks.push(sizes);
    }
    Ok(trajectory)
}

fn find_free(next: &mut [usize], start: usize, n: usize) -> usize {
    let mut i = start;
    let mut hops = 0usize;
    while next[i] != i {
        next[i] = next[next[i]];
        i = next[i];
        hops += 1;
        debug_assert!(hops <= 2 * n, "free-slot scan must terminate");
    }
    i
}

fn union_blocks(parent: &mut [usize], size: &mut [usize], a: usize, b: usize) {
    let ra = find_root(parent, a);
    let rb = find_root(parent, b);
    if ra != rb {
        parent[rb] = ra;
        size[ra] += size[rb];
    }
}

fn find_root(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Reference engine: every car scans linearly from its spot. `O(n·m)`, kept
/// as the oracle the union-find engine is checked against.
pub fn knuth_park_naive(n: usize, caravans: &[DiscreteCaravan]) -> Result<DiscreteTrajectory> {
    validate(n, caravans)?;
    let mut occupied = vec![false; n];
    let mut trajectory = DiscreteTrajectory {
        occupied: vec![occupied.clone()],
        blocks: vec![Vec::new()],
    };
    for caravan in caravans {
        for _ in 0..caravan.size {
            let mut slot = caravan.spot;
            while occupied[slot] {
                slot = (slot + 1) % n;
            }
            occupied[slot] = true;
        }
        trajectory.occupied.push(occupied.clone());
        trajectory.blocks.push(circular_blocks(&occupied));
    }
    Ok(trajectory)
}

fn validate(n: usize, caravans: &[DiscreteCaravan]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("lot size must be positive".into()));
    }
    let total: usize = caravans.iter().map(|c| c.size).sum();
    if total > n {
        return Err(Error::CapacityExceeded);
    }
    if caravans.iter().any(|c| c.spot >= n || c.size == 0) {
        return Err(Error::InvalidParameter("bad caravan spot or size".into()));
    }
    Ok(())
}

/// Ranked circular run lengths of an occupancy vector.
pub fn circular_blocks(occupied: &[bool]) -> Vec<usize> {
    let n = occupied.len();
    let total = occupied.iter().filter(|&&b| b).count();
    if total == 0 {
        return Vec::new();
    }
    if total == n {
        return vec![n];
    }
    // start scanning at a free slot so runs do not wrap
    let start = occupied.iter().position(|&b| !b).unwrap();
    let mut sizes = Vec::new();
    let mut run = 0usize;
    for k in 1..=n {
        if occupied[(start + k) % n] {
            run += 1;
        } else if run > 0 {
            sizes.push(run);
            run = 0;
        }
    }
    if run > 0 {
        sizes.push(run);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Report of the exact discrete/continuous correspondence.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EquivReport {
    pub n: usize,
    pub caravans: usize,
    pub max_diff: f64,
    pub engines_agree: bool,
    pub pass: bool,
}

/// Runs the discrete engine with integer lengths `ℓ*` and spots `⌊n·U⌋`,
/// and the continuous engine with `p_i = ℓ*_i/n`, `s_i = ⌊n·U_i⌋/n`;
/// asserts the ranked block partitions agree exactly (to 1e-12) at every
/// step after dividing the discrete sizes by `n`.
pub fn discrete_continuous_equiv(n: usize, law: &CaravanLaw, seed: u64) -> Result<EquivReport> {
    law.validate()?;
    if !law.is_integer_valued() {
        return Err(Error::InvalidLaw("law must be integer valued".into()));
    }
    let mut rng = replica_rng(seed, stream::INSTANCE, 0);
    // integer lengths truncated to the budget n
    let mut lengths: Vec<usize> = Vec::new();
    let mut acc = 0usize;
    loop {
        let l = law.sample(&mut rng) as usize;
        if acc + l >= n {
            lengths.push(n - acc);
            break;
        }
        acc += l;
        lengths.push(l);
    }
    let spots: Vec<usize> = (0..lengths.len())
        .map(|_| ((rng.random::<f64>() * n as f64) as usize).min(n - 1))
        .collect();

    let caravans: Vec<DiscreteCaravan> = lengths
        .iter()
        .zip(&spots)
        .map(|(&size, &spot)| DiscreteCaravan { size, spot })
        .collect();
    let discrete = knuth_park(n, &caravans)?;
    let engines_agree = if n <= 100 {
        let naive = knuth_park_naive(n, &caravans)?;
        naive.blocks == discrete.blocks && naive.occupied == discrete.occupied
    } else {
        true
    };

    let instance = CaravanInstance::new(
        lengths.iter().map(|&l| l as f64 / n as f64).collect(),
        spots
            .iter()
            .map(|&s| CirclePoint::new(s as f64 / n as f64))
            .collect(),
    )?;
    let continuous = parking::run_parking(&instance)?;

    let mut max_diff = 0.0f64;
    for (step, blocks) in discrete.blocks.iter().enumerate() {
        let cont = &continuous.partitions[step];
        let ranks = blocks.len().max(cont.len());
        for r in 0..ranks {
            let d = blocks.get(r).map(|&b| b as f64 / n as f64).unwrap_or(0.0);
            let diff = (d - cont.mass(r)).abs();
            max_diff = max_diff.max(diff);
        }
    }
    Ok(EquivReport {
        n,
        caravans: caravans.len(),
        max_diff,
        engines_agree,
        pass: engines_agree && max_diff <= 1e-12,
    })
}
