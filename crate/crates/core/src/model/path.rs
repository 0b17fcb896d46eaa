//! Path types: jump-drift paths (exact, grid-free) and grid paths for the
//! Brownian components.

use crate::error::{Error, Result};

/// A càdlàg path on `[0, 1)` with constant negative drift and finitely many
/// positive jumps:
///
/// ```text
/// value(x) = slope·x + Σ { size_j : location_j ≤ x }
/// ```
///
/// The periodic extension `value(x + 1) = value(x) + value(1-)` is used
/// wherever a path is read across the origin.
#[derive(Debug, Clone)]
pub struct JumpDriftPath {
    slope: f64,
    /// (location, size), sorted by location.
    jumps: Vec<(f64, f64)>,
    /// prefix[k] = sum of the first k jump sizes.
    prefix: Vec<f64>,
}

impl JumpDriftPath {
    pub fn new(slope: f64, mut jumps: Vec<(f64, f64)>) -> Result<Self> {
        if !(slope < 0.0) {
            return Err(Error::InvalidParameter(format!("slope {slope} not negative")));
        }
        for &(loc, size) in &jumps {
            if !(0.0..1.0).contains(&loc) {
                return Err(Error::InvalidParameter(format!("jump location {loc}")));
            }
            if !(size > 0.0) {
                return Err(Error::InvalidParameter(format!("jump size {size}")));
            }
        }
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(jumps.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &(_, s) in &jumps {
            acc += s;
            prefix.push(acc);
        }
        Ok(JumpDriftPath { slope, jumps, prefix })
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn total_jump_mass(&self) -> f64 {
        *self.prefix.last().unwrap()
    }

    /// `value(1-) = slope + total jump mass`.
    pub fn end_value(&self) -> f64 {
        self.slope + self.total_jump_mass()
    }

    /// Path value at `x` (right-continuous).
    pub fn value(&self, x: f64) -> f64 {
        let k = self.jumps.partition_point(|&(loc, _)| loc <= x);
        self.slope * x + self.prefix[k]
    }

    /// Left limit at `x`; jumps located exactly at `x` are excluded.
    pub fn value_left(&self, x: f64) -> f64 {
        let k = self.jumps.partition_point(|&(loc, _)| loc < x);
        self.slope * x + self.prefix[k]
    }

    /// The path re-read from `v`: jump locations shift to `(loc - v) mod 1`,
    /// a jump exactly at `v` lands at 0. Slope and sizes are unchanged.
    pub fn rotated(&self, v: f64) -> JumpDriftPath {
        let jumps = self
            .jumps
            .iter()
            .map(|&(loc, size)| {
                let mut p = (loc - v).rem_euclid(1.0);
                if loc == v || p >= 1.0 {
                    p = 0.0;
                }
                (p, size)
            })
            .collect();
        JumpDriftPath::new(self.slope, jumps).expect("rotation preserves validity")
    }

    /// Steepens the drift by `t ≥ 0`.
    pub fn with_added_drift(&self, t: f64) -> JumpDriftPath {
        JumpDriftPath::new(self.slope - t, self.jumps.clone()).expect("drift keeps slope negative")
    }
}

/// A path sampled on the uniform grid `k / G`, `k = 0..=G`.
#[derive(Debug, Clone)]
pub struct GridPath {
    values: Vec<f64>,
}

impl GridPath {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidParameter("grid needs at least 2 cells".into()));
        }
        Ok(GridPath { values })
    }

    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Scales all values in place.
    pub fn scaled(mut self, c: f64) -> Self {
        for v in &mut self.values {
            *v *= c;
        }
        self
    }

    /// Restriction to every other grid point. A bridge at resolution `G` is
    /// the restriction of one at `2G` over the same randomness, which is the
    /// coupling the refinement checks rely on.
    pub fn coarsen(&self) -> Result<GridPath> {
        let g = self.grid_size();
        if g % 2 != 0 || g < 4 {
            return Err(Error::InvalidParameter("grid size must be even".into()));
        }
        GridPath::new(self.values.iter().copied().step_by(2).collect())
    }
}
