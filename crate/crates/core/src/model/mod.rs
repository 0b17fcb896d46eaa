//! Core domain types shared by every other module. No stochastic content.

mod arc_set;
mod partition;
mod path;
mod profile;
mod theta;

pub use arc_set::{Arc, ArcSet};
pub use partition::RankedMassPartition;
pub use path::{GridPath, JumpDriftPath};
pub use profile::{CaravanPiece, PieceSegment, Profile};
pub use theta::ThetaSequence;

use crate::error::{Error, Result};

/// Comparison tolerance for circle arithmetic in binary floating point.
pub const TOL: f64 = 1e-12;

/// A point of the unit-circumference circle, stored as a fraction in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CirclePoint(f64);

impl CirclePoint {
    /// Wraps an arbitrary real onto the circle.
    pub fn new(x: f64) -> Self {
        let mut r = x.rem_euclid(1.0);
        if r >= 1.0 {
            r = 0.0;
        }
        CirclePoint(r)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Clockwise offset, modulo the circumference.
    pub fn offset(self, d: f64) -> Self {
        CirclePoint::new(self.0 + d)
    }
}

impl From<CirclePoint> for f64 {
    fn from(p: CirclePoint) -> f64 {
        p.0
    }
}

/// The finite data of a parking problem: caravan masses and arrival points.
#[derive(Debug, Clone)]
pub struct CaravanInstance {
    masses: Vec<f64>,
    arrivals: Vec<CirclePoint>,
}

impl CaravanInstance {
    /// Validates positivity, matching lengths and total mass at most 1.
    pub fn new(masses: Vec<f64>, arrivals: Vec<CirclePoint>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidParameter("at least one caravan".into()));
        }
        if masses.len() != arrivals.len() {
            return Err(Error::InvalidParameter(
                "masses and arrival points must have equal length".into(),
            ));
        }
        if masses.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidParameter("masses must be positive".into()));
        }
        let total: f64 = masses.iter().sum();
        if total > 1.0 + TOL {
            return Err(Error::InvalidParameter(format!(
                "total mass {total} exceeds the circle"
            )));
        }
        Ok(CaravanInstance { masses, arrivals })
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn arrivals(&self) -> &[CirclePoint] {
        &self.arrivals
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn arrival(&self, i: usize) -> CirclePoint {
        self.arrivals[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// A complete instance fills the circle exactly.
    pub fn is_complete(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= TOL
    }
}
