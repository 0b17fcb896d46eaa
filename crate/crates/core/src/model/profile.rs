//! The parking profile: how many cars pass over each point of the circle.
//!
//! Each caravan contributes one piece: a jump of its full mass at the
//! arrival point, slope -1 over the free space it paints, slope 0 while its
//! cars drive over previously painted blocks, and zero beyond its landing
//! point. The profile at step `i` is the sum of the first `i` pieces.

use super::arc_set::ArcSet;
use super::TOL;

/// One slope segment of a piece, in coordinates unwrapped from the arrival
/// point (so `start < end` always, with values in `[arrival, arrival + 1]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PieceSegment {
    pub start: f64,
    pub end: f64,
    /// -1 over freshly painted space, 0 over previously painted blocks.
    pub slope: f64,
}

/// A single caravan's contribution to the profile.
#[derive(Debug, Clone)]
pub struct CaravanPiece {
    arrival: f64,
    mass: f64,
    /// Landing point in unwrapped coordinates, in `[arrival, arrival + 1]`.
    landing: f64,
    segments: Vec<PieceSegment>,
}

impl CaravanPiece {
    pub(crate) fn new(arrival: f64, mass: f64, landing: f64, segments: Vec<PieceSegment>) -> Self {
        CaravanPiece {
            arrival,
            mass,
            landing,
            segments,
        }
    }

    pub fn arrival(&self) -> f64 {
        self.arrival
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Landing point wrapped back onto the circle.
    pub fn landing(&self) -> f64 {
        self.landing.rem_euclid(1.0)
    }

    pub fn segments(&self) -> &[PieceSegment] {
        &self.segments
    }

    fn unwrap_coord(&self, x: f64) -> f64 {
        if x >= self.arrival {
            x
        } else {
            x + 1.0
        }
    }

    /// Piece value at circle point `x`; right-continuous at the arrival.
    pub fn value(&self, x: f64) -> f64 {
        let y = self.unwrap_coord(x);
        if y >= self.landing {
            return 0.0;
        }
        self.value_unwrapped(y)
    }

    /// Left limit at circle point `x`.
    pub fn value_left(&self, x: f64) -> f64 {
        let y = self.unwrap_coord(x);
        if y == self.arrival {
            return 0.0;
        }
        if y > self.landing {
            return 0.0;
        }
        self.value_unwrapped(y)
    }

    fn value_unwrapped(&self, y: f64) -> f64 {
        let mut v = self.mass;
        for seg in &self.segments {
            if y <= seg.start {
                break;
            }
            v += seg.slope * (y.min(seg.end) - seg.start);
        }
        v
    }

    /// Slope of the piece on the interval immediately to the right of `x`.
    pub fn slope_right(&self, x: f64) -> f64 {
        let y = self.unwrap_coord(x);
        if y >= self.landing {
            return 0.0;
        }
        for seg in &self.segments {
            if y >= seg.start && y < seg.end {
                return seg.slope;
            }
        }
        0.0
    }

    /// Breakpoints of the piece, as circle points.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![self.arrival, self.landing.rem_euclid(1.0)];
        for seg in &self.segments {
            out.push(seg.start.rem_euclid(1.0));
            out.push(seg.end.rem_euclid(1.0));
        }
        out
    }
}

/// The profile at some step: the sum of the caravan pieces so far.
#[derive(Debug, Clone, Default)]
pub struct Profile {
    pieces: Vec<CaravanPiece>,
}

impl Profile {
    pub fn new(pieces: Vec<CaravanPiece>) -> Self {
        Profile { pieces }
    }

    pub fn pieces(&self) -> &[CaravanPiece] {
        &self.pieces
    }

    /// Jumps of the profile: the arrival points with the caravan masses.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().map(|p| (p.arrival, p.mass)).collect()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.value(x)).sum()
    }

    pub fn value_left(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.value_left(x)).sum()
    }

    /// Combined slope immediately to the right of `x`.
    pub fn slope_right(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.slope_right(x)).sum()
    }

    /// All breakpoints of the profile, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| p.breakpoints())
            .map(|x| if x >= 1.0 { 0.0 } else { x })
            .collect();
        xs.sort_unstable_by(f64::total_cmp);
        xs.dedup();
        xs
    }

    /// Union of the slope -1 segments: the painted set the profile rides
    /// on. Fails when two pieces claim overlapping painted stretches, which
    /// a correct parking run never produces.
    pub fn support(&self) -> crate::error::Result<ArcSet> {
        let mut set = ArcSet::new();
        for piece in &self.pieces {
            for seg in &piece.segments {
                if seg.slope == -1.0 && seg.end - seg.start > TOL {
                    set.insert(seg.start.rem_euclid(1.0), seg.end - seg.start)?;
                }
            }
        }
        Ok(set)
    }
}
