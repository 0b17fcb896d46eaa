//! Ranked mass partitions: elements of the infinite ordered simplex.

use super::TOL;

/// A nonincreasing sequence of positive masses with sum at most 1; trailing
/// zeros are implicit. The state space of the fragmentation and coalescent
/// processes.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize)]
pub struct RankedMassPartition(Vec<f64>);

impl RankedMassPartition {
    /// Ranks the masses nonincreasing, dropping non-positive entries.
    pub fn from_unsorted(mut masses: Vec<f64>) -> Self {
        masses.retain(|&m| m > 0.0);
        masses.sort_unstable_by(|a, b| b.total_cmp(a));
        RankedMassPartition(masses)
    }

    pub fn masses(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Mass of the given rank (0-based); zero beyond the stored entries.
    pub fn mass(&self, rank: usize) -> f64 {
        self.0.get(rank).copied().unwrap_or(0.0)
    }

    pub fn largest(&self) -> f64 {
        self.mass(0)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_valid(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1]) && self.sum() <= 1.0 + TOL
    }

    /// Largest componentwise discrepancy against another partition, padding
    /// the shorter one with zeros.
    pub fn max_discrepancy(&self, other: &Self) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|i| (self.mass(i) - other.mass(i)).abs())
            .fold(0.0, f64::max)
    }
}
