use thiserror::Error;

/// Errors shared by the simulation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inserted arc overlaps an existing block beyond endpoint touching.
    #[error("overlapping arc")]
    OverlappingArc,
    /// A caravan larger than the remaining free space.
    #[error("capacity exceeded")]
    CapacityExceeded,
    /// Backward index before the start of the process.
    #[error("time beyond process start")]
    TimeBeyondStart,
    /// Total jump mass exceeds what the drift can absorb over one period.
    #[error("supercritical mass")]
    SupercriticalMass,
    /// Atom truncation threshold implies more atoms than the configured cap.
    #[error("truncation too fine")]
    TruncationTooFine,
    /// Merge step on a partition with fewer than two masses.
    #[error("nothing to merge")]
    NothingToMerge,
    /// Fewer cutpoints on the horizon than requested.
    #[error("horizon too short")]
    HorizonTooShort,
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
