//! Simulation and verification toolkit for the caravan parking process on
//! the unit circle and its fragmentation / additive-coalescent scaling
//! limits.
//!
//! Caravans of cars (drops of paint) of masses `p_1..p_m` arrive at points
//! `s_1..s_m` of the circle and fill the free space clockwise. The toolkit
//! simulates the covering process exactly, encodes parking states through
//! bridges with exchangeable increments, extracts ranked fragment masses
//! from running-infimum constancy intervals, simulates the limiting
//! objects (Brownian bridges, spectrally positive stable loops, extreme
//! theta-bridges, reduced inhomogeneous continuum random trees), and runs
//! the statistical experiments that tie the two sides together.
//!
//! Everything stochastic is seeded and replica-parallel: a seed plus a
//! replica index determines the output bit for bit.

pub mod bridge;
pub mod discrete;
pub mod error;
pub mod export;
pub mod icrt;
pub mod limit;
pub mod model;
pub mod numeric;
pub mod parking;
pub mod rng;
pub mod samplers;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    ArcSet, CaravanInstance, CirclePoint, GridPath, JumpDriftPath, Profile, RankedMassPartition,
    ThetaSequence, TOL,
};
