//! CSV writers for the declared export schemas.

use std::io::{self, Write};

use crate::discrete::DiscreteTrajectory;
use crate::parking::Trajectory;

/// `step,block_rank,block_start,block_length` for every step of a run.
pub fn write_trajectory_csv<W: Write>(w: &mut W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(w, "step,block_rank,block_start,block_length")?;
    for (step, state) in trajectory.states.iter().enumerate() {
        let mut arcs = state.arcs();
        arcs.sort_by(|a, b| b.len.total_cmp(&a.len));
        for (rank, arc) in arcs.iter().enumerate() {
            writeln!(w, "{step},{},{},{}", rank + 1, arc.start, arc.len)?;
        }
    }
    Ok(())
}

/// `step,block_rank,block_size` for a discrete run.
pub fn write_discrete_csv<W: Write>(w: &mut W, trajectory: &DiscreteTrajectory) -> io::Result<()> {
    writeln!(w, "step,block_rank,block_size")?;
    for (step, blocks) in trajectory.blocks.iter().enumerate() {
        for (rank, size) in blocks.iter().enumerate() {
            writeln!(w, "{step},{},{size}", rank + 1)?;
        }
    }
    Ok(())
}

/// `replica,t,rank,mass` rows of fragment samples.
pub fn write_fragments_csv<W: Write>(
    w: &mut W,
    rows: &[(usize, f64, usize, f64)],
) -> io::Result<()> {
    writeln!(w, "replica,t,rank,mass")?;
    for &(replica, t, rank, mass) in rows {
        writeln!(w, "{replica},{t},{rank},{mass}")?;
    }
    Ok(())
}

/// `alpha,t,mc_estimate,mc_se,quadrature` rows of the moment comparison.
pub fn write_moment_csv<W: Write>(
    w: &mut W,
    rows: &[(f64, f64, f64, f64, f64)],
) -> io::Result<()> {
    writeln!(w, "alpha,t,mc_estimate,mc_se,quadrature")?;
    for &(alpha, t, est, se, quad) in rows {
        writeln!(w, "{alpha},{t},{est},{se},{quad}")?;
    }
    Ok(())
}
