//! Parameter sequences of the extreme coalescents.

use crate::error::{Error, Result};

/// `(θ₀, θ₁, θ₂, …)` with `θ₀² + Σθᵢ² = 1`: the parameter of an extreme
/// coalescent. A truncated sequence is a finite cut of an infinite one and
/// is only required to satisfy `θ₀² + Σθᵢ² ≤ 1`.
#[derive(Debug, Clone)]
pub struct ThetaSequence {
    theta0: f64,
    atoms: Vec<f64>,
    truncated: bool,
}

impl ThetaSequence {
    const NORM_TOL: f64 = 1e-9;

    pub fn new(theta0: f64, mut atoms: Vec<f64>, truncated: bool) -> Result<Self> {
        if theta0 < 0.0 {
            return Err(Error::InvalidParameter("theta0 must be nonnegative".into()));
        }
        if atoms.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::InvalidParameter("theta atoms must be positive".into()));
        }
        atoms.sort_unstable_by(|a, b| b.total_cmp(a));
        let norm = theta0 * theta0 + atoms.iter().map(|a| a * a).sum::<f64>();
        let ok = if truncated {
            norm <= 1.0 + Self::NORM_TOL
        } else {
            (norm - 1.0).abs() <= Self::NORM_TOL
        };
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "theta squared norm {norm} incompatible with truncated={truncated}"
            )));
        }
        Ok(ThetaSequence {
            theta0,
            atoms,
            truncated,
        })
    }

    /// The Brownian parameter: `θ₀ = 1`, no atoms.
    pub fn brownian() -> Self {
        ThetaSequence {
            theta0: 1.0,
            atoms: Vec::new(),
            truncated: false,
        }
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn squared_norm(&self) -> f64 {
        self.theta0 * self.theta0 + self.atoms.iter().map(|a| a * a).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_is_enforced() {
        assert!(ThetaSequence::new(0.0, vec![0.8, 0.6], false).is_ok());
        assert!(ThetaSequence::new(0.0, vec![0.8, 0.8], false).is_err());
        assert!(ThetaSequence::new(0.0, vec![0.5], false).is_err());
        assert!(ThetaSequence::new(0.0, vec![0.5], true).is_ok());
        assert_eq!(ThetaSequence::brownian().squared_norm(), 1.0);
    }

    #[test]
    fn atoms_are_ranked() {
        let t = ThetaSequence::new(0.0, vec![0.6, 0.8], false).unwrap();
        assert_eq!(t.atoms(), &[0.8, 0.6]);
    }
}
