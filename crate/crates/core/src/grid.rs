//! Discrete domain `G × (−h, 0)` with `G = (0,1)²` periodic.

use crate::error::{Error, Result};

/// Tensor grid: `nx × ny` periodic samples in the horizontal, `nz + 1`
/// collocated levels `z_k = −h + k·h/nz` in the vertical.
///
/// Level `0` lies on the bottom `Γ_b`, level `nz` on the surface `Γ_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub h: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, nz: usize, h: f64) -> Result<Self> {
        if nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "horizontal sizes must be even and >= 4 (got {nx}x{ny})"
            )));
        }
        if nz < 4 {
            return Err(Error::InvalidParameter(format!(
                "need at least 4 vertical intervals (got {nz})"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!("depth must be positive (got {h})")));
        }
        Ok(Self { nx, ny, nz, h })
    }

    /// Number of vertical levels, `nz + 1`.
    #[inline]
    pub fn levels(&self) -> usize {
        self.nz + 1
    }

    /// Samples per horizontal layer.
    #[inline]
    pub fn layer_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Total number of samples of a 3D field.
    #[inline]
    pub fn len(&self) -> usize {
        self.layer_len() * self.levels()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dz(&self) -> f64 {
        self.h / self.nz as f64
    }

    /// Flat index, `k` outermost and `i` innermost.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.nx as f64
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 / self.ny as f64
    }

    #[inline]
    pub fn z(&self, k: usize) -> f64 {
        -self.h + k as f64 * self.dz()
    }

    /// Trapezoid weights over the `nz + 1` levels; they sum to `h`.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dz = self.dz();
        let mut w = vec![dz; self.levels()];
        w[0] = 0.5 * dz;
        w[self.nz] = 0.5 * dz;
        w
    }

    pub fn with_resolution(&self, nx: usize, ny: usize, nz: usize) -> Result<Self> {
        Self::new(nx, ny, nz, self.h)
    }
}

/// Boundary-condition family of a prognostic unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// `v = 0` on `Γ_b`, `∂_z v = 0` on `Γ_u`.
    Velocity,
    /// `∂_z τ = 0` on `Γ_b`, `∂_z τ + α τ = 0` on `Γ_u`.
    Temperature,
    /// `∂_z σ = 0` on both.
    Salinity,
}

impl FieldKind {
    pub const ALL: [FieldKind; 3] = [FieldKind::Velocity, FieldKind::Temperature, FieldKind::Salinity];

    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Velocity => "velocity",
            FieldKind::Temperature => "temperature",
            FieldKind::Salinity => "salinity",
        }
    }
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Physical constants: Robin coefficient and buoyancy coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub alpha: f64,
    pub beta_tau: f64,
    pub beta_sigma: f64,
}

impl PhysParams {
    pub fn new(alpha: f64, beta_tau: f64, beta_sigma: f64) -> Result<Self> {
        for (name, value) in [("alpha", alpha), ("beta_tau", beta_tau), ("beta_sigma", beta_sigma)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive (got {value})")));
            }
        }
        Ok(Self { alpha, beta_tau, beta_sigma })
    }

    pub fn max_beta(&self) -> f64 {
        self.beta_tau.max(self.beta_sigma)
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        Self { alpha: 1.0, beta_tau: 1.0, beta_sigma: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(5, 8, 8, 1.0).is_err());
        assert!(Grid::new(2, 8, 8, 1.0).is_err());
        assert!(Grid::new(8, 8, 3, 1.0).is_err());
        assert!(Grid::new(8, 8, 8, 0.0).is_err());
        assert!(PhysParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn levels_hit_both_boundaries() {
        let g = Grid::new(8, 8, 16, 2.0).unwrap();
        assert_eq!(g.z(0), -2.0);
        assert!(g.z(g.nz).abs() < 1e-15);
        let s: f64 = g.trapezoid_weights().iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }
}
