//! Physical-space field containers.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Real samples of a scalar over the full grid, `(i, j, k)` with `k` outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, data: vec![c; grid.len()] }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Samples `f(x, y, z)` at every grid node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for k in 0..grid.levels() {
            let z = grid.z(k);
            for j in 0..grid.ny {
                let y = grid.y(j);
                for i in 0..grid.nx {
                    data.push(f(grid.x(i), y, z));
                }
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.idx(i, j, k)]
    }

    pub fn layer(&self, k: usize) -> &[f64] {
        let n = self.grid.layer_len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn layer_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.grid.layer_len();
        &mut self.data[k * n..(k + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("fields live on different grids".into()))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c · other`
    pub fn axpy(&mut self, c: f64, other: &ScalarField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn mul(&self, other: &ScalarField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Self { grid: self.grid, data }
    }

    /// Horizontal slice at level `k`.
    pub fn level(&self, k: usize) -> SurfaceScalarField {
        SurfaceScalarField { grid: self.grid, data: self.layer(k).to_vec() }
    }

    /// Extends a surface field constantly in `z`.
    pub fn from_surface(s: &SurfaceScalarField) -> Self {
        let grid = s.grid;
        let mut data = Vec::with_capacity(grid.len());
        for _ in 0..grid.levels() {
            data.extend_from_slice(&s.data);
        }
        Self { grid, data }
    }
}

/// Horizontal velocity `v = (v₁, v₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HVectorField {
    pub v1: ScalarField,
    pub v2: ScalarField,
}

impl HVectorField {
    pub fn new(v1: ScalarField, v2: ScalarField) -> Result<Self> {
        v1.same_grid(&v2)?;
        Ok(Self { v1, v2 })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { v1: ScalarField::zeros(grid), v2: ScalarField::zeros(grid) }
    }

    pub fn from_fn(
        grid: Grid,
        f1: impl Fn(f64, f64, f64) -> f64,
        f2: impl Fn(f64, f64, f64) -> f64,
    ) -> Self {
        Self { v1: ScalarField::from_fn(grid, f1), v2: ScalarField::from_fn(grid, f2) }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        self.v1.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.v1.is_finite() && self.v2.is_finite()
    }

    pub fn check_finite(&self) -> Result<()> {
        self.v1.check_finite()?;
        self.v2.check_finite()
    }

    pub fn scale(&mut self, c: f64) {
        self.v1.scale(c);
        self.v2.scale(c);
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { v1: self.v1.scaled(c), v2: self.v2.scaled(c) }
    }

    pub fn axpy(&mut self, c: f64, other: &HVectorField) {
        self.v1.axpy(c, &other.v1);
        self.v2.axpy(c, &other.v2);
    }

    pub fn sub(&self, other: &HVectorField) -> Self {
        Self { v1: self.v1.sub(&other.v1), v2: self.v2.sub(&other.v2) }
    }

    pub fn add(&self, other: &HVectorField) -> Self {
        Self { v1: self.v1.add(&other.v1), v2: self.v2.add(&other.v2) }
    }

    pub fn max_abs(&self) -> f64 {
        self.v1.max_abs().max(self.v2.max_abs())
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let data = self.v1.data.iter().zip(&self.v2.data).map(|(a, b)| a.hypot(*b)).collect();
        ScalarField { grid: *self.grid(), data }
    }
}

/// Samples on the horizontal torus `G` only.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceScalarField {
    grid: Grid,
    pub data: Vec<f64>,
}

impl SurfaceScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; grid.layer_len()] }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.layer_len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} surface samples, got {}",
                grid.layer_len(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.layer_len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                data.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// `L²(G)` norm (`|G| = 1`).
    pub fn l2(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &SurfaceScalarField) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { grid: self.grid, data }
    }

    /// `L²(G)` inner product.
    pub fn dot(&self, other: &SurfaceScalarField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>() / self.data.len() as f64
    }
}
