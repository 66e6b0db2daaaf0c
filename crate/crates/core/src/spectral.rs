//! Horizontal Fourier machinery: layer-wise 2D transforms, spectral
//! derivatives, dealiasing and the periodic Poisson solver on `G`.
//!
//! Coefficients are normalized so that `f(x) = Σ_k F_k e^{2πi k·x}`, i.e. the
//! forward transform divides by `nx·ny`. A field `cos(2πx)` therefore has
//! coefficient `1/2` at `(±1, 0)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{ScalarField, SurfaceScalarField};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Horizontal Fourier coefficients at every vertical level, laid out like
/// [`ScalarField`]: level outermost, then `ky`, then `kx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumField {
    grid: Grid,
    pub data: Vec<Complex64>,
}

impl SpectrumField {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Coefficient for signed wavenumbers `(kx, ky)` at level `k`.
    pub fn coeff(&self, kx: i64, ky: i64, k: usize) -> Complex64 {
        let i = kx.rem_euclid(self.grid.nx as i64) as usize;
        let j = ky.rem_euclid(self.grid.ny as i64) as usize;
        self.data[self.grid.idx(i, j, k)]
    }

    pub fn layer(&self, k: usize) -> &[Complex64] {
        let n = self.grid.layer_len();
        &self.data[k * n..(k + 1) * n]
    }

    pub fn layer_mut(&mut self, k: usize) -> &mut [Complex64] {
        let n = self.grid.layer_len();
        &mut self.data[k * n..(k + 1) * n]
    }

    pub fn axpy(&mut self, c: f64, other: &SpectrumField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|a| *a *= c);
    }
}

/// Signed wavenumber of FFT index `i` for length `n` (Nyquist is `+n/2`).
#[inline]
pub fn signed_wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT plans and wavenumber tables for one grid. Cheap to clone.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    /// `2π kx` per column index, Nyquist kept.
    kx: Vec<f64>,
    ky: Vec<f64>,
    /// Same with the Nyquist entry zeroed; used by odd derivatives.
    kx_odd: Vec<f64>,
    ky_odd: Vec<f64>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let tables = |n: usize| {
            let k: Vec<f64> = (0..n).map(|i| 2.0 * PI * signed_wavenumber(i, n) as f64).collect();
            let k_odd: Vec<f64> =
                (0..n).map(|i| if i == n / 2 { 0.0 } else { k[i] }).collect();
            // 2/3 rule: keep |k| < n/3
            let keep: Vec<bool> =
                (0..n).map(|i| (signed_wavenumber(i, n).unsigned_abs() as f64) < n as f64 / 3.0).collect();
            (k, k_odd, keep)
        };
        let (kx, kx_odd, keep_x) = tables(grid.nx);
        let (ky, ky_odd, keep_y) = tables(grid.ny);
        Self {
            grid,
            fwd_x: planner.plan_fft_forward(grid.nx),
            inv_x: planner.plan_fft_inverse(grid.nx),
            fwd_y: planner.plan_fft_forward(grid.ny),
            inv_y: planner.plan_fft_inverse(grid.ny),
            kx,
            ky,
            kx_odd,
            ky_odd,
            keep_x,
            keep_y,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `2π kx` for column `i` (Nyquist kept).
    #[inline]
    pub fn kx(&self, i: usize) -> f64 {
        self.kx[i]
    }

    #[inline]
    pub fn ky(&self, j: usize) -> f64 {
        self.ky[j]
    }

    /// Wavevector as seen by first derivatives (Nyquist zeroed).
    #[inline]
    pub fn k_odd(&self, i: usize, j: usize) -> (f64, f64) {
        (self.kx_odd[i], self.ky_odd[j])
    }

    /// `|2πk|²` for mode `(i, j)`.
    #[inline]
    pub fn k2(&self, i: usize, j: usize) -> f64 {
        self.kx[i] * self.kx[i] + self.ky[j] * self.ky[j]
    }

    #[inline]
    pub fn keeps(&self, i: usize, j: usize) -> bool {
        self.keep_x[i] && self.keep_y[j]
    }

    fn transform_layers(&self, data: &mut [Complex64], forward: bool) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (fx, fy) = if forward { (&self.fwd_x, &self.fwd_y) } else { (&self.inv_x, &self.inv_y) };
        let scratch_len = fx.get_inplace_scratch_len().max(fy.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        // rows: every contiguous run of nx samples
        fx.process_with_scratch(data, &mut scratch);
        // columns via a transpose per layer
        let mut t = vec![Complex64::new(0.0, 0.0); nx * ny];
        for layer in data.chunks_exact_mut(nx * ny) {
            for j in 0..ny {
                for i in 0..nx {
                    t[i * ny + j] = layer[j * nx + i];
                }
            }
            fy.process_with_scratch(&mut t, &mut scratch);
            for j in 0..ny {
                for i in 0..nx {
                    layer[j * nx + i] = t[i * ny + j];
                }
            }
        }
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if grid.nx != self.grid.nx || grid.ny != self.grid.ny {
            return Err(Error::DimensionMismatch(format!(
                "transform planned for {}x{}, field is {}x{}",
                self.grid.nx, self.grid.ny, grid.nx, grid.ny
            )));
        }
        Ok(())
    }

    /// Layer-wise forward transform.
    pub fn hfft(&self, f: &ScalarField) -> Result<SpectrumField> {
        self.check(f.grid())?;
        Ok(self.forward(f))
    }

    /// Inverse of [`Spectral::hfft`]; the imaginary part is discarded.
    pub fn ihfft(&self, s: &SpectrumField) -> Result<ScalarField> {
        self.check(s.grid())?;
        Ok(self.inverse(s))
    }

    pub(crate) fn forward(&self, f: &ScalarField) -> SpectrumField {
        let mut data: Vec<Complex64> = f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_layers(&mut data, true);
        let norm = 1.0 / self.grid.layer_len() as f64;
        data.iter_mut().for_each(|c| *c *= norm);
        SpectrumField { grid: *f.grid(), data }
    }

    pub(crate) fn inverse(&self, s: &SpectrumField) -> ScalarField {
        let mut data = s.data.clone();
        self.transform_layers(&mut data, false);
        ScalarField::from_vec(*s.grid(), data.into_iter().map(|c| c.re).collect())
            .expect("layout preserved")
    }

    pub fn forward_surface(&self, f: &SurfaceScalarField) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = f.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_layers(&mut data, true);
        let norm = 1.0 / self.grid.layer_len() as f64;
        data.iter_mut().for_each(|c| *c *= norm);
        data
    }

    pub fn inverse_surface(&self, coeffs: &[Complex64]) -> SurfaceScalarField {
        let mut data = coeffs.to_vec();
        self.transform_layers(&mut data, false);
        SurfaceScalarField::from_vec(self.grid, data.into_iter().map(|c| c.re).collect())
            .expect("layout preserved")
    }

    /// Multiplies every coefficient of every layer by `symbol(i, j)`.
    pub(crate) fn apply_symbol(
        &self,
        s: &SpectrumField,
        symbol: impl Fn(usize, usize) -> Complex64,
    ) -> SpectrumField {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let table: Vec<Complex64> =
            (0..ny).flat_map(|j| (0..nx).map(move |i| (i, j))).map(|(i, j)| symbol(i, j)).collect();
        let mut out = s.clone();
        for layer in out.data.chunks_exact_mut(nx * ny) {
            for (c, m) in layer.iter_mut().zip(&table) {
                *c *= m;
            }
        }
        out
    }

    /// Symbol of `∂_axis^order`; odd orders drop the Nyquist mode.
    pub(crate) fn derivative_symbol(&self, axis: Axis, order: u32) -> impl Fn(usize, usize) -> Complex64 + '_ {
        move |i, j| {
            let (k, k_odd) = match axis {
                Axis::X => (self.kx[i], self.kx_odd[i]),
                Axis::Y => (self.ky[j], self.ky_odd[j]),
            };
            match order {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, k_odd),
                2 => Complex64::new(-k * k, 0.0),
                n => Complex64::new(0.0, if n % 2 == 1 { k_odd } else { k }).powu(n),
            }
        }
    }

    pub(crate) fn derivative_spectrum(&self, s: &SpectrumField, axis: Axis, order: u32) -> SpectrumField {
        self.apply_symbol(s, self.derivative_symbol(axis, order))
    }

    /// Spectral `∂_x` or `∂_y` of order 1 or 2.
    pub fn horizontal_derivative(&self, f: &ScalarField, axis: Axis, order: u32) -> Result<ScalarField> {
        if !(1..=2).contains(&order) {
            return Err(Error::OutOfRange(format!("derivative order {order}, expected 1 or 2")));
        }
        let s = self.hfft(f)?;
        Ok(self.inverse(&self.derivative_spectrum(&s, axis, order)))
    }

    /// Zeroes the upper third of horizontal modes in place.
    pub fn dealias(&self, s: &mut SpectrumField) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for layer in s.data.chunks_exact_mut(nx * ny) {
            for j in 0..ny {
                for i in 0..nx {
                    if !self.keeps(i, j) {
                        layer[j * nx + i] = Complex64::new(0.0, 0.0);
                    }
                }
            }
        }
    }

    /// Solves `Δ_H q = rhs` on the torus with `mean(q) = 0`.
    ///
    /// The data must be (numerically) mean free: `|mean| ≤ 1e−10·‖rhs‖₂`.
    pub fn poisson2d_solve(&self, rhs: &SurfaceScalarField) -> Result<SurfaceScalarField> {
        self.check(rhs.grid())?;
        let mean = rhs.mean();
        let tol = 1e-10 * rhs.l2();
        if mean.abs() > tol {
            return Err(Error::IncompatiblePoisson { mean, tol });
        }
        let mut c = self.forward_surface(rhs);
        let nx = self.grid.nx;
        for j in 0..self.grid.ny {
            for i in 0..nx {
                let k2 = self.k2(i, j);
                c[j * nx + i] = if k2 == 0.0 { Complex64::new(0.0, 0.0) } else { c[j * nx + i] / -k2 };
            }
        }
        Ok(self.inverse_surface(&c))
    }

    /// `Δ_H` of a surface field.
    pub fn surface_laplacian(&self, q: &SurfaceScalarField) -> SurfaceScalarField {
        let mut c = self.forward_surface(q);
        let nx = self.grid.nx;
        for j in 0..self.grid.ny {
            for i in 0..nx {
                c[j * nx + i] *= -self.k2(i, j);
            }
        }
        self.inverse_surface(&c)
    }

    /// `(∂_x q, ∂_y q)` of a surface field.
    pub fn surface_gradient(&self, q: &SurfaceScalarField) -> (SurfaceScalarField, SurfaceScalarField) {
        let c = self.forward_surface(q);
        let nx = self.grid.nx;
        let mut cx = c.clone();
        let mut cy = c;
        for j in 0..self.grid.ny {
            for i in 0..nx {
                let (kx, ky) = self.k_odd(i, j);
                cx[j * nx + i] *= Complex64::new(0.0, kx);
                cy[j * nx + i] *= Complex64::new(0.0, ky);
            }
        }
        (self.inverse_surface(&cx), self.inverse_surface(&cy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(16, 8, 4, 1.0).unwrap()
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = grid();
        let sp = Spectral::new(g);
        let s = sp.hfft(&ScalarField::constant(g, 3.0)).unwrap();
        for k in 0..g.levels() {
            for (n, c) in s.layer(k).iter().enumerate() {
                let expect = if n == 0 { 3.0 } else { 0.0 };
                assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cosine_splits_into_two_halves() {
        let g = grid();
        let sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).cos());
        let s = sp.hfft(&f).unwrap();
        assert!((s.coeff(1, 0, 2) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((s.coeff(-1, 0, 2) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!(s.coeff(2, 0, 2).norm() < 1e-14);
    }

    #[test]
    fn derivative_of_sine() {
        let g = Grid::new(32, 32, 4, 1.0).unwrap();
        let sp = Spectral::new(g);
        let f = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        let d = sp.horizontal_derivative(&f, Axis::X, 1).unwrap();
        let exact = ScalarField::from_fn(g, |x, _, _| 2.0 * PI * (2.0 * PI * x).cos());
        assert!(d.sub(&exact).max_abs() < 1e-10);
        let dy = sp.horizontal_derivative(&f, Axis::Y, 1).unwrap();
        assert!(dy.max_abs() < 1e-12);
        let c = sp.horizontal_derivative(&ScalarField::constant(g, 2.0), Axis::X, 2).unwrap();
        assert!(c.max_abs() < 1e-12);
    }

    #[test]
    fn poisson_inverts_sine() {
        let g = Grid::new(16, 16, 4, 1.0).unwrap();
        let sp = Spectral::new(g);
        let rhs = SurfaceScalarField::from_fn(g, |x, _| (2.0 * PI * x).sin());
        let q = sp.poisson2d_solve(&rhs).unwrap();
        let exact = SurfaceScalarField::from_fn(g, |x, _| -(2.0 * PI * x).sin() / (4.0 * PI * PI));
        assert!(q.sub(&exact).max_abs() < 1e-14);
        let zero = sp.poisson2d_solve(&SurfaceScalarField::zeros(g)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn poisson_rejects_nonzero_mean() {
        let g = Grid::new(8, 8, 4, 1.0).unwrap();
        let sp = Spectral::new(g);
        let one = SurfaceScalarField::from_fn(g, |_, _| 1.0);
        assert!(matches!(sp.poisson2d_solve(&one), Err(Error::IncompatiblePoisson { .. })));
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let sp = Spectral::new(grid());
        let other = ScalarField::zeros(Grid::new(8, 8, 4, 1.0).unwrap());
        assert!(matches!(sp.hfft(&other), Err(Error::DimensionMismatch(_))));
    }
}
