//! Vertical finite differences on the collocated levels and the three
//! boundary-condition families, with cached eigendecompositions.
//!
//! `−∂_zz` is discretized by the three-point stencil. Neumann and Robin rows
//! come from eliminating a ghost node with a centered boundary difference; the
//! Dirichlet bottom value of the velocity is eliminated outright, so the
//! velocity operator acts on levels `1..=nz` only. With the trapezoid weights
//! `W` every operator is `W`-self-adjoint, and the eigenvectors are
//! `W`-orthonormal.

use nalgebra::{DMatrix, DMatrixView, DMatrixViewMut, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{FieldKind, Grid, PhysParams};
use crate::spectral::SpectrumField;

/// Eigenpairs of a `W`-self-adjoint vertical operator restricted to its
/// active levels, with the forward/backward coefficient transforms.
#[derive(Debug, Clone)]
pub struct VerticalBasis {
    first: usize,
    n_active: usize,
    values: Vec<f64>,
    /// `vectors[k * n_modes + m] = u_m(first + k)`
    vectors: Vec<f64>,
    /// `forward[m * n_active + k] = w_k u_m(first + k)`
    forward: Vec<f64>,
    /// `(k, m) ↦ w_k u_m(first + k)`
    analysis: DMatrix<f64>,
    /// `(m, k) ↦ u_m(first + k)`
    synthesis: DMatrix<f64>,
}

/// Views complex data as interleaved reals: a column-major `2·stride × cols`
/// matrix whose column `c` is the slab `c` of `stride` complex entries.
fn real_view(data: &[Complex64], stride: usize, cols: usize) -> DMatrixView<'_, f64> {
    let len = 2 * stride * cols;
    assert!(data.len() >= stride * cols);
    // SAFETY: `Complex<f64>` is `#[repr(C)]` with fields `re, im`, so a slice of
    // `n` complex numbers has the layout of `2n` consecutive `f64`.
    let reals = unsafe { std::slice::from_raw_parts(data.as_ptr().cast::<f64>(), len) };
    DMatrixView::from_slice(reals, 2 * stride, cols)
}

fn real_view_mut(data: &mut [Complex64], stride: usize, cols: usize) -> DMatrixViewMut<'_, f64> {
    let len = 2 * stride * cols;
    assert!(data.len() >= stride * cols);
    // SAFETY: as in `real_view`; the exclusive borrow is carried over.
    let reals = unsafe { std::slice::from_raw_parts_mut(data.as_mut_ptr().cast::<f64>(), len) };
    DMatrixViewMut::from_slice(reals, 2 * stride, cols)
}

impl VerticalBasis {
    fn from_symmetric(first: usize, weights: &[f64], sym: DMatrix<f64>, restrict: Option<&DMatrix<f64>>) -> Option<Self> {
        // `sym` is W^{1/2} L W^{-1/2}; `restrict` (orthonormal columns) limits
        // the problem to a subspace in the symmetric coordinates.
        let n_active = weights.len();
        let (reduced, q) = match restrict {
            Some(q) => (q.transpose() * &sym * q, Some(q)),
            None => (sym, None),
        };
        let reduced = (&reduced + reduced.transpose()) * 0.5;
        let eig = SymmetricEigen::try_new(reduced, f64::EPSILON, 10_000)?;
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let n_modes = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n_modes).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let y_all = match q {
            Some(q) => q * &eig.eigenvectors,
            None => eig.eigenvectors.clone(),
        };
        let mut values = Vec::with_capacity(n_modes);
        let mut vectors = vec![0.0; n_active * n_modes];
        for (m, &src) in order.iter().enumerate() {
            values.push(eig.eigenvalues[src]);
            let mut u: Vec<f64> = (0..n_active).map(|k| y_all[(k, src)] / weights[k].sqrt()).collect();
            // deterministic sign: first clearly nonzero entry from the top is positive
            let peak = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if let Some(v) = u.iter().rev().find(|v| v.abs() > 1e-3 * peak) {
                if *v < 0.0 {
                    u.iter_mut().for_each(|x| *x = -*x);
                }
            }
            for k in 0..n_active {
                vectors[k * n_modes + m] = u[k];
            }
        }
        let mut forward = vec![0.0; n_modes * n_active];
        for m in 0..n_modes {
            for k in 0..n_active {
                forward[m * n_active + k] = weights[k] * vectors[k * n_modes + m];
            }
        }
        let analysis = DMatrix::from_fn(n_active, n_modes, |k, m| forward[m * n_active + k]);
        let synthesis = DMatrix::from_fn(n_modes, n_active, |m, k| vectors[k * n_modes + m]);
        Some(Self { first, n_active, values, vectors, forward, analysis, synthesis })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvalues of `−∂_zz`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector `m` on all `nz + 1` levels (inactive levels are zero).
    pub fn eigenvector(&self, m: usize, levels: usize) -> Vec<f64> {
        let mut out = vec![0.0; levels];
        for k in 0..self.n_active {
            out[self.first + k] = self.vectors[k * self.len() + m];
        }
        out
    }

    /// Level values (`levels × stride`, level outermost) to mode
    /// coefficients (`modes × stride`). Inactive levels are ignored.
    pub fn analyze(&self, levels: &[Complex64], stride: usize) -> Vec<Complex64> {
        let n_modes = self.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n_modes * stride];
        let src = real_view(&levels[self.first * stride..], stride, self.n_active);
        real_view_mut(&mut out, stride, n_modes).gemm(1.0, &src, &self.analysis, 0.0);
        out
    }

    /// Adds the synthesis of `coeffs` (`modes × stride`) into `levels`.
    pub fn synthesize_into(&self, coeffs: &[Complex64], stride: usize, levels: &mut [Complex64]) {
        let n_modes = self.len();
        let src = real_view(coeffs, stride, n_modes);
        real_view_mut(&mut levels[self.first * stride..], stride, self.n_active).gemm(1.0, &src, &self.synthesis, 1.0);
    }

    /// Real-valued version of [`VerticalBasis::analyze`] for a single column.
    pub fn analyze_column(&self, column: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|m| (0..self.n_active).map(|k| self.forward[m * self.n_active + k] * column[self.first + k]).sum())
            .collect()
    }
}

/// `−∂_zz` with the boundary conditions of one [`FieldKind`].
#[derive(Debug, Clone)]
pub struct VerticalOperator {
    kind: FieldKind,
    grid: Grid,
    alpha: f64,
    first: usize,
    matrix: DMatrix<f64>,
    weights: Vec<f64>,
    basis: VerticalBasis,
    solenoidal: Option<VerticalBasis>,
}

impl VerticalOperator {
    /// Assembles the operator and caches its eigendecomposition.
    pub fn build(grid: Grid, kind: FieldKind, params: &PhysParams) -> Result<Self> {
        if grid.nz < 4 {
            return Err(Error::InvalidParameter("need nz >= 4".into()));
        }
        let nz = grid.nz;
        let dz = grid.dz();
        let inv = 1.0 / (dz * dz);
        let first = usize::from(kind == FieldKind::Velocity);
        let n = nz + 1 - first;
        let mut l = DMatrix::<f64>::zeros(n, n);
        for r in 0..n {
            let k = first + r;
            if k == 0 {
                // Neumann bottom, ghost f_{-1} = f_1
                l[(r, r)] = 2.0 * inv;
                l[(r, r + 1)] = -2.0 * inv;
            } else if k == nz {
                l[(r, r - 1)] = -2.0 * inv;
                l[(r, r)] = 2.0 * inv;
                if kind == FieldKind::Temperature {
                    // Robin top, ghost f_{nz+1} = f_{nz-1} − 2 dz α f_nz
                    l[(r, r)] += 2.0 * params.alpha / dz;
                }
            } else {
                if r > 0 {
                    l[(r, r - 1)] = -inv;
                }
                l[(r, r)] = 2.0 * inv;
                l[(r, r + 1)] = -inv;
            }
        }
        let weights: Vec<f64> = grid.trapezoid_weights()[first..].to_vec();
        let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let sym = DMatrix::from_fn(n, n, |i, j| sqrt_w[i] * l[(i, j)] / sqrt_w[j]);

        let basis = VerticalBasis::from_symmetric(first, &weights, sym.clone(), None)
            .ok_or(Error::EigenSolver(kind.name()))?;

        let solenoidal = if kind == FieldKind::Velocity {
            // Orthonormal complement of the constants in symmetric coordinates.
            let q = complement_basis(&sqrt_w);
            Some(
                VerticalBasis::from_symmetric(first, &weights, sym, Some(&q))
                    .ok_or(Error::EigenSolver(kind.name()))?,
            )
        } else {
            None
        };
        Ok(Self { kind, grid, alpha: params.alpha, first, matrix: l, weights, basis, solenoidal })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// First level that carries an unknown (`1` for velocity, else `0`).
    pub fn first_active(&self) -> usize {
        self.first
    }

    /// Matrix of `−∂_zz` on the active levels.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Trapezoid weights on the active levels.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn basis(&self) -> &VerticalBasis {
        &self.basis
    }

    /// For velocity: eigenbasis of the operator restricted to columns with
    /// zero trapezoid mean, i.e. the longitudinal part of the hydrostatic
    /// Stokes operator at a nonzero horizontal wavenumber.
    pub fn solenoidal_basis(&self) -> Option<&VerticalBasis> {
        self.solenoidal.as_ref()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.basis.eigenvalues()
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.basis.eigenvalues()[0]
    }

    pub fn eigenvector(&self, m: usize) -> Vec<f64> {
        self.basis.eigenvector(m, self.grid.levels())
    }

    /// `−∂_zz f` for a column of `nz + 1` values; inactive levels map to 0.
    pub fn apply_column(&self, column: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; column.len()];
        let n = self.matrix.nrows();
        for r in 0..n {
            let mut acc = 0.0;
            for c in r.saturating_sub(1)..(r + 2).min(n) {
                acc += self.matrix[(r, c)] * column[self.first + c];
            }
            out[self.first + r] = acc;
        }
        out
    }

    /// `−∂_zz f` applied to every column of a field.
    pub fn apply_field(&self, f: &ScalarField) -> ScalarField {
        let g = *f.grid();
        let lay = g.layer_len();
        let mut out = ScalarField::zeros(g);
        let n = self.matrix.nrows();
        for r in 0..n {
            for c in r.saturating_sub(1)..(r + 2).min(n) {
                let a = self.matrix[(r, c)];
                let src = f.layer(self.first + c).to_vec();
                let dst = &mut out.data[(self.first + r) * lay..(self.first + r + 1) * lay];
                for (d, s) in dst.iter_mut().zip(&src) {
                    *d += a * s;
                }
            }
        }
        out
    }

    /// `⟨−L f, f⟩_W` for one column: the sum of squared forward differences
    /// over `dz` plus, for temperature, `α f(0)²`. For velocity the bottom
    /// value is taken as zero.
    pub fn form_column(&self, column: &[f64]) -> f64 {
        let dz = self.grid.dz();
        let value = |k: usize| if k < self.first { 0.0 } else { column[k] };
        let mut acc = 0.0;
        for k in 0..self.grid.nz {
            let d = value(k + 1) - value(k);
            acc += d * d / dz;
        }
        if self.kind == FieldKind::Temperature {
            acc += self.alpha * column[self.grid.nz].powi(2);
        }
        acc
    }
}

/// Orthonormal basis (columns) of the complement of `s` via a Householder
/// reflection.
fn complement_basis(s: &[f64]) -> DMatrix<f64> {
    let n = s.len();
    let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut v: Vec<f64> = s.iter().map(|x| x / norm).collect();
    // reflect ŝ onto e_0; v = ŝ + e_0 (ŝ_0 > 0 so no cancellation)
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let h = DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j] / vv);
    h.columns(1, n - 1).into_owned()
}

/// `∂_z f`: central differences inside, one-sided second-order stencils at
/// both boundaries. Boundary conditions are not imposed.
pub fn vertical_derivative(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let nz = g.nz;
    let lay = g.layer_len();
    let dz = g.dz();
    let mut out = ScalarField::zeros(g);
    for k in 0..=nz {
        let dst = &mut out.data[k * lay..(k + 1) * lay];
        let (stencil, base): (&[f64], usize) = if k == 0 {
            (&[-1.5, 2.0, -0.5], 0)
        } else if k == nz {
            (&[0.5, -2.0, 1.5], nz - 2)
        } else {
            (&[-0.5, 0.0, 0.5], k - 1)
        };
        for (o, &c) in stencil.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let src = f.layer(base + o);
            for (d, s) in dst.iter_mut().zip(src) {
                *d += c * s / dz;
            }
        }
    }
    out
}

/// `∂_z` central inside and first-order one-sided at both ends. The trapezoid
/// sum of the result is exactly `f(0) − f(−h)`.
pub(crate) fn conservative_derivative_spectrum(s: &SpectrumField) -> SpectrumField {
    let g = *s.grid();
    let nz = g.nz;
    let dz = g.dz();
    let mut out = SpectrumField::zeros(g);
    for k in 0..=nz {
        let (lo, hi, c) = match k {
            0 => (0, 1, 1.0 / dz),
            k if k == nz => (nz - 1, nz, 1.0 / dz),
            k => (k - 1, k + 1, 0.5 / dz),
        };
        let (a, b) = (s.layer(lo).to_vec(), s.layer(hi));
        for ((d, x), y) in out.layer_mut(k).iter_mut().zip(&a).zip(b) {
            *d = (y - x) * c;
        }
    }
    out
}

/// `∫_{−h}^{z_k} f dξ` by the cumulative trapezoid rule; zero at the bottom.
pub fn cumulative_integral(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let lay = g.layer_len();
    let half = 0.5 * g.dz();
    let mut out = ScalarField::zeros(g);
    for k in 1..=g.nz {
        let (done, rest) = out.data.split_at_mut(k * lay);
        let prev = &done[(k - 1) * lay..];
        let dst = &mut rest[..lay];
        let (a, b) = (f.layer(k - 1), f.layer(k));
        for n in 0..lay {
            dst[n] = prev[n] + half * (a[n] + b[n]);
        }
    }
    out
}

/// Cumulative trapezoid integral over levels of a layered spectrum.
pub(crate) fn cumulative_integral_spectrum(s: &SpectrumField) -> SpectrumField {
    let g = *s.grid();
    let lay = g.layer_len();
    let half = 0.5 * g.dz();
    let mut out = SpectrumField::zeros(g);
    for k in 1..=g.nz {
        let (done, rest) = out.data.split_at_mut(k * lay);
        let prev = &done[(k - 1) * lay..];
        let (a, b) = (s.layer(k - 1), s.layer(k));
        for (n, d) in rest[..lay].iter_mut().enumerate() {
            *d = prev[n] + (a[n] + b[n]) * half;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn op(kind: FieldKind, nz: usize) -> VerticalOperator {
        let g = Grid::new(4, 4, nz, 1.0).unwrap();
        VerticalOperator::build(g, kind, &PhysParams::default()).unwrap()
    }

    #[test]
    fn conservative_derivative_telescopes() {
        let g = Grid::new(4, 4, 12, 2.0).unwrap();
        let sp = crate::spectral::Spectral::new(g);
        let f = ScalarField::from_fn(g, |x, y, z| (3.0 * z).sin() + (2.0 * PI * x).cos() * z * z + y);
        let d = conservative_derivative_spectrum(&sp.forward(&f));
        let w = g.trapezoid_weights();
        let lay = g.layer_len();
        for n in 0..lay {
            let sum: Complex64 = (0..=g.nz).map(|k| d.data[k * lay + n] * w[k]).sum();
            let ends = sp.forward(&f).data[g.nz * lay + n] - sp.forward(&f).data[n];
            assert!((sum - ends).norm() < 1e-12);
        }
        // second order inside
        let interior = sp.inverse(&d);
        let k = g.nz / 2;
        let exact = 3.0 * (3.0 * g.z(k)).cos();
        assert!((interior.at(0, 1, k) - 2.0 * g.z(k) - exact).abs() < 27.0 / 6.0 * g.dz().powi(2));
    }

    #[test]
    fn salinity_null_mode_is_constant() {
        let o = op(FieldKind::Salinity, 16);
        assert!(o.smallest_eigenvalue().abs() < 1e-10);
        let u = o.eigenvector(0);
        for v in &u {
            assert!((v - u[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn spectra_are_sorted_and_nonnegative() {
        for kind in FieldKind::ALL {
            let o = op(kind, 12);
            let ev = o.eigenvalues();
            assert!(ev.windows(2).all(|w| w[0] <= w[1]));
            assert!(ev[0] >= -1e-10);
        }
        assert!(op(FieldKind::Temperature, 12).smallest_eigenvalue() > 0.0);
    }

    #[test]
    fn eigenvectors_are_weighted_orthonormal() {
        for kind in FieldKind::ALL {
            let o = op(kind, 10);
            let w = o.grid().trapezoid_weights();
            let n = o.eigenvalues().len();
            for a in 0..n {
                let ua = o.eigenvector(a);
                for b in 0..n {
                    let ub = o.eigenvector(b);
                    let ip: f64 = (0..w.len()).map(|k| w[k] * ua[k] * ub[k]).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((ip - expect).abs() < 1e-10, "{kind} ({a},{b}) -> {ip}");
                }
            }
        }
    }

    #[test]
    fn eigenpairs_satisfy_operator() {
        for kind in FieldKind::ALL {
            let o = op(kind, 8);
            for m in 0..o.eigenvalues().len() {
                let u = o.eigenvector(m);
                let lu = o.apply_column(&u);
                let lam = o.eigenvalues()[m];
                for k in 0..u.len() {
                    assert!((lu[k] - lam * u[k]).abs() < 1e-8 * lam.max(1.0));
                }
            }
        }
    }

    #[test]
    fn solenoidal_basis_has_zero_mean() {
        let o = op(FieldKind::Velocity, 12);
        let b = o.solenoidal_basis().unwrap();
        assert_eq!(b.len(), 11);
        let w = o.grid().trapezoid_weights();
        for m in 0..b.len() {
            let u = b.eigenvector(m, 13);
            let mean: f64 = (0..13).map(|k| w[k] * u[k]).sum();
            assert!(mean.abs() < 1e-12);
            assert_eq!(u[0], 0.0);
        }
    }

    #[test]
    fn derivative_of_quadratic_is_exact() {
        let g = Grid::new(4, 4, 8, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |_, _, z| z * z);
        let d = vertical_derivative(&f);
        for k in 0..=8 {
            assert!((d.at(1, 2, k) - 2.0 * g.z(k)).abs() < 1e-12);
        }
        assert!(vertical_derivative(&ScalarField::constant(g, 4.0)).max_abs() < 1e-12);
    }

    #[test]
    fn derivative_at_surface_converges() {
        let err = |nz: usize| {
            let g = Grid::new(4, 4, nz, 1.0).unwrap();
            let f = ScalarField::from_fn(g, |_, _, z| (PI * z / 2.0).sin());
            (vertical_derivative(&f).at(0, 0, nz) - PI / 2.0).abs()
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e1 < 1e-2);
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn cumulative_integral_of_linear_is_exact() {
        let g = Grid::new(4, 4, 8, 2.0).unwrap();
        let f = ScalarField::from_fn(g, |_, _, z| 3.0 * z + 1.0);
        let c = cumulative_integral(&f);
        for k in 0..=8 {
            let z = g.z(k);
            let exact = 1.5 * (z * z - 4.0) + (z + 2.0);
            assert!((c.at(0, 0, k) - exact).abs() < 1e-12);
        }
    }
}
