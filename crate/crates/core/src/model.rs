//! A discretized problem: grid, constants, transforms and the three
//! semigroup caches, plus the spectral-space kernels the time integrators
//! share.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{HVectorField, ScalarField, SurfaceScalarField};
use crate::grid::{FieldKind, Grid, PhysParams};
use crate::hydrostatic::{baroclinic_from_spectra, gradient_potential, spectrum_average};
use crate::nonlinear::transport;
use crate::norms::spectrum_energy;
use crate::semigroup::SemigroupCache;
use crate::spectral::{Spectral, SpectrumField};

/// Everything needed to evaluate operators and step the equations on one grid.
#[derive(Debug, Clone)]
pub struct Model {
    grid: Grid,
    params: PhysParams,
    spectral: Spectral,
    velocity: SemigroupCache,
    temperature: SemigroupCache,
    salinity: SemigroupCache,
    nonlinear: bool,
    /// `avg(−∂_zz v)` as a row over active velocity levels.
    stokes_average_row: Vec<f64>,
}

/// Layered spectra of the prognostic fields.
#[derive(Debug, Clone)]
pub(crate) struct SpecState {
    pub v1: SpectrumField,
    pub v2: SpectrumField,
    pub tau: SpectrumField,
    pub sigma: SpectrumField,
}

impl SpecState {
    pub fn zeros(grid: Grid) -> Self {
        let z = SpectrumField::zeros(grid);
        Self { v1: z.clone(), v2: z.clone(), tau: z.clone(), sigma: z }
    }

    pub fn from_fields(sp: &Spectral, v: &HVectorField, tau: &ScalarField, sigma: &ScalarField) -> Result<Self> {
        v.check_finite()?;
        tau.check_finite()?;
        sigma.check_finite()?;
        v.v1.same_grid(tau)?;
        tau.same_grid(sigma)?;
        Ok(Self { v1: sp.hfft(&v.v1)?, v2: sp.hfft(&v.v2)?, tau: sp.hfft(tau)?, sigma: sp.hfft(sigma)? })
    }

    pub fn velocity(&self, sp: &Spectral) -> HVectorField {
        HVectorField { v1: sp.inverse(&self.v1), v2: sp.inverse(&self.v2) }
    }

    pub fn axpy(&mut self, c: f64, other: &SpecState) {
        self.v1.axpy(c, &other.v1);
        self.v2.axpy(c, &other.v2);
        self.tau.axpy(c, &other.tau);
        self.sigma.axpy(c, &other.sigma);
    }

    pub fn is_finite(&self) -> bool {
        [&self.v1, &self.v2, &self.tau, &self.sigma]
            .iter()
            .all(|s| s.data.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}

impl Model {
    pub fn new(grid: Grid, params: PhysParams) -> Result<Self> {
        let spectral = Spectral::new(grid);
        let cache = |kind| -> Result<SemigroupCache> {
            let op = crate::vertical::VerticalOperator::build(grid, kind, &params)?;
            Ok(SemigroupCache::from_parts(spectral.clone(), op))
        };
        let velocity = cache(FieldKind::Velocity)?;
        let temperature = cache(FieldKind::Temperature)?;
        let salinity = cache(FieldKind::Salinity)?;
        let op = velocity.operator();
        let w = op.weights();
        let l = op.matrix();
        let stokes_average_row =
            (0..l.ncols()).map(|c| (0..l.nrows()).map(|r| w[r] * l[(r, c)]).sum::<f64>() / grid.h).collect();
        Ok(Self { grid, params, spectral, velocity, temperature, salinity, nonlinear: true, stokes_average_row })
    }

    /// Enables or disables the coupling terms `F` and `G` (advection and the
    /// baroclinic gradient). With them off the three unknowns evolve by their
    /// linear semigroups.
    pub fn with_nonlinear(mut self, on: bool) -> Self {
        self.nonlinear = on;
        self
    }

    pub fn nonlinear(&self) -> bool {
        self.nonlinear
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn cache(&self, kind: FieldKind) -> &SemigroupCache {
        match kind {
            FieldKind::Velocity => &self.velocity,
            FieldKind::Temperature => &self.temperature,
            FieldKind::Salinity => &self.salinity,
        }
    }

    /// `F` and `G` without forcing, in spectral space: `Π(ζ) − (v·∇_H + w∂_z)v`
    /// (not yet projected) and `−(v·∇_H + w∂_z)ζ`.
    pub(crate) fn coupling_terms(&self, s: &SpecState) -> SpecState {
        let sp = &self.spectral;
        let (mut a1, mut a2, scalars) = transport(sp, &s.v1, &s.v2, &[&s.tau, &s.sigma]);
        let (p1, p2) = baroclinic_from_spectra(sp, &s.tau, &s.sigma, &self.params);
        a1.scale(-1.0);
        a2.scale(-1.0);
        a1.axpy(1.0, &p1);
        a2.axpy(1.0, &p2);
        let mut it = scalars.into_iter();
        let mut tau = it.next().expect("two scalars");
        let mut sigma = it.next().expect("two scalars");
        tau.scale(-1.0);
        sigma.scale(-1.0);
        SpecState { v1: a1, v2: a2, tau, sigma }
    }

    /// [`Model::coupling_terms`] honouring the nonlinearity switch.
    pub(crate) fn tendencies(&self, s: &SpecState) -> SpecState {
        if self.nonlinear {
            self.coupling_terms(s)
        } else {
            SpecState::zeros(self.grid)
        }
    }

    /// `Δ v = Δ_H v − (−∂_zz) v` with the velocity boundary conditions.
    pub(crate) fn velocity_laplacian(&self, s1: &SpectrumField) -> SpectrumField {
        self.laplacian(FieldKind::Velocity, s1)
    }

    pub(crate) fn laplacian(&self, kind: FieldKind, s: &SpectrumField) -> SpectrumField {
        let g = self.grid;
        let op = self.cache(kind).operator();
        let l = op.matrix();
        let first = op.first_active();
        let mut out = SpectrumField::zeros(g);
        let n = l.nrows();
        for r in 0..n {
            let dst_k = first + r;
            for c in r.saturating_sub(1)..(r + 2).min(n) {
                let a = -l[(r, c)];
                let src = s.layer(first + c).to_vec();
                let dst = out.layer_mut(dst_k);
                for (d, x) in dst.iter_mut().zip(&src) {
                    *d += x * a;
                }
            }
        }
        for k in first..g.levels() {
            let src = s.layer(k).to_vec();
            let dst = out.layer_mut(k);
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let idx = j * g.nx + i;
                    dst[idx] -= src[idx] * self.spectral.k2(i, j);
                }
            }
        }
        out
    }

    /// `q̂` with `∇_H q = (1 − P){f + N + Δv}` given the coupling terms `N`.
    pub(crate) fn pressure_potential(
        &self,
        s: &SpecState,
        coupling: &SpecState,
        forcing: Option<(&SpectrumField, &SpectrumField)>,
    ) -> Vec<Complex64> {
        let g = self.grid;
        let lay = g.layer_len();
        let mut m1 = spectrum_average(&coupling.v1);
        let mut m2 = spectrum_average(&coupling.v2);
        if let Some((f1, f2)) = forcing {
            for (a, b) in m1.iter_mut().zip(spectrum_average(f1)) {
                *a += b;
            }
            for (a, b) in m2.iter_mut().zip(spectrum_average(f2)) {
                *a += b;
            }
        }
        let first = self.velocity.operator().first_active();
        for (avg, comp) in [(&mut m1, &s.v1), (&mut m2, &s.v2)] {
            let mean = spectrum_average(comp);
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let idx = j * g.nx + i;
                    let mut vert = Complex64::new(0.0, 0.0);
                    for (c, r) in self.stokes_average_row.iter().enumerate() {
                        vert += comp.data[(first + c) * lay + idx] * r;
                    }
                    avg[idx] += -mean[idx] * self.spectral.k2(i, j) - vert;
                }
            }
        }
        gradient_potential(&self.spectral, &m1, &m2)
    }

    /// Spectra of `Π(ζ) + Δv − (v·∇_H v + w ∂_z v)`, regardless of the switch.
    pub(crate) fn pressure_balance_spectrum(
        &self,
        v: &HVectorField,
        tau: &ScalarField,
        sigma: &ScalarField,
    ) -> Result<(SpectrumField, SpectrumField)> {
        let s = SpecState::from_fields(&self.spectral, v, tau, sigma)?;
        let n = self.coupling_terms(&s);
        let mut x1 = n.v1;
        let mut x2 = n.v2;
        x1.axpy(1.0, &self.velocity_laplacian(&s.v1));
        x2.axpy(1.0, &self.velocity_laplacian(&s.v2));
        Ok((x1, x2))
    }

    pub(crate) fn surface_from_potential(&self, q: &[Complex64]) -> SurfaceScalarField {
        self.spectral.inverse_surface(q)
    }

    /// `‖∇_H q‖_{L²(Ω)}` for a z-independent potential.
    pub(crate) fn potential_gradient_norm(&self, q: &[Complex64]) -> f64 {
        let g = self.grid;
        let mut acc = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let (a, b) = self.spectral.k_odd(i, j);
                acc += (a * a + b * b) * q[j * g.nx + i].norm_sqr();
            }
        }
        (acc * g.h).sqrt()
    }

    /// Discrete Dirichlet form `⟨−A f, f⟩` without the Robin contribution,
    /// i.e. `‖∇f‖²` with forward differences in `z`.
    pub(crate) fn gradient_energy(&self, kind: FieldKind, s: &SpectrumField) -> f64 {
        let g = self.grid;
        let lay = g.layer_len();
        let dz = g.dz();
        let first = self.cache(kind).operator().first_active();
        let mut acc = 0.0;
        let w = g.trapezoid_weights();
        for k in 0..g.levels() {
            let layer = s.layer(k);
            for j in 0..g.ny {
                for i in 0..g.nx {
                    acc += w[k] * self.spectral.k2(i, j) * layer[j * g.nx + i].norm_sqr();
                }
            }
        }
        let value = |k: usize, n: usize| if k < first { Complex64::new(0.0, 0.0) } else { s.data[k * lay + n] };
        for k in 0..g.nz {
            for n in 0..lay {
                acc += (value(k + 1, n) - value(k, n)).norm_sqr() / dz;
            }
        }
        acc
    }

    /// `α ‖τ‖²_{L²(Γ_u)}`.
    pub(crate) fn robin_energy(&self, tau: &SpectrumField) -> f64 {
        self.params.alpha * tau.layer(self.grid.nz).iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub(crate) fn energy(&self, s: &SpectrumField) -> f64 {
        spectrum_energy(s)
    }

    /// `∫_Ω f g` from spectra.
    pub(crate) fn pairing(&self, a: &SpectrumField, b: &SpectrumField) -> f64 {
        let w = self.grid.trapezoid_weights();
        (0..w.len())
            .map(|k| w[k] * a.layer(k).iter().zip(b.layer(k)).map(|(x, y)| (x * y.conj()).re).sum::<f64>())
            .sum()
    }

    /// Discrete `H¹` norm: `L²` plus [`Model::gradient_energy`].
    pub(crate) fn h1_norm(&self, kind: FieldKind, s: &SpectrumField) -> f64 {
        (self.energy(s) + self.gradient_energy(kind, s)).sqrt()
    }
}
