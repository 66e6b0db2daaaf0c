//! Hydrostatic reformulation: vertical averaging, the hydrostatic Helmholtz
//! projection, the diagnostic vertical velocity, the baroclinic pressure
//! gradient, surface-pressure reconstruction and initial-data classification.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{HVectorField, ScalarField, SurfaceScalarField};
use crate::grid::{Grid, PhysParams};
use crate::model::Model;
use crate::norms::level_means;
use crate::spectral::{Axis, Spectral, SpectrumField};
use crate::vertical::{cumulative_integral, cumulative_integral_spectrum, vertical_derivative};

/// Output of [`helmholtz_project`].
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub projected: HVectorField,
    /// Mean-free potential `q` whose gradient was removed.
    pub gradient_part: SurfaceScalarField,
}

fn trapezoid_average(f: &ScalarField) -> SurfaceScalarField {
    let g = *f.grid();
    let w = g.trapezoid_weights();
    let mut out = vec![0.0; g.layer_len()];
    for (k, wk) in w.iter().enumerate() {
        for (o, v) in out.iter_mut().zip(f.layer(k)) {
            *o += wk * v;
        }
    }
    out.iter_mut().for_each(|o| *o /= g.h);
    SurfaceScalarField::from_vec(g, out).expect("layer sized")
}

/// `v̄ = (1/h) ∫_{−h}^0 v dz`, componentwise by the trapezoid rule.
pub fn vertical_average(v: &HVectorField) -> (SurfaceScalarField, SurfaceScalarField) {
    (trapezoid_average(&v.v1), trapezoid_average(&v.v2))
}

/// Trapezoid average over levels of a layered spectrum.
pub(crate) fn spectrum_average(s: &SpectrumField) -> Vec<Complex64> {
    let g = *s.grid();
    let w = g.trapezoid_weights();
    let mut out = vec![Complex64::new(0.0, 0.0); g.layer_len()];
    for (k, wk) in w.iter().enumerate() {
        for (o, c) in out.iter_mut().zip(s.layer(k)) {
            *o += c * (wk / g.h);
        }
    }
    out
}

/// Potential `q̂` with `∇_H q = (1 − P) v` for the given averaged spectra.
///
/// Uses the same wavevector as the first-derivative operators, so that the
/// discrete `div_H ∘ ∇_H` is inverted exactly and `P` is idempotent.
pub(crate) fn gradient_potential(sp: &Spectral, avg1: &[Complex64], avg2: &[Complex64]) -> Vec<Complex64> {
    let g = sp.grid();
    let nx = g.nx;
    let mut q = vec![Complex64::new(0.0, 0.0); g.layer_len()];
    for j in 0..g.ny {
        for i in 0..nx {
            let (kx, ky) = sp.k_odd(i, j);
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let n = j * nx + i;
            // div = i k·v̄ ;  q = div / (−k²)
            let div = Complex64::new(0.0, 1.0) * (avg1[n] * kx + avg2[n] * ky);
            q[n] = -div / k2;
        }
    }
    q
}

/// Subtracts `∇_H q` (z-independent) from layered velocity spectra.
pub(crate) fn subtract_gradient(sp: &Spectral, q: &[Complex64], s1: &mut SpectrumField, s2: &mut SpectrumField) {
    let g = *sp.grid();
    let nx = g.nx;
    for k in 0..g.levels() {
        let (l1, l2) = (s1.layer_mut(k), s2.layer_mut(k));
        for j in 0..g.ny {
            for i in 0..nx {
                let (kx, ky) = sp.k_odd(i, j);
                let n = j * nx + i;
                l1[n] -= Complex64::new(0.0, kx) * q[n];
                l2[n] -= Complex64::new(0.0, ky) * q[n];
            }
        }
    }
}

/// In-place projection of layered velocity spectra; returns `q̂`.
pub(crate) fn project_spectrum(sp: &Spectral, s1: &mut SpectrumField, s2: &mut SpectrumField) -> Vec<Complex64> {
    let q = gradient_potential(sp, &spectrum_average(s1), &spectrum_average(s2));
    subtract_gradient(sp, &q, s1, s2);
    q
}

/// Hydrostatic Helmholtz projection `P`: removes the z-independent gradient
/// `∇_H q` with `Δ_H q = div_H v̄`, `mean(q) = 0`.
pub fn helmholtz_project(sp: &Spectral, v: &HVectorField) -> Result<ProjectionResult> {
    let mut s1 = sp.hfft(&v.v1)?;
    let mut s2 = sp.hfft(&v.v2)?;
    let q = project_spectrum(sp, &mut s1, &mut s2);
    Ok(ProjectionResult {
        projected: HVectorField { v1: sp.inverse(&s1), v2: sp.inverse(&s2) },
        gradient_part: sp.inverse_surface(&q),
    })
}

/// `div_H v` at every level.
pub fn horizontal_divergence(sp: &Spectral, v: &HVectorField) -> ScalarField {
    let s1 = sp.forward(&v.v1);
    let s2 = sp.forward(&v.v2);
    let mut d = sp.derivative_spectrum(&s1, Axis::X, 1);
    d.axpy(1.0, &sp.derivative_spectrum(&s2, Axis::Y, 1));
    sp.inverse(&d)
}

/// `div_H v̄` on `G`.
pub fn averaged_divergence(sp: &Spectral, v: &HVectorField) -> SurfaceScalarField {
    let (a1, a2) = vertical_average(v);
    let c1 = sp.forward_surface(&a1);
    let c2 = sp.forward_surface(&a2);
    let nx = sp.grid().nx;
    let mut d = vec![Complex64::new(0.0, 0.0); c1.len()];
    for j in 0..sp.grid().ny {
        for i in 0..nx {
            let (kx, ky) = sp.k_odd(i, j);
            let n = j * nx + i;
            d[n] = Complex64::new(0.0, 1.0) * (c1[n] * kx + c2[n] * ky);
        }
    }
    sp.inverse_surface(&d)
}

/// `‖div_H v̄‖ / ‖∇_H v̄‖` on `G`; zero when `v̄` is constant.
pub fn relative_divergence(sp: &Spectral, v: &HVectorField) -> f64 {
    let div = averaged_divergence(sp, v).l2();
    let (a1, a2) = vertical_average(v);
    let (g11, g12) = sp.surface_gradient(&a1);
    let (g21, g22) = sp.surface_gradient(&a2);
    let scale = (g11.l2().powi(2) + g12.l2().powi(2) + g21.l2().powi(2) + g22.l2().powi(2)).sqrt();
    ratio(div, scale)
}

/// `w = −∫_{−h}^z div_H v dξ` (cumulative trapezoid); `w(Γ_b) = 0` exactly.
pub fn reconstruct_w(sp: &Spectral, v: &HVectorField) -> ScalarField {
    let mut w = cumulative_integral(&horizontal_divergence(sp, v));
    w.scale(-1.0);
    w
}

/// `Π(τ, σ) = −∇_H ∫_{−h}^z (β_τ τ − β_σ σ) dξ`.
pub fn baroclinic_gradient(
    sp: &Spectral,
    tau: &ScalarField,
    sigma: &ScalarField,
    params: &PhysParams,
) -> Result<HVectorField> {
    tau.same_grid(sigma)?;
    let s = baroclinic_spectrum(sp, tau, sigma, params);
    Ok(HVectorField { v1: sp.inverse(&s.0), v2: sp.inverse(&s.1) })
}

pub(crate) fn baroclinic_spectrum(
    sp: &Spectral,
    tau: &ScalarField,
    sigma: &ScalarField,
    params: &PhysParams,
) -> (SpectrumField, SpectrumField) {
    baroclinic_from_spectra(sp, &sp.forward(tau), &sp.forward(sigma), params)
}

/// `Π` from the layered spectra of `τ` and `σ`.
pub(crate) fn baroclinic_from_spectra(
    sp: &Spectral,
    tau: &SpectrumField,
    sigma: &SpectrumField,
    params: &PhysParams,
) -> (SpectrumField, SpectrumField) {
    let mut buoy = tau.clone();
    buoy.scale(params.beta_tau);
    buoy.axpy(-params.beta_sigma, sigma);
    let phi = cumulative_integral_spectrum(&buoy);
    let mut p1 = sp.derivative_spectrum(&phi, Axis::X, 1);
    let mut p2 = sp.derivative_spectrum(&phi, Axis::Y, 1);
    p1.scale(-1.0);
    p2.scale(-1.0);
    (p1, p2)
}

/// Surface pressure from the momentum balance:
/// `∇_H π_s = (1 − P){ f + Π(ζ) + Δv − (v·∇_H v + w ∂_z v) }`.
///
/// Returns the z-independent gradient field and the mean-free `π_s`.
pub fn reconstruct_pressure_gradient(
    model: &Model,
    v: &HVectorField,
    tau: &ScalarField,
    sigma: &ScalarField,
    f: &HVectorField,
) -> Result<(HVectorField, SurfaceScalarField)> {
    let sp = model.spectral();
    let (mut x1, mut x2) = model.pressure_balance_spectrum(v, tau, sigma)?;
    x1.axpy(1.0, &sp.hfft(&f.v1)?);
    x2.axpy(1.0, &sp.hfft(&f.v2)?);
    let q = gradient_potential(sp, &spectrum_average(&x1), &spectrum_average(&x2));
    let pi_s = sp.inverse_surface(&q);
    let (g1, g2) = sp.surface_gradient(&pi_s);
    let grad = HVectorField { v1: ScalarField::from_surface(&g1), v2: ScalarField::from_surface(&g2) };
    Ok((grad, pi_s))
}

/// Regularity band of an initial velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityBand {
    /// `div_H v̄ ≠ 0`: outside the hydrostatic solenoidal space.
    NotSolenoidal,
    /// Bottom trace nonzero: admissible only for `θ < 1/2p`.
    BelowBottomTrace,
    /// `v|Γ_b = 0` but `∂_z v|Γ_u ≠ 0`: admissible for `θ < 1/2 + 1/2p`.
    BelowSurfaceFlux,
    /// Both boundary conditions hold: compatible with `D(A_p)`.
    DomainCompatible,
}

impl VelocityBand {
    pub fn describe(&self) -> &'static str {
        match self {
            VelocityBand::NotSolenoidal => "not hydrostatically solenoidal",
            VelocityBand::BelowBottomTrace => "theta < 1/2p only",
            VelocityBand::BelowSurfaceFlux => "theta < 1/2 + 1/2p",
            VelocityBand::DomainCompatible => "D(A_p)-compatible",
        }
    }
}

/// Regularity band of an initial temperature or salinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarBand {
    /// A flux condition fails: admissible only for `θ < 1/2 + 1/2q`.
    BelowBoundaryFlux,
    DomainCompatible,
}

impl ScalarBand {
    pub fn describe(&self) -> &'static str {
        match self {
            ScalarBand::BelowBoundaryFlux => "theta < 1/2 + 1/2q",
            ScalarBand::DomainCompatible => "D(Delta)-compatible",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityResiduals {
    pub divergence: f64,
    pub bottom_value: f64,
    pub surface_flux: f64,
    pub band: VelocityBand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarResiduals {
    pub surface: f64,
    pub bottom: f64,
    pub band: ScalarBand,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub velocity: VelocityResiduals,
    pub temperature: ScalarResiduals,
    pub salinity: ScalarResiduals,
    pub tol: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn slice_l2(values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

struct BoundaryData {
    bottom: Vec<f64>,
    top: Vec<f64>,
    dz_bottom: Vec<f64>,
    dz_top: Vec<f64>,
    scale: f64,
    dz_scale: f64,
}

fn boundary_data(f: &ScalarField) -> BoundaryData {
    let g: Grid = *f.grid();
    let dz = vertical_derivative(f);
    BoundaryData {
        bottom: f.layer(0).to_vec(),
        top: f.layer(g.nz).to_vec(),
        dz_bottom: dz.layer(0).to_vec(),
        dz_top: dz.layer(g.nz).to_vec(),
        scale: f.max_abs(),
        dz_scale: dz.max_abs() + f.max_abs() / g.h,
    }
}

/// Boundary residuals (relative to the field size) and the highest
/// admissible band of each unknown, at tolerance `tol`.
///
/// Value residuals are normalized by `‖f‖_∞`, flux residuals by
/// `‖∂_z f‖_∞ + ‖f‖_∞/h`, the divergence by `‖∇_H v̄‖`.
pub fn classify_initial_data(
    sp: &Spectral,
    params: &PhysParams,
    v: &HVectorField,
    tau: &ScalarField,
    sigma: &ScalarField,
    tol: f64,
) -> Result<Classification> {
    if !(tol > 0.0) {
        return Err(crate::Error::InvalidParameter(format!("tolerance must be positive (got {tol})")));
    }
    let divergence = relative_divergence(sp, v);

    let b1 = boundary_data(&v.v1);
    let b2 = boundary_data(&v.v2);
    let scale = b1.scale.max(b2.scale);
    let dz_scale = b1.dz_scale.max(b2.dz_scale);
    let bottom_value = ratio(slice_l2(&b1.bottom).hypot(slice_l2(&b2.bottom)), scale);
    let surface_flux = ratio(slice_l2(&b1.dz_top).hypot(slice_l2(&b2.dz_top)), dz_scale);
    let band = if divergence > tol {
        VelocityBand::NotSolenoidal
    } else if bottom_value > tol {
        VelocityBand::BelowBottomTrace
    } else if surface_flux > tol {
        VelocityBand::BelowSurfaceFlux
    } else {
        VelocityBand::DomainCompatible
    };
    let velocity = VelocityResiduals { divergence, bottom_value, surface_flux, band };

    let scalar = |f: &ScalarField, robin: Option<f64>| {
        let b = boundary_data(f);
        let (surface, bottom) = match robin {
            Some(alpha) => {
                let r: Vec<f64> = b.dz_top.iter().zip(&b.top).map(|(d, t)| d + alpha * t).collect();
                let den = b.dz_scale.max(alpha * b.scale);
                (ratio(slice_l2(&r), den), ratio(slice_l2(&b.dz_bottom), b.dz_scale))
            }
            None => (ratio(slice_l2(&b.dz_top), b.dz_scale), ratio(slice_l2(&b.dz_bottom), b.dz_scale)),
        };
        let band = if surface > tol || bottom > tol {
            ScalarBand::BelowBoundaryFlux
        } else {
            ScalarBand::DomainCompatible
        };
        ScalarResiduals { surface, bottom, band }
    };
    Ok(Classification {
        velocity,
        temperature: scalar(tau, Some(params.alpha)),
        salinity: scalar(sigma, None),
        tol,
    })
}

/// Horizontal means per level of a surface-extended field; a small helper
/// for diagnostics.
pub fn level_profile(f: &ScalarField) -> Vec<f64> {
    level_means(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup() -> (Grid, Spectral) {
        let g = Grid::new(16, 16, 16, 1.0).unwrap();
        (g, Spectral::new(g))
    }

    #[test]
    fn average_of_constants_and_quadratic() {
        let (g, _) = setup();
        let v = HVectorField::from_fn(g, |_, _, _| 2.0, |_, _, _| -1.0);
        let (a, b) = vertical_average(&v);
        assert!(a.data.iter().all(|x| (x - 2.0).abs() < 1e-14));
        assert!(b.data.iter().all(|x| (x + 1.0).abs() < 1e-14));
        let q = HVectorField::from_fn(g, |_, _, z| z * z, |_, _, _| 0.0);
        let (a, _) = vertical_average(&q);
        // trapezoid error h^2/(6 nz^2) for z^2
        assert!((a.data[0] - 1.0 / 3.0).abs() < 1.0 / (6.0 * 256.0) + 1e-14);
    }

    #[test]
    fn pure_gradient_is_annihilated() {
        let (g, sp) = setup();
        let v = HVectorField::from_fn(g, |x, _, _| 2.0 * PI * (2.0 * PI * x).cos(), |_, _, _| 0.0);
        let r = helmholtz_project(&sp, &v).unwrap();
        assert!(r.projected.max_abs() < 1e-12);
        let q = SurfaceScalarField::from_fn(g, |x, _| (2.0 * PI * x).sin());
        assert!(r.gradient_part.sub(&q).max_abs() < 1e-12);
    }

    #[test]
    fn solenoidal_field_is_fixed() {
        let (g, sp) = setup();
        let v = HVectorField::from_fn(g, |_, y, z| (2.0 * PI * y).sin() * (1.0 + z), |_, _, _| 0.0);
        let r = helmholtz_project(&sp, &v).unwrap();
        assert!(r.projected.sub(&v).max_abs() < 1e-12);
        assert!(r.gradient_part.max_abs() < 1e-12);
    }

    #[test]
    fn w_of_divergent_profile() {
        let err = |nz: usize| {
            let g = Grid::new(16, 8, nz, 1.0).unwrap();
            let sp = Spectral::new(g);
            let v = HVectorField::from_fn(g, |x, _, z| (2.0 * PI * x).cos() * (z + 1.0).powi(2), |_, _, _| 0.0);
            let w = reconstruct_w(&sp, &v);
            let exact =
                ScalarField::from_fn(g, |x, _, z| 2.0 * PI / 3.0 * (2.0 * PI * x).sin() * (z + 1.0).powi(3));
            w.sub(&exact).max_abs()
        };
        let (e1, e2) = (err(16), err(32));
        assert!(e1 < 1e-2);
        assert!(((e1 / e2).log2() - 2.0).abs() < 0.2);
    }

    #[test]
    fn w_vanishes_for_divergence_free() {
        let (g, sp) = setup();
        let v = HVectorField::from_fn(g, |_, y, _| (2.0 * PI * y).sin(), |_, _, _| 0.0);
        assert!(reconstruct_w(&sp, &v).max_abs() < 1e-13);
    }

    #[test]
    fn baroclinic_cases() {
        let (g, sp) = setup();
        let p = PhysParams::new(1.0, 2.0, 2.0).unwrap();
        let t = ScalarField::from_fn(g, |x, y, z| (2.0 * PI * x).sin() * (z + y).cos());
        assert!(baroclinic_gradient(&sp, &t, &t, &p).unwrap().max_abs() < 1e-12);
        let zonly = ScalarField::from_fn(g, |_, _, z| z.exp());
        assert!(baroclinic_gradient(&sp, &zonly, &t.scaled(0.0), &p).unwrap().max_abs() < 1e-12);
        let p1 = PhysParams::default();
        let tau = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).cos());
        let pi = baroclinic_gradient(&sp, &tau, &ScalarField::zeros(g), &p1).unwrap();
        let exact = ScalarField::from_fn(g, |x, _, z| 2.0 * PI * (z + 1.0) * (2.0 * PI * x).sin());
        // integrand is z-independent: trapezoid is exact
        assert!(pi.v1.sub(&exact).max_abs() < 1e-11);
        assert!(pi.v2.max_abs() < 1e-12);
    }
}
