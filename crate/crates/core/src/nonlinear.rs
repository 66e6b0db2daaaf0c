//! Nonlinear right-hand sides with 2/3-rule dealiasing, and the empirical
//! bound probe for them.
//!
//! Inputs are truncated to the retained modes before products are formed in
//! physical space, and every product is truncated again. Momentum is advected
//! in advective form. Scalars are advected in flux form
//! `∇_H·(vζ) + D_z(wζ)`, where `D_z` is central inside and one-sided at the
//! ends: its trapezoid sum telescopes to the boundary values of `wζ`, which
//! vanish, so the domain mean of each scalar is conserved to rounding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{HVectorField, ScalarField};
use crate::grid::{FieldKind, Grid, PhysParams};
use crate::hydrostatic::{project_spectrum, relative_divergence};
use crate::model::{Model, SpecState};
use crate::norms::{inner, inner_vec, lp_norm, sobolev_norm};
use crate::profiles::{random_smooth_salinity, random_smooth_temperature, random_smooth_velocity, SmoothSpec};
use crate::spectral::{Axis, Spectral, SpectrumField};
use crate::vertical::{conservative_derivative_spectrum, cumulative_integral_spectrum, vertical_derivative};

/// Relative divergence above which `F` and `G` reject their velocity.
pub const SOLENOIDAL_TOL: f64 = 1e-8;

/// Dealiased spectra of `(v·∇_H + w ∂_z) v` and of `∇_H·(vζ) + D_z(wζ)` for
/// each scalar `ζ`.
pub(crate) fn transport(
    sp: &Spectral,
    v1: &SpectrumField,
    v2: &SpectrumField,
    scalars: &[&SpectrumField],
) -> (SpectrumField, SpectrumField, Vec<SpectrumField>) {
    let mut t1 = v1.clone();
    let mut t2 = v2.clone();
    sp.dealias(&mut t1);
    sp.dealias(&mut t2);
    let u1 = sp.inverse(&t1);
    let u2 = sp.inverse(&t2);
    let dx1 = sp.derivative_spectrum(&t1, Axis::X, 1);
    let dy2 = sp.derivative_spectrum(&t2, Axis::Y, 1);
    let mut div = dx1.clone();
    div.axpy(1.0, &dy2);
    let mut w_hat = cumulative_integral_spectrum(&div);
    w_hat.scale(-1.0);
    let w = sp.inverse(&w_hat);

    let advect = |f_phys: &ScalarField, fx: ScalarField, fy: ScalarField| {
        let fz = vertical_derivative(f_phys);
        let mut prod = ScalarField::zeros(*f_phys.grid());
        for n in 0..prod.data.len() {
            prod.data[n] = u1.data[n] * fx.data[n] + u2.data[n] * fy.data[n] + w.data[n] * fz.data[n];
        }
        let mut s = sp.forward(&prod);
        sp.dealias(&mut s);
        s
    };

    let a1 = advect(&u1, sp.inverse(&dx1), sp.inverse(&sp.derivative_spectrum(&t1, Axis::Y, 1)));
    let a2 = advect(&u2, sp.inverse(&sp.derivative_spectrum(&t2, Axis::X, 1)), sp.inverse(&dy2));
    let out = scalars
        .iter()
        .map(|s| {
            let mut t = (*s).clone();
            sp.dealias(&mut t);
            let phys = sp.inverse(&t);
            let flux = |u: &ScalarField| {
                let mut p = ScalarField::zeros(*phys.grid());
                for n in 0..p.data.len() {
                    p.data[n] = u.data[n] * phys.data[n];
                }
                let mut f = sp.forward(&p);
                sp.dealias(&mut f);
                f
            };
            let mut div = sp.derivative_spectrum(&flux(&u1), Axis::X, 1);
            div.axpy(1.0, &sp.derivative_spectrum(&flux(&u2), Axis::Y, 1));
            div.axpy(1.0, &conservative_derivative_spectrum(&flux(&w)));
            div
        })
        .collect();
    (a1, a2, out)
}

fn check_solenoidal(sp: &Spectral, v: &HVectorField) -> Result<()> {
    let r = relative_divergence(sp, v);
    if r > SOLENOIDAL_TOL {
        return Err(Error::NotSolenoidal(r));
    }
    Ok(())
}

/// `F(v, ζ) = −P(v·∇_H v + w ∂_z v − Π(ζ))`, with `w` reconstructed from `v`.
pub fn assemble_f(model: &Model, v: &HVectorField, tau: &ScalarField, sigma: &ScalarField) -> Result<HVectorField> {
    let sp = model.spectral();
    check_solenoidal(sp, v)?;
    let s = SpecState::from_fields(sp, v, tau, sigma)?;
    let mut n = model.coupling_terms(&s);
    project_spectrum(sp, &mut n.v1, &mut n.v2);
    Ok(HVectorField { v1: sp.inverse(&n.v1), v2: sp.inverse(&n.v2) })
}

/// `G(v, ζ) = −(v·∇_H ζ + w ∂_z ζ)` for `ζ = (τ, σ)`.
pub fn assemble_g(
    model: &Model,
    v: &HVectorField,
    tau: &ScalarField,
    sigma: &ScalarField,
) -> Result<(ScalarField, ScalarField)> {
    let sp = model.spectral();
    check_solenoidal(sp, v)?;
    let s = SpecState::from_fields(sp, v, tau, sigma)?;
    let (_, _, mut out) = transport(sp, &s.v1, &s.v2, &[&s.tau, &s.sigma]);
    let mut sig = out.pop().expect("two scalars");
    let mut ta = out.pop().expect("two scalars");
    ta.scale(-1.0);
    sig.scale(-1.0);
    Ok((sp.inverse(&ta), sp.inverse(&sig)))
}

/// Relative energy pairings of the transport terms, which vanish for the
/// continuous problem: `|⟨(v·∇_H + w∂_z)v, v⟩| / ‖v‖³_{H¹}` and
/// `|⟨(v·∇_H + w∂_z)ζ, ζ⟩| / (‖v‖_{H¹} ‖ζ‖²_{H¹})`. What remains on a grid is
/// truncation error.
pub fn transport_pairings(model: &Model, v: &HVectorField, zeta: &ScalarField) -> Result<(f64, f64)> {
    let sp = model.spectral();
    check_solenoidal(sp, v)?;
    let s = SpecState::from_fields(sp, v, zeta, zeta)?;
    let (a1, a2, mut out) = transport(sp, &s.v1, &s.v2, &[&s.tau]);
    let adv = HVectorField { v1: sp.inverse(&a1), v2: sp.inverse(&a2) };
    let g = sp.inverse(&out.pop().expect("one scalar"));
    let vn = sobolev_norm(sp, v, 1)?;
    let zn = sobolev_norm(sp, zeta, 1)?;
    let rel = |num: f64, den: f64| if den > 0.0 { num.abs() / den } else { 0.0 };
    Ok((rel(inner_vec(&adv, v), vn.powi(3)), rel(inner(&g, zeta), vn * zn * zn)))
}

/// Ratios sampled by [`nonlinearity_bound_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProbeReport {
    /// Velocity scales `c` applied to each sample.
    pub scales: Vec<f64>,
    /// `‖F‖₂ / (‖v‖²_{H^{3/2}} + ‖ζ‖_{H^{3/2}})`, one row per sample.
    pub f_ratios: Vec<Vec<f64>>,
    /// `‖G‖₂ / (‖v‖_{H^{3/2}} ‖ζ‖_{H^{3/2}})`, one row per sample.
    pub g_ratios: Vec<Vec<f64>>,
}

impl BoundProbeReport {
    pub fn max_f(&self) -> f64 {
        self.f_ratios.iter().flatten().fold(0.0, |a, &b| a.max(b))
    }

    pub fn max_g(&self) -> f64 {
        self.g_ratios.iter().flatten().fold(0.0, |a, &b| a.max(b))
    }

    /// Largest ratio at each scale.
    pub fn max_per_scale(&self) -> Vec<(f64, f64)> {
        (0..self.scales.len())
            .map(|c| {
                let f = self.f_ratios.iter().map(|r| r[c]).fold(0.0, f64::max);
                let g = self.g_ratios.iter().map(|r| r[c]).fold(0.0, f64::max);
                (f, g)
            })
            .collect()
    }

    /// Spread of the per-scale maxima: largest over smallest.
    pub fn scale_spread(&self) -> f64 {
        let per = self.max_per_scale();
        let hi = per.iter().map(|p| p.0.max(p.1)).fold(0.0, f64::max);
        let lo = per.iter().map(|p| p.0.max(p.1)).fold(f64::INFINITY, f64::min);
        hi / lo
    }

    pub fn all_finite(&self) -> bool {
        self.f_ratios.iter().chain(&self.g_ratios).flatten().all(|r| r.is_finite())
    }
}

/// Velocity scales probed by [`nonlinearity_bound_probe`].
pub const PROBE_SCALES: [f64; 5] = [1e-2, 1e-1, 1.0, 1e1, 1e2];

/// Samples `‖F‖/(‖v‖² + ‖ζ‖)` and `‖G‖/(‖v‖‖ζ‖)` in `H^{3/2}` norms over
/// random smooth fields, each at the velocity scales [`PROBE_SCALES`].
pub fn nonlinearity_bound_probe(grid: Grid, params: &PhysParams, samples: usize, seed: u64) -> Result<BoundProbeReport> {
    let model = Model::new(grid, *params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = SmoothSpec { kmax: 3, modes: 3, decay: 0.6 };
    let mut f_ratios = Vec::with_capacity(samples);
    let mut g_ratios = Vec::with_capacity(samples);
    let vc = model.cache(FieldKind::Velocity);
    let tc = model.cache(FieldKind::Temperature);
    let sc = model.cache(FieldKind::Salinity);
    for _ in 0..samples {
        let v0 = random_smooth_velocity(grid, rng.random(), 1.0, spec);
        let tau = random_smooth_temperature(grid, params, rng.random(), 1.0, spec)?;
        let sigma = random_smooth_salinity(grid, rng.random(), 1.0, spec);
        let zn = tc.fractional_h_norm(&tau, 1.5)?.hypot(sc.fractional_h_norm(&sigma, 1.5)?);
        let mut fr = Vec::new();
        let mut gr = Vec::new();
        for &c in &PROBE_SCALES {
            let v = v0.scaled(c);
            let vn = vc.fractional_h_norm(&v, 1.5)?;
            let f = assemble_f(&model, &v, &tau, &sigma)?;
            let (gt, gs) = assemble_g(&model, &v, &tau, &sigma)?;
            fr.push(lp_norm(&f, 2.0)? / (vn * vn + zn));
            gr.push(lp_norm(&gt, 2.0)?.hypot(lp_norm(&gs, 2.0)?) / (vn * zn));
        }
        f_ratios.push(fr);
        g_ratios.push(gr);
    }
    Ok(BoundProbeReport { scales: PROBE_SCALES.to_vec(), f_ratios, g_ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydrostatic::baroclinic_gradient;
    use std::f64::consts::PI;

    fn model() -> Model {
        Model::new(Grid::new(16, 16, 8, 1.0).unwrap(), PhysParams::default()).unwrap()
    }

    #[test]
    fn zero_velocity_gives_projected_buoyancy() {
        let m = model();
        let g = *m.grid();
        let z = HVectorField::zeros(g);
        let zero = ScalarField::zeros(g);
        assert!(assemble_f(&m, &z, &zero, &zero).unwrap().max_abs() == 0.0);
        let tau = ScalarField::from_fn(g, |x, y, z| (2.0 * PI * x).cos() * (2.0 * PI * y).sin() * (1.0 + z));
        let f = assemble_f(&m, &z, &tau, &zero).unwrap();
        let pi = baroclinic_gradient(m.spectral(), &tau, &zero, m.params()).unwrap();
        let p = crate::hydrostatic::helmholtz_project(m.spectral(), &pi).unwrap().projected;
        assert!(f.sub(&p).max_abs() < 1e-12);
    }

    #[test]
    fn shear_flow_is_steady() {
        let m = model();
        let g = *m.grid();
        let v = HVectorField::from_fn(g, |_, y, _| (2.0 * PI * y).sin(), |_, _, _| 0.0);
        let zero = ScalarField::zeros(g);
        assert!(assemble_f(&m, &v, &zero, &zero).unwrap().max_abs() < 1e-12);
        let tau = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        let (gt, gs) = assemble_g(&m, &v, &tau, &zero).unwrap();
        let expect = ScalarField::from_fn(g, |x, y, _| -(2.0 * PI * y).sin() * 2.0 * PI * (2.0 * PI * x).cos());
        assert!(gt.sub(&expect).max_abs() < 1e-11);
        assert!(gs.max_abs() == 0.0);
    }

    #[test]
    fn scalar_transport_conserves_mean() {
        let m = model();
        let g = *m.grid();
        let v = random_smooth_velocity(g, 5, 1.0, SmoothSpec::default());
        let tau = random_smooth_temperature(g, m.params(), 6, 1.0, SmoothSpec::default()).unwrap();
        let sigma = random_smooth_salinity(g, 7, 1.0, SmoothSpec::default());
        let (gt, gs) = assemble_g(&m, &v, &tau, &sigma).unwrap();
        assert!(crate::norms::integrate(&gt).unwrap().abs() < 1e-14 * gt.max_abs());
        assert!(crate::norms::integrate(&gs).unwrap().abs() < 1e-14 * gs.max_abs());
    }

    #[test]
    fn constant_scalar_tendency_vanishes_with_resolution() {
        let tendency = |nz: usize| {
            let g = Grid::new(8, 8, nz, 1.0).unwrap();
            let m = Model::new(g, PhysParams::default()).unwrap();
            let v = random_smooth_velocity(g, 5, 1.0, SmoothSpec::default());
            let c = ScalarField::constant(g, 3.0);
            assemble_g(&m, &v, &c, &c).unwrap().0.max_abs()
        };
        let (a, b) = (tendency(16), tendency(32));
        assert!(a < 0.5 && (a / b).log2() > 0.9, "{a} {b}");
    }

    #[test]
    fn divergent_input_is_rejected() {
        let m = model();
        let g = *m.grid();
        let v = HVectorField::from_fn(g, |x, _, _| (2.0 * PI * x).sin(), |_, _, _| 0.0);
        let z = ScalarField::zeros(g);
        assert!(matches!(assemble_f(&m, &v, &z, &z), Err(Error::NotSolenoidal(_))));
        assert!(matches!(assemble_g(&m, &v, &z, &z), Err(Error::NotSolenoidal(_))));
    }

    #[test]
    fn transport_pairings_shrink_with_resolution() {
        let params = PhysParams::default();
        let spec = SmoothSpec::default();
        let at = |n: usize, nz: usize| {
            let g = Grid::new(n, n, nz, 1.0).unwrap();
            let m = Model::new(g, params).unwrap();
            let v = random_smooth_velocity(g, 7, 1.0, spec);
            let t = random_smooth_temperature(g, &params, 8, 1.0, spec).unwrap();
            transport_pairings(&m, &v, &t).unwrap()
        };
        let (a, b) = (at(8, 4), at(16, 8));
        assert!(b.0 < a.0 && b.1 < a.1, "{a:?} {b:?}");
    }

    #[test]
    fn advection_is_quadratic() {
        let m = model();
        let g = *m.grid();
        let v = random_smooth_velocity(g, 2, 1.0, SmoothSpec::default());
        let z = ScalarField::zeros(g);
        let f1 = assemble_f(&m, &v, &z, &z).unwrap();
        let f3 = assemble_f(&m, &v.scaled(3.0), &z, &z).unwrap();
        assert!(f3.sub(&f1.scaled(9.0)).max_abs() < 1e-12 * f3.max_abs());
    }
}
