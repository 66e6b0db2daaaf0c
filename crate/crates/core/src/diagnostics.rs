//! Per-node energies, dissipations, boundary terms and residuals.
//!
//! Dissipations use the discrete Dirichlet forms of the vertical operators, so
//! that for the linear problem `½ d/dt ‖ζ‖² + D_ζ + robin_term = ∫ g·ζ` holds
//! exactly in continuous time.

use crate::grid::FieldKind;
use crate::hydrostatic::{baroclinic_from_spectra, spectrum_average};
use crate::model::{Model, SpecState};
use num_complex::Complex64;

/// One time sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `‖v‖₂²`
    pub e_v: f64,
    pub e_tau: f64,
    pub e_sigma: f64,
    /// `‖∇v‖₂²`
    pub d_v: f64,
    /// `‖∇τ‖₂² + ‖∇σ‖₂²`
    pub d_zeta: f64,
    /// `α ‖τ‖²_{L²(Γ_u)}`
    pub robin_term: f64,
    /// `(1/|Ω|) ∫ σ`
    pub mean_sigma: f64,
    pub dtv_norm: f64,
    pub lapv_norm: f64,
    pub gradpi_norm: f64,
    /// `½ d/dt ‖ζ‖² + D_ζ + robin_term − ∫ g·ζ`
    pub energy_residual: f64,
    pub dttau_norm: f64,
    pub laptau_norm: f64,
    /// `∫ g·ζ`
    pub work_zeta: f64,
    /// `∫ (f + Π)·v`
    pub work_v: f64,
    /// `½ d/dt ‖v‖² + D_v − ∫ (f + Π)·v`
    pub velocity_residual: f64,
    /// `⟨∇_H π_s, v̄⟩_G / (‖π_s‖ ‖v̄‖)`
    pub pressure_pairing: f64,
}

impl DiagnosticsRecord {
    /// Fixed CSV column order.
    pub const CSV_HEADER: [&'static str; 12] = [
        "t",
        "E_v",
        "E_tau",
        "E_sigma",
        "D_v",
        "D_zeta",
        "robin_term",
        "mean_sigma",
        "dtv_norm",
        "lapv_norm",
        "gradpi_norm",
        "energy_residual",
    ];

    pub fn csv_values(&self) -> [f64; 12] {
        [
            self.t,
            self.e_v,
            self.e_tau,
            self.e_sigma,
            self.d_v,
            self.d_zeta,
            self.robin_term,
            self.mean_sigma,
            self.dtv_norm,
            self.lapv_norm,
            self.gradpi_norm,
            self.energy_residual,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.csv_values().iter().all(|v| v.is_finite())
    }

    /// `energy_residual` relative to the size of the balanced terms.
    pub fn relative_energy_residual(&self) -> f64 {
        let scale = self.d_zeta + self.robin_term + self.work_zeta.abs();
        if scale > 0.0 {
            self.energy_residual.abs() / scale
        } else {
            self.energy_residual.abs()
        }
    }

    pub fn relative_velocity_residual(&self) -> f64 {
        let scale = self.d_v + self.work_v.abs();
        if scale > 0.0 {
            self.velocity_residual.abs() / scale
        } else {
            self.velocity_residual.abs()
        }
    }
}

/// Instantaneous part of a record; time derivatives are filled in later.
pub(crate) fn instantaneous(
    model: &Model,
    s: &SpecState,
    forcing: &SpecState,
    pressure: &[Complex64],
    t: f64,
) -> DiagnosticsRecord {
    let g = *model.grid();
    let sp = model.spectral();
    let e_v = model.energy(&s.v1) + model.energy(&s.v2);
    let e_tau = model.energy(&s.tau);
    let e_sigma = model.energy(&s.sigma);
    let d_v = model.gradient_energy(FieldKind::Velocity, &s.v1) + model.gradient_energy(FieldKind::Velocity, &s.v2);
    let d_zeta =
        model.gradient_energy(FieldKind::Temperature, &s.tau) + model.gradient_energy(FieldKind::Salinity, &s.sigma);
    let robin_term = model.robin_energy(&s.tau);
    let mean_sigma = spectrum_average(&s.sigma)[0].re;
    let lapv_norm = (model.energy(&model.velocity_laplacian(&s.v1)) + model.energy(&model.velocity_laplacian(&s.v2)))
        .sqrt();
    let laptau_norm = model.energy(&model.laplacian(FieldKind::Temperature, &s.tau)).sqrt();
    let gradpi_norm = model.potential_gradient_norm(pressure);
    let work_zeta = model.pairing(&forcing.tau, &s.tau) + model.pairing(&forcing.sigma, &s.sigma);
    let mut work_v = model.pairing(&forcing.v1, &s.v1) + model.pairing(&forcing.v2, &s.v2);
    if model.nonlinear() {
        let (p1, p2) = baroclinic_from_spectra(sp, &s.tau, &s.sigma, model.params());
        work_v += model.pairing(&p1, &s.v1) + model.pairing(&p2, &s.v2);
    }
    // ⟨∇_H π_s, v̄⟩ on G by Parseval. Ill-conditioned when v̄ is at rounding
    // level, e.g. for purely baroclinic flow.
    let a1 = spectrum_average(&s.v1);
    let a2 = spectrum_average(&s.v2);
    let mut pair = 0.0;
    let mut vbar = 0.0;
    let mut pi = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let n = j * g.nx + i;
            let (kx, ky) = sp.k_odd(i, j);
            let q = pressure[n];
            let gx = Complex64::new(0.0, kx) * q;
            let gy = Complex64::new(0.0, ky) * q;
            pair += (gx * a1[n].conj() + gy * a2[n].conj()).re;
            vbar += a1[n].norm_sqr() + a2[n].norm_sqr();
            pi += q.norm_sqr();
        }
    }
    let den = (vbar * pi).sqrt();
    let pressure_pairing = if den > 0.0 { pair / den } else { 0.0 };
    DiagnosticsRecord {
        t,
        e_v,
        e_tau,
        e_sigma,
        d_v,
        d_zeta,
        robin_term,
        mean_sigma,
        lapv_norm,
        laptau_norm,
        gradpi_norm,
        work_zeta,
        work_v,
        pressure_pairing,
        ..Default::default()
    }
}

/// Time-difference information around a node.
pub(crate) struct Neighbours<'a> {
    pub prev: Option<(&'a SpecState, &'a DiagnosticsRecord)>,
    pub next: Option<(&'a SpecState, &'a DiagnosticsRecord)>,
}

/// Fills `∂_t` norms and the energy residuals: centred where both neighbours
/// exist, one-sided otherwise.
pub(crate) fn complete(model: &Model, cur: &SpecState, rec: &mut DiagnosticsRecord, nb: Neighbours<'_>) {
    let (a, b) = match (nb.prev, nb.next) {
        (Some(p), Some(n)) => (p, n),
        (Some(p), None) => (p, (cur, &*rec)),
        (None, Some(n)) => ((cur, &*rec), n),
        (None, None) => return,
    };
    let dt = b.1.t - a.1.t;
    let diff = |x: &crate::spectral::SpectrumField, y: &crate::spectral::SpectrumField| {
        let mut d = y.clone();
        d.axpy(-1.0, x);
        model.energy(&d)
    };
    let dtv = ((diff(&a.0.v1, &b.0.v1) + diff(&a.0.v2, &b.0.v2)).sqrt()) / dt;
    let dttau = diff(&a.0.tau, &b.0.tau).sqrt() / dt;
    let de_zeta = (b.1.e_tau + b.1.e_sigma - a.1.e_tau - a.1.e_sigma) / dt;
    let de_v = (b.1.e_v - a.1.e_v) / dt;
    rec.dtv_norm = dtv;
    rec.dttau_norm = dttau;
    rec.energy_residual = 0.5 * de_zeta + rec.d_zeta + rec.robin_term - rec.work_zeta;
    rec.velocity_residual = 0.5 * de_v + rec.d_v - rec.work_v;
}
