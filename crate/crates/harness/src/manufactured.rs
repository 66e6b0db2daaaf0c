//! Closed-form solutions of the forced system and the convergence studies
//! built on them.
//!
//! The fields are separable: `v = a(t)(X φ₁, Y φ₂)`, `τ = b(t) T`,
//! `σ = c(t) S` with `s = (z + h)/h ∈ [0, 1]`. The vertical profiles satisfy
//! every boundary condition exactly, `∫₀¹ φ_i ds = 0` makes `v` hydrostatically
//! solenoidal, and the forcing is the residual of the equations applied to
//! the exact fields.

use std::f64::consts::PI;

use primeq::forcing::{Envelope, Forcing, ForcingTerm};
use primeq::norms::lp_norm;
use primeq::solver::{run_simulation_observed, State};
use primeq::{Grid, HVectorField, Model, PhysParams, ScalarField};

use crate::analysis::observed_orders;
use crate::error::{HarnessError, Result};

/// Horizontal shape of the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizontal {
    /// `X = cos 2πx`, `Y = sin 2πy`: exactly resolved on any grid.
    Trigonometric,
    /// `X = 1/(3/2 − cos 2πx)`, `Y = 1/(3/2 − sin 2πy)`: analytic with
    /// geometrically decaying Fourier coefficients.
    Analytic,
}

/// Time dependence of the amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Temporal {
    Steady,
    /// Amplitudes modulated by `1 ± ½ sin 2πt`.
    Oscillating,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub horizontal: Horizontal,
    pub temporal: Temporal,
    /// Velocity amplitude.
    pub a: f64,
    /// Temperature amplitude.
    pub b: f64,
    /// Salinity amplitude.
    pub c: f64,
    /// Whether the forcing balances the coupling terms.
    pub nonlinear: bool,
}

/// Values and first two derivatives of a periodic factor.
#[derive(Clone, Copy)]
struct Periodic {
    f: f64,
    d1: f64,
    d2: f64,
}

fn factor_x(kind: Horizontal, x: f64) -> Periodic {
    let th = 2.0 * PI * x;
    match kind {
        Horizontal::Trigonometric => {
            Periodic { f: th.cos(), d1: -2.0 * PI * th.sin(), d2: -4.0 * PI * PI * th.cos() }
        }
        Horizontal::Analytic => {
            reciprocal(1.5 - th.cos(), 2.0 * PI * th.sin(), 4.0 * PI * PI * th.cos())
        }
    }
}

fn factor_y(kind: Horizontal, y: f64) -> Periodic {
    let th = 2.0 * PI * y;
    match kind {
        Horizontal::Trigonometric => {
            Periodic { f: th.sin(), d1: 2.0 * PI * th.cos(), d2: -4.0 * PI * PI * th.sin() }
        }
        Horizontal::Analytic => {
            reciprocal(1.5 - th.sin(), -2.0 * PI * th.cos(), 4.0 * PI * PI * th.sin())
        }
    }
}

/// `1/d` from `d`, `d'`, `d''`.
fn reciprocal(d: f64, d1: f64, d2: f64) -> Periodic {
    Periodic { f: 1.0 / d, d1: -d1 / (d * d), d2: -d2 / (d * d) + 2.0 * d1 * d1 / (d * d * d) }
}

/// Vertical profiles at `s`, derivatives with respect to `s`.
#[derive(Clone, Copy)]
struct Vertical {
    phi: [f64; 2],
    dphi: [f64; 2],
    ddphi: [f64; 2],
    /// `∫₀ˢ φ_i`, vanishing at both ends.
    cum: [f64; 2],
    /// Temperature pieces: `T = 1 + C + X·P` with `P = C + C²`.
    c: f64,
    s1: f64,
    p: f64,
    /// `∫₀ˢ P`
    p_cum: f64,
    c2: f64,
    s2: f64,
}

fn vertical(s: f64) -> Vertical {
    let w = |m: f64| (m * PI * s / 2.0).sin();
    let wc = |m: f64| (m * PI * s / 2.0).cos();
    let phi = [w(1.0) - 3.0 * w(3.0), w(3.0) - 5.0 / 3.0 * w(5.0)];
    let dphi = [
        PI / 2.0 * wc(1.0) - 4.5 * PI * wc(3.0),
        1.5 * PI * wc(3.0) - 25.0 * PI / 6.0 * wc(5.0),
    ];
    let ddphi = [
        -PI * PI / 4.0 * w(1.0) + 6.75 * PI * PI * w(3.0),
        -2.25 * PI * PI * w(3.0) + 125.0 * PI * PI / 12.0 * w(5.0),
    ];
    let cum = [2.0 / PI * (wc(3.0) - wc(1.0)), 2.0 / (3.0 * PI) * (wc(5.0) - wc(3.0))];
    let c = (PI * s).cos();
    let s1 = (PI * s).sin();
    let c2 = (2.0 * PI * s).cos();
    let s2 = (2.0 * PI * s).sin();
    Vertical { phi, dphi, ddphi, cum, c, s1, p: c + c * c, p_cum: s1 / PI + s / 2.0 + s2 / (4.0 * PI), c2, s2 }
}

/// Spatial parts of the forcing, one per envelope.
struct Parts {
    v: HVectorField,
    lap_v: HVectorField,
    adv_v: HVectorField,
    buoy_tau: HVectorField,
    buoy_sigma: HVectorField,
    tau: ScalarField,
    lap_tau: ScalarField,
    adv_tau: ScalarField,
    sigma: ScalarField,
    lap_sigma: ScalarField,
    adv_sigma: ScalarField,
}

impl ManufacturedSolution {
    pub fn new(horizontal: Horizontal, temporal: Temporal) -> Self {
        Self { horizontal, temporal, a: 0.5, b: 1.0, c: 1.0, nonlinear: true }
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    fn modulation(&self) -> (fn(f64) -> f64, fn(f64) -> f64) {
        match self.temporal {
            Temporal::Steady => (|_| 1.0, |_| 0.0),
            Temporal::Oscillating => (|t| 1.0 + 0.5 * (2.0 * PI * t).sin(), |t| PI * (2.0 * PI * t).cos()),
        }
    }

    /// `(a(t), b(t), c(t))`; salinity is modulated in antiphase.
    pub fn amplitudes(&self, t: f64) -> [f64; 3] {
        let (m, _) = self.modulation();
        [self.a * m(t), self.b * m(t), self.c * m(-t)]
    }

    fn rates(&self, t: f64) -> [f64; 3] {
        let (_, dm) = self.modulation();
        [self.a * dm(t), self.b * dm(t), -self.c * dm(-t)]
    }

    fn parts(&self, grid: Grid, params: &PhysParams) -> Parts {
        let h = grid.h;
        let kind = self.horizontal;
        let s_of = |z: f64| (z + h) / h;
        let scalar = |f: &dyn Fn(Periodic, Periodic, Vertical) -> f64| {
            ScalarField::from_fn(grid, |x, y, z| f(factor_x(kind, x), factor_y(kind, y), vertical(s_of(z))))
        };
        let vector = |f1: &dyn Fn(Periodic, Periodic, Vertical) -> f64, f2: &dyn Fn(Periodic, Periodic, Vertical) -> f64| {
            HVectorField { v1: scalar(f1), v2: scalar(f2) }
        };
        // w / a = −h (X' ∫φ₁ + Y' ∫φ₂), so w ∂_z = −(X' ∫φ₁ + Y' ∫φ₂) ∂_s.
        let lift = |x: Periodic, y: Periodic, v: Vertical| x.d1 * v.cum[0] + y.d1 * v.cum[1];
        let dts = |x: Periodic, v: Vertical| -PI * v.s1 * (1.0 + x.f * (1.0 + 2.0 * v.c));
        let dtss = |x: Periodic, v: Vertical| {
            -PI * PI * v.c * (1.0 + x.f * (1.0 + 2.0 * v.c)) + 2.0 * PI * PI * x.f * v.s1 * v.s1
        };
        let dss_sigma = |y: Periodic, v: Vertical| -PI * PI * v.c - 4.0 * PI * PI * y.f * v.c2;
        let ds_sigma = |y: Periodic, v: Vertical| -PI * v.s1 - 2.0 * PI * y.f * v.s2;
        let hh = h * h;
        let (bt, bs) = (params.beta_tau, params.beta_sigma);
        Parts {
            v: vector(&|x, _, v| x.f * v.phi[0], &|_, y, v| y.f * v.phi[1]),
            lap_v: vector(
                &|x, _, v| x.d2 * v.phi[0] + x.f * v.ddphi[0] / hh,
                &|_, y, v| y.d2 * v.phi[1] + y.f * v.ddphi[1] / hh,
            ),
            adv_v: vector(
                &|x, y, v| x.f * x.d1 * v.phi[0] * v.phi[0] - lift(x, y, v) * x.f * v.dphi[0],
                &|x, y, v| y.f * y.d1 * v.phi[1] * v.phi[1] - lift(x, y, v) * y.f * v.dphi[1],
            ),
            buoy_tau: vector(&|x, _, v| -bt * h * x.d1 * v.p_cum, &|_, _, _| 0.0),
            buoy_sigma: vector(&|_, _, _| 0.0, &|_, y, v| bs * h * y.d1 * v.s2 / (2.0 * PI)),
            tau: scalar(&|x, _, v| 1.0 + v.c + x.f * v.p),
            lap_tau: scalar(&|x, _, v| x.d2 * v.p + dtss(x, v) / hh),
            adv_tau: scalar(&|x, y, v| x.f * v.phi[0] * x.d1 * v.p - lift(x, y, v) * dts(x, v)),
            sigma: scalar(&|_, y, v| v.c + y.f * v.c2),
            lap_sigma: scalar(&|_, y, v| y.d2 * v.c2 + dss_sigma(y, v) / hh),
            adv_sigma: scalar(&|x, y, v| y.f * v.phi[1] * y.d1 * v.c2 - lift(x, y, v) * ds_sigma(y, v)),
        }
    }

    /// Exact state at time `t`.
    pub fn exact(&self, grid: Grid, params: &PhysParams, t: f64) -> Result<State> {
        let p = self.parts(grid, params);
        let [a, b, c] = self.amplitudes(t);
        Ok(State::new(t, p.v.scaled(a), p.tau.scaled(b), p.sigma.scaled(c))?)
    }

    /// Forcing that makes [`ManufacturedSolution::exact`] a solution:
    /// `f = ∂_t v − Δv + (v·∇)v − Π(ζ)` and `g = ∂_t ζ − Δζ + (v·∇)ζ`, the
    /// transport and buoyancy pieces only when `nonlinear`.
    pub fn forcing(&self, grid: Grid, params: &PhysParams) -> Forcing {
        let p = self.parts(grid, params);
        let me = *self;
        let env = move |f: fn(&ManufacturedSolution, f64) -> f64| Envelope::custom(move |t| f(&me, t));
        let term = |e: Envelope| ForcingTerm::new(e);
        let mut forcing = Forcing::none()
            .with_term(term(env(|m, t| m.rates(t)[0])).velocity(p.v))
            .with_term(term(env(|m, t| m.rates(t)[1])).temperature(p.tau))
            .with_term(term(env(|m, t| m.rates(t)[2])).salinity(p.sigma))
            .with_term(term(env(|m, t| m.amplitudes(t)[0])).velocity(p.lap_v).amplitude(-1.0))
            .with_term(term(env(|m, t| m.amplitudes(t)[1])).temperature(p.lap_tau).amplitude(-1.0))
            .with_term(term(env(|m, t| m.amplitudes(t)[2])).salinity(p.lap_sigma).amplitude(-1.0));
        if self.nonlinear {
            forcing = forcing
                .with_term(term(env(|m, t| m.amplitudes(t)[0].powi(2))).velocity(p.adv_v))
                .with_term(term(env(|m, t| m.amplitudes(t)[1])).velocity(p.buoy_tau).amplitude(-1.0))
                .with_term(term(env(|m, t| m.amplitudes(t)[2])).velocity(p.buoy_sigma).amplitude(-1.0))
                .with_term(term(env(|m, t| m.amplitudes(t)[0] * m.amplitudes(t)[1])).temperature(p.adv_tau))
                .with_term(term(env(|m, t| m.amplitudes(t)[0] * m.amplitudes(t)[2])).salinity(p.adv_sigma));
        }
        forcing
    }
}

/// `‖u − w‖ / ‖w‖` over all three unknowns in the discrete `L²` norm.
pub fn relative_error(u: &State, w: &State) -> Result<f64> {
    let sq = |x: f64| x * x;
    let num = sq(lp_norm(&u.v.sub(&w.v), 2.0)?)
        + sq(lp_norm(&u.tau.sub(&w.tau), 2.0)?)
        + sq(lp_norm(&u.sigma.sub(&w.sigma), 2.0)?);
    let den = sq(lp_norm(&w.v, 2.0)?) + sq(lp_norm(&w.tau, 2.0)?) + sq(lp_norm(&w.sigma, 2.0)?);
    Ok((num / den).sqrt())
}

/// Restriction of a state to a coarser grid whose nodes are a subset.
pub fn restrict(state: &State, coarse: Grid) -> Result<State> {
    let fine = *state.grid();
    if fine.nz != coarse.nz || fine.nx % coarse.nx != 0 || fine.ny % coarse.ny != 0 {
        return Err(HarnessError::Config(format!("cannot restrict {fine:?} to {coarse:?}")));
    }
    let (sx, sy) = (fine.nx / coarse.nx, fine.ny / coarse.ny);
    let pick = |f: &ScalarField| {
        let mut data = Vec::with_capacity(coarse.len());
        for k in 0..coarse.levels() {
            for j in 0..coarse.ny {
                for i in 0..coarse.nx {
                    data.push(f.at(i * sx, j * sy, k));
                }
            }
        }
        ScalarField::from_vec(coarse, data)
    };
    Ok(State::new(state.t, HVectorField { v1: pick(&state.v.v1)?, v2: pick(&state.v.v2)? }, pick(&state.tau)?, pick(&state.sigma)?)?)
}

/// Which discretization parameter a study refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    /// `nz` doubled, errors against the exact solution.
    Vertical,
    /// `nx = ny` doubled, errors against a finer horizontal reference.
    Horizontal,
    /// `dt` halved, errors against a finer time step.
    Temporal,
}

impl Refinement {
    pub fn name(&self) -> &'static str {
        match self {
            Refinement::Vertical => "vertical",
            Refinement::Horizontal => "horizontal",
            Refinement::Temporal => "temporal",
        }
    }
}

/// Settings for one study; `levels` are the refined values of `nz`, `nx` or
/// `1/dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub refinement: Refinement,
    pub solution: ManufacturedSolution,
    pub base: Grid,
    pub levels: Vec<usize>,
    /// `nx` or `1/dt` of the reference; ignored for vertical studies.
    pub reference: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl StudySpec {
    /// `nz ∈ {8, 16, 32}` at `nx = 16`, steady trigonometric solution.
    pub fn vertical() -> Self {
        Self {
            refinement: Refinement::Vertical,
            solution: ManufacturedSolution::new(Horizontal::Trigonometric, Temporal::Steady),
            base: Grid::new(16, 16, 8, 1.0).expect("valid grid"),
            levels: vec![8, 16, 32],
            reference: 0,
            dt: 1e-2,
            t_end: 0.5,
        }
    }

    /// `nx ∈ {8, 16, 32}` against `nx = 64`, steady analytic solution.
    pub fn horizontal() -> Self {
        Self {
            refinement: Refinement::Horizontal,
            solution: ManufacturedSolution::new(Horizontal::Analytic, Temporal::Steady),
            base: Grid::new(8, 8, 8, 1.0).expect("valid grid"),
            levels: vec![8, 16, 32],
            reference: 64,
            dt: 1e-2,
            t_end: 0.1,
        }
    }

    /// `dt ∈ {1/40, 1/80, 1/160}` against `dt = 1/1280`, oscillating solution.
    pub fn temporal() -> Self {
        Self {
            refinement: Refinement::Temporal,
            solution: ManufacturedSolution::new(Horizontal::Trigonometric, Temporal::Oscillating),
            base: Grid::new(8, 8, 8, 1.0).expect("valid grid"),
            levels: vec![40, 80, 160],
            reference: 1280,
            dt: 0.0,
            t_end: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub refinement: Refinement,
    pub levels: Vec<usize>,
    pub errors: Vec<f64>,
    /// `log₂(e_i / e_{i+1})`
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    /// `e_i / e_{i+1}`
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

/// Runs from the exact state at `t = 0` to `t_end` and returns the final
/// state.
pub fn integrate(solution: &ManufacturedSolution, grid: Grid, params: &PhysParams, dt: f64, t_end: f64) -> Result<State> {
    let model = Model::new(grid, *params)?.with_nonlinear(solution.nonlinear);
    let initial = solution.exact(grid, params, 0.0)?;
    let forcing = solution.forcing(grid, params);
    let steps = (t_end / dt).round() as usize;
    let mut last = None;
    run_simulation_observed(&model, &initial, &forcing, t_end, dt, steps.max(1), &mut |s, _| last = Some(s.clone()))?;
    last.ok_or_else(|| HarnessError::InsufficientData { needed: 1, got: 0 })
}

pub fn convergence_study(spec: &StudySpec, params: &PhysParams) -> Result<ConvergenceReport> {
    let sol = &spec.solution;
    let b = spec.base;
    let mut errors = Vec::with_capacity(spec.levels.len());
    match spec.refinement {
        Refinement::Vertical => {
            for &nz in &spec.levels {
                let g = b.with_resolution(b.nx, b.ny, nz)?;
                let u = integrate(sol, g, params, spec.dt, spec.t_end)?;
                errors.push(relative_error(&u, &sol.exact(g, params, u.t)?)?);
            }
        }
        Refinement::Horizontal => {
            let gr = b.with_resolution(spec.reference, spec.reference, b.nz)?;
            let reference = integrate(sol, gr, params, spec.dt, spec.t_end)?;
            for &n in &spec.levels {
                let g = b.with_resolution(n, n, b.nz)?;
                let u = integrate(sol, g, params, spec.dt, spec.t_end)?;
                errors.push(relative_error(&u, &restrict(&reference, g)?)?);
            }
        }
        Refinement::Temporal => {
            let reference = integrate(sol, b, params, 1.0 / spec.reference as f64, spec.t_end)?;
            for &n in &spec.levels {
                let u = integrate(sol, b, params, 1.0 / n as f64, spec.t_end)?;
                errors.push(relative_error(&u, &reference)?);
            }
        }
    }
    let orders = observed_orders(&errors);
    Ok(ConvergenceReport { refinement: spec.refinement, levels: spec.levels.clone(), errors, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use primeq::hydrostatic::{averaged_divergence, classify_initial_data, ScalarBand};
    use primeq::Spectral;

    /// Centered second differences in `s` of the closed-form profiles.
    #[test]
    fn profile_derivatives_match_finite_differences() {
        let e = 1e-5;
        for s in [0.1, 0.37, 0.5, 0.81] {
            let (m, c, p) = (vertical(s - e), vertical(s), vertical(s + e));
            for i in 0..2 {
                assert!(((p.phi[i] - m.phi[i]) / (2.0 * e) - c.dphi[i]).abs() < 1e-6);
                assert!(((p.dphi[i] - m.dphi[i]) / (2.0 * e) - c.ddphi[i]).abs() < 1e-5);
                assert!(((p.cum[i] - m.cum[i]) / (2.0 * e) - c.phi[i]).abs() < 1e-6);
            }
            assert!(((p.p_cum - m.p_cum) / (2.0 * e) - c.p).abs() < 1e-6);
            for kind in [Horizontal::Trigonometric, Horizontal::Analytic] {
                let (a, b, d) = (factor_x(kind, s - e), factor_x(kind, s), factor_x(kind, s + e));
                assert!(((d.f - a.f) / (2.0 * e) - b.d1).abs() < 1e-5);
                assert!(((d.d1 - a.d1) / (2.0 * e) - b.d2).abs() < 1e-4);
                let (a, b, d) = (factor_y(kind, s - e), factor_y(kind, s), factor_y(kind, s + e));
                assert!(((d.f - a.f) / (2.0 * e) - b.d1).abs() < 1e-5);
                assert!(((d.d1 - a.d1) / (2.0 * e) - b.d2).abs() < 1e-4);
            }
        }
        let (bot, top) = (vertical(0.0), vertical(1.0));
        for i in 0..2 {
            assert!(bot.phi[i].abs() < 1e-15 && top.dphi[i].abs() < 1e-14);
            assert!(bot.cum[i].abs() < 1e-15 && top.cum[i].abs() < 1e-15);
        }
    }

    #[test]
    fn exact_state_is_compatible_data() {
        let g = Grid::new(16, 16, 64, 1.0).unwrap();
        let params = PhysParams::new(2.0, 1.0, 1.0).unwrap();
        let sol = ManufacturedSolution::new(Horizontal::Analytic, Temporal::Steady);
        let s = sol.exact(g, &params, 0.0).unwrap();
        let sp = Spectral::new(g);
        // Discretely solenoidal only up to the trapezoid error of the average.
        let div = |nz: usize| {
            let g = g.with_resolution(16, 16, nz).unwrap();
            averaged_divergence(&Spectral::new(g), &sol.exact(g, &params, 0.0).unwrap().v).max_abs()
        };
        let order = (div(32) / div(64)).log2();
        assert!((order - 2.0).abs() < 0.05, "{order}");
        let c = classify_initial_data(&sp, &params, &s.v, &s.tau, &s.sigma, 1e-2).unwrap();
        assert!(c.velocity.bottom_value < 1e-12 && c.velocity.surface_flux < 1e-2);
        assert_eq!(c.temperature.band, ScalarBand::DomainCompatible);
        assert_eq!(c.salinity.band, ScalarBand::DomainCompatible);
    }

    #[test]
    fn amplitudes_and_rates_are_consistent() {
        let sol = ManufacturedSolution::new(Horizontal::Trigonometric, Temporal::Oscillating);
        let e = 1e-6;
        for t in [0.0, 0.13, 0.4] {
            let (lo, hi, r) = (sol.amplitudes(t - e), sol.amplitudes(t + e), sol.rates(t));
            for i in 0..3 {
                assert!(((hi[i] - lo[i]) / (2.0 * e) - r[i]).abs() < 1e-6);
            }
        }
        let steady = ManufacturedSolution::new(Horizontal::Trigonometric, Temporal::Steady);
        assert_eq!(steady.rates(0.3), [0.0; 3]);
    }

    #[test]
    fn restriction_picks_nodes() {
        let g = Grid::new(16, 8, 4, 1.0).unwrap();
        let c = Grid::new(8, 4, 4, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x, y, z| x + 10.0 * y + 100.0 * z);
        let s = State::new(0.0, HVectorField::zeros(g), f.clone(), f).unwrap();
        let r = restrict(&s, c).unwrap();
        assert_eq!(r.tau, ScalarField::from_fn(c, |x, y, z| x + 10.0 * y + 100.0 * z));
        assert!(restrict(&s, Grid::new(6, 4, 4, 1.0).unwrap()).is_err());
    }
}
