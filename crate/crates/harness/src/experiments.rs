//! Multi-run experiments behind the `picard` and `decay` commands and the
//! growth-bound ensemble.

use primeq::forcing::{Envelope, Forcing, ForcingTerm};
use primeq::norms::{lp_norm, sobolev_norm};
use primeq::profiles::{random_smooth_salinity, random_smooth_temperature, random_smooth_velocity, SmoothSpec};
use primeq::solver::{estimate_tstar, picard_solve, run_simulation, run_simulation_observed, PicardReport, State, TstarEstimate};
use primeq::{DiagnosticsRecord, FieldKind, Grid, HVectorField, Model, PhysParams, ScalarField, Spectral};

use crate::analysis::{fit_decay_rate, observed_orders, verify_gronwall_bounds, GronwallReport};
use crate::config::{non_resonant_forcing, RunConfig};
use crate::error::{HarnessError, Result};

/// Exponent `p` of the base space in the existence-time formulas.
pub const TSTAR_P: f64 = 2.0;

/// `sup_j (‖Δv‖_{H¹} + ‖Δτ‖_{H¹} + ‖Δσ‖_{H¹})` over paired states.
pub fn sup_h1_distance(sp: &Spectral, a: &[State], b: &[State]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = sobolev_norm(sp, &x.v.sub(&y.v), 1)?
            + sobolev_norm(sp, &x.tau.sub(&y.tau), 1)?
            + sobolev_norm(sp, &x.sigma.sub(&y.sigma), 1)?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Largest `L²` norm of each forcing component over `n + 1` equispaced
/// times on `[0, t]`.
pub fn forcing_maxima(grid: Grid, forcing: &Forcing, t: f64, n: usize) -> Result<(f64, f64)> {
    let (mut fm, mut gm): (f64, f64) = (0.0, 0.0);
    for j in 0..=n {
        let (f, gt, gs) = forcing.eval(grid, t * j as f64 / n as f64);
        fm = fm.max(lp_norm(&f, 2.0)?);
        gm = gm.max(lp_norm(&gt, 2.0)?.hypot(lp_norm(&gs, 2.0)?));
    }
    Ok((fm, gm))
}

/// Data and settings of a short-horizon fixed-point run.
#[derive(Debug, Clone)]
pub struct PicardSetup {
    pub initial: State,
    pub forcing: Forcing,
    pub c: f64,
    pub eps: f64,
    /// Upper limit on the horizon.
    pub t_cap: f64,
    pub intervals: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Subinterval counts of the time-step study; empty to skip it.
    pub halving: Vec<usize>,
    /// Steps of the fine IMEX reference.
    pub reference_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardExperiment {
    pub a_h1: f64,
    pub b_h1: f64,
    pub tstar: TstarEstimate,
    pub horizon: f64,
    pub report: PicardReport,
    /// Sup-distance between the fixed point and IMEX with the same nodes.
    pub imex_agreement: f64,
    /// `(M, sup_j distance to the fine reference)` for each `M` in `halving`.
    pub errors: Vec<(usize, f64)>,
    pub orders: Vec<f64>,
}

impl PicardExperiment {
    /// Ratios after the first `min(3, n)` are the "final" ones.
    pub fn final_ratios(&self) -> &[f64] {
        let r = &self.report.ratios;
        &r[r.len().saturating_sub(3)..]
    }
}

/// IMEX states at every node of `[0, t]` with `steps` equal steps.
fn imex_nodes(model: &Model, initial: &State, forcing: &Forcing, t: f64, steps: usize) -> Result<Vec<State>> {
    let mut out = Vec::with_capacity(steps + 1);
    run_simulation_observed(model, initial, forcing, t, t / steps as f64, 1, &mut |s, _| out.push(s.clone()))?;
    Ok(out)
}

pub fn picard_experiment(model: &Model, setup: &PicardSetup) -> Result<PicardExperiment> {
    let sp = model.spectral();
    let s0 = &setup.initial;
    let a_h1 = sobolev_norm(sp, &s0.v, 1)?;
    let b_h1 = sobolev_norm(sp, &s0.tau, 1)?.hypot(sobolev_norm(sp, &s0.sigma, 1)?);
    let gamma = 0.5 + 0.5 / TSTAR_P;
    let order = 2.0 * (gamma + setup.eps);
    let a_norm = model.cache(FieldKind::Velocity).fractional_h_norm(&s0.v, order)?;
    let b_norm = model
        .cache(FieldKind::Temperature)
        .fractional_h_norm(&s0.tau, order)?
        .hypot(model.cache(FieldKind::Salinity).fractional_h_norm(&s0.sigma, order)?);
    let (f_max, g_max) = forcing_maxima(*model.grid(), &setup.forcing, setup.t_cap, 16)?;
    let tstar = estimate_tstar(a_norm, b_norm, f_max, g_max, setup.c, setup.eps, TSTAR_P)?;
    let horizon = tstar.value.min(setup.t_cap);

    let solve = |m: usize| {
        picard_solve(model, &s0.v, &s0.tau, &s0.sigma, &setup.forcing, horizon, m, setup.max_iter, setup.tol)
    };
    let (traj, report) = solve(setup.intervals)?;
    let imex = imex_nodes(model, s0, &setup.forcing, horizon, setup.intervals)?;
    let imex_agreement = sup_h1_distance(sp, &traj.states, &imex)?;

    let mut errors = Vec::new();
    if !setup.halving.is_empty() {
        let reference = imex_nodes(model, s0, &setup.forcing, horizon, setup.reference_steps)?;
        for &m in &setup.halving {
            if setup.reference_steps % m != 0 {
                return Err(HarnessError::Config(format!(
                    "reference steps {} not a multiple of {m}",
                    setup.reference_steps
                )));
            }
            let stride = setup.reference_steps / m;
            let (coarse, _) = solve(m)?;
            let matched: Vec<State> = (0..=m).map(|j| reference[j * stride].clone()).collect();
            errors.push((m, sup_h1_distance(sp, &coarse.states, &matched)?));
        }
    }
    let orders = observed_orders(&errors.iter().map(|e| e.1).collect::<Vec<_>>());
    Ok(PicardExperiment { a_h1, b_h1, tstar, horizon, report, imex_agreement, errors, orders })
}

/// Rescales velocity and scalars so each has the given discrete `H¹` norm.
pub fn scale_to_h1(sp: &Spectral, state: &State, v_target: f64, zeta_target: f64) -> Result<State> {
    let vn = sobolev_norm(sp, &state.v, 1)?;
    let zn = sobolev_norm(sp, &state.tau, 1)?.hypot(sobolev_norm(sp, &state.sigma, 1)?);
    let sv = if vn > 0.0 { v_target / vn } else { 0.0 };
    let sz = if zn > 0.0 { zeta_target / zn } else { 0.0 };
    Ok(State::new(state.t, state.v.scaled(sv), state.tau.scaled(sz), state.sigma.scaled(sz))?)
}

/// One fitted rate and the threshold it is compared with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub rate: f64,
    pub required: f64,
    pub window: (f64, f64),
}

impl RateFit {
    pub fn passed(&self) -> bool {
        self.rate >= self.required
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub beta_v: f64,
    pub beta_tau: f64,
    pub beta_f: f64,
    pub beta_g: f64,
    /// `β_f ≥ β_v` and `β_g ≥ β_τ`.
    pub hypothesis_met: bool,
    /// `‖∂_t v‖ + ‖Δv‖`
    pub velocity: RateFit,
    /// `‖∂_t τ‖ + ‖Δτ‖`
    pub temperature: RateFit,
    /// `‖∇_H π_s‖`
    pub pressure: RateFit,
    pub records: Vec<DiagnosticsRecord>,
}

impl DecayReport {
    pub fn rates_passed(&self) -> bool {
        self.velocity.passed() && self.temperature.passed() && self.pressure.passed()
    }
}

/// Forced decay from the configured velocity and temperature with `σ ≡ 0`
/// and `g_σ = 0`. Runs to `5/min(β_v, β_τ)` and fits each series on
/// `[2/β, 5/β]` of its own rate.
pub fn decay_experiment(cfg: &RunConfig) -> Result<DecayReport> {
    let model = cfg.model()?;
    let g = *model.grid();
    let s = cfg.initial_state(&model)?;
    let initial = State::new(0.0, s.v, s.tau, ScalarField::zeros(g))?;
    let beta_v = model.cache(FieldKind::Velocity).decay_rate();
    let beta_tau = model.cache(FieldKind::Temperature).decay_rate();
    let (beta_f, beta_g) = cfg.forcing_rates(&model);
    let forcing = non_resonant_forcing(&model, cfg.forcing.amplitude, beta_f, beta_g)?;
    let slow = beta_v.min(beta_tau);
    let t_end = 5.0 / slow;
    let dt = cfg.time.dt;
    // about 100 samples over the slowest window
    let emit = ((3.0 / slow / 100.0 / dt).floor() as usize).max(1);
    let (_, records) = run_simulation(&model, &initial, &forcing, t_end, dt, emit)?;
    let fit = |series: Vec<(f64, f64)>, beta: f64| -> Result<RateFit> {
        let window = (2.0 / beta, 5.0 / beta);
        Ok(RateFit { rate: fit_decay_rate(&series, window)?, required: crate::tolerances::DECAY_RATE_FRACTION * beta, window })
    };
    let velocity = fit(records.iter().map(|r| (r.t, r.dtv_norm + r.lapv_norm)).collect(), beta_v)?;
    let temperature = fit(records.iter().map(|r| (r.t, r.dttau_norm + r.laptau_norm)).collect(), beta_tau)?;
    let pressure = fit(records.iter().map(|r| (r.t, r.gradpi_norm)).collect(), slow)?;
    Ok(DecayReport {
        beta_v,
        beta_tau,
        beta_f,
        beta_g,
        hypothesis_met: beta_f >= beta_v && beta_g >= beta_tau,
        velocity,
        temperature,
        pressure,
        records,
    })
}

/// Settings of the growth-bound ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub runs: usize,
    pub t_end: f64,
    pub dt: f64,
    pub amplitude: f64,
    pub forcing_amplitude: f64,
    pub forcing_rate: f64,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self { runs: 20, t_end: 5.0, dt: 1e-2, amplitude: 0.1, forcing_amplitude: 0.1, forcing_rate: 1.0, seed: 100 }
    }
}

/// Random smooth data and forcing for run `k` of an ensemble.
pub fn ensemble_member(grid: Grid, params: &PhysParams, spec: &EnsembleSpec, k: usize) -> Result<(State, Forcing)> {
    let sm = SmoothSpec::default();
    let seed = spec.seed.wrapping_add(10 * k as u64);
    let (a, fa) = (spec.amplitude, spec.forcing_amplitude);
    let v: HVectorField = random_smooth_velocity(grid, seed, a, sm);
    let tau = random_smooth_temperature(grid, params, seed + 1, a, sm)?;
    let sigma = random_smooth_salinity(grid, seed + 2, a, sm);
    let forcing = Forcing::none()
        .with_term(
            ForcingTerm::new(Envelope::Exponential { rate: spec.forcing_rate })
                .velocity(random_smooth_velocity(grid, seed + 3, fa, sm))
                .temperature(random_smooth_temperature(grid, params, seed + 4, fa, sm)?)
                .salinity(random_smooth_salinity(grid, seed + 5, fa, sm)),
        );
    Ok((State::new(0.0, v, tau, sigma)?, forcing))
}

/// Runs every ensemble member and checks the growth bounds at every step.
pub fn gronwall_ensemble(model: &Model, spec: &EnsembleSpec) -> Result<Vec<GronwallReport>> {
    (0..spec.runs)
        .map(|k| {
            let (initial, forcing) = ensemble_member(*model.grid(), model.params(), spec, k)?;
            let (_, records) = run_simulation(model, &initial, &forcing, spec.t_end, spec.dt, 1)?;
            verify_gronwall_bounds(model, &forcing, &records)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unforced_zero_data_meets_bounds_trivially() {
        let g = Grid::new(8, 8, 4, 1.0).unwrap();
        let model = Model::new(g, PhysParams::default()).unwrap();
        let spec = EnsembleSpec { runs: 1, t_end: 0.1, amplitude: 0.0, forcing_amplitude: 0.0, ..Default::default() };
        let r = gronwall_ensemble(&model, &spec).unwrap();
        assert!(r[0].passed());
        assert!(r[0].nodes.iter().all(|n| n.zeta_energy == 0.0));
    }

    #[test]
    fn small_data_picard_contracts() {
        let g = Grid::new(8, 8, 4, 1.0).unwrap();
        let model = Model::new(g, PhysParams::default()).unwrap();
        let (s, _) = ensemble_member(g, model.params(), &EnsembleSpec::default(), 0).unwrap();
        let initial = scale_to_h1(model.spectral(), &s, 5e-3, 5e-3).unwrap();
        let setup = PicardSetup {
            initial,
            forcing: Forcing::none(),
            c: 2.0,
            eps: 0.25,
            t_cap: 0.01,
            intervals: 4,
            max_iter: 30,
            tol: 1e-15,
            halving: vec![],
            reference_steps: 0,
        };
        let e = picard_experiment(&model, &setup).unwrap();
        assert!((e.a_h1 - 5e-3).abs() < 1e-15 && (e.b_h1 - 5e-3).abs() < 1e-15);
        assert!((e.horizon - 0.125f64.powi(4)).abs() < 1e-15);
        assert!(e.report.converged);
        assert!(e.report.ratios.iter().all(|r| *r < 1.0));
        assert!(e.imex_agreement < 1e-13);
    }
}
