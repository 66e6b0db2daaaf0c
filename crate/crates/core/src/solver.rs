//! Time evolution: the Picard iteration for mild solutions, the
//! exponential-Euler stepper, and the short-time existence estimate.
//!
//! Both integrators share one update: over a step of length `Δt` starting at
//! `t_j`, `u ← e^{ΔtA} u + φ1(ΔtA) [forcing(t_j) + N(u_j)]`, which is the
//! left-endpoint exponential quadrature of the Duhamel integral. The linear
//! part is exact.

use crate::diagnostics::{complete, instantaneous, DiagnosticsRecord, Neighbours};
use crate::error::{Error, Result};
use crate::field::{HVectorField, ScalarField, SurfaceScalarField};
use crate::forcing::{Forcing, PreparedForcing};
use crate::grid::{FieldKind, Grid};
use crate::model::{Model, SpecState};
use crate::spectral::SpectrumField;

/// Solution at one time. `v` is discretely solenoidal, `pi_s` has zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub v: HVectorField,
    pub tau: ScalarField,
    pub sigma: ScalarField,
    pub pi_s: SurfaceScalarField,
}

impl State {
    /// State with zero surface pressure; grids must agree.
    pub fn new(t: f64, v: HVectorField, tau: ScalarField, sigma: ScalarField) -> Result<Self> {
        v.v1.same_grid(&v.v2)?;
        v.v1.same_grid(&tau)?;
        tau.same_grid(&sigma)?;
        let pi_s = SurfaceScalarField::zeros(*tau.grid());
        Ok(Self { t, v, tau, sigma, pi_s })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            t: 0.0,
            v: HVectorField::zeros(grid),
            tau: ScalarField::zeros(grid),
            sigma: ScalarField::zeros(grid),
            pi_s: SurfaceScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.tau.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.tau.is_finite() && self.sigma.is_finite() && self.pi_s.is_finite()
    }
}

/// States at nodes `t_j = j Δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectories are nonempty")
    }
}

/// Terms of `T* = min{T*_v, T*_τ, (1/2C²)^{1/(1−γ)}}`, `γ = 1/2 + 1/2p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TstarEstimate {
    /// `32C³ (‖a‖ + C max‖f‖)^{−1/ε}`
    pub velocity: f64,
    /// `32C³ (‖b‖ + C max‖g‖)^{−1/ε}`
    pub temperature: f64,
    /// `(1/2C²)^{1/(1−γ)}`
    pub smallness: f64,
    /// `1/2C²` before the `1/(1−γ)` power; both branches are reported.
    pub smallness_unscaled: f64,
    pub value: f64,
}

/// Evaluates the existence-time formulas. `C > 1`, `ε ∈ (0, 1 − γ]`.
pub fn estimate_tstar(a_norm: f64, b_norm: f64, f_max: f64, g_max: f64, c: f64, eps: f64, p: f64) -> Result<TstarEstimate> {
    if !(c > 1.0) {
        return Err(Error::InvalidParameter(format!("C must exceed 1 (got {c})")));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1 (got {p})")));
    }
    let gamma = 0.5 + 0.5 / p;
    if !(eps > 0.0 && eps <= 1.0 - gamma) {
        return Err(Error::OutOfRange(format!("eps = {eps} outside (0, {}]", 1.0 - gamma)));
    }
    for (name, v) in [("a_norm", a_norm), ("b_norm", b_norm), ("f_max", f_max), ("g_max", g_max)] {
        if !(v >= 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be >= 0 (got {v})")));
        }
    }
    let lead = 32.0 * c.powi(3);
    let branch = |x: f64, y: f64| lead * (x + c * y).powf(-1.0 / eps);
    let velocity = branch(a_norm, f_max);
    let temperature = branch(b_norm, g_max);
    let smallness_unscaled = 1.0 / (2.0 * c * c);
    let smallness = smallness_unscaled.powf(1.0 / (1.0 - gamma));
    let value = velocity.min(temperature).min(smallness);
    Ok(TstarEstimate { velocity, temperature, smallness, smallness_unscaled, value })
}

/// Per-iteration sup-differences `sup_j ‖Δv‖_{H¹} + ‖Δζ‖_{H¹}` and their ratios.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PicardReport {
    pub differences: Vec<f64>,
    pub ratios: Vec<f64>,
    pub converged: bool,
}

impl PicardReport {
    pub fn iterations(&self) -> usize {
        self.differences.len()
    }
}

struct Stepper<'a> {
    model: &'a Model,
    forcing: PreparedForcing,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a Model, forcing: &Forcing) -> Result<Self> {
        Ok(Self { model, forcing: forcing.prepare(model.spectral())? })
    }

    fn advance(&self, s: &SpecState, rhs: &SpecState, dt: f64) -> SpecState {
        let m = self.model;
        let v = m.cache(FieldKind::Velocity).exp_euler_spectra(
            &[s.v1.clone(), s.v2.clone()],
            &[rhs.v1.clone(), rhs.v2.clone()],
            dt,
        );
        let tau = m.cache(FieldKind::Temperature).exp_euler_spectra(&[s.tau.clone()], &[rhs.tau.clone()], dt);
        let sigma = m.cache(FieldKind::Salinity).exp_euler_spectra(&[s.sigma.clone()], &[rhs.sigma.clone()], dt);
        let mut it = v.into_iter();
        SpecState {
            v1: it.next().expect("two components"),
            v2: it.next().expect("two components"),
            tau: tau.into_iter().next().expect("one component"),
            sigma: sigma.into_iter().next().expect("one component"),
        }
    }

    /// Forcing and coupling terms at a node.
    fn node(&self, s: SpecState, t: f64) -> Node {
        let forcing = self.forcing.eval(t);
        let coupling = self.model.tendencies(&s);
        Node { t, state: s, forcing, coupling }
    }

    fn pressure(&self, n: &Node) -> Vec<num_complex::Complex64> {
        self.model.pressure_potential(&n.state, &n.coupling, Some((&n.forcing.v1, &n.forcing.v2)))
    }

    fn step(&self, n: &Node, dt: f64) -> Result<Node> {
        let mut rhs = n.forcing.clone();
        rhs.axpy(1.0, &n.coupling);
        let next = self.advance(&n.state, &rhs, dt);
        let t = n.t + dt;
        if !next.is_finite() {
            return Err(Error::BlowUp { t });
        }
        Ok(self.node(next, t))
    }

    fn record(&self, n: &Node) -> DiagnosticsRecord {
        instantaneous(self.model, &n.state, &n.forcing, &self.pressure(n), n.t)
    }

    fn project(&self, s: &mut SpecState) {
        let v = self.model.cache(FieldKind::Velocity).apply_spectra(&[s.v1.clone(), s.v2.clone()], 0.0);
        let mut it = v.into_iter();
        s.v1 = it.next().expect("two components");
        s.v2 = it.next().expect("two components");
    }

    fn to_state(&self, n: &Node) -> State {
        let sp = self.model.spectral();
        let s = &n.state;
        State {
            t: n.t,
            v: s.velocity(sp),
            tau: sp.inverse(&s.tau),
            sigma: sp.inverse(&s.sigma),
            pi_s: self.model.surface_from_potential(&self.pressure(n)),
        }
    }
}

/// A time node with its right-hand-side ingredients.
struct Node {
    t: f64,
    state: SpecState,
    forcing: SpecState,
    coupling: SpecState,
}

fn spec_of(model: &Model, state: &State) -> Result<SpecState> {
    SpecState::from_fields(model.spectral(), &state.v, &state.tau, &state.sigma)
}

/// One exponential-Euler step. The new velocity is discretely solenoidal and
/// `π_s` is reconstructed at the new time.
pub fn imex_step(model: &Model, state: &State, forcing: &Forcing, dt: f64) -> Result<State> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTime("finite and > 0"));
    }
    let st = Stepper::new(model, forcing)?;
    let node = st.node(spec_of(model, state)?, state.t);
    Ok(st.to_state(&st.step(&node, dt)?))
}

/// Step count and nominal step for `[0, t_end]`; the last step may be short.
fn schedule(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTime("finite and > 0"));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidTime("finite and >= 0"));
    }
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..=n).map(|j| j as f64 * dt).collect();
    if let Some(last) = times.last_mut() {
        *last = t_end.min(*last).max(if n == 0 { 0.0 } else { t_end });
    }
    Ok(times)
}

/// Runs `[state.t, state.t + t_end]` with step `dt`, emitting a record every
/// `emit_every` steps and at the end.
pub fn run_simulation(
    model: &Model,
    initial: &State,
    forcing: &Forcing,
    t_end: f64,
    dt: f64,
    emit_every: usize,
) -> Result<(State, Vec<DiagnosticsRecord>)> {
    run_simulation_observed(model, initial, forcing, t_end, dt, emit_every, &mut |_, _| {})
}

/// [`run_simulation`] that also passes every emitted state to `observer`.
#[allow(clippy::too_many_arguments)]
pub fn run_simulation_observed(
    model: &Model,
    initial: &State,
    forcing: &Forcing,
    t_end: f64,
    dt: f64,
    emit_every: usize,
    observer: &mut dyn FnMut(&State, &DiagnosticsRecord),
) -> Result<(State, Vec<DiagnosticsRecord>)> {
    let offsets = schedule(t_end, dt)?;
    let emit_every = emit_every.max(1);
    let st = Stepper::new(model, forcing)?;
    let t0 = initial.t;
    let n = offsets.len() - 1;
    if n == 0 {
        let node = st.node(spec_of(model, initial)?, t0);
        let rec = st.record(&node);
        observer(initial, &rec);
        return Ok((initial.clone(), vec![rec]));
    }
    let emitted = |j: usize| j % emit_every == 0 || j == n;
    let needed = |j: usize| emitted(j) || (j > 0 && emitted(j - 1)) || (j < n && emitted(j + 1));
    let mut start = spec_of(model, initial)?;
    st.project(&mut start);
    let mut cur = st.node(start, t0);
    let mut cur_rec = needed(0).then(|| st.record(&cur));
    let mut prev: Option<(Node, Option<DiagnosticsRecord>)> = None;
    let mut records = Vec::new();
    for j in 0..=n {
        let next = if j < n {
            let mut node = st.step(&cur, offsets[j + 1] - offsets[j])?;
            node.t = t0 + offsets[j + 1];
            let rec = needed(j + 1).then(|| st.record(&node));
            Some((node, rec))
        } else {
            None
        };
        if emitted(j) {
            let mut out = cur_rec.expect("records exist at emitted nodes");
            let nb = |x: &Option<(Node, Option<DiagnosticsRecord>)>| {
                x.as_ref().and_then(|(node, r)| r.as_ref().map(|r| (node.state.clone(), *r)))
            };
            let (p, q) = (nb(&prev), nb(&next));
            complete(
                model,
                &cur.state,
                &mut out,
                Neighbours { prev: p.as_ref().map(|(s, r)| (s, r)), next: q.as_ref().map(|(s, r)| (s, r)) },
            );
            if !out.is_finite() {
                return Err(Error::BlowUp { t: cur.t });
            }
            observer(&st.to_state(&cur), &out);
            records.push(out);
        }
        match next {
            Some((node, rec)) => {
                let old = std::mem::replace(&mut cur, node);
                prev = Some((old, std::mem::replace(&mut cur_rec, rec)));
            }
            None => return Ok((st.to_state(&cur), records)),
        }
    }
    unreachable!("loop returns at the last node")
}

fn h1_distance(model: &Model, a: &SpecState, b: &SpecState) -> f64 {
    let d = |x: &SpectrumField, y: &SpectrumField, kind: FieldKind| {
        let mut z = x.clone();
        z.axpy(-1.0, y);
        model.h1_norm(kind, &z)
    };
    let dv = d(&a.v1, &b.v1, FieldKind::Velocity).hypot(d(&a.v2, &b.v2, FieldKind::Velocity));
    let dz = d(&a.tau, &b.tau, FieldKind::Temperature).hypot(d(&a.sigma, &b.sigma, FieldKind::Salinity));
    dv + dz
}

/// Picard iteration for the mild formulation on `[0, t_final]` with
/// `intervals` equal subintervals.
///
/// Iterate 0 is the linear solution with forcing; iterate `m + 1` adds the
/// Duhamel integral of the coupling terms of iterate `m`. Stops when the
/// sup-difference in the discrete `H¹` norm drops to `tol`; three
/// consecutive ratios `≥ 1` abort with [`Error::NotContracting`].
#[allow(clippy::too_many_arguments)]
pub fn picard_solve(
    model: &Model,
    a: &HVectorField,
    b_tau: &ScalarField,
    b_sigma: &ScalarField,
    forcing: &Forcing,
    t_final: f64,
    intervals: usize,
    max_iter: usize,
    tol: f64,
) -> Result<(Trajectory, PicardReport)> {
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidTime("finite and > 0"));
    }
    if intervals < 2 {
        return Err(Error::InvalidParameter("need at least 2 subintervals".into()));
    }
    let st = Stepper::new(model, forcing)?;
    let dt = t_final / intervals as f64;
    let times: Vec<f64> = (0..=intervals).map(|j| j as f64 * dt).collect();
    let forcing_at: Vec<SpecState> = times.iter().map(|&t| st.forcing.eval(t)).collect();
    let mut start = SpecState::from_fields(model.spectral(), a, b_tau, b_sigma)?;
    st.project(&mut start);

    let sweep = |coupling: Option<&[SpecState]>| -> Result<Vec<SpecState>> {
        let mut out = Vec::with_capacity(times.len());
        out.push(start.clone());
        for j in 0..intervals {
            let mut rhs = forcing_at[j].clone();
            if let Some(n) = coupling {
                rhs.axpy(1.0, &n[j]);
            }
            let next = st.advance(&out[j], &rhs, dt);
            if !next.is_finite() {
                return Err(Error::BlowUp { t: times[j + 1] });
            }
            out.push(next);
        }
        Ok(out)
    };

    let mut iterate = sweep(None)?;
    let mut report = PicardReport::default();
    let mut streak = 0;
    for _ in 0..max_iter.max(1) {
        let coupling: Vec<SpecState> = iterate[..intervals].iter().map(|s| model.tendencies(s)).collect();
        let next = sweep(Some(&coupling))?;
        let diff = iterate.iter().zip(&next).map(|(x, y)| h1_distance(model, x, y)).fold(0.0, f64::max);
        if let Some(&last) = report.differences.last() {
            let ratio = if last > 0.0 { diff / last } else { 0.0 };
            report.ratios.push(ratio);
            streak = if ratio >= 1.0 { streak + 1 } else { 0 };
        }
        report.differences.push(diff);
        iterate = next;
        if diff <= tol {
            report.converged = true;
            break;
        }
        if streak >= 3 {
            return Err(Error::NotContracting(report.ratios.clone()));
        }
    }

    let states = iterate
        .iter()
        .zip(&times)
        .map(|(s, &t)| st.to_state(&st.node(s.clone(), t)))
        .collect();
    Ok((Trajectory { states }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PhysParams;
    use crate::profiles::{random_smooth_velocity, SmoothSpec};

    fn model() -> Model {
        Model::new(Grid::new(8, 8, 8, 1.0).unwrap(), PhysParams::default()).unwrap()
    }

    #[test]
    fn tstar_example() {
        let e = estimate_tstar(1.0, 1.0, 0.0, 0.0, 2.0, 0.25, 2.0).unwrap();
        assert!((e.velocity - 256.0).abs() < 1e-12);
        assert!((e.smallness - 0.125f64.powi(4)).abs() < 1e-18);
        assert!((e.value - 2.4414e-4).abs() < 1e-8);
        assert!((e.smallness_unscaled - 0.125).abs() < 1e-15);
        assert!(estimate_tstar(1.0, 1.0, 0.0, 0.0, 2.0, 0.3, 2.0).is_err());
        assert!(estimate_tstar(1.0, 1.0, 0.0, 0.0, 1.0, 0.25, 2.0).is_err());
    }

    #[test]
    fn tstar_monotone() {
        let mut prev = f64::INFINITY;
        for a in [1.0, 10.0, 1e3, 1e6, 1e9] {
            let v = estimate_tstar(a, 0.0, 0.0, 0.0, 2.0, 0.25, 2.0).unwrap().value;
            assert!(v <= prev);
            prev = v;
        }
        let s2 = estimate_tstar(0.0, 0.0, 0.0, 0.0, 2.0, 0.25, 2.0).unwrap().smallness;
        let s4 = estimate_tstar(0.0, 0.0, 0.0, 0.0, 4.0, 0.25, 2.0).unwrap().smallness;
        assert!(s4 <= s2);
    }

    #[test]
    fn zero_data_stays_zero() {
        let m = model();
        let g = *m.grid();
        let z = State::zeros(g);
        let s = imex_step(&m, &z, &Forcing::none(), 1e-3).unwrap();
        assert!(s.v.max_abs() == 0.0 && s.tau.max_abs() == 0.0);
        let (traj, rep) = picard_solve(
            &m,
            &z.v,
            &z.tau,
            &z.sigma,
            &Forcing::none(),
            0.01,
            4,
            10,
            1e-14,
        )
        .unwrap();
        assert_eq!(rep.iterations(), 1);
        assert!(rep.converged);
        assert!(traj.states.iter().all(|s| s.v.max_abs() == 0.0));
    }

    #[test]
    fn linear_eigenmode_decays_exactly() {
        let m = model().with_nonlinear(false);
        let g = *m.grid();
        let (v, lam) = m.cache(FieldKind::Velocity).velocity_eigenmode(1, 0, 0).unwrap();
        let init = State::new(0.0, v.clone(), ScalarField::zeros(g), ScalarField::zeros(g)).unwrap();
        let (fin, recs) = run_simulation(&m, &init, &Forcing::none(), 0.05, 0.01, 1).unwrap();
        assert_eq!(recs.len(), 6);
        assert!(fin.v.sub(&v.scaled((-lam * 0.05).exp())).max_abs() < 1e-12);
        let (traj, _) = picard_solve(&m, &v, &init.tau, &init.sigma, &Forcing::none(), 0.05, 5, 5, 1e-14).unwrap();
        for s in &traj.states {
            assert!(s.v.sub(&v.scaled((-lam * s.t).exp())).max_abs() < 1e-12);
        }
    }

    #[test]
    fn zero_horizon_returns_initial() {
        let m = model();
        let g = *m.grid();
        let v = random_smooth_velocity(g, 1, 0.1, SmoothSpec::default());
        let init = State::new(0.0, v, ScalarField::constant(g, 1.0), ScalarField::zeros(g)).unwrap();
        let (fin, recs) = run_simulation(&m, &init, &Forcing::none(), 0.0, 1e-3, 1).unwrap();
        assert_eq!(fin, init);
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn schedule_ends_at_horizon() {
        let t = schedule(0.1, 0.03).unwrap();
        assert_eq!(t.len(), 5);
        assert!((t[4] - 0.1).abs() < 1e-15);
        assert_eq!(schedule(0.0, 0.1).unwrap(), vec![0.0]);
        let t = schedule(1.0, 0.1).unwrap();
        assert_eq!(t.len(), 11);
    }
}
