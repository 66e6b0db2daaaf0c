//! The ten acceptance criteria as runnable suites.
//!
//! Each suite returns a [`CriterionOutcome`] holding every individual check
//! with its measured value and threshold; the criterion passes when all of
//! its checks do.

use std::f64::consts::PI;
use std::fmt;

use primeq::forcing::Forcing;
use primeq::hydrostatic::{averaged_divergence, classify_initial_data, helmholtz_project, ScalarBand, VelocityBand};
use primeq::nonlinear::transport_pairings;
use primeq::norms::lp_norm;
use primeq::profiles::{random_smooth_salinity, random_smooth_temperature, random_smooth_velocity, white_noise, SmoothSpec};
use primeq::solver::{run_simulation, State};
use primeq::{FieldKind, Grid, HVectorField, Model, ScalarField, SemigroupCache, Spectral, SurfaceScalarField};

use crate::analysis::{observed_orders, verify_energy_identity};
use crate::config::RunConfig;
use crate::error::Result;
use crate::experiments::{
    decay_experiment, ensemble_member, gronwall_ensemble, picard_experiment, scale_to_h1, EnsembleSpec, PicardSetup,
};
use crate::manufactured::{convergence_study, ConvergenceReport, Horizontal, ManufacturedSolution, StudySpec, Temporal};
use crate::tolerances as tol;

/// How a measured value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    Below(f64),
    AtLeast(f64),
    Above(f64),
    Within { target: f64, tol: f64 },
    Equals(f64),
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(b) => v <= b,
            Bound::Below(b) => v < b,
            Bound::AtLeast(b) => v >= b,
            Bound::Above(b) => v > b,
            Bound::Within { target, tol } => (v - target).abs() <= tol,
            Bound::Equals(b) => v == b,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(b) => write!(f, "<= {b:.3e}"),
            Bound::Below(b) => write!(f, "< {b:.3e}"),
            Bound::AtLeast(b) => write!(f, ">= {b:.3e}"),
            Bound::Above(b) => write!(f, "> {b:.3e}"),
            Bound::Within { target, tol } => write!(f, "in {target} +- {tol}"),
            Bound::Equals(b) => write!(f, "== {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn new(label: impl Into<String>, value: f64, bound: Bound) -> Self {
        Self { label: label.into(), value, bound }
    }

    pub fn passed(&self) -> bool {
        self.bound.admits(self.value)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed() { "" } else { " !" };
        write!(f, "{} {:.4e} {}{mark}", self.label, self.value, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    /// Checks whose value falls outside the bound.
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for CriterionOutcome {
    /// One line: verdict, id, title, then every check.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {:>2} {:<24}", self.id, self.title)?;
        for (n, c) in self.checks.iter().enumerate() {
            write!(f, "{}{c}", if n == 0 { " " } else { "; " })?;
        }
        Ok(())
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "projection"),
    (2, "operator spectra"),
    (3, "semigroup laws"),
    (4, "nonlinear cancellation"),
    (5, "energy identity"),
    (6, "growth bounds"),
    (7, "fixed-point iteration"),
    (8, "forced decay"),
    (9, "convergence"),
    (10, "initial-data classifier"),
];

fn title(id: u8) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown")
}

fn outcome(id: u8, checks: Vec<Check>) -> CriterionOutcome {
    CriterionOutcome { id, title: title(id), checks }
}

/// Runs one criterion against the grid and physics of `cfg`.
pub fn run_criterion(id: u8, cfg: &RunConfig) -> Result<CriterionOutcome> {
    match id {
        1 => projection(cfg),
        2 => operator_spectra(cfg),
        3 => semigroup_laws(cfg),
        4 => nonlinear_cancellation(cfg),
        5 => energy_identity(cfg),
        6 => growth_bounds(cfg),
        7 => fixed_point(cfg),
        8 => forced_decay(cfg),
        9 => convergence(cfg),
        10 => classifier(cfg),
        _ => Err(crate::HarnessError::Config(format!("no criterion {id}; valid ids are 1 to 10"))),
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Criterion 1: `P` is idempotent, lands in the hydrostatically solenoidal
/// fields and annihilates z-independent gradients.
pub fn projection(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let g = cfg.grid()?;
    let sp = Spectral::new(g);
    let (mut idem, mut div, mut grad) = (0.0f64, 0.0f64, 0.0f64);
    for n in 0..tol::PROJECTION_SAMPLES as u64 {
        let v = HVectorField { v1: white_noise(g, 2 * n, 1.0), v2: white_noise(g, 2 * n + 1, 1.0) };
        let vn = lp_norm(&v, 2.0)?;
        let p = helmholtz_project(&sp, &v)?.projected;
        let pp = helmholtz_project(&sp, &p)?.projected;
        idem = idem.max(lp_norm(&pp.sub(&p), 2.0)? / vn);
        div = div.max(averaged_divergence(&sp, &p).l2() * g.h.sqrt() / vn);

        let mut q = white_noise(g, 1000 + n, 1.0).level(0);
        let mean = q.mean();
        q.data.iter_mut().for_each(|x| *x -= mean);
        let (gx, gy) = sp.surface_gradient(&q);
        let gv = HVectorField { v1: ScalarField::from_surface(&gx), v2: ScalarField::from_surface(&gy) };
        let gn = lp_norm(&gv, 2.0)?;
        grad = grad.max(lp_norm(&helmholtz_project(&sp, &gv)?.projected, 2.0)? / gn);
    }
    Ok(outcome(
        1,
        vec![
            Check::new("idempotence", idem, Bound::AtMost(tol::PROJECTION_IDEMPOTENCE)),
            Check::new("divergence", div, Bound::AtMost(tol::PROJECTION_DIVERGENCE)),
            Check::new("gradients", grad, Bound::AtMost(tol::PROJECTION_GRADIENT)),
        ],
    ))
}

/// Smallest positive root of `μ tan(μh) = α` by bisection on `(0, π/2h)`.
pub fn robin_root_bisection(alpha: f64, h: f64) -> f64 {
    let f = |m: f64| m * (m * h).tan() - alpha;
    let (mut lo, mut hi) = (0.0, PI / (2.0 * h) * (1.0 - 1e-15));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Criterion 2: slowest decay rates of the three operators against their
/// closed forms, and conservation of the salinity mean under the full
/// dynamics.
pub fn operator_spectra(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let g = cfg.grid()?;
    let params = cfg.params()?;
    let fine = g.with_resolution(8, 8, tol::SPECTRUM_NZ)?;
    let rate = |kind| SemigroupCache::new(fine, kind, &params).map(|c| c.decay_rate());
    let v_exact = PI * PI / (4.0 * g.h * g.h);
    let mu = robin_root_bisection(params.alpha, g.h);
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    let mut checks = vec![
        Check::new("velocity rate rel", rel(rate(FieldKind::Velocity)?, v_exact), Bound::AtMost(tol::DECAY_RATE_RELATIVE)),
        Check::new("temperature rate rel", rel(rate(FieldKind::Temperature)?, mu * mu), Bound::AtMost(tol::DECAY_RATE_RELATIVE)),
        Check::new("salinity rate", rate(FieldKind::Salinity)?.abs(), Bound::AtMost(tol::SALINITY_RATE)),
    ];

    let model = cfg.model()?.with_nonlinear(true);
    let sm = SmoothSpec::default();
    let a = cfg.initial.amplitude;
    let seed = cfg.initial.seed;
    let initial = State::new(
        0.0,
        random_smooth_velocity(g, seed, a, sm),
        random_smooth_temperature(g, &params, seed + 1, a, sm)?,
        random_smooth_salinity(g, seed + 2, a, sm),
    )?;
    let dt = cfg.time.dt;
    let steps = tol::MEAN_DRIFT_STEPS;
    let (_, records) = run_simulation(&model, &initial, &Forcing::none(), steps as f64 * dt, dt, steps / 10)?;
    let m0 = records[0].mean_sigma;
    checks.push(Check::new("mean(sigma) drift", max_of(records.iter().map(|r| (r.mean_sigma - m0).abs())), Bound::AtMost(tol::MEAN_DRIFT)));
    Ok(outcome(2, checks))
}

/// Least-squares slope of `ln y` against `ln t`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, y) in points {
        num += (t.ln() - mx) * (y.ln() - my);
        den += (t.ln() - mx).powi(2);
    }
    num / den
}

/// Criterion 3: composition, `L²` contraction and the `t^{−1/2}` gradient
/// smoothing on rough data, for all three operators.
pub fn semigroup_laws(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let model = cfg.model()?;
    let g = *model.grid();
    let (t0, t1) = tol::SMOOTHING_WINDOW;
    let times: Vec<f64> = (0..=20).map(|i| t0 * (t1 / t0).powf(i as f64 / 20.0)).collect();
    let pairs = [(1e-5, 2e-5), (0.013, 0.021), (1e-4, 0.2), (0.5, 0.25)];
    let mut checks = Vec::new();
    for kind in FieldKind::ALL {
        let c = model.cache(kind);
        let (mut comp, mut growth, slope) = (0.0f64, 0.0f64, 0.0f64);
        let slope = if kind == FieldKind::Velocity {
            let f = HVectorField { v1: white_noise(g, 11, 1.0), v2: white_noise(g, 12, 1.0) };
            let f = c.apply(&f, 0.0)?;
            for &(s, t) in &pairs {
                let a = c.apply(&c.apply(&f, s)?, t)?;
                let b = c.apply(&f, s + t)?;
                comp = comp.max(a.sub(&b).max_abs() / f.max_abs());
                growth = growth.max(lp_norm(&b, 2.0)? / lp_norm(&f, 2.0)?);
            }
            let r: HVectorField = c.rough_field(13)?;
            let pts: Result<Vec<_>> = times.iter().map(|&t| Ok((t, c.dissipation_after(&r, t)?))).collect();
            slope + log_log_slope(&pts?)
        } else {
            let f = white_noise(g, 21, 1.0);
            for &(s, t) in &pairs {
                let a = c.apply(&c.apply(&f, s)?, t)?;
                let b = c.apply(&f, s + t)?;
                comp = comp.max(a.sub(&b).max_abs() / f.max_abs());
                growth = growth.max(lp_norm(&b, 2.0)? / lp_norm(&f, 2.0)?);
            }
            let r: ScalarField = c.rough_field(23)?;
            let pts: Result<Vec<_>> = times.iter().map(|&t| Ok((t, c.dissipation_after(&r, t)?))).collect();
            slope + log_log_slope(&pts?)
        };
        let name = kind.name();
        checks.push(Check::new(format!("{name} composition"), comp, Bound::AtMost(tol::COMPOSITION)));
        checks.push(Check::new(format!("{name} L2 gain"), growth, Bound::AtMost(1.0)));
        checks.push(Check::new(
            format!("{name} smoothing slope"),
            slope,
            Bound::Within { target: tol::SMOOTHING_SLOPE, tol: tol::SMOOTHING_SLOPE_TOL },
        ));
    }
    Ok(outcome(3, checks))
}

/// Relative transport pairings of the same smooth fields on each grid of the
/// ladder: `(velocity, temperature, salinity)`.
pub fn pairing_ladder(h: f64, params: &primeq::PhysParams) -> Result<Vec<(Grid, [f64; 3])>> {
    let sm = SmoothSpec::default();
    tol::PAIRING_GRIDS
        .iter()
        .map(|&(n, nz)| {
            let g = Grid::new(n, n, nz, h)?;
            let model = Model::new(g, *params)?;
            let v = random_smooth_velocity(g, 31, 1.0, sm);
            let tau = random_smooth_temperature(g, params, 32, 1.0, sm)?;
            let sigma = random_smooth_salinity(g, 33, 1.0, sm);
            let (pv, pt) = transport_pairings(&model, &v, &tau)?;
            let (_, ps) = transport_pairings(&model, &v, &sigma)?;
            Ok((g, [pv, pt, ps]))
        })
        .collect()
}

/// Criterion 4: the discrete pairings `⟨(v·∇)u, u⟩`, zero in the continuum,
/// shrink at least linearly under refinement.
pub fn nonlinear_cancellation(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let ladder = pairing_ladder(cfg.grid.h, &cfg.params()?)?;
    let mut checks = Vec::new();
    for (c, name) in ["velocity", "temperature", "salinity"].iter().enumerate() {
        let series: Vec<f64> = ladder.iter().map(|l| l.1[c]).collect();
        for (i, o) in observed_orders(&series).iter().enumerate() {
            checks.push(Check::new(
                format!("{name} order {}->{}", ladder[i].0.nx, ladder[i + 1].0.nx),
                *o,
                Bound::AtLeast(tol::PAIRING_ORDER),
            ));
        }
        checks.push(Check::new(format!("{name} at 64x32"), *series.last().unwrap_or(&f64::NAN), Bound::AtMost(tol::PAIRING_FINEST)));
    }
    Ok(outcome(4, checks))
}

/// Relative energy-identity residual at `t = sample` for each step size, on
/// the linear manufactured case started from its exact state.
pub fn energy_residuals(grid: Grid, params: &primeq::PhysParams, steps: &[f64], sample: f64) -> Result<Vec<f64>> {
    let sol = ManufacturedSolution::new(Horizontal::Trigonometric, Temporal::Steady).linear();
    let model = Model::new(grid, *params)?.with_nonlinear(false);
    let forcing = sol.forcing(grid, params);
    let initial = sol.exact(grid, params, 0.0)?;
    steps
        .iter()
        .map(|&dt| {
            let (_, records) = run_simulation(&model, &initial, &forcing, 2.0 * sample, dt, 1)?;
            let at = records
                .iter()
                .position(|r| (r.t - sample).abs() < 1e-9 * sample)
                .ok_or(crate::HarnessError::InsufficientData { needed: 1, got: 0 })?;
            let report = verify_energy_identity(&records[at - 1..=at + 1])?;
            Ok(report.max_relative_residual)
        })
        .collect()
}

/// Criterion 5: second-order consistency of the discrete energy identity, and
/// orthogonality of the surface-pressure gradient to the barotropic velocity
/// at every step of a nonlinear run.
pub fn energy_identity(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let g = cfg.grid()?;
    let params = cfg.params()?;
    let steps = [0.01, 0.005, 0.0025];
    let residuals = energy_residuals(g, &params, &steps, 0.1)?;
    let mut checks: Vec<Check> = observed_orders(&residuals)
        .iter()
        .zip(&steps)
        .map(|(o, dt)| {
            Check::new(
                format!("residual order dt={dt}"),
                *o,
                Bound::Within { target: tol::ENERGY_ORDER, tol: tol::ENERGY_ORDER_TOL },
            )
        })
        .collect();

    let model = cfg.model()?.with_nonlinear(true);
    let spec = EnsembleSpec::default();
    let (initial, forcing) = ensemble_member(g, &params, &spec, 0)?;
    let (_, records) = run_simulation(&model, &initial, &forcing, 200.0 * cfg.time.dt, cfg.time.dt, 1)?;
    let report = verify_energy_identity(&records)?;
    checks.push(Check::new("pressure pairing", report.max_pressure_pairing, Bound::AtMost(tol::PRESSURE_PAIRING)));
    Ok(outcome(5, checks))
}

/// Criterion 6: measured energies never exceed the a priori envelopes.
pub fn growth_bounds(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let model = cfg.model()?.with_nonlinear(true);
    let spec = EnsembleSpec { runs: tol::GRONWALL_RUNS, t_end: tol::GRONWALL_T, dt: tol::GRONWALL_DT, ..Default::default() };
    let reports = gronwall_ensemble(&model, &spec)?;
    let violations = reports.iter().filter(|r| !r.passed()).count();
    let margin = reports.iter().map(|r| r.min_margin).fold(f64::INFINITY, f64::min);
    Ok(outcome(
        6,
        vec![
            Check::new("runs violating", violations as f64, Bound::Equals(0.0)),
            Check::new("min bound/measured", margin, Bound::AtLeast(1.0)),
        ],
    ))
}

/// Criterion 7: contraction of the fixed-point map on a short horizon and
/// first-order agreement with a fine IMEX reference.
pub fn fixed_point(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let model = cfg.model()?.with_nonlinear(true);
    let g = *model.grid();
    let (s, _) = ensemble_member(g, model.params(), &EnsembleSpec::default(), 3)?;
    let target = 0.9 * tol::PICARD_DATA;
    let initial = scale_to_h1(model.spectral(), &s, target, target)?;
    let setup = PicardSetup {
        initial,
        forcing: Forcing::none(),
        c: cfg.tstar.c,
        eps: cfg.tstar.eps,
        t_cap: tol::PICARD_T_CAP,
        intervals: cfg.time.picard.intervals,
        max_iter: cfg.time.picard.max_iter,
        tol: 1e-14,
        halving: vec![4, 8, 16],
        reference_steps: 512,
    };
    let e = picard_experiment(&model, &setup)?;
    let mut checks = vec![
        Check::new("|a|_H1", e.a_h1, Bound::AtMost(tol::PICARD_DATA)),
        Check::new("|b|_H1", e.b_h1, Bound::AtMost(tol::PICARD_DATA)),
        Check::new("converged", f64::from(u8::from(e.report.converged)), Bound::Equals(1.0)),
        Check::new("max ratio", max_of(e.report.ratios.iter().copied()), Bound::Below(1.0)),
        Check::new("final ratios", max_of(e.final_ratios().iter().copied()), Bound::Below(tol::PICARD_FINAL_RATIO)),
    ];
    for (o, (m, _)) in e.orders.iter().zip(&e.errors) {
        checks.push(Check::new(
            format!("order M={m}"),
            *o,
            Bound::Within { target: tol::PICARD_ORDER, tol: tol::PICARD_ORDER_TOL },
        ));
    }
    Ok(outcome(7, checks))
}

/// Criterion 8: forced solutions decay at the rates of the linear operators.
pub fn forced_decay(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let d = decay_experiment(cfg)?;
    let fit = |label: &str, r: &crate::experiments::RateFit| Check::new(label, r.rate, Bound::AtLeast(r.required));
    Ok(outcome(
        8,
        vec![
            Check::new("hypothesis met", f64::from(u8::from(d.hypothesis_met)), Bound::Equals(1.0)),
            fit("velocity rate", &d.velocity),
            fit("temperature rate", &d.temperature),
            fit("pressure rate", &d.pressure),
        ],
    ))
}

/// Checks of a finished convergence study.
pub fn convergence_checks(r: &ConvergenceReport) -> Vec<Check> {
    use crate::manufactured::Refinement;
    let name = r.refinement.name();
    match r.refinement {
        Refinement::Horizontal => r
            .ratios()
            .iter()
            .zip(&r.levels)
            .map(|(q, n)| Check::new(format!("{name} ratio nx={n}"), *q, Bound::Above(tol::SPECTRAL_RATIO)))
            .collect(),
        Refinement::Vertical | Refinement::Temporal => {
            let target = if r.refinement == Refinement::Vertical { tol::VERTICAL_ORDER } else { tol::TEMPORAL_ORDER };
            r.orders
                .iter()
                .zip(&r.levels)
                .map(|(o, n)| Check::new(format!("{name} order {n}"), *o, Bound::Within { target, tol: tol::ORDER_TOL }))
                .collect()
        }
    }
}

/// Criterion 9: observed orders on manufactured solutions.
pub fn convergence(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let params = cfg.params()?;
    let mut checks = Vec::new();
    for spec in [StudySpec::horizontal(), StudySpec::vertical(), StudySpec::temporal()] {
        checks.extend(convergence_checks(&convergence_study(&spec, &params)?));
    }
    Ok(outcome(9, checks))
}

/// A constructed data set and the bands it must be assigned.
pub struct ClassifierCase {
    pub name: &'static str,
    pub v: HVectorField,
    pub tau: ScalarField,
    pub sigma: ScalarField,
    pub velocity: VelocityBand,
    pub temperature: ScalarBand,
    pub salinity: ScalarBand,
}

/// Profiles with known boundary behaviour. Vertical dependence is at most
/// quadratic near the boundaries, so the one-sided boundary differences are
/// exact and every residual is either at rounding level or of order one.
pub fn classifier_cases(grid: Grid, alpha: f64) -> Vec<ClassifierCase> {
    let h = grid.h;
    let s = move |z: f64| (z + h) / h;
    let wave_y = |y: f64| (2.0 * PI * y).sin();
    let vel = |f: &dyn Fn(f64, f64, f64) -> f64| HVectorField {
        v1: ScalarField::from_fn(grid, f),
        v2: ScalarField::zeros(grid),
    };
    // bottom value 0 and surface flux 0
    let compatible = vel(&|_, y, z| wave_y(y) * s(z) * (2.0 - s(z)));
    let slip = vel(&|_, y, _| 1.0 + wave_y(y));
    let sheared = vel(&|_, y, z| (z + h) * wave_y(y));
    let divergent = vel(&|x, _, z| (2.0 * PI * x).sin() * s(z) * (2.0 - s(z)));
    // τ = c₀ + (z+h)² with 2h + α(c₀ + h²) = 0
    let c0 = -(2.0 * h + alpha * h * h) / alpha;
    let robin = ScalarField::from_fn(grid, |x, _, z| (1.5 + (2.0 * PI * x).cos()) * (c0 + (z + h).powi(2)));
    let robin_broken = ScalarField::from_fn(grid, |x, _, _| 1.5 + (2.0 * PI * x).cos());
    let neumann = ScalarField::from_fn(grid, |_, y, _| 2.0 + (2.0 * PI * y).cos());
    let neumann_broken = ScalarField::from_fn(grid, |_, y, z| (1.0 + 0.5 * wave_y(y)) * (z + h));
    use ScalarBand::{BelowBoundaryFlux as Flux, DomainCompatible as Dom};
    use VelocityBand as V;
    vec![
        ClassifierCase { name: "compatible", v: compatible.clone(), tau: robin.clone(), sigma: neumann.clone(), velocity: V::DomainCompatible, temperature: Dom, salinity: Dom },
        ClassifierCase { name: "slip at bottom", v: slip, tau: robin_broken.clone(), sigma: neumann.clone(), velocity: V::BelowBottomTrace, temperature: Flux, salinity: Dom },
        ClassifierCase { name: "surface shear", v: sheared, tau: robin.clone(), sigma: neumann_broken.clone(), velocity: V::BelowSurfaceFlux, temperature: Dom, salinity: Flux },
        ClassifierCase { name: "divergent", v: divergent, tau: robin_broken, sigma: neumann_broken, velocity: V::NotSolenoidal, temperature: Flux, salinity: Flux },
        ClassifierCase { name: "zero", v: HVectorField::zeros(grid), tau: ScalarField::zeros(grid), sigma: ScalarField::zeros(grid), velocity: V::DomainCompatible, temperature: Dom, salinity: Dom },
    ]
}

/// Criterion 10: every constructed case lands in its band.
pub fn classifier(cfg: &RunConfig) -> Result<CriterionOutcome> {
    let g = cfg.grid()?;
    let params = cfg.params()?;
    let sp = Spectral::new(g);
    let cases = classifier_cases(g, params.alpha);
    let mut wrong = 0usize;
    for c in &cases {
        let r = classify_initial_data(&sp, &params, &c.v, &c.tau, &c.sigma, tol::CLASSIFIER_TOL)?;
        wrong += usize::from(r.velocity.band != c.velocity)
            + usize::from(r.temperature.band != c.temperature)
            + usize::from(r.salinity.band != c.salinity);
    }
    Ok(outcome(
        10,
        vec![
            Check::new("assignments", (3 * cases.len()) as f64, Bound::Equals(15.0)),
            Check::new("false assignments", wrong as f64, Bound::Equals(0.0)),
        ],
    ))
}

/// Surface field helper for callers building gradient data.
pub fn zero_mean(mut q: SurfaceScalarField) -> SurfaceScalarField {
    let m = q.mean();
    q.data.iter_mut().for_each(|x| *x -= m);
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_oracle() {
        let mu = robin_root_bisection(1.0, 1.0);
        assert!((mu * mu.tan() - 1.0).abs() < 1e-12);
        assert!((mu - 0.8603335890193797).abs() < 1e-12);
    }

    #[test]
    fn bounds_and_lines() {
        assert!(Bound::Within { target: 2.0, tol: 0.2 }.admits(1.85));
        assert!(!Bound::Below(1.0).admits(1.0));
        let o = outcome(3, vec![Check::new("x", 0.5, Bound::AtMost(1.0))]);
        assert!(o.passed());
        let line = o.to_string();
        assert!(line.starts_with("PASS  3 semigroup laws") && !line.contains('\n'));
        assert!(!outcome(1, vec![]).passed());
        assert!(run_criterion(11, &RunConfig::default()).is_err());
    }

    #[test]
    fn log_log_slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..10).map(|i| (i as f64, 3.0 * (i as f64).powf(-0.5))).collect();
        assert!((log_log_slope(&pts) + 0.5).abs() < 1e-12);
    }
}
