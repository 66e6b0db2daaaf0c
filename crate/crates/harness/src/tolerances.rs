//! Pass thresholds of the acceptance criteria.

/// Criterion 1: `‖div_H avg(Pv)‖ / ‖v‖`.
pub const PROJECTION_DIVERGENCE: f64 = 1e-10;
/// Criterion 1: `‖P(Pv) − Pv‖ / ‖v‖`.
pub const PROJECTION_IDEMPOTENCE: f64 = 1e-12;
/// Criterion 1: `‖P∇q‖ / ‖∇q‖`.
pub const PROJECTION_GRADIENT: f64 = 1e-10;
pub const PROJECTION_SAMPLES: usize = 50;

/// Criterion 2: relative error of the velocity and temperature decay rates.
pub const DECAY_RATE_RELATIVE: f64 = 0.02;
/// Criterion 2: vertical resolution of the rate checks.
pub const SPECTRUM_NZ: usize = 64;
/// Criterion 2: bound on the salinity decay rate.
pub const SALINITY_RATE: f64 = 1e-12;
/// Criterion 2: bound on `|mean σ(t) − mean σ(0)|`.
pub const MEAN_DRIFT: f64 = 1e-12;
pub const MEAN_DRIFT_STEPS: usize = 10_000;

/// Criterion 3: `‖e^{sA}e^{tA}f − e^{(s+t)A}f‖_∞ / ‖f‖_∞`.
pub const COMPOSITION: f64 = 1e-12;
/// Criterion 3: target smoothing slope and its tolerance.
pub const SMOOTHING_SLOPE: f64 = -0.5;
pub const SMOOTHING_SLOPE_TOL: f64 = 0.05;
pub const SMOOTHING_WINDOW: (f64, f64) = (1e-4, 1e-2);

/// Criterion 4: least observed order of the transport pairings.
pub const PAIRING_ORDER: f64 = 1.0;
/// Criterion 4: bound on the pairings at the finest grid.
pub const PAIRING_FINEST: f64 = 1e-3;
/// Criterion 4: `(nx = ny, nz)` of the refinement ladder.
pub const PAIRING_GRIDS: [(usize, usize); 4] = [(8, 4), (16, 8), (32, 16), (64, 32)];

/// Criterion 5: observed order of the energy residual in `dt`.
pub const ENERGY_ORDER: f64 = 2.0;
pub const ENERGY_ORDER_TOL: f64 = 0.2;
/// Criterion 5: bound on the relative pressure pairing.
pub const PRESSURE_PAIRING: f64 = 1e-10;

/// Criterion 6: ensemble size, horizon and step.
pub const GRONWALL_RUNS: usize = 20;
pub const GRONWALL_T: f64 = 5.0;
pub const GRONWALL_DT: f64 = 1e-2;

/// Criterion 7: bound on `‖a‖_{H¹}` and `‖b‖_{H¹}`.
pub const PICARD_DATA: f64 = 1e-2;
/// Criterion 7: cap on the horizon.
pub const PICARD_T_CAP: f64 = 0.01;
/// Criterion 7: bound on the last three contraction ratios.
pub const PICARD_FINAL_RATIO: f64 = 0.5;
pub const PICARD_ORDER: f64 = 1.0;
pub const PICARD_ORDER_TOL: f64 = 0.2;

/// Criterion 8: fraction of the decay rate a fitted rate must reach.
pub const DECAY_RATE_FRACTION: f64 = 0.95;

/// Criterion 9: least error ratio per horizontal doubling.
pub const SPECTRAL_RATIO: f64 = 4.0;
pub const VERTICAL_ORDER: f64 = 2.0;
pub const TEMPORAL_ORDER: f64 = 1.0;
pub const ORDER_TOL: f64 = 0.2;

/// Criterion 10: classifier tolerance.
pub const CLASSIFIER_TOL: f64 = 1e-8;
