//! Run configuration: one strict JSON document plus dotted-path overrides.

use std::path::{Path, PathBuf};

use primeq::forcing::{Envelope, Forcing, ForcingTerm};
use primeq::profiles::{random_smooth_salinity, random_smooth_temperature, random_smooth_velocity, SmoothSpec};
use primeq::solver::State;
use primeq::{FieldKind, Grid, HVectorField, Model, PhysParams, ScalarField};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{HarnessError, Result};
use crate::io::read_snapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub h: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nx: 32, ny: 32, nz: 16, h: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsConfig {
    pub alpha: f64,
    pub beta_tau: f64,
    pub beta_sigma: f64,
    /// Advection and buoyancy coupling on or off.
    pub nonlinear: bool,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { alpha: 1.0, beta_tau: 1.0, beta_sigma: 1.0, nonlinear: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Imex,
    Picard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    /// Subintervals of `[0, T]`.
    pub intervals: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { intervals: 16, max_iter: 50, tol: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub picard: PicardConfig,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 0.1, scheme: Scheme::Imex, picard: PicardConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Zero,
    /// Seeded sum of low eigen-profiles.
    RandomSmooth,
    /// Lowest vertical mode at horizontal wavevector `(1, 0)`.
    Eigenmode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub velocity: Profile,
    pub temperature: Profile,
    pub salinity: Profile,
    pub amplitude: f64,
    pub seed: u64,
    /// Snapshot to start from; overrides the profiles.
    pub snapshot: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            velocity: Profile::RandomSmooth,
            temperature: Profile::RandomSmooth,
            salinity: Profile::RandomSmooth,
            amplitude: 0.1,
            seed: 1,
            snapshot: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingProfile {
    None,
    /// Velocity forcing along a horizontally varying Stokes mode and
    /// temperature forcing along the second horizontally uniform mode, so that
    /// neither excites the slowest mode of its equation.
    Decaying,
    /// Seeded smooth fields for all three equations.
    RandomSmooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingConfig {
    pub profile: ForcingProfile,
    pub amplitude: f64,
    /// Envelope rate of the velocity forcing; defaults to the velocity decay rate.
    pub beta_f: Option<f64>,
    /// Envelope rate of the scalar forcing; defaults to the temperature decay rate.
    pub beta_g: Option<f64>,
    pub seed: u64,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self { profile: ForcingProfile::None, amplitude: 0.1, beta_f: None, beta_g: None, seed: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub snapshot: Option<PathBuf>,
    pub emit_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { csv: None, snapshot: None, emit_every: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TstarConfig {
    /// The unspecified constant of the existence-time formulas, `> 1`.
    pub c: f64,
    pub eps: f64,
}

impl Default for TstarConfig {
    fn default() -> Self {
        Self { c: 2.0, eps: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    pub forcing: ForcingConfig,
    pub output: OutputConfig,
    pub tstar: TstarConfig,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

/// Sets `key` (dotted path) in a JSON document. The value is parsed as JSON
/// when possible and taken as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{assignment}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (n, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(config_err(format!("empty segment in key `{key}`")));
        }
        let obj = match node {
            Value::Object(m) => m,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just created")
            }
            _ => return Err(config_err(format!("`{key}` descends into a non-object"))),
        };
        if n + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    Ok(())
}

impl RunConfig {
    /// Parses a document (or the defaults when `None`) and applies overrides.
    pub fn from_json(text: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut doc = match text {
            Some(t) => serde_json::from_str(t).map_err(|e| config_err(format!("parse: {e}")))?,
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => Some(
                std::fs::read_to_string(p).map_err(|e| config_err(format!("cannot read {}: {e}", p.display())))?,
            ),
            None => None,
        };
        Self::from_json(text.as_deref(), overrides)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.params()?;
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return Err(config_err(format!("time.dt must be positive (got {})", t.dt)));
        }
        if !(t.t_end >= 0.0 && t.t_end.is_finite()) {
            return Err(config_err(format!("time.t_end must be >= 0 (got {})", t.t_end)));
        }
        if t.picard.intervals < 2 || t.picard.max_iter == 0 || !(t.picard.tol > 0.0) {
            return Err(config_err("time.picard needs intervals >= 2, max_iter >= 1, tol > 0"));
        }
        if self.output.emit_every == 0 {
            return Err(config_err("output.emit_every must be >= 1"));
        }
        if !(self.tstar.c > 1.0) || !(self.tstar.eps > 0.0) {
            return Err(config_err("tstar needs c > 1 and eps > 0"));
        }
        for (name, v) in [("initial.amplitude", self.initial.amplitude), ("forcing.amplitude", self.forcing.amplitude)] {
            if !v.is_finite() {
                return Err(config_err(format!("{name} must be finite")));
            }
        }
        for (name, v) in [("forcing.beta_f", self.forcing.beta_f), ("forcing.beta_g", self.forcing.beta_g)] {
            if let Some(b) = v {
                if !(b >= 0.0 && b.is_finite()) {
                    return Err(config_err(format!("{name} must be >= 0")));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = &self.grid;
        Grid::new(g.nx, g.ny, g.nz, g.h).map_err(|e| config_err(e.to_string()))
    }

    pub fn params(&self) -> Result<PhysParams> {
        let p = &self.physics;
        PhysParams::new(p.alpha, p.beta_tau, p.beta_sigma).map_err(|e| config_err(e.to_string()))
    }

    pub fn model(&self) -> Result<Model> {
        Ok(Model::new(self.grid()?, self.params()?)?.with_nonlinear(self.physics.nonlinear))
    }

    pub fn initial_state(&self, model: &Model) -> Result<State> {
        let g = *model.grid();
        let ic = &self.initial;
        if let Some(path) = &ic.snapshot {
            let snap = read_snapshot(path)?;
            if snap.grid != g {
                return Err(config_err(format!("snapshot {} is on a different grid", path.display())));
            }
            return Ok(snap.state);
        }
        let spec = SmoothSpec::default();
        let a = ic.amplitude;
        let v = match ic.velocity {
            Profile::Zero => HVectorField::zeros(g),
            Profile::RandomSmooth => random_smooth_velocity(g, ic.seed, a, spec),
            Profile::Eigenmode => model.cache(FieldKind::Velocity).velocity_eigenmode(1, 0, 0)?.0.scaled(a),
        };
        let scalar = |kind: FieldKind, profile: Profile, seed: u64| -> Result<ScalarField> {
            Ok(match profile {
                Profile::Zero => ScalarField::zeros(g),
                Profile::RandomSmooth if kind == FieldKind::Temperature => {
                    random_smooth_temperature(g, model.params(), seed, a, spec)?
                }
                Profile::RandomSmooth => random_smooth_salinity(g, seed, a, spec),
                Profile::Eigenmode => model.cache(kind).scalar_eigenmode(1, 0, 0)?.0.scaled(a),
            })
        };
        let tau = scalar(FieldKind::Temperature, ic.temperature, ic.seed.wrapping_add(1))?;
        let sigma = scalar(FieldKind::Salinity, ic.salinity, ic.seed.wrapping_add(2))?;
        Ok(State::new(0.0, v, tau, sigma)?)
    }

    /// Envelope rates `(β_f, β_g)` after defaults.
    pub fn forcing_rates(&self, model: &Model) -> (f64, f64) {
        (
            self.forcing.beta_f.unwrap_or_else(|| model.cache(FieldKind::Velocity).decay_rate()),
            self.forcing.beta_g.unwrap_or_else(|| model.cache(FieldKind::Temperature).decay_rate()),
        )
    }

    pub fn forcing(&self, model: &Model) -> Result<Forcing> {
        let fc = &self.forcing;
        let (bf, bg) = self.forcing_rates(model);
        let g = *model.grid();
        Ok(match fc.profile {
            ForcingProfile::None => Forcing::none(),
            ForcingProfile::Decaying => non_resonant_forcing(model, fc.amplitude, bf, bg)?,
            ForcingProfile::RandomSmooth => {
                let spec = SmoothSpec::default();
                let f = random_smooth_velocity(g, fc.seed, fc.amplitude, spec);
                let gt = random_smooth_temperature(g, model.params(), fc.seed.wrapping_add(1), fc.amplitude, spec)?;
                let gs = random_smooth_salinity(g, fc.seed.wrapping_add(2), fc.amplitude, spec);
                Forcing::none()
                    .with_term(ForcingTerm::new(Envelope::Exponential { rate: bf }).velocity(f))
                    .with_term(ForcingTerm::new(Envelope::Exponential { rate: bg }).temperature(gt).salinity(gs))
            }
        })
    }
}

/// `f = a·u e^{−β_f t}` with `u` the transverse Stokes mode at wavevector
/// `(0, 1)`, and `g_τ = a·θ e^{−β_g t}` with `θ` the second horizontally
/// uniform temperature mode. Each pattern is an eigenfunction whose
/// eigenvalue exceeds the slowest rate of its equation, so the forced response
/// decays exactly at the envelope rate.
pub fn non_resonant_forcing(model: &Model, amplitude: f64, beta_f: f64, beta_g: f64) -> Result<Forcing> {
    let (u, _) = model.cache(FieldKind::Velocity).velocity_eigenmode(0, 1, 0)?;
    let (theta, _) = model.cache(FieldKind::Temperature).scalar_eigenmode(0, 0, 1)?;
    Ok(Forcing::decaying(u.scaled(amplitude), theta.scaled(amplitude), beta_f, beta_g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_desk_scale() {
        let c = RunConfig::from_json(None, &[]).unwrap();
        assert_eq!((c.grid.nx, c.grid.ny, c.grid.nz), (32, 32, 16));
        assert_eq!(c.time.dt, 1e-3);
        assert_eq!(c.physics.alpha, 1.0);
        assert_eq!(c.tstar.c, 2.0);
    }

    #[test]
    fn overrides_by_dotted_path() {
        let c = RunConfig::from_json(
            Some(r#"{"grid": {"nx": 8}}"#),
            &["grid.ny=4".into(), "time.scheme=picard".into(), "output.csv=out.csv".into()],
        )
        .unwrap();
        assert_eq!((c.grid.nx, c.grid.ny), (8, 4));
        assert_eq!(c.time.scheme, Scheme::Picard);
        assert_eq!(c.output.csv, Some(PathBuf::from("out.csv")));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        for (doc, sets) in [
            (Some(r#"{"grid": {"nxx": 8}}"#), vec![]),
            (Some("{not json"), vec![]),
            (None, vec!["physics.alpha=-1".to_string()]),
            (None, vec!["time.dt=0".to_string()]),
            (None, vec!["grid.nx".to_string()]),
            (None, vec!["grid.nx.deep=3".to_string()]),
        ] {
            let e = RunConfig::from_json(doc, &sets).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{e}");
        }
    }

    #[test]
    fn builds_state_and_forcing() {
        let c = RunConfig::from_json(
            None,
            &["grid.nx=8".into(), "grid.ny=8".into(), "grid.nz=4".into(), "forcing.profile=decaying".into()],
        )
        .unwrap();
        let m = c.model().unwrap();
        let s = c.initial_state(&m).unwrap();
        assert!(s.v.max_abs() > 0.0 && s.v.max_abs() <= 0.1);
        let f = c.forcing(&m).unwrap();
        let rates = f.decay_rates();
        assert_eq!(rates[0], Some(m.cache(FieldKind::Velocity).decay_rate()));
        assert_eq!(rates[1], Some(m.cache(FieldKind::Temperature).decay_rate()));
    }
}
