//! Time-dependent forcing as a sum of separable terms `amplitude · e(t) · F(x)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{HVectorField, ScalarField};
use crate::grid::Grid;
use crate::model::SpecState;
use crate::spectral::{Spectral, SpectrumField};

/// Time factor of a forcing term.
#[derive(Clone)]
pub enum Envelope {
    Constant,
    /// `e^{−rate·t}`
    Exponential { rate: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Envelope {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Envelope::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Envelope::Constant => 1.0,
            Envelope::Exponential { rate } => (-rate * t).exp(),
            Envelope::Custom(f) => f(t),
        }
    }

    /// Guaranteed exponential decay rate, if known.
    pub fn rate(&self) -> Option<f64> {
        match self {
            Envelope::Constant => Some(0.0),
            Envelope::Exponential { rate } => Some(*rate),
            Envelope::Custom(_) => None,
        }
    }
}

impl fmt::Debug for Envelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Envelope::Constant => f.write_str("Constant"),
            Envelope::Exponential { rate } => write!(f, "Exponential {{ rate: {rate} }}"),
            Envelope::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// One separable term; absent components are zero.
#[derive(Debug, Clone)]
pub struct ForcingTerm {
    pub velocity: Option<HVectorField>,
    pub temperature: Option<ScalarField>,
    pub salinity: Option<ScalarField>,
    pub amplitude: f64,
    pub envelope: Envelope,
}

impl ForcingTerm {
    pub fn new(envelope: Envelope) -> Self {
        Self { velocity: None, temperature: None, salinity: None, amplitude: 1.0, envelope }
    }

    pub fn velocity(mut self, f: HVectorField) -> Self {
        self.velocity = Some(f);
        self
    }

    pub fn temperature(mut self, g: ScalarField) -> Self {
        self.temperature = Some(g);
        self
    }

    pub fn salinity(mut self, g: ScalarField) -> Self {
        self.salinity = Some(g);
        self
    }

    pub fn amplitude(mut self, a: f64) -> Self {
        self.amplitude = a;
        self
    }

    fn grid(&self) -> Option<&Grid> {
        self.velocity
            .as_ref()
            .map(|v| v.grid())
            .or(self.temperature.as_ref().map(|t| t.grid()))
            .or(self.salinity.as_ref().map(|s| s.grid()))
    }
}

/// `(f, g_τ, g_σ)` as functions of time.
#[derive(Debug, Clone, Default)]
pub struct Forcing {
    terms: Vec<ForcingTerm>,
}

impl Forcing {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_term(mut self, term: ForcingTerm) -> Self {
        self.terms.push(term);
        self
    }

    pub fn push(&mut self, term: ForcingTerm) {
        self.terms.push(term);
    }

    /// `f(x) e^{−β_f t}` and `g_τ(x) e^{−β_g t}`, no salinity forcing.
    pub fn decaying(f: HVectorField, g_tau: ScalarField, beta_f: f64, beta_g: f64) -> Self {
        Self::none()
            .with_term(ForcingTerm::new(Envelope::Exponential { rate: beta_f }).velocity(f))
            .with_term(ForcingTerm::new(Envelope::Exponential { rate: beta_g }).temperature(g_tau))
    }

    pub fn terms(&self) -> &[ForcingTerm] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Slowest guaranteed decay rate of the velocity forcing, of the
    /// temperature forcing and of the salinity forcing (`∞` when absent,
    /// `None` when a term has an opaque envelope).
    pub fn decay_rates(&self) -> [Option<f64>; 3] {
        let mut out = [Some(f64::INFINITY); 3];
        for t in &self.terms {
            let present = [t.velocity.is_some(), t.temperature.is_some(), t.salinity.is_some()];
            for (slot, p) in out.iter_mut().zip(present) {
                if p {
                    *slot = match (*slot, t.envelope.rate()) {
                        (Some(a), Some(b)) => Some(a.min(b)),
                        _ => None,
                    };
                }
            }
        }
        out
    }

    /// Physical forcing at time `t`.
    pub fn eval(&self, grid: Grid, t: f64) -> (HVectorField, ScalarField, ScalarField) {
        let mut f = HVectorField::zeros(grid);
        let mut gt = ScalarField::zeros(grid);
        let mut gs = ScalarField::zeros(grid);
        for term in &self.terms {
            let c = term.amplitude * term.envelope.eval(t);
            if let Some(v) = &term.velocity {
                f.axpy(c, v);
            }
            if let Some(v) = &term.temperature {
                gt.axpy(c, v);
            }
            if let Some(v) = &term.salinity {
                gs.axpy(c, v);
            }
        }
        (f, gt, gs)
    }

    pub(crate) fn prepare(&self, sp: &Spectral) -> Result<PreparedForcing> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for term in &self.terms {
            if let Some(g) = term.grid() {
                if g != sp.grid() {
                    return Err(Error::DimensionMismatch("forcing lives on a different grid".into()));
                }
            }
            let v = match &term.velocity {
                Some(v) => Some((sp.hfft(&v.v1)?, sp.hfft(&v.v2)?)),
                None => None,
            };
            let t = term.temperature.as_ref().map(|f| sp.hfft(f)).transpose()?;
            let s = term.salinity.as_ref().map(|f| sp.hfft(f)).transpose()?;
            terms.push(PreparedTerm { v, t, s, amplitude: term.amplitude, envelope: term.envelope.clone() });
        }
        Ok(PreparedForcing { grid: *sp.grid(), terms })
    }
}

struct PreparedTerm {
    v: Option<(SpectrumField, SpectrumField)>,
    t: Option<SpectrumField>,
    s: Option<SpectrumField>,
    amplitude: f64,
    envelope: Envelope,
}

/// Forcing with its spectra precomputed.
pub(crate) struct PreparedForcing {
    grid: Grid,
    terms: Vec<PreparedTerm>,
}

impl PreparedForcing {
    pub fn eval(&self, t: f64) -> SpecState {
        let mut out = SpecState::zeros(self.grid);
        for term in &self.terms {
            let c = term.amplitude * term.envelope.eval(t);
            if c == 0.0 {
                continue;
            }
            if let Some((a, b)) = &term.v {
                out.v1.axpy(c, a);
                out.v2.axpy(c, b);
            }
            if let Some(a) = &term.t {
                out.tau.axpy(c, a);
            }
            if let Some(a) = &term.s {
                out.sigma.axpy(c, a);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelopes_and_rates() {
        let g = Grid::new(4, 4, 4, 1.0).unwrap();
        let f = Forcing::decaying(HVectorField::zeros(g), ScalarField::constant(g, 2.0), 3.0, 0.5);
        assert_eq!(f.decay_rates(), [Some(3.0), Some(0.5), Some(f64::INFINITY)]);
        let (_, gt, _) = f.eval(g, 2.0);
        assert!((gt.data[0] - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        let c = Forcing::none().with_term(ForcingTerm::new(Envelope::custom(|t| t)).salinity(ScalarField::zeros(g)));
        assert_eq!(c.decay_rates()[2], None);
    }
}
