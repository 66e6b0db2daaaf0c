//! Post-processing of diagnostics streams: decay-rate fits, the energy
//! identity and the a priori growth bounds.

use primeq::forcing::Forcing;
use primeq::norms::lp_norm;
use primeq::{DiagnosticsRecord, FieldKind, Model};

use crate::error::{HarnessError, Result};

/// Negated least-squares slope of `ln y` against `t` over samples with
/// `t ∈ [t0, t1]`.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= window.0 && *t <= window.1).collect();
    if pts.len() < 5 {
        return Err(HarnessError::InsufficientData { needed: 5, got: pts.len() });
    }
    if let Some(&(t, value)) = pts.iter().find(|(_, y)| !(*y > 0.0)) {
        return Err(HarnessError::NonPositive { t, value });
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, y) in &pts {
        num += (t - tm) * (y.ln() - lm);
        den += (t - tm) * (t - tm);
    }
    Ok(-num / den)
}

/// `log₂(e_i / e_{i+1})` for consecutive entries of a halving sequence.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Trapezoid running integral of `y` over `t`, starting at zero.
pub fn running_integral(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// Running integral with the exponential (log-mean) rule on each interval
/// where both samples are positive, trapezoid elsewhere.
///
/// Exact for `c·e^{−rt}`; for log-convex data it bounds the integral from
/// above, so it never understates a decaying dissipation sampled coarsely.
pub fn running_integral_exponential(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            let (a, b, dt) = (y[i - 1], y[i], t[i] - t[i - 1]);
            let r = if a > 0.0 && b > 0.0 { (a / b).ln() } else { 0.0 };
            acc += if r.abs() > 1e-8 { dt * (a - b) / r } else { 0.5 * dt * (a + b) };
        }
        out.push(acc);
    }
    out
}

/// Residuals of the energy identities over the interior of a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// Largest relative residual of the scalar identity.
    pub max_relative_residual: f64,
    /// Largest absolute residual of the scalar identity.
    pub max_residual: f64,
    pub max_relative_velocity_residual: f64,
    /// Largest `|⟨∇_H π_s, v̄⟩| / (‖π_s‖ ‖v̄‖)` over all samples.
    pub max_pressure_pairing: f64,
    pub samples: usize,
}

/// Checks `½ d/dt ‖ζ‖² + ‖∇ζ‖² + α‖τ‖²_{Γ_u} = ∫ g·ζ` and its velocity
/// counterpart at every interior sample, where the time derivative is a
/// centered difference.
pub fn verify_energy_identity(records: &[DiagnosticsRecord]) -> Result<EnergyReport> {
    if records.len() < 3 {
        return Err(HarnessError::InsufficientData { needed: 3, got: records.len() });
    }
    let interior = &records[1..records.len() - 1];
    let fold = |f: &dyn Fn(&DiagnosticsRecord) -> f64, set: &[DiagnosticsRecord]| set.iter().map(f).fold(0.0, f64::max);
    Ok(EnergyReport {
        max_relative_residual: fold(&|r| r.relative_energy_residual(), interior),
        max_residual: fold(&|r| r.energy_residual.abs(), interior),
        max_relative_velocity_residual: fold(&|r| r.relative_velocity_residual(), interior),
        max_pressure_pairing: fold(&|r| r.pressure_pairing.abs(), records),
        samples: interior.len(),
    })
}

/// Measured quantities and their a priori bounds at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallNode {
    pub t: f64,
    /// `‖ζ(t)‖²`
    pub zeta_energy: f64,
    /// `(‖b‖² + ∫₀ᵗ ‖g‖²) e^{2t}`
    pub zeta_bound: f64,
    /// `∫₀ᵗ ‖∇ζ‖²`
    pub dissipation: f64,
    /// `½ (‖b‖² + ∫₀ᵗ ‖g‖² + ∫₀ᵗ zeta_bound)`
    pub dissipation_bound: f64,
    /// `‖v(t)‖²`
    pub velocity_energy: f64,
    /// `‖a‖² + (2/λ₁)(∫₀ᵗ ‖f‖² + C_Π · dissipation_bound)`
    pub velocity_bound: f64,
}

impl GronwallNode {
    pub fn holds(&self) -> bool {
        self.zeta_energy <= self.zeta_bound
            && self.dissipation <= self.dissipation_bound
            && self.velocity_energy <= self.velocity_bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub nodes: Vec<GronwallNode>,
    /// Index of the first node where a measured value exceeds its bound.
    pub first_violation: Option<usize>,
    /// Smallest `bound / measured` over all nodes and quantities.
    pub min_margin: f64,
}

impl GronwallReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Compares a diagnostics stream starting at `t = 0` against the growth
/// bounds built from the initial energies and the forcing.
///
/// `λ₁` is the velocity decay rate (discrete Poincaré constant) and
/// `C_Π = (h · max β)²` bounds `‖Π(ζ)‖² ≤ C_Π ‖∇_H ζ‖²`.
pub fn verify_gronwall_bounds(model: &Model, forcing: &Forcing, records: &[DiagnosticsRecord]) -> Result<GronwallReport> {
    if records.len() < 2 {
        return Err(HarnessError::InsufficientData { needed: 2, got: records.len() });
    }
    let g = *model.grid();
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let mut f_sq = Vec::with_capacity(t.len());
    let mut g_sq = Vec::with_capacity(t.len());
    for &s in &t {
        let (f, gt, gs) = forcing.eval(g, s);
        f_sq.push(lp_norm(&f, 2.0)?.powi(2));
        g_sq.push(lp_norm(&gt, 2.0)?.powi(2) + lp_norm(&gs, 2.0)?.powi(2));
    }
    let int_f = running_integral(&t, &f_sq);
    let int_g = running_integral(&t, &g_sq);
    let first = &records[0];
    let b_sq = first.e_tau + first.e_sigma;
    let a_sq = first.e_v;
    let zeta_bound: Vec<f64> = (0..t.len()).map(|i| (b_sq + int_g[i]) * (2.0 * t[i]).exp()).collect();
    let int_bound = running_integral(&t, &zeta_bound);
    let dissipation = running_integral_exponential(&t, &records.iter().map(|r| r.d_zeta).collect::<Vec<_>>());
    let lambda1 = model.cache(FieldKind::Velocity).decay_rate();
    let c_pi = (g.h * model.params().max_beta()).powi(2);
    let mut nodes = Vec::with_capacity(t.len());
    let mut first_violation = None;
    let mut min_margin = f64::INFINITY;
    for (i, r) in records.iter().enumerate() {
        let dissipation_bound = 0.5 * (b_sq + int_g[i] + int_bound[i]);
        let node = GronwallNode {
            t: t[i],
            zeta_energy: r.e_tau + r.e_sigma,
            zeta_bound: zeta_bound[i],
            dissipation: dissipation[i],
            dissipation_bound,
            velocity_energy: r.e_v,
            velocity_bound: a_sq + 2.0 / lambda1 * (int_f[i] + c_pi * dissipation_bound),
        };
        for (m, b) in [
            (node.zeta_energy, node.zeta_bound),
            (node.dissipation, node.dissipation_bound),
            (node.velocity_energy, node.velocity_bound),
        ] {
            if m > 0.0 {
                min_margin = min_margin.min(b / m);
            }
        }
        if first_violation.is_none() && !node.holds() {
            first_violation = Some(i);
        }
        nodes.push(node);
    }
    Ok(GronwallReport { nodes, first_violation, min_margin })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=100).map(|i| i as f64 * 0.05).map(|t| (t, f(t))).collect()
    }

    #[test]
    fn exact_exponential() {
        let r = fit_decay_rate(&series(|t| 3.0 * (-2.0 * t).exp()), (0.0, 5.0)).unwrap();
        assert!((r - 2.0).abs() < 1e-10);
    }

    #[test]
    fn perturbed_exponential() {
        let r = fit_decay_rate(&series(|t| (-t).exp() * (1.0 + 0.01 * t.sin())), (0.0, 5.0)).unwrap();
        assert!((r - 1.0).abs() < 0.02);
    }

    #[test]
    fn constant_series_has_zero_rate() {
        assert_eq!(fit_decay_rate(&series(|_| 4.0), (1.0, 2.0)).unwrap(), 0.0);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(matches!(
            fit_decay_rate(&series(|t| 1.0 - t), (0.0, 5.0)),
            Err(HarnessError::NonPositive { .. })
        ));
        assert!(matches!(
            fit_decay_rate(&series(|_| 1.0), (0.0, 0.1)),
            Err(HarnessError::InsufficientData { needed: 5, got: 3 })
        ));
    }

    #[test]
    fn zero_state_has_zero_residual() {
        let recs: Vec<DiagnosticsRecord> =
            (0..4).map(|i| DiagnosticsRecord { t: i as f64, ..Default::default() }).collect();
        let r = verify_energy_identity(&recs).unwrap();
        assert_eq!(r.max_relative_residual, 0.0);
        assert_eq!(r.max_pressure_pairing, 0.0);
        assert!(verify_energy_identity(&recs[..2]).is_err());
    }

    #[test]
    fn running_integral_is_trapezoid() {
        let t = [0.0, 1.0, 3.0];
        assert_eq!(running_integral(&t, &[1.0, 3.0, 3.0]), vec![0.0, 2.0, 8.0]);
        assert_eq!(observed_orders(&[4.0, 1.0, 0.25]), vec![2.0, 2.0]);
    }

    #[test]
    fn exponential_rule_is_exact_and_conservative() {
        let t: Vec<f64> = (0..=4).map(|i| 0.01 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|s| 3.0 * (-50.0 * s).exp()).collect();
        let exact = 3.0 / 50.0 * (1.0 - (-2.0f64).exp());
        assert!((running_integral_exponential(&t, &y)[4] - exact).abs() < 1e-14);
        // log-convex mixture: the rule stays above the true integral
        let y: Vec<f64> = t.iter().map(|s| (-300.0 * s).exp() + 1.0).collect();
        let exact = (1.0 - (-12.0f64).exp()) / 300.0 + 0.04;
        let got = running_integral_exponential(&t, &y)[4];
        assert!(got >= exact && got < running_integral(&t, &y)[4]);
        assert_eq!(running_integral_exponential(&[0.0, 1.0], &[2.0, 2.0]), vec![0.0, 2.0]);
    }
}
