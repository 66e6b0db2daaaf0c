//! Analytic vertical profiles and random smooth fields.
//!
//! Every profile satisfies its boundary conditions in the continuum, and the
//! random fields are finite sums of them, so the same seed yields the same
//! continuum field on every grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{HVectorField, ScalarField};
use crate::grid::{Grid, PhysParams};

/// `m`-th positive root of `μ tan(μh) = α`, which lies in
/// `(mπ/h, (m + 1/2)π/h)`. Safeguarded Newton inside the bracket.
pub fn robin_root(alpha: f64, h: f64, m: usize) -> Result<f64> {
    if !(alpha > 0.0 && h > 0.0) {
        return Err(Error::InvalidParameter("robin_root needs alpha, h > 0".into()));
    }
    let f = |mu: f64| mu * (mu * h).sin() - alpha * (mu * h).cos();
    let df = |mu: f64| (mu * h).sin() * (1.0 + alpha * h) + mu * h * (mu * h).cos();
    let mut lo = m as f64 * PI / h;
    let mut hi = (m as f64 + 0.5) * PI / h;
    // (−1)^m f is negative at lo and positive at hi
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if sign * fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = x - fx / df(x);
        x = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo < 4.0 * f64::EPSILON * hi || fx == 0.0 {
            break;
        }
    }
    Ok(x)
}

/// `sin((2m+1)πs/2)`, `s = (z + h)/h`: zero at the bottom, flat at the top.
pub fn velocity_profile(m: usize, z: f64, h: f64) -> f64 {
    ((2 * m + 1) as f64 * PI * (z + h) / (2.0 * h)).sin()
}

/// Zero-mean combination of two consecutive [`velocity_profile`]s.
pub fn zero_mean_velocity_profile(m: usize, z: f64, h: f64) -> f64 {
    let r = (2 * m + 3) as f64 / (2 * m + 1) as f64;
    velocity_profile(m, z, h) - r * velocity_profile(m + 1, z, h)
}

/// `cos(μ_m (z + h))`: Neumann at the bottom, Robin at the top.
pub fn temperature_profile(mu: f64, z: f64, h: f64) -> f64 {
    (mu * (z + h)).cos()
}

/// `cos(mπ(z + h)/h)`: Neumann at both ends.
pub fn salinity_profile(m: usize, z: f64, h: f64) -> f64 {
    (m as f64 * PI * (z + h) / h).cos()
}

/// Shape of a random smooth field: highest horizontal wavenumber per axis
/// and number of vertical profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothSpec {
    pub kmax: i64,
    pub modes: usize,
    /// Coefficients decay like `decay^(|k| + m)`.
    pub decay: f64,
}

impl Default for SmoothSpec {
    fn default() -> Self {
        Self { kmax: 2, modes: 3, decay: 0.5 }
    }
}

struct Wave {
    kx: f64,
    ky: f64,
    a: f64,
    b: f64,
}

impl Wave {
    fn value(&self, x: f64, y: f64) -> f64 {
        let th = 2.0 * PI * (self.kx * x + self.ky * y);
        self.a * th.cos() + self.b * th.sin()
    }
}

fn draw_waves(rng: &mut ChaCha8Rng, spec: &SmoothSpec, m: usize) -> Vec<Wave> {
    let mut out = Vec::new();
    for kx in -spec.kmax..=spec.kmax {
        for ky in 0..=spec.kmax {
            // one representative per ±k pair
            if ky == 0 && kx < 0 {
                continue;
            }
            let amp = spec.decay.powi((kx.abs() + ky) as i32 + m as i32);
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let b = if kx == 0 && ky == 0 { 0.0 } else { b };
            out.push(Wave { kx: kx as f64, ky: ky as f64, a: amp * a, b: amp * b });
        }
    }
    out
}

/// Sum of `|a| + |b|` over the waves: a bound on their superposition.
fn coefficient_bound(waves: &[Wave]) -> f64 {
    waves.iter().map(|w| w.a.abs() + w.b.abs()).sum()
}

fn rescale(data: &mut [f64], bound: f64, amplitude: f64) {
    if bound > 0.0 {
        data.iter_mut().for_each(|v| *v *= amplitude / bound);
    }
}

/// Random velocity with `div_H v̄ = 0`, `v = 0` on `Γ_b` and `∂_z v = 0` on
/// `Γ_u`, with `max |v_i| ≤ amplitude`.
///
/// The longitudinal part is corrected to zero trapezoid mean on `grid`, so
/// the discrete vertical average is exactly divergence free.
pub fn random_smooth_velocity(grid: Grid, seed: u64, amplitude: f64, spec: SmoothSpec) -> HVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = grid.h;
    let w = grid.trapezoid_weights();
    let base: Vec<f64> = (0..grid.levels()).map(|k| velocity_profile(0, grid.z(k), h)).collect();
    let base_mean: f64 = base.iter().zip(&w).map(|(a, b)| a * b).sum();
    let mut v = HVectorField::zeros(grid);
    let mut bound = 0.0;
    for m in 0..spec.modes {
        let trans = draw_waves(&mut rng, &spec, m);
        let long = draw_waves(&mut rng, &spec, m);
        // |zero-mean profile| ≤ 1 + 3, plus the mean correction
        bound += coefficient_bound(&trans) + 5.0 * coefficient_bound(&long);
        let tp: Vec<f64> = (0..grid.levels()).map(|k| velocity_profile(m, grid.z(k), h)).collect();
        let mut lp: Vec<f64> = (0..grid.levels()).map(|k| zero_mean_velocity_profile(m, grid.z(k), h)).collect();
        let lp_mean: f64 = lp.iter().zip(&w).map(|(a, b)| a * b).sum();
        for (l, b) in lp.iter_mut().zip(&base) {
            *l -= lp_mean / base_mean * b;
        }
        for k in 0..grid.levels() {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    let (x, y) = (grid.x(i), grid.y(j));
                    let n = grid.idx(i, j, k);
                    for wv in &trans {
                        let kn = wv.kx.hypot(wv.ky);
                        let (e1, e2) = if kn > 0.0 { (-wv.ky / kn, wv.kx / kn) } else { (1.0, 0.0) };
                        let s = wv.value(x, y) * tp[k];
                        v.v1.data[n] += e1 * s;
                        v.v2.data[n] += e2 * s;
                    }
                    for wv in &long {
                        let kn = wv.kx.hypot(wv.ky);
                        if kn == 0.0 {
                            // the mean mode has no longitudinal direction: use the
                            // second component with the transverse profile
                            v.v2.data[n] += wv.value(x, y) * tp[k];
                            continue;
                        }
                        let s = wv.value(x, y) * lp[k];
                        v.v1.data[n] += wv.kx / kn * s;
                        v.v2.data[n] += wv.ky / kn * s;
                    }
                }
            }
        }
    }
    rescale(&mut v.v1.data, bound, amplitude);
    rescale(&mut v.v2.data, bound, amplitude);
    v
}

fn random_scalar_with(grid: Grid, seed: u64, amplitude: f64, spec: SmoothSpec, profile: impl Fn(usize, f64) -> f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = ScalarField::zeros(grid);
    let mut bound = 0.0;
    for m in 0..spec.modes {
        let waves = draw_waves(&mut rng, &spec, m);
        bound += coefficient_bound(&waves);
        let prof: Vec<f64> = (0..grid.levels()).map(|k| profile(m, grid.z(k))).collect();
        for (k, pk) in prof.iter().enumerate() {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    let s: f64 = waves.iter().map(|wv| wv.value(grid.x(i), grid.y(j))).sum();
                    f.data[grid.idx(i, j, k)] += s * pk;
                }
            }
        }
    }
    rescale(&mut f.data, bound, amplitude);
    f
}

/// Random temperature, `max |τ| ≤ amplitude`, satisfying the Neumann bottom and Robin top conditions.
pub fn random_smooth_temperature(
    grid: Grid,
    params: &PhysParams,
    seed: u64,
    amplitude: f64,
    spec: SmoothSpec,
) -> Result<ScalarField> {
    let mus = (0..spec.modes).map(|m| robin_root(params.alpha, grid.h, m)).collect::<Result<Vec<_>>>()?;
    Ok(random_scalar_with(grid, seed, amplitude, spec, |m, z| temperature_profile(mus[m], z, grid.h)))
}

/// Random salinity, `max |σ| ≤ amplitude`, satisfying Neumann conditions at both ends.
pub fn random_smooth_salinity(grid: Grid, seed: u64, amplitude: f64, spec: SmoothSpec) -> ScalarField {
    random_scalar_with(grid, seed, amplitude, spec, |m, z| salinity_profile(m, z, grid.h))
}

/// White noise uniform in `[−amplitude, amplitude]`.
pub fn white_noise(grid: Grid, seed: u64, amplitude: f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..grid.len()).map(|_| amplitude * rng.random_range(-1.0..1.0)).collect();
    ScalarField::from_vec(grid, data).expect("sized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydrostatic::averaged_divergence;
    use crate::spectral::Spectral;
    use crate::vertical::vertical_derivative;

    fn bisect(alpha: f64, h: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * (mid * h).tan() < alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn robin_roots_match_bisection() {
        let mu = robin_root(1.0, 1.0, 0).unwrap();
        assert!((mu - 0.86033).abs() < 1e-5);
        assert!((mu * mu - 0.74017).abs() < 1e-5);
        for (alpha, h) in [(1.0, 1.0), (0.1, 2.0), (5.0, 0.5)] {
            for m in 0..4 {
                let lo = m as f64 * PI / h + 1e-14;
                let hi = (m as f64 + 0.5) * PI / h - 1e-14;
                let expect = bisect(alpha, h, lo, hi);
                assert!((robin_root(alpha, h, m).unwrap() - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn profiles_satisfy_boundary_conditions() {
        let h = 1.7;
        for m in 0..4 {
            assert!(velocity_profile(m, -h, h).abs() < 1e-15);
            let d = (2 * m + 1) as f64 * PI / (2.0 * h) * ((2 * m + 1) as f64 * PI / 2.0).cos();
            assert!(d.abs() < 1e-14);
            // zero mean via Simpson on a fine grid
            let n = 2000;
            let s: f64 = (0..=n)
                .map(|i| {
                    let z = -h + h * i as f64 / n as f64;
                    let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    wgt * zero_mean_velocity_profile(m, z, h)
                })
                .sum::<f64>()
                * h
                / (3.0 * n as f64);
            assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn random_velocity_is_discretely_solenoidal() {
        let g = Grid::new(16, 16, 8, 1.0).unwrap();
        let v = random_smooth_velocity(g, 3, 0.5, SmoothSpec::default());
        assert!(v.max_abs() <= 0.5 && v.max_abs() > 0.01);
        let sp = Spectral::new(g);
        assert!(averaged_divergence(&sp, &v).max_abs() < 1e-13);
        assert!(v.v1.layer(0).iter().chain(v.v2.layer(0)).all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn random_temperature_flux_conditions() {
        let g = Grid::new(8, 8, 64, 1.0).unwrap();
        let p = PhysParams::default();
        let t = random_smooth_temperature(g, &p, 1, 1.0, SmoothSpec::default()).unwrap();
        let dz = vertical_derivative(&t);
        let robin: f64 = dz.layer(g.nz).iter().zip(t.layer(g.nz)).map(|(d, v)| (d + v).abs()).fold(0.0, f64::max);
        assert!(robin < 1e-2);
        assert!(dz.layer(0).iter().all(|d| d.abs() < 1e-2));
    }

    #[test]
    fn seeds_are_deterministic() {
        let g = Grid::new(8, 8, 8, 1.0).unwrap();
        let a = random_smooth_salinity(g, 7, 1.0, SmoothSpec::default());
        let b = random_smooth_salinity(g, 7, 1.0, SmoothSpec::default());
        assert_eq!(a, b);
        assert_ne!(a, random_smooth_salinity(g, 8, 1.0, SmoothSpec::default()));
    }
}
