//! Exact linear semigroups per horizontal mode.
//!
//! A field is expanded in horizontal Fourier modes times vertical eigenvectors;
//! the generator is diagonal there with total eigenvalue `|2πk|² + λ_m`.
//!
//! For velocity the expansion uses the discrete hydrostatic Stokes basis: at
//! each wavevector `k` with a nonzero first-derivative symbol `k̃`, the
//! component along `k̂ = k̃/|k̃|` is expanded in the eigenbasis restricted to
//! zero vertical mean, and the transverse component in the unconstrained
//! eigenbasis. Analysis therefore includes the projection onto the discrete
//! solenoidal space (bottom value zero, `div_H v̄ = 0`), and every positive-time
//! action commutes with it exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{HVectorField, ScalarField};
use crate::grid::{FieldKind, Grid, PhysParams};
use crate::hydrostatic::helmholtz_project;
use crate::spectral::{signed_wavenumber, Spectral, SpectrumField};
use crate::vertical::{VerticalBasis, VerticalOperator};

/// Below this total eigenvalue `φ1` uses its limit value `t`.
pub const PHI1_THRESHOLD: f64 = 1e-12;

/// `φ1(λ, t) = (1 − e^{−λt})/λ`, or `t` for `λ < 1e−12`.
#[inline]
pub fn phi1(lambda: f64, t: f64) -> f64 {
    if lambda < PHI1_THRESHOLD {
        t
    } else {
        -(-lambda * t).exp_m1() / lambda
    }
}

/// A field the semigroups act on: scalars or horizontal vectors.
pub trait ModeField: Sized + Clone {
    const IS_VECTOR: bool;
    fn grid(&self) -> &Grid;
    fn to_spectra(&self, sp: &Spectral) -> Result<Vec<SpectrumField>>;
    fn from_spectra(sp: &Spectral, s: &[SpectrumField]) -> Self;
}

impl ModeField for ScalarField {
    const IS_VECTOR: bool = false;

    fn grid(&self) -> &Grid {
        ScalarField::grid(self)
    }

    fn to_spectra(&self, sp: &Spectral) -> Result<Vec<SpectrumField>> {
        self.check_finite()?;
        Ok(vec![sp.hfft(self)?])
    }

    fn from_spectra(sp: &Spectral, s: &[SpectrumField]) -> Self {
        sp.inverse(&s[0])
    }
}

impl ModeField for HVectorField {
    const IS_VECTOR: bool = true;

    fn grid(&self) -> &Grid {
        HVectorField::grid(self)
    }

    fn to_spectra(&self, sp: &Spectral) -> Result<Vec<SpectrumField>> {
        self.check_finite()?;
        Ok(vec![sp.hfft(&self.v1)?, sp.hfft(&self.v2)?])
    }

    fn from_spectra(sp: &Spectral, s: &[SpectrumField]) -> Self {
        HVectorField { v1: sp.inverse(&s[0]), v2: sp.inverse(&s[1]) }
    }
}

/// Mode coefficients: one block per basis part, each `modes × layer_len`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub(crate) parts: Vec<Vec<Complex64>>,
}

/// Vertical eigenbases, horizontal symbols and total eigenvalues for one
/// [`FieldKind`].
#[derive(Debug, Clone)]
pub struct SemigroupCache {
    kind: FieldKind,
    spectral: Spectral,
    operator: VerticalOperator,
    /// Vertical eigenvalues per part (null mode of salinity pinned to 0).
    values: Vec<Vec<f64>>,
    /// `|2πk|²` per layer index.
    k2: Vec<f64>,
    /// Unit longitudinal direction per layer index, zero where `k̃ = 0`.
    khat: Vec<(f64, f64)>,
}

impl SemigroupCache {
    pub fn new(grid: Grid, kind: FieldKind, params: &PhysParams) -> Result<Self> {
        let operator = VerticalOperator::build(grid, kind, params)?;
        Ok(Self::from_parts(Spectral::new(grid), operator))
    }

    pub fn from_parts(spectral: Spectral, operator: VerticalOperator) -> Self {
        let g = *spectral.grid();
        let kind = operator.kind();
        let mut values = vec![operator.basis().eigenvalues().to_vec()];
        if kind == FieldKind::Salinity {
            values[0][0] = 0.0;
        }
        if let Some(sol) = operator.solenoidal_basis() {
            values.push(sol.eigenvalues().to_vec());
        }
        let mut k2 = Vec::with_capacity(g.layer_len());
        let mut khat = Vec::with_capacity(g.layer_len());
        for j in 0..g.ny {
            for i in 0..g.nx {
                k2.push(spectral.k2(i, j));
                let (a, b) = spectral.k_odd(i, j);
                let n = a.hypot(b);
                khat.push(if n > 0.0 { (a / n, b / n) } else { (0.0, 0.0) });
            }
        }
        Self { kind, spectral, operator, values, k2, khat }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn operator(&self) -> &VerticalOperator {
        &self.operator
    }

    /// Smallest total eigenvalue; attained at the horizontal mean mode.
    pub fn decay_rate(&self) -> f64 {
        self.values[0][0]
    }

    fn bases(&self) -> Vec<&VerticalBasis> {
        let mut b = vec![self.operator.basis()];
        if let Some(s) = self.operator.solenoidal_basis() {
            b.push(s);
        }
        b
    }

    fn check_kind<F: ModeField>(&self, f: &F) -> Result<()> {
        if F::IS_VECTOR != (self.kind == FieldKind::Velocity) {
            return Err(Error::DimensionMismatch(format!(
                "{} semigroup applied to a {} field",
                self.kind,
                if F::IS_VECTOR { "vector" } else { "scalar" }
            )));
        }
        if f.grid() != self.grid() {
            return Err(Error::DimensionMismatch("field and semigroup live on different grids".into()));
        }
        Ok(())
    }

    /// Layered spectra to mode coefficients. For velocity this discards the
    /// bottom level and the part outside the discrete solenoidal space.
    pub(crate) fn analyze(&self, comps: &[SpectrumField]) -> Coefficients {
        let stride = self.grid().layer_len();
        let bases = self.bases();
        if self.kind != FieldKind::Velocity {
            return Coefficients { parts: vec![bases[0].analyze(&comps[0].data, stride)] };
        }
        let (s1, s2) = (&comps[0].data, &comps[1].data);
        let len = s1.len();
        let mut long = vec![Complex64::new(0.0, 0.0); len];
        let mut t1 = s1.clone();
        let mut t2 = s2.clone();
        for idx in 0..len {
            let (a, b) = self.khat[idx % stride];
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let l = s1[idx] * a + s2[idx] * b;
            long[idx] = l;
            t1[idx] -= l * a;
            t2[idx] -= l * b;
        }
        Coefficients {
            parts: vec![
                bases[0].analyze(&t1, stride),
                bases[0].analyze(&t2, stride),
                bases[1].analyze(&long, stride),
            ],
        }
    }

    pub(crate) fn synthesize(&self, c: &Coefficients) -> Vec<SpectrumField> {
        let g = *self.grid();
        let stride = g.layer_len();
        let bases = self.bases();
        let mut first = SpectrumField::zeros(g);
        bases[0].synthesize_into(&c.parts[0], stride, &mut first.data);
        if self.kind != FieldKind::Velocity {
            return vec![first];
        }
        let mut second = SpectrumField::zeros(g);
        bases[0].synthesize_into(&c.parts[1], stride, &mut second.data);
        let mut long = vec![Complex64::new(0.0, 0.0); g.len()];
        bases[1].synthesize_into(&c.parts[2], stride, &mut long);
        for (idx, l) in long.iter().enumerate() {
            let (a, b) = self.khat[idx % stride];
            first.data[idx] += l * a;
            second.data[idx] += l * b;
        }
        vec![first, second]
    }

    /// Calls `f(λ_total, coefficient)` for every coefficient.
    pub(crate) fn for_each_mode(&self, c: &mut Coefficients, mut f: impl FnMut(f64, &mut Complex64)) {
        let stride = self.grid().layer_len();
        for (p, part) in c.parts.iter_mut().enumerate() {
            let values = &self.values[if p == 2 { 1 } else { 0 }];
            for (m, row) in part.chunks_exact_mut(stride).enumerate() {
                for (n, coef) in row.iter_mut().enumerate() {
                    f(values[m] + self.k2[n], coef);
                }
            }
        }
    }

    /// Visits `(λ_total, |c|²)` for every coefficient.
    pub(crate) fn for_each_energy(&self, c: &Coefficients, mut f: impl FnMut(f64, f64)) {
        let stride = self.grid().layer_len();
        for (p, part) in c.parts.iter().enumerate() {
            let values = &self.values[if p == 2 { 1 } else { 0 }];
            for (m, row) in part.chunks_exact(stride).enumerate() {
                for (n, coef) in row.iter().enumerate() {
                    f(values[m] + self.k2[n], coef.norm_sqr());
                }
            }
        }
    }

    /// `e^{tA}` in spectral space (spectra must be in the cache's layout).
    pub(crate) fn apply_spectra(&self, comps: &[SpectrumField], t: f64) -> Vec<SpectrumField> {
        let mut c = self.analyze(comps);
        self.for_each_mode(&mut c, |lam, z| *z *= (-lam * t).exp());
        self.synthesize(&c)
    }

    /// Exponential-Euler update `e^{dtA} old + φ1(dt) rhs` in spectral space.
    pub(crate) fn exp_euler_spectra(
        &self,
        old: &[SpectrumField],
        rhs: &[SpectrumField],
        dt: f64,
    ) -> Vec<SpectrumField> {
        let mut a = self.analyze(old);
        let b = self.analyze(rhs);
        let stride = self.grid().layer_len();
        for (p, (pa, pb)) in a.parts.iter_mut().zip(&b.parts).enumerate() {
            let values = &self.values[if p == 2 { 1 } else { 0 }];
            for (m, (ra, rb)) in pa.chunks_exact_mut(stride).zip(pb.chunks_exact(stride)).enumerate() {
                for (n, (za, zb)) in ra.iter_mut().zip(rb).enumerate() {
                    let lam = values[m] + self.k2[n];
                    *za = *za * (-lam * dt).exp() + zb * phi1(lam, dt);
                }
            }
        }
        self.synthesize(&a)
    }

    /// `e^{tA} f`. For velocity the input is projected first, so `t = 0`
    /// returns `P f`.
    pub fn apply<F: ModeField>(&self, f: &F, t: f64) -> Result<F> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidTime("finite and >= 0"));
        }
        self.check_kind(f)?;
        let spectra = f.to_spectra(&self.spectral)?;
        if t == 0.0 {
            if F::IS_VECTOR {
                let v = HVectorField::from_spectra(&self.spectral, &spectra);
                let p = helmholtz_project(&self.spectral, &v)?.projected;
                return Ok(F::from_spectra(&self.spectral, &p.to_spectra(&self.spectral)?));
            }
            return Ok(f.clone());
        }
        Ok(F::from_spectra(&self.spectral, &self.apply_spectra(&spectra, t)))
    }

    /// `φ1(tA) f = ∫_0^t e^{sA} f ds`, coefficientwise `(1 − e^{−λt})/λ`.
    pub fn phi1_apply<F: ModeField>(&self, f: &F, t: f64) -> Result<F> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidTime("finite and > 0"));
        }
        self.check_kind(f)?;
        let mut c = self.analyze(&f.to_spectra(&self.spectral)?);
        self.for_each_mode(&mut c, |lam, z| *z *= phi1(lam, t));
        Ok(F::from_spectra(&self.spectral, &self.synthesize(&c)))
    }

    /// `(Σ (1 + λ_total)^s |c|²)^{1/2}` over the eigen-expansion, `s ∈ [0, 2]`.
    ///
    /// Velocity inputs are measured through their discrete solenoidal part.
    pub fn fractional_h_norm<F: ModeField>(&self, f: &F, s: f64) -> Result<f64> {
        if !(0.0..=2.0).contains(&s) {
            return Err(Error::OutOfRange(format!("fractional order {s}, expected [0, 2]")));
        }
        self.check_kind(f)?;
        let c = self.analyze(&f.to_spectra(&self.spectral)?);
        let mut acc = 0.0;
        self.for_each_energy(&c, |lam, e| acc += (1.0 + lam).powf(s) * e);
        Ok(acc.sqrt())
    }

    /// `(λ_total, |c|²)` for every mode of `f`.
    pub fn mode_energies<F: ModeField>(&self, f: &F) -> Result<Vec<(f64, f64)>> {
        self.check_kind(f)?;
        let c = self.analyze(&f.to_spectra(&self.spectral)?);
        let mut out = Vec::new();
        self.for_each_energy(&c, |lam, e| out.push((lam, e)));
        Ok(out)
    }

    /// Random real field of unit `L²` norm with `λ |c_λ|²` flat in `λ`: the
    /// distinct positive eigenvalues `λ_j` share the trapezoid weight
    /// `(λ_{j+1} − λ_{j−1}) / 2λ_j` equally among their modes, with random
    /// phases. Then `Σ λ |c|² e^{−2λt}` is a trapezoid sum for `∫ e^{−2λt} dλ`,
    /// so `‖(−A)^{1/2} e^{tA} f‖ ∝ t^{−1/2}` for `1/λ_max ≪ t ≪ 1/λ_min`.
    /// Such data lie in `L²` but in no `H^s`, `s > 0`, uniformly in the
    /// resolution.
    pub fn rough_field<F: ModeField>(&self, seed: u64) -> Result<F> {
        let g = *self.grid();
        let zero: Vec<SpectrumField> = (0..if F::IS_VECTOR { 2 } else { 1 }).map(|_| SpectrumField::zeros(g)).collect();
        let mut c = self.analyze(&zero);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.for_each_mode(&mut c, |_, z| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re, im);
        });
        // Round trip through a real field pairs the coefficients of ±k.
        let real = F::from_spectra(&self.spectral, &self.synthesize(&c));
        let mut c = self.analyze(&real.to_spectra(&self.spectral)?);
        let mut modes = Vec::new();
        self.for_each_energy(&c, |lam, e| modes.push((lam, e)));
        let floor = 1e-20 * modes.iter().map(|m| m.1).fold(0.0, f64::max);
        let live = |(lam, e): (f64, f64)| lam > PHI1_THRESHOLD && e > floor;
        let mut lams: Vec<f64> = modes.iter().copied().filter(|&m| live(m)).map(|m| m.0).collect();
        lams.sort_by(f64::total_cmp);
        let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b;
        let mut levels: Vec<(f64, usize)> = Vec::new();
        for lam in lams {
            match levels.last_mut() {
                Some((v, n)) if same(lam, *v) => *n += 1,
                _ => levels.push((lam, 1)),
            }
        }
        if levels.is_empty() {
            return Err(Error::InvalidParameter("grid too coarse for a rough field".into()));
        }
        let k = levels.len();
        let share: Vec<f64> = (0..k)
            .map(|j| {
                let lo = if j == 0 { 0.0 } else { levels[j - 1].0 };
                let hi = levels[(j + 1).min(k - 1)].0;
                0.5 * (hi - lo) / levels[j].0 / levels[j].1 as f64
            })
            .collect();
        let target = |lam: f64| {
            let j = levels.partition_point(|l| l.0 < lam && !same(lam, l.0));
            share[j.min(k - 1)]
        };
        let mut n = 0;
        self.for_each_mode(&mut c, |lam, z| {
            let m = modes[n];
            n += 1;
            *z = if live(m) { *z * (target(lam) / m.1).sqrt() } else { Complex64::new(0.0, 0.0) };
        });
        // A few rescaled coefficients are not those of a real field; take the
        // real part once more before normalizing.
        let real = F::from_spectra(&self.spectral, &self.synthesize(&c));
        let mut c = self.analyze(&real.to_spectra(&self.spectral)?);
        let mut total = 0.0;
        self.for_each_energy(&c, |_, e| total += e);
        let norm = total.sqrt();
        self.for_each_mode(&mut c, |_, z| *z /= norm);
        Ok(F::from_spectra(&self.spectral, &self.synthesize(&c)))
    }

    /// `‖(−A)^{1/2} e^{tA} f‖₂ = (Σ λ |c|² e^{−2λt})^{1/2}`, `t ≥ 0`.
    pub fn dissipation_after<F: ModeField>(&self, f: &F, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidTime("finite and >= 0"));
        }
        self.check_kind(f)?;
        let c = self.analyze(&f.to_spectra(&self.spectral)?);
        let mut acc = 0.0;
        self.for_each_energy(&c, |lam, e| acc += lam * e * (-2.0 * lam * t).exp());
        Ok(acc.sqrt())
    }

    fn horizontal_index(&self, kx: i64, ky: i64) -> Result<(usize, usize)> {
        let g = self.grid();
        let find = |k: i64, n: usize| (0..n).find(|&i| signed_wavenumber(i, n) == k);
        match (find(kx, g.nx), find(ky, g.ny)) {
            (Some(i), Some(j)) => Ok((i, j)),
            _ => Err(Error::OutOfRange(format!("wavenumber ({kx}, {ky}) not resolved"))),
        }
    }

    /// Real scalar eigenmode `cos(2π(kx x + ky y)) u_m(z)` and its total
    /// eigenvalue.
    pub fn scalar_eigenmode(&self, kx: i64, ky: i64, m: usize) -> Result<(ScalarField, f64)> {
        if self.kind == FieldKind::Velocity {
            return Err(Error::DimensionMismatch("velocity cache has vector eigenmodes".into()));
        }
        let (i, j) = self.horizontal_index(kx, ky)?;
        let u = self.vertical_mode(0, m)?;
        let g = *self.grid();
        let mut f = ScalarField::zeros(g);
        fill_mode(&mut f, &u, kx, ky, 1.0);
        Ok((f, self.values[0][m] + self.spectral.k2(i, j)))
    }

    /// Transverse velocity eigenmode `e⊥ cos(2π(kx x + ky y)) u_m(z)`, with
    /// `e⊥ = (1, 0)` at `k = 0`, and its total eigenvalue.
    pub fn velocity_eigenmode(&self, kx: i64, ky: i64, m: usize) -> Result<(HVectorField, f64)> {
        if self.kind != FieldKind::Velocity {
            return Err(Error::DimensionMismatch("scalar cache has scalar eigenmodes".into()));
        }
        let (i, j) = self.horizontal_index(kx, ky)?;
        let u = self.vertical_mode(0, m)?;
        let (a, b) = self.spectral.k_odd(i, j);
        let n = a.hypot(b);
        let (e1, e2) = if n > 0.0 { (-b / n, a / n) } else { (1.0, 0.0) };
        let g = *self.grid();
        let mut v = HVectorField::zeros(g);
        fill_mode(&mut v.v1, &u, kx, ky, e1);
        fill_mode(&mut v.v2, &u, kx, ky, e2);
        Ok((v, self.values[0][m] + self.spectral.k2(i, j)))
    }

    /// Longitudinal velocity eigenmode `k̂ sin(2π(kx x + ky y)) ψ_m(z)` with
    /// `ψ_m` of zero vertical mean; requires `k̃ ≠ 0`.
    pub fn longitudinal_eigenmode(&self, kx: i64, ky: i64, m: usize) -> Result<(HVectorField, f64)> {
        if self.kind != FieldKind::Velocity {
            return Err(Error::DimensionMismatch("scalar cache has scalar eigenmodes".into()));
        }
        let (i, j) = self.horizontal_index(kx, ky)?;
        let (a, b) = self.spectral.k_odd(i, j);
        let n = a.hypot(b);
        if n == 0.0 {
            return Err(Error::OutOfRange("longitudinal modes need a nonzero wavevector".into()));
        }
        let u = self.vertical_mode(1, m)?;
        let g = *self.grid();
        let mut v = HVectorField::zeros(g);
        fill_sine_mode(&mut v.v1, &u, kx, ky, a / n);
        fill_sine_mode(&mut v.v2, &u, kx, ky, b / n);
        Ok((v, self.values[1][m] + self.spectral.k2(i, j)))
    }

    fn vertical_mode(&self, part: usize, m: usize) -> Result<Vec<f64>> {
        let bases = self.bases();
        let b = bases[part];
        if m >= b.len() {
            return Err(Error::OutOfRange(format!("vertical mode {m} of {}", b.len())));
        }
        Ok(b.eigenvector(m, self.grid().levels()))
    }
}

fn fill_mode(f: &mut ScalarField, u: &[f64], kx: i64, ky: i64, amp: f64) {
    fill_with(f, u, kx, ky, amp, f64::cos);
}

fn fill_sine_mode(f: &mut ScalarField, u: &[f64], kx: i64, ky: i64, amp: f64) {
    fill_with(f, u, kx, ky, amp, f64::sin);
}

fn fill_with(f: &mut ScalarField, u: &[f64], kx: i64, ky: i64, amp: f64, wave: fn(f64) -> f64) {
    let g = *f.grid();
    let tau = 2.0 * std::f64::consts::PI;
    for k in 0..g.levels() {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let phase = tau * (kx as f64 * g.x(i) + ky as f64 * g.y(j));
                f.data[g.idx(i, j, k)] = amp * wave(phase) * u[k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydrostatic::averaged_divergence;
    use crate::norms::{lp_norm, Components};

    fn grid() -> Grid {
        Grid::new(8, 8, 8, 1.0).unwrap()
    }

    fn cache(kind: FieldKind) -> SemigroupCache {
        SemigroupCache::new(grid(), kind, &PhysParams::default()).unwrap()
    }

    fn random_scalar(g: Grid, seed: u64) -> ScalarField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ScalarField::from_vec(g, (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn l2<F: Components>(f: &F) -> f64 {
        lp_norm(f, 2.0).unwrap()
    }

    #[test]
    fn phi1_limits() {
        assert_eq!(phi1(0.0, 0.3), 0.3);
        assert!((phi1(1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((phi1(1e-6, 2.0) - 2.0).abs() < 1e-5);
    }

    #[test]
    fn negative_time_is_rejected() {
        let c = cache(FieldKind::Temperature);
        let f = ScalarField::zeros(grid());
        assert!(c.apply(&f, -1.0).is_err());
        assert!(c.phi1_apply(&f, 0.0).is_err());
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let c = cache(FieldKind::Velocity);
        assert!(c.apply(&ScalarField::zeros(grid()), 0.1).is_err());
    }

    #[test]
    fn eigenmodes_decay_exactly() {
        let c = cache(FieldKind::Temperature);
        let (f, lam) = c.scalar_eigenmode(1, -2, 3).unwrap();
        let out = c.apply(&f, 0.05).unwrap();
        assert!(out.sub(&f.scaled((-lam * 0.05).exp())).max_abs() < 1e-12);
        let cv = cache(FieldKind::Velocity);
        for (v, lam) in [cv.velocity_eigenmode(2, 1, 1).unwrap(), cv.longitudinal_eigenmode(1, 0, 2).unwrap()] {
            let out = cv.apply(&v, 0.02).unwrap();
            assert!(out.sub(&v.scaled((-lam * 0.02).exp())).max_abs() < 1e-12);
        }
    }

    #[test]
    fn salinity_constant_is_frozen() {
        let c = cache(FieldKind::Salinity);
        assert_eq!(c.decay_rate(), 0.0);
        let f = ScalarField::constant(grid(), 2.5);
        let out = c.apply(&f, 10.0).unwrap();
        assert!(out.sub(&f).max_abs() < 1e-12);
    }

    #[test]
    fn composition_and_contraction() {
        for kind in FieldKind::ALL {
            let c = cache(kind);
            if kind == FieldKind::Velocity {
                let g = grid();
                let v = HVectorField::new(random_scalar(g, 1), random_scalar(g, 2)).unwrap();
                let a = c.apply(&c.apply(&v, 0.01).unwrap(), 0.02).unwrap();
                let b = c.apply(&v, 0.03).unwrap();
                assert!(a.sub(&b).max_abs() < 1e-12);
                assert!(l2(&b) <= l2(&c.apply(&v, 0.0).unwrap()));
                assert!(averaged_divergence(c.spectral(), &b).max_abs() < 1e-12);
                assert!(b.v1.layer(0).iter().all(|x| x.abs() < 1e-14));
            } else {
                let f = random_scalar(grid(), 3);
                let a = c.apply(&c.apply(&f, 0.01).unwrap(), 0.02).unwrap();
                let b = c.apply(&f, 0.03).unwrap();
                assert!(a.sub(&b).max_abs() < 1e-12);
                let bound = if kind == FieldKind::Salinity { 1.0 } else { (-c.decay_rate() * 0.03).exp() };
                assert!(l2(&b) <= bound * l2(&f) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn fractional_norm_basics() {
        let c = cache(FieldKind::Temperature);
        let f = random_scalar(grid(), 4);
        let n0 = c.fractional_h_norm(&f, 0.0).unwrap();
        assert!((n0 - l2(&f)).abs() < 1e-12 * n0);
        let (m, lam) = c.scalar_eigenmode(1, 1, 0).unwrap();
        let n = c.fractional_h_norm(&m, 1.3).unwrap();
        assert!((n - (1.0 + lam).powf(0.65) * l2(&m)).abs() < 1e-12 * n);
        assert!(c.fractional_h_norm(&f, 2.5).is_err());
        let mut prev = 0.0;
        for k in 0..=8 {
            let v = c.fractional_h_norm(&f, k as f64 * 0.25).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn phi1_derivative_at_zero() {
        let c = cache(FieldKind::Temperature);
        let f = random_scalar(grid(), 9);
        let t = 1e-7;
        let d = c.phi1_apply(&f, t).unwrap().scaled(1.0 / t);
        assert!(d.sub(&f).max_abs() < 1e-3 * f.max_abs());
    }

    #[test]
    fn rough_data_smooth_at_half_rate() {
        let g = Grid::new(32, 32, 32, 1.0).unwrap();
        for kind in [FieldKind::Temperature, FieldKind::Velocity] {
            let c = SemigroupCache::new(g, kind, &PhysParams::default()).unwrap();
            let (t1, t2) = (1e-4, 1e-3);
            let (d1, d2) = if kind == FieldKind::Velocity {
                let f: HVectorField = c.rough_field(5).unwrap();
                assert!((c.fractional_h_norm(&f, 0.0).unwrap() - 1.0).abs() < 1e-12);
                (c.dissipation_after(&f, t1).unwrap(), c.dissipation_after(&f, t2).unwrap())
            } else {
                let f: ScalarField = c.rough_field(5).unwrap();
                assert!((l2(&f) - 1.0).abs() < 1e-12);
                (c.dissipation_after(&f, t1).unwrap(), c.dissipation_after(&f, t2).unwrap())
            };
            let slope = (d2 / d1).ln() / (t2 / t1).ln();
            assert!((slope + 0.5).abs() < 0.05, "{kind}: slope {slope}");
        }
    }
}
