//! Quadrature and the norm library.
//!
//! Horizontal integrals are exact means over the periodic samples; vertical
//! integrals use the trapezoid rule. Vector fields are measured through their
//! pointwise Euclidean magnitude.

use crate::error::{Error, Result};
use crate::field::{HVectorField, ScalarField};
use crate::spectral::{Axis, Spectral, SpectrumField};
use crate::vertical::vertical_derivative;

/// Scalar or horizontal-vector field, seen as a list of components.
pub trait Components {
    fn components(&self) -> Vec<&ScalarField>;

    fn check_finite(&self) -> Result<()> {
        for c in self.components() {
            c.check_finite()?;
        }
        Ok(())
    }

    /// `|f|` at flat index `n`.
    fn magnitude_at(&self, n: usize) -> f64 {
        self.components().iter().map(|c| c.data[n] * c.data[n]).sum::<f64>().sqrt()
    }
}

impl Components for ScalarField {
    fn components(&self) -> Vec<&ScalarField> {
        vec![self]
    }

    fn magnitude_at(&self, n: usize) -> f64 {
        self.data[n].abs()
    }
}

impl Components for HVectorField {
    fn components(&self) -> Vec<&ScalarField> {
        vec![&self.v1, &self.v2]
    }
}

/// Per-level horizontal means.
pub(crate) fn level_means(f: &ScalarField) -> Vec<f64> {
    let n = f.grid().layer_len() as f64;
    (0..f.grid().levels()).map(|k| f.layer(k).iter().sum::<f64>() / n).collect()
}

/// Trapezoid rule over levels.
pub(crate) fn vertical_quadrature(per_level: &[f64], weights: &[f64]) -> f64 {
    per_level.iter().zip(weights).map(|(a, w)| a * w).sum()
}

/// `∫_Ω f` without the finiteness check.
pub(crate) fn integral(f: &ScalarField) -> f64 {
    vertical_quadrature(&level_means(f), &f.grid().trapezoid_weights())
}

/// `∫_Ω f g`.
pub fn inner(f: &ScalarField, g: &ScalarField) -> f64 {
    let lay = f.grid().layer_len();
    let w = f.grid().trapezoid_weights();
    (0..f.grid().levels())
        .map(|k| {
            let s: f64 = f.layer(k).iter().zip(g.layer(k)).map(|(a, b)| a * b).sum();
            w[k] * s / lay as f64
        })
        .sum()
}

/// `∫_Ω v · u` for horizontal vectors.
pub fn inner_vec(v: &HVectorField, u: &HVectorField) -> f64 {
    inner(&v.v1, &u.v1) + inner(&v.v2, &u.v2)
}

/// `∫_Ω f`.
pub fn integrate(f: &ScalarField) -> Result<f64> {
    f.check_finite()?;
    Ok(integral(f))
}

/// `‖f‖_{L^p(Ω)}` for `p ∈ [1, ∞]`.
pub fn lp_norm<F: Components + ?Sized>(f: &F, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    f.check_finite()?;
    anisotropic_unchecked(f, p, p)
}

/// `‖f‖_{L^{q_z}_z L^{p_xy}_{xy}}`: the vertical `L^{q_z}` norm of
/// `z ↦ ‖f(·, ·, z)‖_{L^{p_xy}(G)}`.
pub fn anisotropic_norm<F: Components + ?Sized>(f: &F, q_z: f64, p_xy: f64) -> Result<f64> {
    for p in [q_z, p_xy] {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
    }
    f.check_finite()?;
    anisotropic_unchecked(f, q_z, p_xy)
}

fn anisotropic_unchecked<F: Components + ?Sized>(f: &F, q_z: f64, p_xy: f64) -> Result<f64> {
    let comps = f.components();
    let g = *comps[0].grid();
    let lay = g.layer_len();
    let per_level: Vec<f64> = (0..g.levels())
        .map(|k| {
            let range = k * lay..(k + 1) * lay;
            if p_xy.is_infinite() {
                range.map(|n| f.magnitude_at(n)).fold(0.0, f64::max)
            } else if p_xy == 2.0 {
                (range.map(|n| comps.iter().map(|c| c.data[n] * c.data[n]).sum::<f64>()).sum::<f64>()
                    / lay as f64)
                    .sqrt()
            } else {
                (range.map(|n| f.magnitude_at(n).powf(p_xy)).sum::<f64>() / lay as f64).powf(1.0 / p_xy)
            }
        })
        .collect();
    if q_z.is_infinite() {
        return Ok(per_level.into_iter().fold(0.0, f64::max));
    }
    let w = g.trapezoid_weights();
    let s: f64 = per_level.iter().zip(&w).map(|(a, w)| w * a.powf(q_z)).sum();
    Ok(s.powf(1.0 / q_z))
}

/// `H^order` norm, `order ∈ {0, 1, 2}`: square root of the summed squared
/// `L²` norms of `f` and all its partial derivatives up to `order` (mixed
/// derivatives counted once). Horizontal derivatives are spectral, vertical
/// ones use [`vertical_derivative`].
pub fn sobolev_norm<F: Components + ?Sized>(sp: &Spectral, f: &F, order: u32) -> Result<f64> {
    if order > 2 {
        return Err(Error::OutOfRange(format!("Sobolev order {order}, expected 0..=2")));
    }
    f.check_finite()?;
    let mut total = 0.0;
    for c in f.components() {
        total += sobolev_sq(sp, c, order);
    }
    Ok(total.sqrt())
}

fn sq(f: &ScalarField) -> f64 {
    inner(f, f)
}

fn sobolev_sq(sp: &Spectral, f: &ScalarField, order: u32) -> f64 {
    let mut total = sq(f);
    if order == 0 {
        return total;
    }
    let s = sp.forward(f);
    let dx = sp.inverse(&sp.derivative_spectrum(&s, Axis::X, 1));
    let dy = sp.inverse(&sp.derivative_spectrum(&s, Axis::Y, 1));
    let dz = vertical_derivative(f);
    total += sq(&dx) + sq(&dy) + sq(&dz);
    if order == 1 {
        return total;
    }
    let dxx = sp.inverse(&sp.derivative_spectrum(&s, Axis::X, 2));
    let dyy = sp.inverse(&sp.derivative_spectrum(&s, Axis::Y, 2));
    let dxy = sp.inverse(&sp.derivative_spectrum(&sp.derivative_spectrum(&s, Axis::X, 1), Axis::Y, 1));
    let dzz = vertical_derivative(&dz);
    let dxz = vertical_derivative(&dx);
    let dyz = vertical_derivative(&dy);
    total + sq(&dxx) + sq(&dyy) + sq(&dzz) + sq(&dxy) + sq(&dxz) + sq(&dyz)
}

/// `∫_Ω |f|²` of a real field from its layered spectrum (Parseval).
pub(crate) fn spectrum_energy(s: &SpectrumField) -> f64 {
    let w = s.grid().trapezoid_weights();
    (0..w.len()).map(|k| w[k] * s.layer(k).iter().map(|c| c.norm_sqr()).sum::<f64>()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(16, 16, 8, 1.0).unwrap()
    }

    #[test]
    fn integrate_basics() {
        let g = grid();
        assert!((integrate(&ScalarField::constant(g, 1.0)).unwrap() - 1.0).abs() < 1e-14);
        let s = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        assert!(integrate(&s).unwrap().abs() < 1e-15);
        let mut bad = ScalarField::zeros(g);
        bad.data[3] = f64::NAN;
        assert_eq!(integrate(&bad), Err(Error::NonFinite));
    }

    #[test]
    fn lp_of_sine() {
        let g = grid();
        let s = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        assert!((lp_norm(&s, 2.0).unwrap() - 0.5_f64.sqrt()).abs() < 1e-14);
        // 16 samples include x = 1/4 exactly
        assert!((lp_norm(&s, f64::INFINITY).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(lp_norm(&s, 0.5), Err(Error::InvalidExponent(_))));
        for p in [1.0, 3.0, f64::INFINITY] {
            assert!((lp_norm(&ScalarField::constant(g, 1.0), p).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn anisotropic_special_cases() {
        let g = Grid::new(8, 8, 8, 2.0).unwrap();
        let c = ScalarField::constant(g, -3.0);
        assert!((anisotropic_norm(&c, 4.0, 1.5).unwrap() - 3.0 * 2.0_f64.powf(0.25)).abs() < 1e-13);
        let s = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        assert!((anisotropic_norm(&s, f64::INFINITY, 2.0).unwrap() - 0.5_f64.sqrt()).abs() < 1e-14);
        let r = ScalarField::from_fn(g, |x, y, z| (x * 7.0 + y).sin() * z.exp());
        for p in [1.0, 2.0, 3.5] {
            let a = anisotropic_norm(&r, p, p).unwrap();
            let b = lp_norm(&r, p).unwrap();
            assert!((a - b).abs() < 1e-14 * b);
        }
    }

    #[test]
    fn sobolev_of_sine() {
        let g = grid();
        let sp = Spectral::new(g);
        let s = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        let expect = (0.5 + 4.0 * PI * PI * 0.5).sqrt();
        assert!((sobolev_norm(&sp, &s, 1).unwrap() - expect).abs() < 1e-12);
        assert!((sobolev_norm(&sp, &s, 1).unwrap() - 4.4988).abs() < 1e-4);
        let one = ScalarField::constant(g, 1.0);
        assert!((sobolev_norm(&sp, &one, 1).unwrap() - 1.0).abs() < 1e-13);
        assert!((sobolev_norm(&sp, &s, 0).unwrap() - lp_norm(&s, 2.0).unwrap()).abs() < 1e-15);
        assert!(sobolev_norm(&sp, &s, 3).is_err());
    }
}
