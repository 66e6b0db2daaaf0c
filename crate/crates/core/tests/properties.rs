use primeq::hydrostatic::{averaged_divergence, baroclinic_gradient, helmholtz_project, reconstruct_w};
use primeq::norms::{anisotropic_norm, lp_norm, sobolev_norm};
use primeq::profiles::{random_smooth_temperature, random_smooth_velocity, white_noise, SmoothSpec};
use primeq::semigroup::phi1;
use primeq::{FieldKind, Grid, HVectorField, PhysParams, ScalarField, SemigroupCache, Spectral, SurfaceScalarField};
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid() -> Grid {
    Grid::new(8, 8, 6, 1.0).unwrap()
}

fn noise_vec(g: Grid, seed: u64) -> HVectorField {
    HVectorField { v1: white_noise(g, seed, 1.0), v2: white_noise(g, seed.wrapping_add(1), 1.0) }
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(4.0), Just(f64::INFINITY), 1.0f64..6.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lp_norm_is_homogeneous(seed in any::<u64>(), c in -1e3f64..1e3, p in exponent()) {
        let f = white_noise(grid(), seed, 1.0);
        let a = lp_norm(&f.scaled(c), p).unwrap();
        let b = c.abs() * lp_norm(&f, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-13 * b.max(1e-300));
    }

    #[test]
    fn lp_triangle_inequality(s1 in any::<u64>(), s2 in any::<u64>(), p in exponent()) {
        let f = noise_vec(grid(), s1);
        let g = noise_vec(grid(), s2);
        let lhs = lp_norm(&f.add(&g), p).unwrap();
        let rhs = lp_norm(&f, p).unwrap() + lp_norm(&g, p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-13));
    }

    #[test]
    fn anisotropic_holder(s1 in any::<u64>(), s2 in any::<u64>(), p1 in 2.0f64..8.0, p2 in 2.0f64..8.0,
                          q1 in 2.0f64..8.0, q2 in 2.0f64..8.0) {
        let g = grid();
        let spec = SmoothSpec::default();
        let f = random_smooth_temperature(g, &PhysParams::default(), s1, 1.0, spec).unwrap();
        let h = random_smooth_temperature(g, &PhysParams::default(), s2, 1.0, spec).unwrap();
        let p = 1.0 / (1.0 / p1 + 1.0 / p2);
        let q = 1.0 / (1.0 / q1 + 1.0 / q2);
        let lhs = anisotropic_norm(&f.mul(&h), q, p).unwrap();
        let rhs = anisotropic_norm(&f, q1, p1).unwrap() * anisotropic_norm(&h, q2, p2).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn projection_is_idempotent_and_solenoidal(seed in any::<u64>()) {
        let g = grid();
        let sp = Spectral::new(g);
        let v = noise_vec(g, seed);
        let p = helmholtz_project(&sp, &v).unwrap().projected;
        let pp = helmholtz_project(&sp, &p).unwrap().projected;
        let n = lp_norm(&v, 2.0).unwrap();
        prop_assert!(lp_norm(&pp.sub(&p), 2.0).unwrap() <= 1e-12 * n);
        prop_assert!(averaged_divergence(&sp, &p).l2() <= 1e-10 * n);
        let w = reconstruct_w(&sp, &p);
        prop_assert!(w.level(g.nz).max_abs() <= 1e-8 * n);
        prop_assert!(w.level(0).max_abs() == 0.0);
    }

    #[test]
    fn projection_is_orthogonal_to_gradients(seed in any::<u64>(), kx in -3i64..=3, ky in -3i64..=3, phase in 0.0f64..6.3) {
        let g = grid();
        let sp = Spectral::new(g);
        let p = helmholtz_project(&sp, &noise_vec(g, seed)).unwrap().projected;
        let wave = |x: f64, y: f64| (2.0 * PI * (kx as f64 * x + ky as f64 * y) + phase).cos();
        let mean = SurfaceScalarField::from_fn(g, wave).mean();
        let q = SurfaceScalarField::from_fn(g, |x, y| wave(x, y) - mean);
        let (gx, gy) = sp.surface_gradient(&q);
        let (a1, a2) = primeq::hydrostatic::vertical_average(&p);
        let pairing = a1.dot(&gx) + a2.dot(&gy);
        prop_assert!(pairing.abs() <= 1e-10 * (1.0 + gx.l2() + gy.l2()) * lp_norm(&p, 2.0).unwrap().max(1.0));
    }

    #[test]
    fn semigroup_composes_and_contracts(seed in any::<u64>(), s in 0.0f64..0.05, t in 0.0f64..0.05, kind_ix in 0usize..3) {
        let g = grid();
        let kind = [FieldKind::Velocity, FieldKind::Temperature, FieldKind::Salinity][kind_ix];
        let c = SemigroupCache::new(g, kind, &PhysParams::default()).unwrap();
        if kind == FieldKind::Velocity {
            let f = c.apply(&noise_vec(g, seed), 0.0).unwrap();
            let a = c.apply(&c.apply(&f, s).unwrap(), t).unwrap();
            let b = c.apply(&f, s + t).unwrap();
            prop_assert!(a.sub(&b).max_abs() <= 1e-12 * f.max_abs());
            let bound = (-c.decay_rate() * (s + t)).exp();
            prop_assert!(lp_norm(&b, 2.0).unwrap() <= bound * lp_norm(&f, 2.0).unwrap() * (1.0 + 1e-12));
        } else {
            let f = white_noise(g, seed, 1.0);
            let a = c.apply(&c.apply(&f, s).unwrap(), t).unwrap();
            let b = c.apply(&f, s + t).unwrap();
            prop_assert!(a.sub(&b).max_abs() <= 1e-12 * f.max_abs());
            let bound = (-c.decay_rate() * (s + t)).exp();
            prop_assert!(lp_norm(&b, 2.0).unwrap() <= bound * lp_norm(&f, 2.0).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn phi1_is_bounded_by_time(lambda in 0.0f64..1e6, t in 0.0f64..10.0) {
        let v = phi1(lambda, t);
        prop_assert!(v >= 0.0 && v <= t * (1.0 + 1e-15));
        prop_assert!(v <= 1.0 / lambda.max(1e-300) * (1.0 + 1e-15) || lambda < 1e-12);
    }

    #[test]
    fn fractional_norm_is_monotone(seed in any::<u64>(), s1 in 0.0f64..2.0, s2 in 0.0f64..2.0) {
        let g = grid();
        let c = SemigroupCache::new(g, FieldKind::Temperature, &PhysParams::default()).unwrap();
        let f = white_noise(g, seed, 1.0);
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(c.fractional_h_norm(&f, lo).unwrap() <= c.fractional_h_norm(&f, hi).unwrap() * (1.0 + 1e-14));
    }

    #[test]
    fn buoyancy_gradient_bound(s1 in any::<u64>(), s2 in any::<u64>(), bt in 0.1f64..3.0, bs in 0.1f64..3.0) {
        let g = grid();
        let sp = Spectral::new(g);
        let params = PhysParams::new(1.0, bt, bs).unwrap();
        let tau = random_smooth_temperature(g, &params, s1, 1.0, SmoothSpec::default()).unwrap();
        let sigma = white_noise(g, s2, 1.0);
        let sigma = sp.ihfft(&{ let mut s = sp.hfft(&sigma).unwrap(); sp.dealias(&mut s); s }).unwrap();
        let pi = baroclinic_gradient(&sp, &tau, &sigma, &params).unwrap();
        let grad = |f: &ScalarField| {
            let dx = sp.horizontal_derivative(f, primeq::Axis::X, 1).unwrap();
            let dy = sp.horizontal_derivative(f, primeq::Axis::Y, 1).unwrap();
            lp_norm(&dx, 2.0).unwrap().powi(2) + lp_norm(&dy, 2.0).unwrap().powi(2)
        };
        let bound = g.h * params.max_beta() * (grad(&tau) + grad(&sigma)).sqrt();
        prop_assert!(lp_norm(&pi, 2.0).unwrap() <= bound * (1.0 + 1e-10));
    }

    #[test]
    fn random_smooth_velocity_is_solenoidal(seed in any::<u64>()) {
        let g = grid();
        let sp = Spectral::new(g);
        let v = random_smooth_velocity(g, seed, 1.0, SmoothSpec::default());
        prop_assert!(averaged_divergence(&sp, &v).max_abs() < 1e-12);
        prop_assert!(v.v1.layer(0).iter().chain(v.v2.layer(0)).all(|x| *x == 0.0));
        prop_assert!(sobolev_norm(&sp, &v, 1).unwrap().is_finite());
    }
}
