//! Property tests for the geometric and algebraic invariants.

use std::f64::consts::PI;

use fluxknot::energy::surface_volume;
use fluxknot::metric::{metric_at, TubeConfig};
use fluxknot::quadrature::{QuadratureSpec, Rule};
use fluxknot::rrc::{
    frenet_rrc, gamma_components, helical_frame, stretching_term, triad_rrc, triad_rrc_fd, FieldState, RrcTable,
};
use fluxknot::shape::{AxialFactor, ShapeFunction, ShapePreset};
use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

fn shape_strategy() -> impl Strategy<Value = ShapeFunction> {
    (0.2..1.0f64, -0.1..0.1f64, 0.0..1.0f64, 0.0..0.3f64, 0.3..1.0f64, -0.2..0.2f64, 0u8..4).prop_map(
        |(base, amp, rate, c0, c1, phi_amp, mode)| {
            ShapePreset::Separable {
                axial: AxialFactor::Exponential { base, amp, rate },
                c0,
                c1,
                phi_amp,
                phi_mode: mode as f64,
            }
            .into()
        },
    )
}

fn tube_strategy() -> impl Strategy<Value = TubeConfig> {
    (3.0..10.0f64, -2i64..=2, 0.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(l, n, k, t)| TubeConfig::new(l, n, k, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn frenet_coefficients_are_antisymmetric(kappa in 0.0..10.0f64, tau in -10.0..10.0f64) {
        let t = frenet_rrc(kappa, tau).table();
        prop_assert_eq!(t, -t.transpose());
    }

    #[test]
    fn gram_identities(shape in shape_strategy(), cfg in tube_strategy(),
                       s in 0.0..3.0f64, chi in 0.1..=1.0f64, phi in 0.0..2.0 * PI) {
        let m = metric_at(&shape, &cfg, s, chi, phi);
        prop_assume!(m.valid);
        prop_assert_eq!(m.g, m.g.transpose());
        let triple = m.triad.triple_product();
        prop_assert!((m.det_g - triple * triple).abs() <= 1e-12 * (triple * triple).max(1.0));
        prop_assert!(m.g.cholesky().is_some());
        prop_assert!((m.sqrt_g - m.det_g.sqrt()).abs() <= 1e-10 * m.sqrt_g.max(1.0));
    }

    #[test]
    fn reconstructed_triad_has_the_same_metric(shape in shape_strategy(), cfg in tube_strategy(),
                                               s in 0.0..3.0f64, chi in 0.1..=1.0f64, phi in 0.0..2.0 * PI) {
        let frame = helical_frame(&cfg, s);
        let e = gamma_components(&shape, &cfg, s, chi, phi).reconstruct(&frame);
        let g = Matrix3::from_fn(|i, j| e[i].dot(&e[j]));
        let want = metric_at(&shape, &cfg, s, chi, phi).g;
        prop_assert!((g - want).amax() <= 1e-12 * want.amax().max(1.0));
    }

    #[test]
    fn analytic_rrc_matches_finite_differences(shape in shape_strategy(), cfg in tube_strategy(),
                                               s in 0.5..2.5f64, chi in 0.2..=1.0f64, phi in 0.0..2.0 * PI,
                                               i in 0usize..3, px in -1.0..1.0f64, py in -1.0..1.0f64, pz in -1.0..1.0f64) {
        let probe = Vector3::new(px, py, pz);
        let a = triad_rrc(&shape, &cfg, s, chi, phi, &probe, i);
        let b = triad_rrc_fd(&shape, &cfg, s, chi, phi, &probe, i, 1e-3);
        prop_assert!((a - b).abs() < 1e-6, "{} vs {}", a, b);
    }

    #[test]
    fn lowered_and_mixed_coefficients_agree(shape in shape_strategy(), cfg in tube_strategy(),
                                            s in 0.0..3.0f64, chi in 0.2..=1.0f64, phi in 0.0..2.0 * PI) {
        let t = RrcTable::build(&shape, &cfg, s, chi, phi).unwrap();
        let g = metric_at(&shape, &cfg, s, chi, phi).g;
        for a in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    let lowered: f64 = (0..3).map(|j| g[(k, j)] * t.mixed[a][j][i]).sum();
                    prop_assert!((lowered - t.lowered[a][k][i]).abs() <= 1e-10 * (1.0 + t.lowered[a][k][i].abs()));
                }
            }
        }
    }

    #[test]
    fn stretching_term_is_bilinear(shape in shape_strategy(), cfg in tube_strategy(),
                                   b1 in -2.0..2.0f64, b3 in -2.0..2.0f64, c1 in -2.0..2.0f64, c3 in -2.0..2.0f64,
                                   alpha in -3.0..3.0f64, v in prop::array::uniform3(-1.0..1.0f64)) {
        let t = RrcTable::build(&shape, &cfg, 1.0, 0.7, 0.4).unwrap();
        let f = FieldState { b1, b3 };
        let g = FieldState { b1: c1, b3: c3 };
        let sum = FieldState { b1: b1 + alpha * c1, b3: b3 + alpha * c3 };
        let lhs = stretching_term(&sum, &v, &t);
        let (sf, sg) = (stretching_term(&f, &v, &t), stretching_term(&g, &v, &t));
        let scaled_v = v.map(|x| alpha * x);
        let sv = stretching_term(&f, &scaled_v, &t);
        for k in 0..3 {
            let want = sf.covariant[k] + alpha * sg.covariant[k];
            prop_assert!((lhs.covariant[k] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            prop_assert!((sv.triad[k] - alpha * sf.triad[k]).abs() <= 1e-12 * (1.0 + sf.triad[k].abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn surface_volume_grows_with_level(shape in shape_strategy(), cfg in tube_strategy(),
                                       a in 0.05..0.95f64, d in 0.01..0.5f64) {
        let q = QuadratureSpec::new(Rule::GaussLegendre, 6, 6, 12).unwrap();
        let lo = surface_volume(&shape, &cfg, a, &q);
        let hi = surface_volume(&shape, &cfg, (a + d).min(1.0), &q);
        if let (Ok(lo), Ok(hi)) = (lo, hi) {
            prop_assert!(hi > lo, "{} !> {}", hi, lo);
        }
    }

    #[test]
    fn linear_chi_volume_is_exact(rho in 0.05..0.9f64, kappa in 0.0..1.0f64, level in 0.0..=1.0f64) {
        let q = QuadratureSpec::new(Rule::GaussLegendre, 4, 4, 32).unwrap();
        let cfg = TubeConfig::new(2.0, 0, kappa, 0.3).unwrap();
        let v = surface_volume(&ShapeFunction::linear_chi(0.0, rho), &cfg, level, &q).unwrap();
        let want = PI * (rho * level).powi(2) * 2.0;
        prop_assert!((v - want).abs() <= 1e-12 * want.max(1e-300));
    }
}
