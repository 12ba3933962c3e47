use std::f64::consts::PI;

use nalgebra::DMatrix;
use qgeom::checks::{overlap_metric_oracle, plaquette_curvature_oracle};
use qgeom::classical_ig::fisher_rao;
use qgeom::fs_core::*;
use qgeom::linalg::{c, max_abs_real, CVec};
use qgeom::models::*;
use qgeom::state_model::{Differentiator, NormKind, PureState};
use qgeom::GeomError;

fn modes() -> [Differentiator; 3] {
    [Differentiator::analytic(), Differentiator::central(), Differentiator::richardson()]
}

#[test]
fn qubit_metric_and_curvature_closed_form() {
    for th in [[0.3, 0.0], [1.1, 0.4], [PI / 2.0, -2.0], [2.9, 5.0]] {
        let want_g = DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 0.25 * th[0].sin().powi(2)]);
        for d in modes() {
            let t = fs_tensor(&Qubit, &th, &d).unwrap();
            assert!(max_abs_real(&(t.g() - &want_g)) < 1e-8, "{:?}", d.mode);
            let f = berry_curvature(&Qubit, &th, &d).unwrap();
            assert!((f[(0, 1)] - 0.5 * th[0].sin()).abs() < 1e-8);
            assert!((f[(1, 0)] + 0.5 * th[0].sin()).abs() < 1e-8);
            assert!(t.hermiticity_defect() < 1e-12);
        }
    }
}

#[test]
fn qubit_analytic_agrees_with_fd_tightly() {
    let th = [1.1, 0.4];
    let a = fs_tensor(&Qubit, &th, &Differentiator::analytic()).unwrap();
    let r = fs_tensor(&Qubit, &th, &Differentiator::richardson()).unwrap();
    assert!(a.max_abs_diff(&r) < 1e-9);
}

#[test]
fn qubit_metric_connection_is_levi_civita_of_round_sphere() {
    let th = [1.1, 0.4];
    let (s, co) = f64::sin_cos(th[0]);
    let gc = metric_connection(&Qubit, &th, &Differentiator::analytic()).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let want = match (i, j, k) {
                    (1, 1, 0) => -0.25 * s * co,
                    (0, 1, 1) | (1, 0, 1) => 0.25 * s * co,
                    _ => 0.0,
                };
                assert!((gc.get(i, j, k).re - want).abs() < 1e-12, "({i},{j},{k})");
                assert!(gc.get(i, j, k).im.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn gaussian_wave_closed_form() {
    let gw = GaussianWave::default();
    for th in [[0.2, 0.7], [-1.0, 0.0]] {
        let t = fs_tensor(&gw, &th, &Differentiator::analytic()).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]);
        assert!(max_abs_real(&(t.g() - want)) < 1e-9);
        let f = berry_curvature(&gw, &th, &Differentiator::analytic()).unwrap();
        assert!((f[(0, 1)] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn real_gaussian_wavefunction_metric() {
    // |Psi|^2 is normal with variance s^2 / 2
    for th in [[0.3, 1.2], [-0.4, 0.8]] {
        let s = th[1];
        let g = fs_tensor(&GaussianFamily::default(), &th, &Differentiator::analytic()).unwrap().g();
        let want = DMatrix::from_row_slice(2, 2, &[0.5 / (s * s), 0.0, 0.0, 0.5 / (s * s)]);
        assert!(max_abs_real(&(&g - want)) < 1e-8);
    }
}

#[test]
fn real_amplitude_metric_is_quarter_fisher() {
    let th = [0.3, 1.2];
    let g = fs_tensor(&RealAmplitude::new(GaussianDensity::default()), &th, &Differentiator::analytic()).unwrap().g();
    let fr = fisher_rao(&GaussianDensity::default(), &th, &Differentiator::analytic()).unwrap();
    assert!(max_abs_real(&(g - fr * 0.25)) < 1e-8);
}

#[test]
fn overlap_oracles_on_random_family() {
    let f = UnitaryProductFamily::random(4, 3, 5);
    let th = [0.2, 0.5, -0.7];
    let t = fs_tensor(&f, &th, &Differentiator::analytic()).unwrap();
    let g = overlap_metric_oracle(&f, &th, 1e-3).unwrap();
    assert!(max_abs_real(&(t.g() - g)) < 1e-6);
    let curv = plaquette_curvature_oracle(&f, &th, 1e-3).unwrap();
    assert!(max_abs_real(&(t.omega() * 2.0 - curv)) < 1e-6);
    let curl = berry_curvature_curl(&f, &th, &Differentiator::analytic()).unwrap();
    assert!(max_abs_real(&(t.omega() * 2.0 - curl)) < 1e-6);
}

#[test]
fn gauge_shift_moves_connection_not_tensor() {
    let beta = PhasePolynomial::random(2, 3);
    let shifted = GaugeShifted::new(Qubit, beta.clone());
    let th = [1.1, 0.4];
    let d = Differentiator::analytic();
    let a0 = berry_connection(&Qubit, &th, &d).unwrap();
    let a1 = berry_connection(&shifted, &th, &d).unwrap();
    let db = beta.gradient(&th);
    for i in 0..2 {
        assert!((a1[i] - (a0[i] - db[i])).abs() < 1e-12);
    }
    let t0 = fs_tensor(&Qubit, &th, &d).unwrap();
    assert!(t0.max_abs_diff(&fs_tensor(&shifted, &th, &d).unwrap()) < 1e-12);
    let fd = fs_tensor(&shifted, &th, &Differentiator::central()).unwrap();
    assert!(t0.max_abs_diff(&fd) < 1e-6);
}

#[test]
fn constant_family_has_zero_geometry() {
    let st = PureState::basis(CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]), NormKind::Unit).unwrap();
    let f = ConstantFamily::new(st, 2);
    let t = fs_tensor(&f, &[0.1, 0.2], &Differentiator::central()).unwrap();
    assert!(t.matrix.iter().all(|z| z.norm() < 1e-12));
}

#[test]
fn exponential_family_identities() {
    let spec = ExponentialFamilySpec::default_two_param();
    let f = ExpFamilyWave::new(spec.clone());
    let d = Differentiator::analytic();
    for th in [[0.3, -0.6], [-1.0, -1.5]] {
        assert!(metric_compatibility_residual(&f, &th, &Differentiator::central()).unwrap() < 1e-4);
        assert!(alpha_family_connection(&f, &th, 1.0, &Differentiator::central()).unwrap().max_abs() < 1e-5);
        let cf = exp_family_closed_forms(&spec, &th, 0.0).unwrap();
        let gc = metric_connection(&f, &th, &d).unwrap();
        assert!(gc.max_abs_diff(&cf.gamma_c) < 1e-6);
        assert!(gc.max_abs_diff(&metric_connection_polar(&f, &th, &d).unwrap()) < 1e-6);
        let pm = qmt_polar(&f, &th, &d).unwrap();
        assert!(max_abs_real(&(pm.metric - cf.metric)) < 1e-6);
    }
}

#[test]
fn trace_forms_on_small_systems() {
    let d = Differentiator::analytic();
    let q = qfi_trace_forms(&Qubit, &[1.1, 0.4], &d).unwrap();
    assert!(q.metric_check < 1e-8 && q.connection_check < 1e-8);
    let f = UnitaryProductFamily::random(4, 3, 5);
    let q = qfi_trace_forms(&f, &[0.2, 0.5, -0.7], &d).unwrap();
    assert!(q.metric_check < 1e-8 && q.connection_check < 1e-8);
}

#[test]
fn trace_forms_refuse_large_grids() {
    let err = qfi_trace_forms(&GaussianWave::default(), &[0.2, 0.7], &Differentiator::analytic()).unwrap_err();
    assert!(matches!(err, GeomError::DimensionCap { .. }), "{err:?}");
}

#[test]
fn non_finite_parameters_are_rejected() {
    let err = fs_tensor(&Qubit, &[f64::NAN, 0.1], &Differentiator::analytic()).unwrap_err();
    assert!(matches!(err, GeomError::NonFinite(_) | GeomError::Domain(_)), "{err:?}");
    let err = fs_tensor(&Qubit, &[0.1], &Differentiator::analytic()).unwrap_err();
    assert!(matches!(err, GeomError::Shape(_)), "{err:?}");
}
