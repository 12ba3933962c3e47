use qgeom::alpha_fs::*;
use qgeom::fs_core::{berry_curvature, fs_tensor};
use qgeom::linalg::{dot, max_abs, max_abs_real, CMat, CVec, C64};
use qgeom::models::{GaussianWave, Qubit, UnitaryProductFamily};
use qgeom::state_model::{Differentiator, StateFamily};
use qgeom::GeomError;

/// Qubit `l_1`, `l_2` built directly from amplitudes `cos(t/2)`, `sin(t/2)` and phase `p`.
fn qubit_pair(th: &[f64], alpha: f64) -> (CVec, CVec) {
    let p = [(0.5 * th[0]).cos().powi(2), (0.5 * th[0]).sin().powi(2)];
    let phi = [0.0, th[1]];
    let side = |a: f64, coef: f64| {
        CVec::from_fn(2, |k, _| C64::from_polar(coef * p[k].powf(a), (1.0 - alpha) * phi[k]))
    };
    (side(0.5 * (1.0 - alpha), 1.0 / (1.0 - alpha)), side(0.5 * (1.0 + alpha), 1.0 / (1.0 + alpha)))
}

fn qubit_case2_oracle(th: &[f64], alpha: f64) -> CMat {
    let h = 1e-5;
    let d = |i: usize| {
        let mut a = th.to_vec();
        let mut b = th.to_vec();
        a[i] += h;
        b[i] -= h;
        let (p1, p2) = qubit_pair(&a, alpha);
        let (m1, m2) = qubit_pair(&b, alpha);
        ((p1 - m1) / C64::from(2.0 * h), (p2 - m2) / C64::from(2.0 * h))
    };
    let (l1, l2) = qubit_pair(th, alpha);
    let ds: Vec<(CVec, CVec)> = (0..2).map(d).collect();
    let c = 1.0 - alpha * alpha;
    CMat::from_fn(2, 2, |i, j| dot(&ds[i].0, &ds[j].1) - dot(&ds[i].0, &l2) * dot(&l1, &ds[j].1) * c)
}

#[test]
fn case2_tensor_matches_hand_built_qubit_pair() {
    for th in [[1.1, 0.4], [0.6, -1.3], [2.2, 2.0]] {
        for a in [-0.6, -0.3, 0.0, 0.3, 0.5, 0.8] {
            let t = case2_tensor(&Qubit, &th, a, &Differentiator::analytic()).unwrap();
            assert!(max_abs(&(&t.matrix - qubit_case2_oracle(&th, a))) < 1e-8, "theta = {th:?}, alpha = {a}");
        }
    }
}

#[test]
fn overlap_at_one_half_is_four_thirds() {
    for th in [[1.1, 0.4], [0.3, 2.0]] {
        let o = alpha_overlap(&Qubit, &th, 0.5, &Differentiator::analytic()).unwrap();
        assert!((o - C64::from(4.0 / 3.0)).norm() < 1e-10);
    }
    let o = alpha_overlap(&GaussianWave::default(), &[0.2, 0.7], 0.5, &Differentiator::analytic()).unwrap();
    assert!((o - C64::from(4.0 / 3.0)).norm() < 1e-10);
}

#[test]
fn excluded_alpha_values() {
    for a in [1.0, -1.0, 1.5, f64::NAN] {
        let err = case2_tensor(&Qubit, &[1.1, 0.4], a, &Differentiator::analytic()).unwrap_err();
        assert!(matches!(err, GeomError::ExcludedAlpha(_)), "{err:?}");
    }
}

#[test]
fn alpha_zero_is_fubini_study() {
    let f = UnitaryProductFamily::random(3, 2, 11);
    let th = [0.4, -0.3];
    let d = Differentiator::analytic();
    let fs = fs_tensor(&f, &th, &d).unwrap();
    assert!(case2_tensor(&f, &th, 0.0, &d).unwrap().max_abs_diff(&fs) < 1e-12);
    assert!(case1_tensor(&f, &th, 0.0, &d).unwrap().tensor.max_abs_diff(&fs) < 1e-12);
}

#[test]
fn case2_real_antisymmetric_part_vanishes() {
    let f = UnitaryProductFamily::random(3, 2, 11);
    for a in [-0.6, 0.3, 0.9] {
        let t = case2_tensor(&f, &[0.4, -0.3], a, &Differentiator::analytic()).unwrap();
        assert!(max_abs_real(&t.omega_tilde()) < 1e-10);
    }
}

#[test]
fn gaussian_wave_phase_block_scaling() {
    let gw = GaussianWave::default();
    let d = Differentiator::analytic();
    for a in [-0.5, 0.25, 0.6] {
        let g = case2_tensor(&gw, &[0.2, 0.7], a, &d).unwrap().g();
        assert!((g[(1, 1)] - (1.0 - a) / (1.0 + a)).abs() < 1e-8);
        assert!((g[(0, 0)] - 0.25).abs() < 1e-8);
    }
}

#[test]
fn components_reassemble_the_tensor() {
    let f = UnitaryProductFamily::random(3, 2, 11);
    let d = Differentiator::analytic();
    for a in [-0.3, 0.6] {
        let comp = case2_components(&f, &[0.4, -0.3], a, &d).unwrap();
        let t = case2_tensor(&f, &[0.4, -0.3], a, &d).unwrap();
        assert!(comp.tensor().max_abs_diff(&t) < 1e-10);
        assert!(max_abs_real(&(comp.metric.clone() - comp.metric.transpose())) < 1e-12);
    }
}

#[test]
fn case1_components_and_defect() {
    let d = Differentiator::analytic();
    let c1 = case1_tensor(&Qubit, &[1.1, 0.4], 0.4, &d).unwrap();
    assert!(c1.tensor.max_abs_diff(&case1_components(&Qubit, &[1.1, 0.4], 0.4, &d).unwrap()) < 1e-10);
    assert!(c1.normalization_defect > 1e-3);
    let c0 = case1_tensor(&Qubit, &[1.1, 0.4], 0.0, &d).unwrap();
    assert!(c0.normalization_defect < 1e-12);
}

#[test]
fn field_strength_matches_curl_and_collapses() {
    let f = UnitaryProductFamily::random(3, 2, 11);
    let th = [0.4, -0.3];
    for d in [Differentiator::analytic(), Differentiator::central()] {
        for a in [-0.6, 0.4] {
            let fs = alpha_berry_field_strength(&f, &th, a, &d).unwrap();
            let curl = alpha_field_strength_curl(&f, &th, a, &d).unwrap();
            assert!(max_abs(&(fs - curl)) < 1e-5);
        }
    }
    let f0 = alpha_berry_field_strength(&Qubit, &[1.1, 0.4], 0.0, &Differentiator::analytic()).unwrap();
    let b = berry_curvature(&Qubit, &[1.1, 0.4], &Differentiator::analytic()).unwrap();
    assert!(max_abs(&(f0 - b.map(C64::from))) < 1e-12);
}

#[test]
fn alpha_density_trace_form() {
    let f = UnitaryProductFamily::random(4, 3, 5);
    let th = [0.2, 0.5, -0.7];
    let d = Differentiator::analytic();
    for a in [-0.4, 0.5] {
        let rho = alpha_density(&f, &th, a, &d).unwrap();
        assert!((rho.trace() - C64::from(1.0 / (1.0 - a * a))).norm() < 1e-10);
        let t = case2_tensor(&f, &th, a, &d).unwrap();
        assert!(alpha_qfi_trace(&f, &th, a, &d).unwrap().max_abs_diff(&t) < 1e-8);
    }
}

#[test]
fn dualities_in_both_derivative_modes() {
    let f = UnitaryProductFamily::random(3, 2, 11);
    let fams: [(&dyn StateFamily, [f64; 2]); 2] = [(&Qubit, [1.1, 0.4]), (&f, [0.4, -0.3])];
    for (fam, th) in fams {
        for d in [Differentiator::analytic(), Differentiator::central()] {
            for a in [-0.6, -0.3, 0.3, 0.6] {
                assert!(starstar_residual(fam, &th, a, &d).unwrap() < 1e-6);
                assert!(re_sum_residual(fam, &th, a, &d).unwrap().residual < 1e-5);
                assert!(pm_alpha_duality_residual(fam, &th, a, &d).unwrap() < 1e-4);
            }
        }
    }
}

#[test]
fn overlap_divergence_conjugation() {
    let d = Differentiator::analytic();
    for a in [-0.3, 0.0, 0.5] {
        assert!(overlap_conjugation_check(&Qubit, &[1.1, 0.4], &[1.3, 0.2], a, &d).unwrap() < 1e-12);
    }
}
