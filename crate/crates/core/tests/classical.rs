use nalgebra::DMatrix;
use qgeom::classical_ig::*;
use qgeom::linalg::max_abs_real;
use qgeom::models::{Bernoulli, GaussianDensity};
use qgeom::state_model::Differentiator;
use qgeom::GeomError;

#[test]
fn gaussian_fisher_rao_closed_form() {
    let g = GaussianDensity::default();
    for (mu, s) in [(0.3, 1.2), (-1.0, 0.7), (0.0, 2.0)] {
        let want = DMatrix::from_row_slice(2, 2, &[1.0 / (s * s), 0.0, 0.0, 2.0 / (s * s)]);
        for d in [Differentiator::analytic(), Differentiator::central()] {
            let f = fisher_rao(&g, &[mu, s], &d).unwrap();
            assert!(max_abs_real(&(f - &want)) < 1e-6);
        }
    }
}

#[test]
fn bernoulli_fisher_and_connection_closed_form() {
    for p in [0.2, 0.5, 0.85] {
        let f = fisher_rao(&Bernoulli, &[p], &Differentiator::analytic()).unwrap();
        assert!((f[(0, 0)] - 1.0 / (p * (1.0 - p))).abs() < 1e-10);
        for a in [-0.9, -0.3, 0.0, 0.5] {
            let gamma = classical_alpha_connection(&Bernoulli, &[p], a, &Differentiator::analytic()).unwrap();
            let want = 0.5 * (1.0 + a) * (1.0 / (1.0 - p).powi(2) - 1.0 / (p * p));
            assert!((gamma.get(0, 0, 0).re - want).abs() < 1e-9, "p = {p}, alpha = {a}");
        }
    }
}

#[test]
fn alpha_metric_is_fisher_rao() {
    let g = GaussianDensity::default();
    let th = [0.3, 1.2];
    let fr = fisher_rao(&g, &th, &Differentiator::analytic()).unwrap();
    for a in [-0.7, 0.0, 0.4] {
        let ga = classical_alpha_metric(&g, &th, a, &Differentiator::analytic()).unwrap();
        assert!(max_abs_real(&(ga - &fr)) < 1e-10);
    }
}

#[test]
fn duality_holds_across_alpha() {
    let g = GaussianDensity::default();
    for a in [-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9] {
        assert!(classical_duality_residual(&g, &[0.3, 1.2], a, &Differentiator::analytic()).unwrap() < 1e-4);
        assert!(classical_duality_residual(&Bernoulli, &[0.35], a, &Differentiator::central()).unwrap() < 1e-4);
    }
}

#[test]
fn unit_alpha_is_excluded() {
    let err = classical_alpha_connection(&Bernoulli, &[0.3], 1.0, &Differentiator::analytic()).unwrap_err();
    assert_eq!(err, GeomError::ExcludedAlpha(1.0));
    assert!(classical_duality_residual(&Bernoulli, &[0.3], f64::NAN, &Differentiator::analytic()).is_err());
}

#[test]
fn density_outside_bounds_is_rejected() {
    assert!(fisher_rao(&Bernoulli, &[1.5], &Differentiator::analytic()).is_err());
    assert!(fisher_rao(&GaussianDensity::default(), &[0.0, -1.0], &Differentiator::analytic()).is_err());
}
