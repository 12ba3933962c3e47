use std::sync::Arc;

use qgeom::biortho::*;
use qgeom::fs_core::fs_tensor;
use qgeom::linalg::{c, max_abs, max_abs_real, random_complex, random_hermitian, CMat, CVec, C64};
use qgeom::models::*;
use qgeom::state_model::{Differentiator, NormKind, PureState};
use qgeom::tol::EP_TOL;
use qgeom::GeomError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KINDS: [NhKind; 4] = [NhKind::LR, NhKind::RL, NhKind::LL, NhKind::RR];

#[test]
fn pt_eigenvalues_closed_form() {
    for (gamma, g) in [(0.6, 1.0), (0.0, 1.0), (0.3, 2.0)] {
        let es = biortho_eig(&pt_two_level(gamma, g), EP_TOL).unwrap();
        let e = (g * g - gamma * gamma).sqrt();
        assert!((es.eigenvalues[0] - C64::from(-e)).norm() < 1e-12);
        assert!((es.eigenvalues[1] - C64::from(e)).norm() < 1e-12);
        assert!(es.biorthonormality_defect() < 1e-10);
    }
    // broken phase: eigenvalues +-i sqrt(gamma^2 - g^2)
    let es = biortho_eig(&pt_two_level(1.5, 1.0), EP_TOL).unwrap();
    let e = (1.5f64 * 1.5 - 1.0).sqrt();
    assert!(es.eigenvalues.iter().all(|l| l.re.abs() < 1e-12 && (l.im.abs() - e).abs() < 1e-12));
}

#[test]
fn random_matrices_are_biorthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in [2, 3, 5] {
        for _ in 0..5 {
            let h = random_complex(d, &mut rng);
            let es = biortho_eig(&h, EP_TOL).unwrap();
            assert!(es.biorthonormality_defect() < 1e-10);
            assert!(es.eigen_residual(&h) < 1e-10);
        }
    }
}

#[test]
fn exceptional_point_and_defective_matrix() {
    let err = biortho_eig(&pt_two_level(1.0, 1.0), EP_TOL).unwrap_err();
    assert!(matches!(err, GeomError::ExceptionalPoint(_)));
    let jordan = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    assert!(matches!(biortho_eig(&jordan, EP_TOL), Err(GeomError::ExceptionalPoint(_))));
    let (l, r) = NonHermitianModelSpec::pt_two_level().biorthogonal_pair(0);
    let err = nh_fs_tensor(&l, &r, &[1.0, 1.0], NhKind::LR, &Differentiator::central()).unwrap_err();
    assert!(matches!(err, GeomError::ExceptionalPoint(_)));
}

#[test]
fn hermitian_model_collapses_all_kinds() {
    let (l, r) = NonHermitianModelSpec::spin_field().biorthogonal_pair(1);
    let d = Differentiator::central();
    let th = [1.1, 0.4];
    let fs = fs_tensor(&r, &th, &d).unwrap();
    // spin-field eigenvectors live on the Bloch sphere
    assert!((fs.g()[(0, 0)] - 0.25).abs() < 1e-8);
    for k in KINDS {
        assert!(nh_fs_tensor(&l, &r, &th, k, &d).unwrap().max_abs_diff(&fs) < 1e-8, "{k:?}");
    }
}

#[test]
fn same_side_kinds_have_no_flipped_parts() {
    let (l, r) = NonHermitianModelSpec::pt_two_level().unit_pair(0);
    for k in [NhKind::LL, NhKind::RR] {
        let t = nh_fs_tensor(&l, &r, &[0.3, 1.0], k, &Differentiator::central()).unwrap();
        assert!(max_abs_real(&t.g_tilde()) < 1e-8 && max_abs_real(&t.omega_tilde()) < 1e-8);
        assert!(t.g()[(0, 0)] > 0.0);
    }
}

#[test]
fn complex_curvature_matches_curl() {
    let spec = NonHermitianModelSpec::pt_two_level();
    let (bl, br) = spec.biorthogonal_pair(0);
    let (ul, ur) = spec.unit_pair(0);
    let d = Differentiator::central();
    for th in [[0.3, 1.0], [0.5, 1.4]] {
        for k in KINDS {
            let (l, r) = if matches!(k, NhKind::LR | NhKind::RL) { (&bl, &br) } else { (&ul, &ur) };
            let f = nh_berry_curvature(l, r, &th, k, &d).unwrap();
            let curl = nh_berry_curvature_curl(l, r, &th, k, &d).unwrap();
            assert!(max_abs(&(f - curl)) < 1e-5, "{k:?}");
        }
    }
}

#[test]
fn wrong_pairing_is_a_normalization_error() {
    let (l, r) = NonHermitianModelSpec::pt_two_level().unit_pair(0);
    let err = nh_fs_tensor(&l, &r, &[0.6, 1.0], NhKind::LR, &Differentiator::central()).unwrap_err();
    assert!(matches!(err, GeomError::Normalization { .. }), "{err:?}");
}

#[test]
fn kind_names_round_trip() {
    for k in KINDS {
        assert_eq!(NhKind::parse(k.as_str()), Some(k));
        assert_eq!(NhKind::parse(&k.as_str().to_uppercase()), Some(k));
    }
    assert_eq!(NhKind::parse("fs"), None);
}

#[test]
fn self_consistent_generators_preserve_pairing() {
    for seed in 0..4 {
        let spec = GeneratorFamilySpec::random_self_consistent(4, 1, seed);
        for s in [0.0, 0.7, 2.0] {
            assert!(biortho_preservation_defect(&spec, s).unwrap() < 1e-10);
            assert!((biortho_overlap(&spec, &[s]) - C64::from(1.0)).norm() < 1e-10);
        }
    }
    let bad = GeneratorFamilySpec::random_mismatched(3, 9);
    assert!(biortho_preservation_defect(&bad, 0.5).unwrap() > 1e-3);
    assert!((biortho_overlap(&bad, &[0.5]) - C64::from(1.0)).norm() > 1e-3);
}

#[test]
fn generator_validation() {
    let two = GeneratorFamilySpec::random_self_consistent(3, 2, 1);
    assert!(matches!(biortho_preservation_defect(&two, 0.1), Err(GeomError::Shape(_))));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let l0 = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let gens = vec![random_hermitian(3, &mut rng), random_hermitian(3, &mut rng)];
    let spec = GeneratorFamilySpec::hermitian(gens, l0.clone()).unwrap();
    assert!(matches!(commuting_generator_tensor(&spec, &[0.1, 0.2]), Err(GeomError::NonCommuting(_))));
    let side = Arc::new(spec).side(true);
    let err = fs_tensor(&side, &[0.1, 0.2], &Differentiator::analytic()).unwrap_err();
    assert!(matches!(err, GeomError::NonCommuting(_)));
    assert!(GeneratorFamilySpec::hermitian(vec![random_complex(3, &mut rng)], l0.clone()).is_err());
    assert!(GeneratorFamilySpec::hermitian(vec![random_hermitian(3, &mut rng)], l0 * C64::from(2.0)).is_err());
}

#[test]
fn commuting_generator_formula_matches_fd() {
    let spec = Arc::new(GeneratorFamilySpec::random_self_consistent(3, 2, 21));
    let s = [0.3, -0.2];
    let closed = commuting_generator_tensor(&spec, &s).unwrap();
    let (a, b) = (spec.side(true), spec.side(false));
    let d = Differentiator::central();
    let j1 = qgeom::state_model::jet(&a, &s, &d, qgeom::state_model::Order::First).unwrap();
    let j2 = qgeom::state_model::jet(&b, &s, &d, qgeom::state_model::Order::First).unwrap();
    let fd = qgeom::pairing::PairProducts::new(&j1, &j2).unwrap().tensor(1.0);
    assert!(closed.max_abs_diff(&fd) < 1e-6);
}

#[test]
fn normalized_generator_qfi_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = random_hermitian(3, &mut rng);
    let psi0 = PureState::basis(qgeom::linalg::random_state(3, &mut rng), NormKind::Unit).unwrap();
    let q: Vec<f64> = [0.0, 0.5, 2.0].iter().map(|&t| normalized_generator_qfi(&h, &psi0, t).unwrap()[(0, 0)]).collect();
    assert!((q[0] - q[1]).abs() < 1e-8 && (q[0] - q[2]).abs() < 1e-8);

    let pt = pt_two_level(0.6, 1.0);
    let psi0 = PureState::basis(CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]), NormKind::Unit).unwrap();
    let fam = NormalizedGeneratorFamily::new(pt.clone(), &psi0).unwrap();
    for t in [0.3, 1.1] {
        let fd = fs_tensor(&fam, &[t], &Differentiator::central()).unwrap().g()[(0, 0)];
        assert!((normalized_generator_qfi(&pt, &psi0, t).unwrap()[(0, 0)] - 4.0 * fd).abs() < 1e-5);
    }
}

#[test]
fn similarity_pair_is_biorthonormal() {
    let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.2), c(-0.1, 0.0), c(0.8, -0.1)]);
    let pair = SimilarityPair::new(Qubit, m).unwrap();
    let th = [0.9, -0.2];
    let l = qgeom::state_model::evaluate(&pair.left(), &th).unwrap();
    let r = qgeom::state_model::evaluate(&pair.right(), &th).unwrap();
    assert!((qgeom::state_model::inner(&l, &r).unwrap() - C64::from(1.0)).norm() < 1e-12);
    let singular = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)]);
    assert!(SimilarityPair::new(Qubit, singular).is_err());
}
