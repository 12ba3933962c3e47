use qgeom::biortho::NhKind;
use qgeom::linalg::{c, CMat, C64};
use qgeom::models::*;
use qgeom::qng::*;
use qgeom::state_model::{evaluate, Differentiator};
use qgeom::GeomError;

#[test]
fn qubit_qng_step_closed_form() {
    // L = cos t, g_tt = 1/4, so delta_t = 4 eta sin t and delta_p = 0
    let cost = CostSpec::new(pauli_z(), CostKind::HermitianExpectation).unwrap();
    for t in [0.4, 1.3, 2.5] {
        let st = OptimizerState::new(vec![t, 0.7], 0.05);
        let s = qng_step_hermitian(&Qubit, &cost, &st).unwrap();
        assert!((s.cost - t.cos()).abs() < 1e-14);
        assert!((s.delta[0] - 4.0 * 0.05 * t.sin()).abs() < 1e-12);
        assert!(s.delta[1].abs() < 1e-12);
    }
}

#[test]
fn qng_reaches_ground_energy() {
    let cost = CostSpec::new(pauli_z(), CostKind::HermitianExpectation).unwrap();
    let tr = run_qng(&Qubit, &cost, &OptimizerState::new(vec![2.5, 0.3], 0.1)).unwrap();
    assert_eq!(tr.termination, Termination::Converged);
    assert!(tr.records.len() <= 200);
    assert!((tr.last_cost().unwrap().re + 1.0).abs() < 1e-6);
    let costs: Vec<f64> = tr.records.iter().map(|r| r.cost.re).collect();
    assert!(costs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn qng_with_fd_jets_agrees() {
    let cost = CostSpec::new(pauli_z(), CostKind::HermitianExpectation).unwrap();
    let mut st = OptimizerState::new(vec![1.3, 0.3], 0.1);
    let a = qng_step_hermitian(&Qubit, &cost, &st).unwrap();
    st.diff = Differentiator::central();
    let b = qng_step_hermitian(&Qubit, &cost, &st).unwrap();
    assert!((a.delta - b.delta).norm() < 1e-8);
}

#[test]
fn zero_iterations_give_an_empty_trace() {
    let cost = CostSpec::new(pauli_z(), CostKind::HermitianExpectation).unwrap();
    let mut st = OptimizerState::new(vec![2.5, 0.3], 0.1);
    st.max_iters = 0;
    let tr = run_qng(&Qubit, &cost, &st).unwrap();
    assert!(tr.records.is_empty());
    assert_eq!(tr.final_theta, vec![2.5, 0.3]);
    assert_eq!(tr.termination, Termination::MaxIterations);
}

#[test]
fn invalid_optimizer_settings() {
    let cost = CostSpec::new(pauli_z(), CostKind::HermitianExpectation).unwrap();
    for eta in [-0.1, f64::NAN, f64::INFINITY] {
        let st = OptimizerState::new(vec![2.5, 0.3], eta);
        assert!(matches!(qng_step_hermitian(&Qubit, &cost, &st), Err(GeomError::Domain(_))));
    }
    let mut st = OptimizerState::new(vec![2.5, 0.3], 0.1);
    st.svd_cutoff = 0.0;
    assert!(st.validate().is_err());
    let three = CMat::identity(3, 3);
    let cost3 = CostSpec::new(three, CostKind::HermitianExpectation).unwrap();
    assert!(matches!(qng_step_hermitian(&Qubit, &cost3, &OptimizerState::new(vec![1.0, 0.0], 0.1)), Err(GeomError::Shape(_))));
    let grid = CostSpec::new(pauli_z(), CostKind::HermitianExpectation).unwrap();
    let err = qng_step_hermitian(&GaussianWave::default(), &grid, &OptimizerState::new(vec![0.0, 0.0], 0.1)).unwrap_err();
    assert!(matches!(err, GeomError::Unsupported(_)));
}

#[test]
fn cost_kinds_parse() {
    for k in [CostKind::HermitianExpectation, CostKind::BiorthoExpectation, CostKind::RrVariance] {
        assert_eq!(CostKind::parse(k.as_str()), Some(k));
    }
    assert!(CostSpec::new(pt_two_level(0.6, 1.0), CostKind::HermitianExpectation).is_err());
    assert!(CostSpec::new(pt_two_level(0.6, 1.0), CostKind::BiorthoExpectation).is_ok());
}

#[test]
fn rr_cost_vanishes_on_eigenvectors() {
    let h = pt_two_level(0.6, 1.0);
    let es = qgeom::biortho::biortho_eig(&h, 1e-8).unwrap();
    for n in 0..2 {
        let r = es.right_vector(n);
        let r = &r / C64::from(r.norm());
        let (e, l) = rr_cost(&r, &h);
        assert!(l < 1e-24);
        assert!((e - es.eigenvalues[n]).norm() < 1e-12);
    }
}

#[test]
fn rr_eigensolver_finds_pt_eigenvalue() {
    let h = pt_two_level(0.6, 1.0);
    for start in [[1.0, 0.0], [2.0, 1.0]] {
        let mut st = OptimizerState::new(start.to_vec(), 0.1);
        st.max_iters = 500;
        let tr = rr_variational_eigensolver(&Qubit, &h, &st).unwrap().into_result().unwrap();
        assert_eq!(tr.termination, Termination::Converged);
        let psi = evaluate(&Qubit, &tr.final_theta).unwrap().amps;
        let (e, l) = rr_cost(&psi, &h);
        assert!(l < 1e-8);
        assert!((e.norm() - 0.8).abs() < 1e-5);
    }
}

#[test]
fn dual_step_is_deterministic_and_finite() {
    let (l, r) = NonHermitianModelSpec::pt_two_level().biorthogonal_pair(0);
    let cost = CostSpec::new(pt_two_level(0.6, 1.0), CostKind::BiorthoExpectation).unwrap();
    let mut st = OptimizerState::new(vec![0.3, 1.0], 0.1);
    st.diff = Differentiator::central();
    let a = qng_step_nh_dual(&l, &r, NhKind::LR, &cost, &st).unwrap();
    let b = qng_step_nh_dual(&l, &r, NhKind::LR, &cost, &st).unwrap();
    assert!(a.incompatibility.is_finite());
    assert_eq!(a.delta_r.clone().unwrap(), b.delta_r.unwrap());
    assert_eq!(a.delta_i.clone().unwrap(), b.delta_i.unwrap());
    assert!(a.delta_r.unwrap().iter().all(|x| x.is_finite()));
}

#[test]
fn dual_step_in_hermitian_limit_has_no_imaginary_step() {
    let (l, r) = NonHermitianModelSpec::spin_field().biorthogonal_pair(0);
    let cost = CostSpec::new(pauli_z(), CostKind::BiorthoExpectation).unwrap();
    let mut st = OptimizerState::new(vec![1.1, 0.4], 0.1);
    st.diff = Differentiator::central();
    let s = qng_step_nh_dual(&l, &r, NhKind::LR, &cost, &st).unwrap();
    assert!(s.cost.im.abs() < 1e-12);
    assert!(s.delta_i.unwrap().iter().all(|x| *x == 0.0));
    assert!(s.delta_r.unwrap().norm() > 1e-3);
}

fn similarity() -> (SimilarityPair<Qubit>, CMat) {
    let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.2), c(-0.1, 0.0), c(0.8, -0.1)]);
    let pair = SimilarityPair::new(Qubit, m).unwrap();
    let h0 = CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(-0.3, 0.0)]);
    let h = pair.hamiltonian(&h0);
    (pair, h)
}

#[test]
fn imaginary_time_matches_qng_to_second_order() {
    let (pair, h) = similarity();
    let d = Differentiator::analytic();
    let order = comparator_order(&pair.left(), &pair.right(), &h, None, &[1.0, 0.4], 1e-2, 20, &d).unwrap();
    assert!(order >= 1.9, "order {order}");
    let rep = imaginary_time_comparator(&pair.left(), &pair.right(), &h, None, &[1.0, 0.4], 1e-3, 50, &d).unwrap();
    assert_eq!(rep.deviations.len(), 50);
    assert!(rep.max_deviation < 1e-6);
}

#[test]
fn mismatched_left_evolution_breaks_agreement() {
    let (pair, h) = similarity();
    let mut hl = h.clone();
    hl[(0, 1)] += C64::from(0.1);
    let d = Differentiator::analytic();
    let good = imaginary_time_comparator(&pair.left(), &pair.right(), &h, None, &[1.0, 0.4], 1e-3, 50, &d).unwrap();
    let bad = imaginary_time_comparator(&pair.left(), &pair.right(), &h, Some(&hl), &[1.0, 0.4], 1e-3, 50, &d).unwrap();
    assert!(bad.max_deviation > 100.0 * good.max_deviation);
}

#[test]
fn comparator_rejects_bad_step() {
    let (pair, h) = similarity();
    let err = imaginary_time_comparator(&pair.left(), &pair.right(), &h, None, &[1.0, 0.4], -1e-3, 5, &Differentiator::analytic()).unwrap_err();
    assert!(matches!(err, GeomError::Domain(_)));
}
