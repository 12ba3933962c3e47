use qgeom::biortho::{nh_fs_tensor, NhKind};
use qgeom::checks::{find, run_all, Comparison, CHECKS};
use qgeom::fs_core::fs_tensor;
use qgeom::models::{build, lookup, Model, REGISTRY};
use qgeom::state_model::Differentiator;
use qgeom::GeomError;

#[test]
fn every_named_check_passes() {
    let outcomes = run_all(1.0);
    assert_eq!(outcomes.len(), CHECKS.len());
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{} residual {:.3e} tol {:.1e} {:?}", o.name, o.residual, o.tolerance, o.error))
        .collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn checks_cover_groups_one_to_nine() {
    for group in 1..=9u8 {
        assert!(CHECKS.iter().any(|c| c.group == group), "group {group}");
    }
}

#[test]
fn tolerance_scale_applies_to_upper_bounds_only() {
    let c = find("comparator_order").unwrap();
    assert_eq!(c.comparison, Comparison::Above);
    assert_eq!(c.execute(1e-6).tolerance, c.tolerance);
    let c = find("alpha_overlap").unwrap();
    let o = c.execute(1e-9);
    assert_eq!(o.tolerance, c.tolerance * 1e-9);
    assert!(!o.pass);
}

#[test]
fn every_model_builds_at_its_default_point() {
    for e in REGISTRY {
        let d = Differentiator::central();
        let th = e.default_point;
        match build(e.name).unwrap() {
            Model::State(f) => {
                assert_eq!(f.dim(), th.len(), "{}", e.name);
                let t = fs_tensor(f.as_ref(), th, &d).unwrap();
                assert!(t.hermiticity_defect() < 1e-10, "{}", e.name);
            }
            Model::NonHermitian(spec) => {
                assert_eq!(spec.n_params, th.len());
                let (l, r) = spec.biorthogonal_pair(0);
                nh_fs_tensor(&l, &r, th, NhKind::LR, &d).unwrap();
            }
        }
    }
}

#[test]
fn unknown_model_lists_known_names() {
    let err = lookup("nope").err().unwrap();
    match err {
        GeomError::Domain(msg) => assert!(msg.contains("qubit") && msg.contains("pt_two_level")),
        other => panic!("{other:?}"),
    }
}
