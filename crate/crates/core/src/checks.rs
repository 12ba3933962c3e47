//! Named residual checks over the built-in families, grouped by topic.
//!
//! Each check returns a residual that is compared against its tolerance. Most
//! checks pass when the residual stays below the tolerance; a few (lower bounds
//! such as convergence orders) pass when it stays above.

use nalgebra::DMatrix;

use crate::alpha_fs::*;
use crate::biortho::*;
use crate::classical_ig::{classical_duality_residual, fisher_rao};
use crate::error::{GeomError, Result};
use crate::fs_core::*;
use crate::linalg::{max_abs, max_abs_real, random_hermitian, random_state, CMat, CVec, C64};
use crate::models::*;
use crate::pairing::PairProducts;
use crate::qng::*;
use crate::state_model::{jet, Differentiator, NormKind, Order, PureState, StateFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    /// Pass when `residual < tolerance * scale`.
    Below,
    /// Pass when `residual > tolerance` (not scaled).
    Above,
}

pub struct CheckSpec {
    pub name: &'static str,
    /// Topic group, numbered as in the acceptance suite.
    pub group: u8,
    pub description: &'static str,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub run: fn() -> Result<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub group: u8,
    pub residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    pub error: Option<String>,
}

impl CheckSpec {
    pub fn execute(&self, tol_scale: f64) -> CheckOutcome {
        let tolerance = match self.comparison {
            Comparison::Below => self.tolerance * tol_scale,
            Comparison::Above => self.tolerance,
        };
        let (residual, error) = match (self.run)() {
            Ok(r) => (r, None),
            Err(e) => (f64::NAN, Some(format!("{}: {e}", e.code()))),
        };
        let pass = error.is_none()
            && match self.comparison {
                Comparison::Below => residual < tolerance,
                Comparison::Above => residual > tolerance,
            };
        CheckOutcome { name: self.name, group: self.group, residual, tolerance, comparison: self.comparison, pass, error }
    }
}

pub fn find(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

pub fn run_all(tol_scale: f64) -> Vec<CheckOutcome> {
    CHECKS.iter().map(|c| c.execute(tol_scale)).collect()
}

pub fn run_group(group: u8, tol_scale: f64) -> Vec<CheckOutcome> {
    CHECKS.iter().filter(|c| c.group == group).map(|c| c.execute(tol_scale)).collect()
}

// ---------------------------------------------------------------------------
// Overlap oracles

fn overlap(family: &dyn StateFamily, a: &[f64], b: &[f64]) -> Result<C64> {
    let sa = family.evaluate(a)?;
    let sb = family.evaluate(b)?;
    crate::state_model::inner(&sa, &sb)
}

fn shifted(theta: &[f64], dir: &[f64], h: f64) -> Vec<f64> {
    theta.iter().zip(dir).map(|(t, d)| t + h * d).collect()
}

/// Metric from `1 - |<Psi(theta - h v)|Psi(theta + h v)>|^2 = 4 h^2 g(v, v) + O(h^4)`,
/// extrapolated over `h` and `h/2` and polarised for off-diagonal entries.
pub fn overlap_metric_oracle(family: &dyn StateFamily, theta: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = theta.len();
    let quad = |v: &[f64]| -> Result<f64> {
        let f = |s: f64| -> Result<f64> {
            let o = overlap(family, &shifted(theta, v, -s), &shifted(theta, v, s))?;
            Ok((1.0 - o.norm_sqr()) / (4.0 * s * s))
        };
        Ok((4.0 * f(0.5 * h)? - f(h)?) / 3.0)
    };
    let unit = |i: usize| -> Vec<f64> { (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect() };
    let diag: Vec<f64> = (0..n).map(|i| quad(&unit(i))).collect::<Result<_>>()?;
    let mut g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone()));
    for i in 0..n {
        for j in i + 1..n {
            let v: Vec<f64> = (0..n).map(|k| if k == i || k == j { 1.0 } else { 0.0 }).collect();
            let gij = 0.5 * (quad(&v)? - diag[i] - diag[j]);
            g[(i, j)] = gij;
            g[(j, i)] = gij;
        }
    }
    Ok(g)
}

/// Curvature from the phase of the overlap product around a square plaquette of
/// side `2h` centred at `theta`, extrapolated over `h` and `h/2`.
pub fn plaquette_curvature_oracle(family: &dyn StateFamily, theta: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let n = theta.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let f = |s: f64| -> Result<f64> {
                let corner = |a: f64, b: f64| {
                    let mut t = theta.to_vec();
                    t[i] += a * s;
                    t[j] += b * s;
                    t
                };
                let c = [corner(-1.0, -1.0), corner(1.0, -1.0), corner(1.0, 1.0), corner(-1.0, 1.0)];
                let mut prod = C64::from(1.0);
                for k in 0..4 {
                    prod *= overlap(family, &c[k], &c[(k + 1) % 4])?;
                }
                Ok(prod.arg() / (4.0 * s * s))
            };
            let v = (4.0 * f(0.5 * h)? - f(h)?) / 3.0;
            out[(i, j)] = v;
            out[(j, i)] = -v;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Shared fixtures

const ALPHAS: [f64; 4] = [-0.6, -0.3, 0.3, 0.6];

fn analytic() -> Differentiator {
    Differentiator::analytic()
}

fn central() -> Differentiator {
    Differentiator::central()
}

fn three_level() -> UnitaryProductFamily {
    UnitaryProductFamily::random(3, 2, 11)
}

fn four_level() -> UnitaryProductFamily {
    UnitaryProductFamily::random(4, 3, 5)
}

fn max_of(it: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m: f64 = 0.0;
    for r in it {
        let r = r?;
        if r.is_nan() {
            return Err(GeomError::NonFinite("residual".into()));
        }
        m = m.max(r);
    }
    Ok(m)
}

// ---------------------------------------------------------------------------
// Classical

fn classical_fisher_gaussian() -> Result<f64> {
    let g = GaussianDensity::default();
    max_of([(0.3, 1.2), (-1.0, 0.7), (0.5, 2.0)].map(|(mu, s)| {
        let f = fisher_rao(&g, &[mu, s], &central())?;
        let want = DMatrix::from_row_slice(2, 2, &[1.0 / (s * s), 0.0, 0.0, 2.0 / (s * s)]);
        Ok(max_abs_real(&(f - want)))
    }))
}

fn classical_duality() -> Result<f64> {
    let g = GaussianDensity::default();
    let alphas = [-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9];
    max_of(alphas.iter().flat_map(|&a| {
        [
            classical_duality_residual(&g, &[0.3, 1.2], a, &analytic()),
            classical_duality_residual(&Bernoulli, &[0.3], a, &analytic()),
            classical_duality_residual(&Bernoulli, &[0.8], a, &central()),
        ]
    }))
}

// ---------------------------------------------------------------------------
// Hermitian geometry

fn qubit_metric_overlap_oracle() -> Result<f64> {
    max_of([[0.7, 0.2], [1.1, 0.4], [2.3, -1.0]].map(|th| {
        let oracle = overlap_metric_oracle(&Qubit, &th, 1e-3)?;
        let want = DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 0.25 * th[0].sin().powi(2)]);
        let t = fs_tensor(&Qubit, &th, &central())?;
        Ok(max_abs_real(&(&oracle - &want)).max(max_abs_real(&(t.g() - &oracle))))
    }))
}

fn qubit_curvature_plaquette() -> Result<f64> {
    max_of([[0.7, 0.2], [1.1, 0.4], [2.3, -1.0]].map(|th| {
        let oracle = plaquette_curvature_oracle(&Qubit, &th, 1e-3)?;
        let c = berry_curvature(&Qubit, &th, &central())?;
        Ok((oracle[(0, 1)] - 0.5 * th[0].sin()).abs().max((c[(0, 1)] - oracle[(0, 1)]).abs()))
    }))
}

fn gauge_invariance() -> Result<f64> {
    let th = [0.4, -0.3];
    let base = three_level();
    max_of((0..3u64).map(|seed| {
        let shifted = GaugeShifted::new(three_level(), PhasePolynomial::random(2, 100 + seed));
        let d = central();
        let t = fs_tensor(&base, &th, &d)?.max_abs_diff(&fs_tensor(&shifted, &th, &d)?);
        let c = metric_connection(&base, &th, &d)?.max_abs_diff(&metric_connection(&shifted, &th, &d)?);
        let a = case2_tensor(&base, &th, 0.4, &d)?.max_abs_diff(&case2_tensor(&shifted, &th, 0.4, &d)?);
        let p1 = dual_connections(&base, &th, 0.4, &d)?;
        let p2 = dual_connections(&shifted, &th, 0.4, &d)?;
        Ok(t.max(c).max(a).max(p1.gamma1.max_abs_diff(&p2.gamma1)).max(p1.gamma2.max_abs_diff(&p2.gamma2)))
    }))
}

fn trivial_phase_quarter_fisher() -> Result<f64> {
    let dens = GaussianDensity::default();
    let fam = RealAmplitude::new(GaussianDensity::default());
    let exp_spec = ExponentialFamilySpec::default_real();
    let exp_fam = ExpFamilyWave::new(exp_spec.clone());
    let exp_dens = ExpFamilyDensity { spec: exp_spec };
    let a = max_of([[0.3, 1.2], [-0.5, 0.8]].map(|th| {
        let g = fs_tensor(&fam, &th, &analytic())?.g();
        Ok(max_abs_real(&(g - fisher_rao(&dens, &th, &analytic())? * 0.25)))
    }))?;
    let b = {
        let th = [0.3, -0.6];
        let g = fs_tensor(&exp_fam, &th, &analytic())?.g();
        max_abs_real(&(g - fisher_rao(&exp_dens, &th, &analytic())? * 0.25))
    };
    Ok(a.max(b))
}

fn exp_family_closed_form_agreement() -> Result<f64> {
    let spec = ExponentialFamilySpec::default_two_param();
    let fam = ExpFamilyWave::new(spec.clone());
    max_of([[0.3, -0.6], [-1.0, -1.5], [1.5, 0.2]].map(|th| {
        let cf = exp_family_closed_forms(&spec, &th, 0.5)?;
        let t = fs_tensor(&fam, &th, &central())?;
        let gc = metric_connection(&fam, &th, &central())?;
        let nm = nonmetricity(&fam, &th, 0.5, &central())?;
        Ok(max_abs_real(&(t.g() - &cf.metric))
            .max(max_abs_real(&(t.omega() - &cf.omega)))
            .max(gc.max_abs_diff(&cf.gamma_c))
            .max(nm.max_abs_diff(&cf.nonmetricity)))
    }))
}

// ---------------------------------------------------------------------------
// Connections

fn metric_compatibility() -> Result<f64> {
    let exp = ExpFamilyWave::new(ExponentialFamilySpec::default_two_param());
    max_of([
        metric_compatibility_residual(&Qubit, &[1.1, 0.4], &central()),
        metric_compatibility_residual(&Qubit, &[0.5, 2.0], &central()),
        metric_compatibility_residual(&exp, &[0.3, -0.6], &central()),
        metric_compatibility_residual(&exp, &[-1.0, -1.5], &central()),
    ])
}

fn exp_family_one_flat() -> Result<f64> {
    let exp = ExpFamilyWave::new(ExponentialFamilySpec::default_two_param());
    max_of([[0.3, -0.6], [-1.0, -1.5], [1.5, 0.2]].map(|th| Ok(alpha_family_connection(&exp, &th, 1.0, &central())?.max_abs())))
}

fn braket_vs_polar_connection() -> Result<f64> {
    let exp = ExpFamilyWave::new(ExponentialFamilySpec::default_two_param());
    let gw = GaussianWave::default();
    max_of([
        metric_connection(&exp, &[0.3, -0.6], &analytic()).and_then(|a| Ok(a.max_abs_diff(&metric_connection_polar(&exp, &[0.3, -0.6], &analytic())?))),
        metric_connection(&gw, &[0.2, 0.7], &analytic()).and_then(|a| Ok(a.max_abs_diff(&metric_connection_polar(&gw, &[0.2, 0.7], &analytic())?))),
        metric_connection(&Qubit, &[1.1, 0.4], &analytic()).and_then(|a| Ok(a.max_abs_diff(&metric_connection_polar(&Qubit, &[1.1, 0.4], &analytic())?))),
    ])
}

// ---------------------------------------------------------------------------
// Trace forms

fn qfi_trace() -> Result<f64> {
    let f3 = three_level();
    let f4 = four_level();
    max_of([
        qfi_trace_forms(&Qubit, &[1.1, 0.4], &analytic()).map(|q| q.metric_check.max(q.connection_check)),
        qfi_trace_forms(&f3, &[0.4, -0.3], &analytic()).map(|q| q.metric_check.max(q.connection_check)),
        qfi_trace_forms(&f4, &[0.2, 0.5, -0.7], &analytic()).map(|q| q.metric_check.max(q.connection_check)),
    ])
}

// ---------------------------------------------------------------------------
// Case-2 alpha geometry

fn alpha_zero_collapse() -> Result<f64> {
    let f3 = three_level();
    let fams: [(&dyn StateFamily, [f64; 2]); 2] = [(&Qubit, [1.1, 0.4]), (&f3, [0.4, -0.3])];
    max_of(fams.iter().map(|(f, th)| {
        let d = analytic();
        let fs = fs_tensor(*f, th, &d)?;
        let t = case2_tensor(*f, th, 0.0, &d)?.max_abs_diff(&fs);
        let comp = case2_components(*f, th, 0.0, &d)?;
        let c = max_abs_real(&(comp.metric - fs.g())).max(max_abs_real(&(comp.omega - fs.omega())));
        let fsr = max_abs(&(alpha_berry_field_strength(*f, th, 0.0, &d)? - berry_curvature(*f, th, &d)?.map(C64::from)));
        let gc = metric_connection(*f, th, &d)?;
        let pair = dual_connections(*f, th, 0.0, &d)?;
        let conn = pair.gamma1.max_abs_diff(&pair.gamma2.conj()).max(pair.gamma1.re().max_abs_diff(&gc));
        Ok(t.max(c).max(fsr).max(conn))
    }))
}

fn alpha_overlap_norm() -> Result<f64> {
    let f3 = three_level();
    let gw = GaussianWave::default();
    let fams: [(&dyn StateFamily, Vec<f64>); 3] = [(&Qubit, vec![1.1, 0.4]), (&f3, vec![0.4, -0.3]), (&gw, vec![0.2, 0.7])];
    max_of(fams.iter().flat_map(|(f, th)| {
        [0.5, -0.5, 0.3, 0.8].map(|a| Ok((alpha_overlap(*f, th, a, &analytic())? - C64::from(1.0 / (1.0 - a * a))).norm()))
    }))
}

fn alpha_omega_tilde_vanishes() -> Result<f64> {
    let f3 = three_level();
    let gw = GaussianWave::default();
    let fams: [(&dyn StateFamily, Vec<f64>); 3] = [(&Qubit, vec![1.1, 0.4]), (&f3, vec![0.4, -0.3]), (&gw, vec![0.2, 0.7])];
    max_of(fams.iter().flat_map(|(f, th)| ALPHAS.map(|a| Ok(max_abs_real(&case2_tensor(*f, th, a, &analytic())?.omega_tilde())))))
}

fn alpha_phase_scaling() -> Result<f64> {
    // The k-direction of the Gaussian wave only moves the phase, the mu-direction only the density.
    let gw = GaussianWave::default();
    let th = [0.2, 0.7];
    let base = case2_tensor(&gw, &th, 0.0, &analytic())?.g();
    max_of([-0.6, -0.3, 0.3, 0.5, 0.6].map(|a| {
        let g = case2_tensor(&gw, &th, a, &analytic())?.g();
        let ratio = g[(1, 1)] / base[(1, 1)];
        let comp = case2_components(&gw, &th, a, &analytic())?;
        Ok((ratio - (1.0 - a) / (1.0 + a))
            .abs()
            .max((g[(0, 0)] - base[(0, 0)]).abs())
            .max(max_abs_real(&(comp.tensor().matrix.map(|z| z.re) - g.clone()))))
    }))
}

fn alpha_qfi_trace_check() -> Result<f64> {
    let f3 = three_level();
    let fams: [(&dyn StateFamily, [f64; 2]); 2] = [(&Qubit, [1.1, 0.4]), (&f3, [0.4, -0.3])];
    max_of(fams.iter().flat_map(|(f, th)| {
        [0.5, -0.3, 0.0].map(|a| {
            let t = case2_tensor(*f, th, a, &analytic())?;
            let tr = alpha_density(*f, th, a, &analytic())?.trace();
            Ok(alpha_qfi_trace(*f, th, a, &analytic())?.max_abs_diff(&t).max((tr - C64::from(1.0 / (1.0 - a * a))).norm()))
        })
    }))
}

fn alpha_field_strength() -> Result<f64> {
    let f3 = three_level();
    let fams: [(&dyn StateFamily, [f64; 2]); 2] = [(&Qubit, [1.1, 0.4]), (&f3, [0.4, -0.3])];
    max_of(fams.iter().flat_map(|(f, th)| {
        [0.4, -0.6].map(|a| Ok(max_abs(&(alpha_berry_field_strength(*f, th, a, &analytic())? - alpha_field_strength_curl(*f, th, a, &analytic())?))))
    }))
}

// ---------------------------------------------------------------------------
// Dualities

fn duality_families() -> Vec<(Box<dyn StateFamily>, Vec<f64>)> {
    vec![(Box::new(Qubit), vec![1.1, 0.4]), (Box::new(three_level()), vec![0.4, -0.3])]
}

fn starstar_duality() -> Result<f64> {
    max_of(duality_families().iter().flat_map(|(f, th)| ALPHAS.map(|a| starstar_residual(f.as_ref(), th, a, &analytic()))).collect::<Vec<_>>())
}

fn re_sum_duality() -> Result<f64> {
    max_of(duality_families().iter().flat_map(|(f, th)| ALPHAS.map(|a| re_sum_residual(f.as_ref(), th, a, &analytic()).map(|r| r.residual))).collect::<Vec<_>>())
}

fn pm_alpha_duality() -> Result<f64> {
    max_of(duality_families().iter().flat_map(|(f, th)| ALPHAS.map(|a| pm_alpha_duality_residual(f.as_ref(), th, a, &analytic()))).collect::<Vec<_>>())
}

fn overlap_conjugation() -> Result<f64> {
    max_of(duality_families().iter().flat_map(|(f, th)| {
        let th2: Vec<f64> = th.iter().map(|t| t + 0.07).collect();
        [0.5, -0.3, 0.0].map(|a| overlap_conjugation_check(f.as_ref(), th, &th2, a, &analytic()))
    }).collect::<Vec<_>>())
}

fn case1_component_agreement() -> Result<f64> {
    let gw = GaussianWave::default();
    let fams: [(&dyn StateFamily, Vec<f64>); 2] = [(&Qubit, vec![1.1, 0.4]), (&gw, vec![0.2, 0.7])];
    max_of(fams.iter().flat_map(|(f, th)| {
        [0.3, -0.5].map(|a| Ok(case1_tensor(*f, th, a, &analytic())?.tensor.max_abs_diff(&case1_components(*f, th, a, &analytic())?)))
    }))
}

// ---------------------------------------------------------------------------
// Non-Hermitian

const KINDS: [NhKind; 4] = [NhKind::LR, NhKind::RL, NhKind::LL, NhKind::RR];

fn nh_hermitian_collapse() -> Result<f64> {
    let spec = NonHermitianModelSpec::spin_field();
    let (l, r) = spec.biorthogonal_pair(0);
    let d = central();
    max_of([[1.1, 0.4], [0.6, -1.2]].iter().flat_map(|th| {
        let reference = fs_tensor(&r, th, &d);
        let (l, r) = (&l, &r);
        KINDS.map(move |k| {
            let t = nh_fs_tensor(l, r, th, k, &d)?;
            Ok(t.max_abs_diff(reference.as_ref().map_err(|e| e.clone())?))
        })
    }).collect::<Vec<_>>())
}

fn nh_flipped_parts() -> Result<f64> {
    let spec = NonHermitianModelSpec::pt_two_level();
    let (l, r) = spec.unit_pair(0);
    max_of([[0.3, 1.0], [0.6, 1.4], [1.5, 1.0]].iter().flat_map(|th| {
        let (l, r) = (&l, &r);
        [NhKind::LL, NhKind::RR].map(move |k| {
            let t = nh_fs_tensor(l, r, th, k, &central())?;
            Ok(max_abs_real(&t.g_tilde()).max(max_abs_real(&t.omega_tilde())))
        })
    }).collect::<Vec<_>>())
}

fn nh_field_strength() -> Result<f64> {
    let spec = NonHermitianModelSpec::pt_two_level();
    let (bl, br) = spec.biorthogonal_pair(0);
    let (ul, ur) = spec.unit_pair(0);
    let th = [0.3, 1.0];
    max_of(KINDS.map(|k| {
        let (l, r): (&dyn StateFamily, &dyn StateFamily) = match k {
            NhKind::LR | NhKind::RL => (&bl, &br),
            NhKind::LL | NhKind::RR => (&ul, &ur),
        };
        let c = nh_berry_curvature(l, r, &th, k, &central())?;
        let curl = nh_berry_curvature_curl(l, r, &th, k, &central())?;
        Ok(max_abs(&(c - curl)))
    }))
}

fn nh_connection_duality() -> Result<f64> {
    let spec = NonHermitianModelSpec::pt_two_level();
    let (bl, br) = spec.biorthogonal_pair(0);
    let (ul, ur) = spec.unit_pair(0);
    let th = [0.3, 1.0];
    max_of(KINDS.map(|k| {
        let (l, r): (&dyn StateFamily, &dyn StateFamily) = match k {
            NhKind::LR | NhKind::RL => (&bl, &br),
            NhKind::LL | NhKind::RR => (&ul, &ur),
        };
        Ok(nh_connections(l, r, &th, k, &central())?.duality_residual)
    }))
}

fn biortho_sweep_residuals() -> Result<f64> {
    let pts = [(0.0, 1.0), (0.3, 1.0), (0.6, 1.0), (0.9, 1.0), (1.5, 1.0), (0.5, 2.0), (2.0, 0.5), (-0.4, 0.7)];
    max_of(pts.map(|(g, c)| {
        let h = pt_two_level(g, c);
        let es = biortho_eig(&h, crate::tol::EP_TOL)?;
        Ok(es.biorthonormality_defect().max(es.eigen_residual(&h)))
    }))
}

fn ep_detection() -> Result<f64> {
    // Residual 0 when the exceptional point is flagged, 1 when it slips through.
    let direct = matches!(biortho_eig(&pt_two_level(1.0, 1.0), crate::tol::EP_TOL), Err(GeomError::ExceptionalPoint(_)));
    let (l, r) = NonHermitianModelSpec::pt_two_level().biorthogonal_pair(0);
    let via_tensor = matches!(
        nh_fs_tensor(&l, &r, &[1.0, 1.0], NhKind::LR, &central()),
        Err(GeomError::ExceptionalPoint(_))
    );
    Ok(if direct && via_tensor { 0.0 } else { 1.0 })
}

// ---------------------------------------------------------------------------
// Appendices

fn generators_self_consistent() -> Result<f64> {
    max_of((0..3u64).flat_map(|seed| {
        let spec = GeneratorFamilySpec::random_self_consistent(3, 1, 40 + seed);
        [0.0, 0.3, 1.0, 2.5].map(move |s| biortho_preservation_defect(&spec, s))
    }).collect::<Vec<_>>())
}

fn generators_mismatched() -> Result<f64> {
    let spec = GeneratorFamilySpec::random_mismatched(3, 9);
    biortho_preservation_defect(&spec, 0.5)
}

fn commuting_generator_agreement() -> Result<f64> {
    let herm = {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let a = random_hermitian(3, &mut rng);
        let b = &a * &a * C64::from(0.3);
        let l0 = random_state(3, &mut rng);
        std::sync::Arc::new(GeneratorFamilySpec::hermitian(vec![a, b], l0)?)
    };
    let pair = std::sync::Arc::new(GeneratorFamilySpec::random_self_consistent(3, 2, 21));
    max_of([herm, pair].map(|spec| {
        let s = [0.3, -0.2];
        let closed = commuting_generator_tensor(&spec, &s)?;
        let j1 = jet(&spec.side(true), &s, &central(), Order::First)?;
        let j2 = jet(&spec.side(false), &s, &central(), Order::First)?;
        Ok(closed.max_abs_diff(&PairProducts::new(&j1, &j2)?.tensor(1.0)))
    }))
}

fn similarity_fixture() -> Result<(SimilarityPair<Qubit>, CMat)> {
    let c = crate::linalg::c;
    let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.2), c(-0.1, 0.0), c(0.8, -0.1)]);
    let pair = SimilarityPair::new(Qubit, m)?;
    let h0 = CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(-0.3, 0.0)]);
    let h = pair.hamiltonian(&h0);
    Ok((pair, h))
}

fn comparator_order_check() -> Result<f64> {
    let (pair, h) = similarity_fixture()?;
    comparator_order(&pair.left(), &pair.right(), &h, None, &[1.0, 0.4], 1e-2, 20, &analytic())
}

fn comparator_small_step() -> Result<f64> {
    let (pair, h) = similarity_fixture()?;
    Ok(imaginary_time_comparator(&pair.left(), &pair.right(), &h, None, &[1.0, 0.4], 1e-3, 50, &analytic())?.max_deviation)
}

fn normalized_qfi_hermitian() -> Result<f64> {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(17);
    let h = random_hermitian(3, &mut rng);
    let psi0 = PureState::basis(random_state(3, &mut rng), NormKind::Unit)?;
    let hp = &h * &psi0.amps;
    let var = crate::linalg::dot(&hp, &hp).re - crate::linalg::dot(&psi0.amps, &hp).norm_sqr();
    max_of([0.0, 0.4, 1.3, -2.0].map(|t| Ok((normalized_generator_qfi(&h, &psi0, t)?[(0, 0)] - 4.0 * var).abs())))
}

fn normalized_qfi_pt() -> Result<f64> {
    let h = pt_two_level(0.6, 1.0);
    let psi0 = PureState::basis(CVec::from_vec(vec![C64::from(0.6), C64::new(0.0, 0.8)]), NormKind::Unit)?;
    let fam = NormalizedGeneratorFamily::new(h.clone(), &psi0)?;
    max_of([0.2, 0.9, 1.7].map(|t| {
        let fd = fs_tensor(&fam, &[t], &central())?.g()[(0, 0)];
        Ok((normalized_generator_qfi(&h, &psi0, t)?[(0, 0)] - 4.0 * fd).abs())
    }))
}

// ---------------------------------------------------------------------------
// Optimisers

fn qng_ground_state() -> Result<f64> {
    let cost = CostSpec::new(pauli_z(), CostKind::HermitianExpectation)?;
    let tr = run_qng(&Qubit, &cost, &OptimizerState::new(vec![2.5, 0.3], 0.1))?;
    if tr.termination != Termination::Converged || tr.records.len() > 200 {
        return Ok(f64::INFINITY);
    }
    Ok((tr.last_cost().unwrap_or_default().re + 1.0).abs())
}

fn rr_eigensolver() -> Result<f64> {
    let h = pt_two_level(0.6, 1.0);
    let mut st = OptimizerState::new(vec![1.0, 0.0], 0.1);
    st.max_iters = 500;
    let tr = rr_variational_eigensolver(&Qubit, &h, &st)?.into_result()?;
    let psi = Qubit.evaluate(&tr.final_theta)?.amps;
    let (e, l) = rr_cost(&psi, &h);
    // both conditions folded into one residual against the 1e-5 eigenvalue tolerance
    Ok((e.norm() - 0.8).abs().max(if l < 1e-8 { 0.0 } else { f64::INFINITY }))
}

fn dual_scheme_smoke() -> Result<f64> {
    let spec = NonHermitianModelSpec::pt_two_level();
    let (l, r) = spec.biorthogonal_pair(0);
    let cost = CostSpec::new(pt_two_level(0.6, 1.0), CostKind::BiorthoExpectation)?;
    let mut st = OptimizerState::new(vec![0.3, 1.0], 0.1);
    st.diff = central();
    let a = qng_step_nh_dual(&l, &r, NhKind::LR, &cost, &st)?;
    let b = qng_step_nh_dual(&l, &r, NhKind::LR, &cost, &st)?;
    let (ar, ai) = (a.delta_r?, a.delta_i?);
    let (br, bi) = (b.delta_r?, b.delta_i?);
    let finite = a.incompatibility.is_finite() && ar.iter().chain(ai.iter()).all(|x| x.is_finite());
    let same = ar == br && ai == bi && a.incompatibility.to_bits() == b.incompatibility.to_bits();
    Ok(if finite && same { 0.0 } else { 1.0 })
}

macro_rules! check {
    ($name:literal, $group:literal, $tol:expr, $cmp:ident, $run:expr, $desc:literal) => {
        CheckSpec { name: $name, group: $group, description: $desc, tolerance: $tol, comparison: Comparison::$cmp, run: $run }
    };
}

pub static CHECKS: &[CheckSpec] = &[
    check!("classical_fisher_gaussian", 1, 1e-6, Below, classical_fisher_gaussian, "Gaussian Fisher-Rao metric equals diag(1/s^2, 2/s^2)"),
    check!("classical_duality", 1, 1e-4, Below, classical_duality, "d_k g_ij = Gamma(alpha)_ik,j + Gamma(-alpha)_jk,i on Gaussian and Bernoulli"),
    check!("qubit_metric_overlap", 2, 1e-6, Below, qubit_metric_overlap_oracle, "qubit metric against the overlap-expansion fit"),
    check!("qubit_curvature_plaquette", 2, 1e-6, Below, qubit_curvature_plaquette, "qubit Berry curvature against plaquette phases"),
    check!("gauge_invariance", 2, 1e-6, Below, gauge_invariance, "tensors and gauge-invariant connections under random phases"),
    check!("trivial_phase_quarter_fisher", 2, 1e-8, Below, trivial_phase_quarter_fisher, "g^FS = g^FR / 4 for real amplitudes"),
    check!("exp_family_closed_forms", 2, 1e-6, Below, exp_family_closed_form_agreement, "exponential-family closed forms against the generic path"),
    check!("metric_compatibility", 3, 1e-4, Below, metric_compatibility, "d_k g_ij - Gamma_ki,j - Gamma_kj,i on qubit and exponential family"),
    check!("exp_family_one_flat", 3, 1e-5, Below, exp_family_one_flat, "Gamma(1) vanishes for the exponential family"),
    check!("braket_vs_polar_connection", 3, 1e-6, Below, braket_vs_polar_connection, "metric connection from bra-kets and from the polar form"),
    check!("qfi_trace_forms", 4, 1e-8, Below, qfi_trace, "density-matrix trace forms of metric and connection"),
    check!("alpha_zero_collapse", 5, 1e-8, Below, alpha_zero_collapse, "Case-2 objects at alpha = 0 equal the Hermitian ones"),
    check!("alpha_overlap", 5, 1e-10, Below, alpha_overlap_norm, "<l_1|l_2> = 1/(1 - alpha^2)"),
    check!("alpha_omega_tilde", 5, 1e-10, Below, alpha_omega_tilde_vanishes, "real antisymmetric part of the Case-2 tensor vanishes"),
    check!("alpha_phase_scaling", 5, 1e-6, Below, alpha_phase_scaling, "phase block scales as (1-alpha)/(1+alpha), classical block fixed"),
    check!("alpha_qfi_trace", 5, 1e-8, Below, alpha_qfi_trace_check, "(1-alpha^2)^2 Tr[rho d rho d rho] equals the Case-2 tensor"),
    check!("alpha_field_strength", 5, 1e-5, Below, alpha_field_strength, "alpha field strength against the curl of i<l_1|d l_2>"),
    check!("starstar_duality", 6, 1e-6, Below, starstar_duality, "bare connections under (alpha -> -alpha, 1 <-> 2, conjugate)"),
    check!("re_sum_duality", 6, 1e-5, Below, re_sum_duality, "Re[Gamma1 + Gamma2] = 2 x Levi-Civita connection of g^(alpha)"),
    check!("pm_alpha_duality", 6, 1e-4, Below, pm_alpha_duality, "d_k Sym FS_ij against the symmetrised connection sum"),
    check!("overlap_conjugation", 6, 1e-8, Below, overlap_conjugation, "overlap divergence under the ** operation"),
    check!("case1_components", 6, 1e-8, Below, case1_component_agreement, "Case-1 component formulas against the direct tensor"),
    check!("nh_hermitian_collapse", 7, 1e-8, Below, nh_hermitian_collapse, "LR/RL/LL/RR tensors coincide for a Hermitian model"),
    check!("nh_flipped_parts", 7, 1e-8, Below, nh_flipped_parts, "LL and RR tensors have no flipped parts"),
    check!("nh_field_strength", 7, 1e-5, Below, nh_field_strength, "complex curvature per kind against the connection curl"),
    check!("nh_connection_duality", 7, 1e-6, Below, nh_connection_duality, "LR/RL slot exchange and LL/RR conjugation of connections"),
    check!("biortho_residuals", 7, 1e-10, Below, biortho_sweep_residuals, "biorthonormality and eigen-residuals on pt_two_level"),
    check!("ep_detection", 7, 0.5, Below, ep_detection, "exceptional point at (gamma, g) = (1, 1) is raised"),
    check!("generators_self_consistent", 8, 1e-10, Below, generators_self_consistent, "preservation defect for A_2 = A_1^dag"),
    check!("generators_mismatched", 8, 1e-3, Above, generators_mismatched, "preservation defect for an unrelated pair"),
    check!("commuting_generators", 8, 1e-6, Below, commuting_generator_agreement, "commuting-generator formula against the differentiated tensor"),
    check!("comparator_order", 8, 1.9, Above, comparator_order_check, "order in dtau of imaginary-time vs natural-gradient deviation"),
    check!("comparator_small_step", 8, 1e-6, Below, comparator_small_step, "largest per-step deviation at dtau = 1e-3 over 50 steps"),
    check!("normalized_qfi_hermitian", 8, 1e-8, Below, normalized_qfi_hermitian, "QFI of a unitary orbit is 4 Var(H) at every theta"),
    check!("normalized_qfi_pt", 8, 1e-5, Below, normalized_qfi_pt, "normalized non-unitary orbit: QFI = 4 g^FS"),
    check!("qng_ground_state", 9, 1e-6, Below, qng_ground_state, "natural gradient reaches the sigma_z ground energy"),
    check!("rr_eigensolver", 9, 1e-5, Below, rr_eigensolver, "RR eigensolver finds |E| = 0.8 on pt_two_level(0.6, 1)"),
    check!("dual_scheme_smoke", 9, 0.5, Below, dual_scheme_smoke, "dual scheme returns finite, reproducible steps"),
];
