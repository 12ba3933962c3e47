//! Hermitian pure-state geometry: Fubini-Study tensor, Berry connection and
//! curvature, the metric connection, alpha-connections with non-metricity and
//! density-matrix trace forms.

use nalgebra::{DMatrix, DVector};

use crate::classical_ig::flatten;
use crate::error::{GeomError, Result};
use crate::linalg::{CMat, CVec, C64};
use crate::pairing::PairProducts;
use crate::state_model::{gradient_of, inner, jet, Differentiator, Jet, Order, PolarJet, StateFamily, Support};
use crate::tensor::{ConnectionField, GeometricTensor};
use crate::tol::{EPS_NORM, TRACE_DIM_CAP};

/// Fails unless `<Psi|Psi> = 1` within `EPS_NORM`.
pub fn require_unit(jet: &Jet, context: &str) -> Result<()> {
    let n2 = inner(&jet.state, &jet.state)?.re;
    let defect = (n2 - 1.0).abs();
    if defect > EPS_NORM {
        return Err(GeomError::Normalization { defect, context: context.to_string() });
    }
    Ok(())
}

pub fn fs_tensor_from_jet(jet: &Jet) -> Result<GeometricTensor> {
    require_unit(jet, "Fubini-Study tensor needs a unit-norm state")?;
    Ok(PairProducts::new(jet, jet)?.tensor(1.0))
}

/// `FS_ij = <d_i Psi|d_j Psi> - <d_i Psi|Psi><Psi|d_j Psi>`.
pub fn fs_tensor(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<GeometricTensor> {
    fs_tensor_from_jet(&jet(family, theta, diff, Order::First)?)
}

/// Metric from the polar decomposition together with the fraction of samples
/// whose phase is undefined.
#[derive(Clone, Debug)]
pub struct PolarMetric {
    pub metric: DMatrix<f64>,
    pub degenerate_fraction: f64,
}

impl PolarMetric {
    /// More than half of the support has a degenerate phase.
    pub fn phase_mostly_degenerate(&self) -> bool {
        self.degenerate_fraction > 0.5
    }
}

pub fn qmt_from_polar(pj: &PolarJet) -> DMatrix<f64> {
    let n = pj.n();
    let m: Vec<f64> = (0..n).map(|i| pj.e(|s| pj.dphi[i][s])).collect();
    DMatrix::from_fn(n, n, |i, j| {
        0.25 * pj.e(|s| pj.dl[i][s] * pj.dl[j][s]) + pj.e(|s| pj.dphi[i][s] * pj.dphi[j][s]) - m[i] * m[j]
    })
}

/// `g = 1/4 E[d ln P d ln P] + Cov_P[d phi, d phi]`.
pub fn qmt_polar(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<PolarMetric> {
    let jt = jet(family, theta, diff, Order::First)?;
    require_unit(&jt, "polar metric needs a unit-norm state")?;
    let pj = PolarJet::from_jet(&jt)?;
    Ok(PolarMetric { metric: qmt_from_polar(&pj), degenerate_fraction: pj.polar.degenerate_fraction() })
}

/// `A_i = i <Psi|d_i Psi>`.
pub fn berry_connection(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<DVector<f64>> {
    let jt = jet(family, theta, diff, Order::First)?;
    require_unit(&jt, "Berry connection needs a unit-norm state")?;
    let pp = PairProducts::new(&jt, &jt)?;
    Ok(DVector::from_iterator(jt.n(), pp.a_db.iter().map(|z| (C64::i() * z).re)))
}

/// Berry curvature `2 omega`, from the antisymmetric part of the Fubini-Study tensor.
pub fn berry_curvature(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<DMatrix<f64>> {
    Ok(fs_tensor(family, theta, diff)?.omega() * 2.0)
}

/// Curvature as `-(d_i A_j - d_j A_i)` with the derivatives of the Berry connection
/// taken by finite differences. Independent oracle for [`berry_curvature`].
pub fn berry_curvature_curl(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<DMatrix<f64>> {
    let da = gradient_of(|t| berry_connection(family, t, diff), theta)?;
    let n = theta.len();
    Ok(DMatrix::from_fn(n, n, |i, j| -(da[i][j] - da[j][i])))
}

pub fn metric_connection_from_jet(jet: &Jet) -> Result<ConnectionField> {
    require_unit(jet, "metric connection needs a unit-norm state")?;
    Ok(PairProducts::new(jet, jet)?.gamma1(1.0)?.re())
}

/// `Gamma^(c)_{ij,k} = Re[<d_ij Psi|d_k Psi> - <d_ij Psi|Psi><Psi|d_k Psi>
///   - <d_i Psi|Psi><d_j Psi|d_k Psi> - <d_j Psi|Psi><d_i Psi|d_k Psi>]`.
pub fn metric_connection(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<ConnectionField> {
    metric_connection_from_jet(&jet(family, theta, diff, Order::Second)?)
}

/// The three groups of expectation terms in the polar form of the metric connection.
pub struct PolarConnectionTerms {
    /// `1/4 E[2 d_ij l d_k l + d_i l d_j l d_k l]`
    pub classical: ConnectionField,
    /// `E[2 d_ij phi d_k phi + 2 d_(i l d_j) phi d_k phi - d_i phi d_j phi d_k l]`
    pub quantum: ConnectionField,
    /// Products of expectations subtracted from the quantum group.
    pub bracket: ConnectionField,
    /// `E[d_i l d_j l d_k l]`
    pub cubic: ConnectionField,
}

pub fn polar_connection_terms(pj: &PolarJet) -> Result<PolarConnectionTerms> {
    if !pj.has_second() {
        return Err(GeomError::Unsupported("polar connection needs second-order jets".into()));
    }
    let n = pj.n();
    let (dl, dp, ddl, ddp) = (&pj.dl, &pj.dphi, &pj.ddl, &pj.ddphi);
    let e_dp: Vec<f64> = (0..n).map(|i| pj.e(|s| dp[i][s])).collect();
    let e_ddp: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| pj.e(|s| ddp[i][j][s])).collect()).collect();
    // e_pl[a][b] = E[d_a phi d_b l]
    let e_pl: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| pj.e(|s| dp[a][s] * dl[b][s])).collect()).collect();
    let classical = ConnectionField::from_real(n, |i, j, k| {
        0.25 * pj.e(|s| 2.0 * ddl[i][j][s] * dl[k][s] + dl[i][s] * dl[j][s] * dl[k][s])
    });
    let cubic = ConnectionField::from_real(n, |i, j, k| pj.e(|s| dl[i][s] * dl[j][s] * dl[k][s]));
    let quantum = ConnectionField::from_real(n, |i, j, k| {
        pj.e(|s| {
            2.0 * ddp[i][j][s] * dp[k][s] + (dl[i][s] * dp[j][s] + dl[j][s] * dp[i][s]) * dp[k][s]
                - dp[i][s] * dp[j][s] * dl[k][s]
        })
    });
    let bracket = ConnectionField::from_real(n, |i, j, k| {
        2.0 * e_ddp[i][j] * e_dp[k]
            + (e_pl[i][j] + e_pl[j][i]) * e_dp[k]
            + e_dp[i] * (e_pl[k][j] - e_pl[j][k])
            + e_dp[j] * (e_pl[k][i] - e_pl[i][k])
    });
    Ok(PolarConnectionTerms { classical, quantum, bracket, cubic })
}

/// Metric connection evaluated from `(P, phi)`: `1/2 (classical + quantum - bracket)`.
pub fn metric_connection_polar(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<ConnectionField> {
    let jt = jet(family, theta, diff, Order::Second)?;
    require_unit(&jt, "metric connection needs a unit-norm state")?;
    let t = polar_connection_terms(&PolarJet::from_jet(&jt)?)?;
    Ok(t.classical.add(&t.quantum).add(&t.bracket.scale(-1.0)).scale(0.5))
}

pub fn nonmetricity_from_terms(t: &PolarConnectionTerms, alpha: f64) -> ConnectionField {
    let h = 0.5 * alpha;
    t.cubic.scale(-0.25 * h).add(&t.quantum.scale(-h)).add(&t.bracket.scale(h))
}

/// Non-metricity `N_{ij,k}(alpha)` in its polar form. This is one admissible choice;
/// it vanishes at `alpha = 0` and is invariant under constant phase shifts.
pub fn nonmetricity(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<ConnectionField> {
    if !alpha.is_finite() {
        return Err(GeomError::NonFinite("alpha".into()));
    }
    let jt = jet(family, theta, diff, Order::Second)?;
    require_unit(&jt, "non-metricity needs a unit-norm state")?;
    Ok(nonmetricity_from_terms(&polar_connection_terms(&PolarJet::from_jet(&jt)?)?, alpha))
}

/// `Gamma^(alpha) = Gamma^(c) + N(alpha)`; returns `Gamma^(c)` itself at `alpha = 0`.
pub fn alpha_family_connection(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<ConnectionField> {
    if !alpha.is_finite() {
        return Err(GeomError::NonFinite("alpha".into()));
    }
    let jt = jet(family, theta, diff, Order::Second)?;
    let gc = metric_connection_from_jet(&jt)?;
    if alpha == 0.0 {
        return Ok(gc);
    }
    let n = nonmetricity_from_terms(&polar_connection_terms(&PolarJet::from_jet(&jt)?)?, alpha);
    Ok(gc.add(&n))
}

/// `max |d_k g_ij - Gamma_{ki,j} - Gamma_{kj,i}|` for the metric connection.
pub fn metric_compatibility_residual(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<f64> {
    let gamma = metric_connection(family, theta, diff)?;
    let dg = gradient_of(|t| Ok(flatten(&fs_tensor(family, t, diff)?.g())), theta)?;
    Ok(compatibility_residual(&dg, &gamma))
}

pub(crate) fn compatibility_residual(dg: &[DVector<f64>], gamma: &ConnectionField) -> f64 {
    let n = gamma.n();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = dg[k][i * n + j] - gamma.get(k, i, j).re - gamma.get(k, j, i).re;
                r = r.max(v.abs());
            }
        }
    }
    r
}

/// Density-matrix trace expressions and their deviations from the bra-ket forms.
#[derive(Clone, Debug)]
pub struct QfiTraceCheck {
    pub metric_trace: DMatrix<f64>,
    pub connection_trace: ConnectionField,
    /// `max |F_g - g^FS|`
    pub metric_check: f64,
    /// `max |F_Gamma - Gamma^(c)|`
    pub connection_check: f64,
}

/// Amplitudes rescaled so the plain inner product reproduces the weighted one.
pub(crate) fn dense_amplitudes(support: &Support, v: &CVec) -> CVec {
    match support {
        Support::Basis => v.clone(),
        Support::Grid { .. } => {
            let w = support.weights(v.len());
            CVec::from_iterator(v.len(), v.iter().zip(w).map(|(z, wk)| z * wk.sqrt()))
        }
    }
}

pub(crate) fn check_trace_cap(len: usize) -> Result<()> {
    if len > TRACE_DIM_CAP {
        return Err(GeomError::DimensionCap { dim: len, cap: TRACE_DIM_CAP });
    }
    Ok(())
}

fn trace3(a: &CMat, b: &CMat, c: &CMat) -> C64 {
    (a * b * c).trace()
}

/// Evaluates `1/4 Tr[rho d_i rho d_j rho + ...]` (four terms) and the six-term
/// connection analogue with `rho = |Psi><Psi|`.
pub fn qfi_trace_forms(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator) -> Result<QfiTraceCheck> {
    let jt = jet(family, theta, diff, Order::Second)?;
    check_trace_cap(jt.state.len())?;
    let g = fs_tensor_from_jet(&jt)?.g();
    let gamma = metric_connection_from_jet(&jt)?;
    let sup = jt.support();
    let psi = dense_amplitudes(&sup, &jt.state.amps);
    let d: Vec<CVec> = jt.d1.iter().map(|v| dense_amplitudes(&sup, v)).collect();
    let dd: Vec<Vec<CVec>> = jt.d2.iter().map(|r| r.iter().map(|v| dense_amplitudes(&sup, v)).collect()).collect();
    let n = jt.n();
    let outer = |a: &CVec, b: &CVec| a * b.adjoint();
    let rho = outer(&psi, &psi);
    let drho: Vec<CMat> = (0..n).map(|i| outer(&d[i], &psi) + outer(&psi, &d[i])).collect();
    let ddrho = |i: usize, j: usize| outer(&dd[i][j], &psi) + outer(&d[i], &d[j]) + outer(&d[j], &d[i]) + outer(&psi, &dd[i][j]);

    let metric_trace = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (&drho[i], &drho[j]);
        0.25 * (trace3(&rho, a, b) + trace3(b, a, &rho) + trace3(&rho, b, a) + trace3(a, b, &rho)).re
    });
    let mut connection_trace = ConnectionField::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let h = ddrho(i, j);
            for k in 0..n {
                let dk = &drho[k];
                let v = trace3(&rho, &h, dk)
                    + trace3(&rho, dk, &h)
                    + trace3(&h, dk, &rho)
                    + trace3(dk, &h, &rho)
                    + trace3(&drho[i], dk, &drho[j])
                    + trace3(&drho[j], dk, &drho[i]);
                connection_trace.set(i, j, k, C64::from(0.25 * v.re));
            }
        }
    }
    let metric_check = crate::linalg::max_abs_real(&(&metric_trace - &g));
    let connection_check = connection_trace.max_abs_diff(&gamma);
    Ok(QfiTraceCheck { metric_trace, connection_trace, metric_check, connection_check })
}
