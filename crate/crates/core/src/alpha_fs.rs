//! Alpha-deformed Fubini-Study structures built from powers of the wavefunction.
//!
//! Case 2 pairs `l_1 = P^{(1-a)/2} e^{i(1-a)phi} / (1-a)` with
//! `l_2 = P^{(1+a)/2} e^{i(1-a)phi} / (1+a)`, so `<l_1|l_2> = 1/(1-a^2)`.
//! Case 1 pairs `Psi^{1-a}/(1-a)` with `Psi^{1+a}/(1+a)` and is kept as a
//! diagnostic: the two are not normalised against each other.

use nalgebra::{DMatrix, DVector};

use crate::classical_ig::flatten;
use crate::error::{GeomError, Result};
use crate::fs_core::{check_trace_cap, dense_amplitudes, metric_connection_from_jet, require_unit};
use crate::linalg::{CMat, CVec, C64, I};
use crate::pairing::PairProducts;
use crate::state_model::{gradient_of, inner_raw, jet, Differentiator, Jet, Order, PolarJet, StateFamily};
use crate::tensor::{ConnectionField, DualConnectionPair, GeometricTensor};
use crate::tol::EPS_NORM;

/// Rejects `alpha` outside the open interval `(-1, 1)`.
pub fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha.abs() >= 1.0 {
        return Err(GeomError::ExcludedAlpha(alpha));
    }
    Ok(())
}

/// `coef * P^a * e^{i b phi}` evaluated pointwise.
#[derive(Clone, Copy, Debug)]
pub struct PowerMap {
    pub coef: f64,
    pub a: f64,
    pub b: f64,
}

impl PowerMap {
    /// `l_1` of the biorthogonal pair.
    pub fn l1(alpha: f64) -> Self {
        PowerMap { coef: 1.0 / (1.0 - alpha), a: 0.5 * (1.0 - alpha), b: 1.0 - alpha }
    }

    /// `l_2` evaluated at `-alpha`: `P^{(1+alpha)/2} e^{i(1-alpha)phi}/(1+alpha)`.
    pub fn l2(alpha: f64) -> Self {
        PowerMap { coef: 1.0 / (1.0 + alpha), a: 0.5 * (1.0 + alpha), b: 1.0 - alpha }
    }

    /// `Psi^{1-alpha}/(1-alpha)`.
    pub fn plain(alpha: f64) -> Self {
        PowerMap { coef: 1.0 / (1.0 - alpha), a: 0.5 * (1.0 - alpha), b: 1.0 - alpha }
    }

    /// Jet of the mapped function. Samples with a degenerate phase are set to zero.
    pub fn apply(&self, base: &Jet, pj: &PolarJet) -> Jet {
        let m = base.state.len();
        let n = pj.n();
        let phi = pj.phase();
        let mut val = CVec::zeros(m);
        let mut d1 = vec![CVec::zeros(m); n];
        let mut d2 = if pj.has_second() { vec![vec![CVec::zeros(m); n]; n] } else { Vec::new() };
        for (s, &k) in pj.valid.iter().enumerate() {
            let l = C64::from_polar(self.coef * pj.polar.p[k].powf(self.a), self.b * phi[s]);
            val[k] = l;
            let w: Vec<C64> = (0..n).map(|i| C64::new(self.a * pj.dl[i][s], self.b * pj.dphi[i][s])).collect();
            for i in 0..n {
                d1[i][k] = l * w[i];
            }
            if pj.has_second() {
                for i in 0..n {
                    for j in 0..n {
                        d2[i][j][k] = l * (w[i] * w[j] + C64::new(self.a * pj.ddl[i][j][s], self.b * pj.ddphi[i][j][s]));
                    }
                }
            }
        }
        let mut state = base.state.with_amps(val);
        state.norm = crate::state_model::NormKind::Unnormalized;
        Jet { state, d1, d2 }
    }
}

/// Jets of a bra map and a ket map applied to one unit-norm family.
pub fn power_jets(family: &dyn StateFamily, theta: &[f64], bra: PowerMap, ket: PowerMap, diff: &Differentiator, order: Order) -> Result<(Jet, Jet)> {
    let base = jet(family, theta, diff, order)?;
    require_unit(&base, "alpha representation needs a unit-norm state")?;
    let pj = PolarJet::from_jet(&base)?;
    Ok((bra.apply(&base, &pj), ket.apply(&base, &pj)))
}

fn case2_jets(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator, order: Order) -> Result<(Jet, Jet)> {
    check_alpha(alpha)?;
    let (l1, l2) = power_jets(family, theta, PowerMap::l1(alpha), PowerMap::l2(alpha), diff, order)?;
    let c = 1.0 - alpha * alpha;
    let overlap = inner_raw(&l1.support(), &l1.state.amps, &l2.state.amps);
    let defect = (overlap - C64::from(1.0 / c)).norm();
    if !overlap.re.is_finite() || defect > EPS_NORM * (1.0f64).max(1.0 / c) {
        return Err(GeomError::Normalization { defect, context: format!("<l_1|l_2> at alpha = {alpha}") });
    }
    Ok((l1, l2))
}

/// `<l_1|l_2>`, which equals `1/(1-alpha^2)`.
pub fn alpha_overlap(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<C64> {
    check_alpha(alpha)?;
    let (l1, l2) = power_jets(family, theta, PowerMap::l1(alpha), PowerMap::l2(alpha), diff, Order::First)?;
    Ok(inner_raw(&l1.support(), &l1.state.amps, &l2.state.amps))
}

/// `FS_ij = <d_i l_1|d_j l_2> - (1-alpha^2) <d_i l_1|l_2><l_1|d_j l_2>`.
pub fn case2_tensor(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<GeometricTensor> {
    let (l1, l2) = case2_jets(family, theta, alpha, diff, Order::First)?;
    Ok(PairProducts::new(&l1, &l2)?.tensor(1.0 - alpha * alpha))
}

/// Case-2 components from amplitude and phase derivatives.
#[derive(Clone, Debug)]
pub struct Case2Components {
    /// `1/4 E[dl dl] + (1-alpha)/(1+alpha) Cov[dphi, dphi]`
    pub metric: DMatrix<f64>,
    /// `1/(2(1+alpha)) E[dl_i dphi_j - dphi_i dl_j]`
    pub omega: DMatrix<f64>,
    /// `-alpha/(2(1+alpha)) E[dl_i dphi_j + dphi_i dl_j]`
    pub g_tilde: DMatrix<f64>,
    /// The classical block `1/4 E[dl dl]` alone.
    pub classical: DMatrix<f64>,
    /// `Cov[dphi, dphi]` before scaling.
    pub phase_covariance: DMatrix<f64>,
}

impl Case2Components {
    pub fn tensor(&self) -> GeometricTensor {
        let n = self.metric.nrows();
        GeometricTensor::new(CMat::from_fn(n, n, |i, j| C64::new(self.metric[(i, j)], self.omega[(i, j)] + self.g_tilde[(i, j)])))
    }
}

pub fn case2_components(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<Case2Components> {
    check_alpha(alpha)?;
    let base = jet(family, theta, diff, Order::First)?;
    require_unit(&base, "alpha components need a unit-norm state")?;
    let pj = PolarJet::from_jet(&base)?;
    if pj.polar.degenerate_fraction() > 0.5 {
        return Err(GeomError::Domain("phase is undefined on most of the support".into()));
    }
    let n = pj.n();
    let x = |i: usize, j: usize| pj.e(|s| pj.dl[i][s] * pj.dphi[j][s]);
    let mphi: Vec<f64> = (0..n).map(|i| pj.e(|s| pj.dphi[i][s])).collect();
    let classical = DMatrix::from_fn(n, n, |i, j| 0.25 * pj.e(|s| pj.dl[i][s] * pj.dl[j][s]));
    let phase_covariance = DMatrix::from_fn(n, n, |i, j| pj.e(|s| pj.dphi[i][s] * pj.dphi[j][s]) - mphi[i] * mphi[j]);
    let metric = &classical + &phase_covariance * ((1.0 - alpha) / (1.0 + alpha));
    let k = 0.5 / (1.0 + alpha);
    let omega = DMatrix::from_fn(n, n, |i, j| k * (x(i, j) - x(j, i)));
    let g_tilde = DMatrix::from_fn(n, n, |i, j| -alpha * k * (x(i, j) + x(j, i)));
    Ok(Case2Components { metric, omega, g_tilde, classical, phase_covariance })
}

/// Case-1 tensor with its normalisation defect `|<l_alpha|l_{-alpha}> - 1|`.
#[derive(Clone, Debug)]
pub struct Case1Tensor {
    pub tensor: GeometricTensor,
    pub normalization_defect: f64,
}

/// `FS_ij = <d_i l_alpha|d_j l_{-alpha}> - <d_i l_alpha|l_{-alpha}><l_alpha|d_j l_{-alpha}>`.
pub fn case1_tensor(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<Case1Tensor> {
    check_alpha(alpha)?;
    let (a, b) = power_jets(family, theta, PowerMap::plain(alpha), PowerMap::plain(-alpha), diff, Order::First)?;
    let pp = PairProducts::new(&a, &b)?;
    Ok(Case1Tensor { tensor: pp.tensor(1.0), normalization_defect: (pp.ab - C64::from(1.0)).norm() })
}

/// Case-1 tensor assembled from `cos(2 alpha phi)`- and `sin(2 alpha phi)`-weighted
/// expectations of the amplitude and phase derivatives.
pub fn case1_components(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<GeometricTensor> {
    check_alpha(alpha)?;
    let base = jet(family, theta, diff, Order::First)?;
    require_unit(&base, "alpha components need a unit-norm state")?;
    let pj = PolarJet::from_jet(&base)?;
    let n = pj.n();
    let phi = pj.phase();
    let cs: Vec<f64> = phi.iter().map(|p| (2.0 * alpha * p).cos()).collect();
    let sn: Vec<f64> = phi.iter().map(|p| (2.0 * alpha * p).sin()).collect();
    let ew = |w: &[f64], f: &dyn Fn(usize) -> f64| pj.e(|s| w[s] * f(s));
    let cl: Vec<f64> = (0..n).map(|i| ew(&cs, &|s| pj.dl[i][s])).collect();
    let sl: Vec<f64> = (0..n).map(|i| ew(&sn, &|s| pj.dl[i][s])).collect();
    let cp: Vec<f64> = (0..n).map(|i| ew(&cs, &|s| pj.dphi[i][s])).collect();
    let sp: Vec<f64> = (0..n).map(|i| ew(&sn, &|s| pj.dphi[i][s])).collect();
    let r = |s: usize, i: usize, j: usize| 0.25 * pj.dl[i][s] * pj.dl[j][s] + pj.dphi[i][s] * pj.dphi[j][s];
    let jj = |s: usize, i: usize, j: usize| 0.5 * (pj.dl[i][s] * pj.dphi[j][s] - pj.dphi[i][s] * pj.dl[j][s]);
    let inv = 1.0 / (alpha * alpha - 1.0);
    Ok(GeometricTensor::new(CMat::from_fn(n, n, |i, j| {
        let g = ew(&cs, &|s| r(s, i, j)) + inv * (0.25 * cl[i] * cl[j] + cp[i] * cp[j] - 0.25 * sl[i] * sl[j] - sp[i] * sp[j]);
        let re_anti = -ew(&sn, &|s| jj(s, i, j)) + 0.5 * inv * (cl[j] * sp[i] - cl[i] * sp[j] + sl[j] * cp[i] - sl[i] * cp[j]);
        let im_sym = ew(&sn, &|s| r(s, i, j)) + inv * (0.25 * (cl[i] * sl[j] + sl[i] * cl[j]) + sp[i] * cp[j] + cp[i] * sp[j]);
        let im_anti = ew(&cs, &|s| jj(s, i, j)) + 0.5 * inv * (cl[i] * cp[j] - cp[i] * cl[j] + sp[i] * sl[j] - sl[i] * sp[j]);
        C64::new(g + re_anti, im_sym + im_anti)
    })))
}

/// Complex field strength `-2i (antisym FS^(alpha))`, equal to `omega + omegatilde` in
/// curvature units.
pub fn alpha_berry_field_strength(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<CMat> {
    Ok(case2_tensor(family, theta, alpha, diff)?.curvature())
}

/// `-(d_i A_j - d_j A_i)` with `A_i = i <l_1|d_i l_2>` differentiated numerically.
pub fn alpha_field_strength_curl(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<CMat> {
    let n = theta.len();
    let conn = |t: &[f64]| -> Result<DVector<f64>> {
        let (l1, l2) = case2_jets(family, t, alpha, diff, Order::First)?;
        let a: Vec<C64> = PairProducts::new(&l1, &l2)?.a_db.iter().map(|z| I * z).collect();
        Ok(DVector::from_fn(2 * n, |r, _| if r < n { a[r].re } else { a[r - n].im }))
    };
    let da = gradient_of(conn, theta)?;
    Ok(CMat::from_fn(n, n, |i, j| -(C64::new(da[i][j], da[i][n + j]) - C64::new(da[j][i], da[j][n + i]))))
}

/// Dense `rho^(alpha) = |l_2><l_1|` (trace `1/(1-alpha^2)`).
pub fn alpha_density(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<CMat> {
    let (l1, l2) = case2_jets(family, theta, alpha, diff, Order::First)?;
    check_trace_cap(l1.state.len())?;
    let sup = l1.support();
    Ok(dense_amplitudes(&sup, &l2.state.amps) * dense_amplitudes(&sup, &l1.state.amps).adjoint())
}

/// Hermitian part `(rho + rho^dag)/2` of the alpha density.
pub fn alpha_density_observable(rho: &CMat) -> CMat {
    (rho + rho.adjoint()) * C64::from(0.5)
}

/// `(1-alpha^2)^2 Tr[rho d_i rho d_j rho]` with `rho = |l_2><l_1|`.
pub fn alpha_qfi_trace(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<GeometricTensor> {
    let (l1, l2) = case2_jets(family, theta, alpha, diff, Order::First)?;
    check_trace_cap(l1.state.len())?;
    let sup = l1.support();
    let dense = |v: &CVec| dense_amplitudes(&sup, v);
    let (a, b) = (dense(&l1.state.amps), dense(&l2.state.amps));
    let rho = &b * a.adjoint();
    let n = l1.n();
    let drho: Vec<CMat> = (0..n).map(|i| dense(&l2.d1[i]) * a.adjoint() + &b * dense(&l1.d1[i]).adjoint()).collect();
    let c = 1.0 - alpha * alpha;
    Ok(GeometricTensor::new(CMat::from_fn(n, n, |i, j| (&rho * &drho[i] * &drho[j]).trace() * (c * c))))
}

/// Gauge-invariant connections `Gamma^{1(alpha)}`, `Gamma^{2(-alpha)}` and the bare
/// `<d_ij l_1|d_k l_2>`, `<d_k l_1|d_ij l_2>`.
pub fn dual_connections(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<DualConnectionPair> {
    let (l1, l2) = case2_jets(family, theta, alpha, diff, Order::Second)?;
    let pp = PairProducts::new(&l1, &l2)?;
    let c = 1.0 - alpha * alpha;
    Ok(DualConnectionPair { gamma1: pp.gamma1(c)?, gamma2: pp.gamma2(c)?, bare1: pp.bare1()?, bare2: pp.bare2()? })
}

/// `max |bare1 - (bare2)^**|` where `**` flips the sign of `alpha`, exchanges the
/// roles of `l_1` and `l_2` and conjugates.
pub fn starstar_residual(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<f64> {
    let pair = dual_connections(family, theta, alpha, diff)?;
    // bare2 at -alpha with the slots exchanged: <d_k l_2(-alpha)|d_ij l_1(alpha)>
    let (l1, l2) = case2_jets(family, theta, alpha, diff, Order::Second)?;
    let swapped = PairProducts::new(&l2, &l1)?.bare2()?.conj();
    Ok(pair.bare1.max_abs_diff(&swapped))
}

fn flatten_complex(m: &CMat) -> DVector<f64> {
    let re = flatten(&m.map(|z| z.re));
    let im = flatten(&m.map(|z| z.im));
    DVector::from_iterator(re.len() * 2, re.iter().chain(im.iter()).copied())
}

/// `max |d_k Sym FS_ij - 1/2 (G1_ik,j + G2_jk,i + G1_jk,i + G2_ik,j)|` with the
/// derivative of the tensor taken numerically.
pub fn pm_alpha_duality_residual(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<f64> {
    let pair = dual_connections(family, theta, alpha, diff)?;
    let n = theta.len();
    let dfs = gradient_of(|t| Ok(flatten_complex(&case2_tensor(family, t, alpha, diff)?.sym())), theta)?;
    let (g1, g2) = (&pair.gamma1, &pair.gamma2);
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let lhs = C64::new(dfs[k][i * n + j], dfs[k][n * n + i * n + j]);
                let rhs = (g1.get(i, k, j) + g2.get(j, k, i) + g1.get(j, k, i) + g2.get(i, k, j)) * 0.5;
                r = r.max((lhs - rhs).norm());
            }
        }
    }
    Ok(r)
}

/// Levi-Civita connection `1/2 (d_i g_jk + d_j g_ik - d_k g_ij)` of the alpha metric,
/// with the metric differentiated numerically.
pub fn alpha_metric_connection(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<ConnectionField> {
    let n = theta.len();
    let dg = gradient_of(|t| Ok(flatten(&case2_tensor(family, t, alpha, diff)?.g())), theta)?;
    let d = |k: usize, i: usize, j: usize| dg[k][i * n + j];
    Ok(ConnectionField::from_real(n, |i, j, k| 0.5 * (d(i, j, k) + d(j, i, k) - d(k, i, j))))
}

/// Residuals of `Re[Gamma^{1(alpha)} + Gamma^{2(-alpha)}] = 2 Gamma`.
#[derive(Clone, Debug)]
pub struct ReSumCheck {
    /// Against the Levi-Civita connection of `g^(alpha)` (the Hermitian metric
    /// connection at `alpha = 0`).
    pub residual: f64,
    /// Against the `alpha = 0` metric connection at every `alpha`.
    pub literal_residual: f64,
}

pub fn re_sum_residual(family: &dyn StateFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<ReSumCheck> {
    let pair = dual_connections(family, theta, alpha, diff)?;
    let sum = pair.gamma1.add(&pair.gamma2).re();
    let base = jet(family, theta, diff, Order::Second)?;
    require_unit(&base, "metric connection needs a unit-norm state")?;
    let gamma_c = metric_connection_from_jet(&base)?;
    let literal_residual = sum.max_abs_diff(&gamma_c.scale(2.0));
    let residual = if alpha == 0.0 {
        literal_residual
    } else {
        sum.max_abs_diff(&alpha_metric_connection(family, theta, alpha, diff)?.scale(2.0))
    };
    Ok(ReSumCheck { residual, literal_residual })
}

/// `D(a, b) = <l_1(b) - l_1(a)|l_2(b) - l_2(a)>` for the given maps.
fn overlap_divergence(family: &dyn StateFamily, a: &[f64], b: &[f64], bra: PowerMap, ket: PowerMap, diff: &Differentiator) -> Result<C64> {
    let (ba, ka) = power_jets(family, a, bra, ket, diff, Order::First)?;
    let (bb, kb) = power_jets(family, b, bra, ket, diff, Order::First)?;
    let dbra = &bb.state.amps - &ba.state.amps;
    let dket = &kb.state.amps - &ka.state.amps;
    Ok(inner_raw(&ba.support(), &dbra, &dket))
}

/// `|D^(alpha)(theta||theta') - (D^(-alpha)(theta'||theta))^**|`.
pub fn overlap_conjugation_check(family: &dyn StateFamily, theta: &[f64], theta2: &[f64], alpha: f64, diff: &Differentiator) -> Result<f64> {
    check_alpha(alpha)?;
    let lhs = overlap_divergence(family, theta, theta2, PowerMap::l1(alpha), PowerMap::l2(alpha), diff)?;
    // (alpha -> -alpha) turns the reversed divergence back into the l_1(alpha), l_2(-alpha)
    // maps; exchanging their slots and conjugating gives the right-hand side.
    let rhs = overlap_divergence(family, theta2, theta, PowerMap::l2(alpha), PowerMap::l1(alpha), diff)?.conj();
    Ok((lhs - rhs).norm())
}
