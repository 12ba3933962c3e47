//! Natural-gradient optimisation on state manifolds.

use nalgebra::{DMatrix, DVector};

use crate::biortho::{kind_jets, NhKind};
use crate::error::{GeomError, Result};
use crate::fs_core::{fs_tensor_from_jet, require_unit};
use crate::linalg::{angle_between, expm, hermiticity_defect, pinv_solve, real_stacked_solve, sandwich, CMat, CVec, C64};
use crate::pairing::PairProducts;
use crate::state_model::{check_point, jet, Differentiator, Jet, Order, StateFamily, Support};
use crate::tol::SVD_CUTOFF;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CostKind {
    /// `<Psi|H|Psi>` with Hermitian `H`.
    HermitianExpectation,
    /// `<Psi_bra|A|Psi_ket>` for a non-Hermitian tensor kind.
    BiorthoExpectation,
    /// `<Psi|(H^dag - conj E)(H - E)|Psi>` with `E` the Rayleigh quotient.
    RrVariance,
}

impl CostKind {
    pub fn parse(s: &str) -> Option<CostKind> {
        match s {
            "hermitian" | "hermitian_expectation" => Some(CostKind::HermitianExpectation),
            "biortho" | "biortho_expectation" => Some(CostKind::BiorthoExpectation),
            "rr" | "rr_variance" => Some(CostKind::RrVariance),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            CostKind::HermitianExpectation => "hermitian_expectation",
            CostKind::BiorthoExpectation => "biortho_expectation",
            CostKind::RrVariance => "rr_variance",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CostSpec {
    pub operator: CMat,
    pub kind: CostKind,
}

impl CostSpec {
    pub fn new(operator: CMat, kind: CostKind) -> Result<Self> {
        if operator.nrows() != operator.ncols() || operator.nrows() == 0 {
            return Err(GeomError::Shape("cost operator must be square".into()));
        }
        if !crate::linalg::is_finite_mat(&operator) {
            return Err(GeomError::NonFinite("cost operator".into()));
        }
        if kind == CostKind::HermitianExpectation {
            let d = hermiticity_defect(&operator);
            if d > 1e-12 {
                return Err(GeomError::Domain(format!("Hermitian cost needs H = H^dag (defect {d:.3e})")));
            }
        }
        Ok(CostSpec { operator, kind })
    }

    fn expect_kind(&self, kind: CostKind) -> Result<()> {
        if self.kind != kind {
            return Err(GeomError::Domain(format!("expected a {} cost, got {}", kind.as_str(), self.kind.as_str())));
        }
        Ok(())
    }
}

/// Iterate, step sizes and stopping rules.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub theta: Vec<f64>,
    pub eta: f64,
    /// Step size of the imaginary-part subproblem in the dual scheme.
    pub eta_i: f64,
    pub svd_cutoff: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Convergence threshold on the cost for the RR eigensolver.
    pub cost_tol: f64,
    pub diff: Differentiator,
}

impl OptimizerState {
    pub fn new(theta: Vec<f64>, eta: f64) -> Self {
        OptimizerState {
            theta,
            eta,
            eta_i: eta,
            svd_cutoff: SVD_CUTOFF,
            max_iters: 200,
            grad_tol: 1e-10,
            cost_tol: 1e-12,
            diff: Differentiator::analytic(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("eta_i", self.eta_i)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(GeomError::Domain(format!("{name} = {v} must be finite and nonnegative")));
            }
        }
        if !(self.svd_cutoff > 0.0 && self.svd_cutoff < 1.0) {
            return Err(GeomError::Domain(format!("svd cutoff {} must lie in (0, 1)", self.svd_cutoff)));
        }
        if self.theta.iter().any(|t| !t.is_finite()) {
            return Err(GeomError::NonFinite("start point".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    LocalMinimum,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::LocalMinimum => "local_minimum",
        }
    }
}

/// One optimiser iterate, recorded before the step is applied.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub iter: usize,
    pub theta: Vec<f64>,
    pub cost: C64,
    pub grad_norm: f64,
    pub condition: f64,
    /// Angle in radians between the real- and imaginary-part steps (0 when not applicable).
    pub incompatibility: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizerTrace {
    pub records: Vec<StepRecord>,
    pub final_theta: Vec<f64>,
    pub termination: Termination,
}

impl OptimizerTrace {
    pub fn last_cost(&self) -> Option<C64> {
        self.records.last().map(|r| r.cost)
    }

    /// Turns a stalled run into a `LocalMinimum` error.
    pub fn into_result(self) -> Result<OptimizerTrace> {
        if self.termination == Termination::LocalMinimum {
            let cost = self.last_cost().unwrap_or_default();
            return Err(GeomError::LocalMinimum(format!("gradient vanished with cost {:.3e} at {:?}", cost.re, self.final_theta)));
        }
        Ok(self)
    }
}

fn basis_vector<'a>(j: &'a Jet, op: &CMat) -> Result<&'a CVec> {
    if j.support() != Support::Basis {
        return Err(GeomError::Unsupported("operator costs need a finite-basis family".into()));
    }
    if j.state.len() != op.nrows() {
        return Err(GeomError::Shape(format!("operator is {}x{}, state has {} entries", op.nrows(), op.ncols(), j.state.len())));
    }
    Ok(&j.state.amps)
}

/// `<bra|A|ket>` and its parameter gradient.
fn expectation_and_gradient(bra: &Jet, ket: &Jet, op: &CMat) -> Result<(C64, Vec<C64>)> {
    let b = basis_vector(bra, op)?;
    let k = basis_vector(ket, op)?;
    let val = sandwich(b, op, k);
    let grad = (0..bra.n()).map(|i| sandwich(&bra.d1[i], op, k) + sandwich(b, op, &ket.d1[i])).collect();
    Ok((val, grad))
}

fn real_vec(v: &[C64], f: impl Fn(C64) -> f64) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|z| f(*z)))
}

/// Result of one Hermitian natural-gradient step.
#[derive(Clone, Debug)]
pub struct QngStep {
    pub delta: DVector<f64>,
    pub cost: f64,
    pub gradient: DVector<f64>,
    pub condition: f64,
    pub rank: usize,
}

/// Solves `g delta = -eta grad L` with the Fubini-Study metric and an SVD pseudo-inverse.
pub fn qng_step_hermitian(family: &dyn StateFamily, cost: &CostSpec, state: &OptimizerState) -> Result<QngStep> {
    cost.expect_kind(CostKind::HermitianExpectation)?;
    state.validate()?;
    check_point(family, &state.theta)?;
    let j = jet(family, &state.theta, &state.diff, Order::First)?;
    let g = fs_tensor_from_jet(&j)?.g();
    let (val, grad) = expectation_and_gradient(&j, &j, &cost.operator)?;
    let gradient = real_vec(&grad, |z| z.re);
    let sol = pinv_solve(&g, &(-state.eta * &gradient), state.svd_cutoff)?;
    if sol.singular {
        return Err(GeomError::Singular("metric vanishes at this point".into()));
    }
    Ok(QngStep { delta: sol.x, cost: val.re, gradient, condition: sol.condition, rank: sol.rank })
}

/// Iterates Hermitian natural-gradient steps until the gradient norm drops below
/// `grad_tol` or `max_iters` steps have been taken.
pub fn run_qng(family: &dyn StateFamily, cost: &CostSpec, start: &OptimizerState) -> Result<OptimizerTrace> {
    let mut st = start.clone();
    let mut records = Vec::new();
    let mut termination = Termination::MaxIterations;
    for iter in 0..st.max_iters {
        let step = qng_step_hermitian(family, cost, &st)?;
        let grad_norm = step.gradient.norm();
        records.push(StepRecord { iter, theta: st.theta.clone(), cost: C64::from(step.cost), grad_norm, condition: step.condition, incompatibility: 0.0 });
        if grad_norm < st.grad_tol {
            termination = Termination::Converged;
            break;
        }
        for (t, d) in st.theta.iter_mut().zip(step.delta.iter()) {
            *t += d;
        }
    }
    Ok(OptimizerTrace { records, final_theta: st.theta, termination })
}

/// Real- and imaginary-part steps of the dual scheme. Neither is merged into the other.
#[derive(Clone, Debug)]
pub struct DualStep {
    pub cost: C64,
    /// Solves `g delta = -eta_R d Re L`.
    pub delta_r: Result<DVector<f64>>,
    /// Solves `gtilde delta = -eta_I d Im L`.
    pub delta_i: Result<DVector<f64>>,
    /// Angle between the two steps; NaN if either subproblem failed.
    pub incompatibility: f64,
    pub condition_r: f64,
    pub condition_i: f64,
    pub grad_norm: f64,
}

fn solve_sub(m: &DMatrix<f64>, rhs: DVector<f64>, cutoff: f64, what: &str) -> (Result<DVector<f64>>, f64) {
    if rhs.iter().all(|x| *x == 0.0) {
        return (Ok(DVector::zeros(rhs.len())), 0.0);
    }
    match pinv_solve(m, &rhs, cutoff) {
        Ok(s) if s.singular => (Err(GeomError::Singular(format!("{what} metric vanishes"))), f64::INFINITY),
        Ok(s) => (Ok(s.x), s.condition),
        Err(e) => (Err(e), f64::NAN),
    }
}

/// One step of the dual scheme for `L = <bra|A|ket>` with the kind's tensor.
pub fn qng_step_nh_dual(left: &dyn StateFamily, right: &dyn StateFamily, kind: NhKind, cost: &CostSpec, state: &OptimizerState) -> Result<DualStep> {
    cost.expect_kind(CostKind::BiorthoExpectation)?;
    state.validate()?;
    let (bra, ket) = kind_jets(left, right, &state.theta, kind, &state.diff, Order::First)?;
    let t = PairProducts::new(&bra, &ket)?.tensor(1.0);
    let (val, grad) = expectation_and_gradient(&bra, &ket, &cost.operator)?;
    // Im L vanishing to rounding counts as zero so the Hermitian limit gives no step.
    let scale = grad.iter().map(|z| z.norm()).fold(val.norm(), f64::max).max(1.0);
    let im_grad = real_vec(&grad, |z| if z.im.abs() <= 1e-14 * scale { 0.0 } else { z.im });
    let (delta_r, condition_r) = solve_sub(&t.g(), -state.eta * real_vec(&grad, |z| z.re), state.svd_cutoff, "real-part");
    let (delta_i, condition_i) = solve_sub(&t.g_tilde(), -state.eta_i * im_grad, state.svd_cutoff, "imaginary-part");
    let incompatibility = match (&delta_r, &delta_i) {
        (Ok(a), Ok(b)) => angle_between(a, b),
        _ => f64::NAN,
    };
    let grad_norm = grad.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(DualStep { cost: val, delta_r, delta_i, incompatibility, condition_r, condition_i, grad_norm })
}

/// `E = <psi|H|psi>` and `L = ||(H - E) psi||^2` for a unit state.
pub fn rr_cost(psi: &CVec, h: &CMat) -> (C64, f64) {
    let e = crate::linalg::dot(psi, &(h * psi));
    let r = h * psi - psi * e;
    (e, r.norm_squared())
}

/// Natural-gradient minimisation of `<psi|(H^dag - conj E)(H - E)|psi>` over a
/// unit-norm right family, re-estimating `E` from the Rayleigh quotient each step.
pub fn rr_variational_eigensolver(right: &dyn StateFamily, h: &CMat, start: &OptimizerState) -> Result<OptimizerTrace> {
    start.validate()?;
    let cost = CostSpec::new(h.clone(), CostKind::RrVariance)?;
    let mut st = start.clone();
    let mut records = Vec::new();
    let mut termination = Termination::MaxIterations;
    for iter in 0..st.max_iters {
        check_point(right, &st.theta)?;
        let j = jet(right, &st.theta, &st.diff, Order::First)?;
        require_unit(&j, "RR eigensolver needs a unit-norm right family")?;
        let psi = basis_vector(&j, &cost.operator)?;
        let (e, l) = rr_cost(psi, h);
        let shifted = h - CMat::identity(h.nrows(), h.ncols()) * e;
        let heff = shifted.adjoint() * &shifted;
        let grad = DVector::from_iterator(j.n(), (0..j.n()).map(|i| 2.0 * sandwich(&j.d1[i], &heff, psi).re));
        let g = fs_tensor_from_jet(&j)?.g();
        let sol = pinv_solve(&g, &(-st.eta * &grad), st.svd_cutoff)?;
        let grad_norm = grad.norm();
        records.push(StepRecord { iter, theta: st.theta.clone(), cost: C64::from(l), grad_norm, condition: sol.condition, incompatibility: 0.0 });
        if l < st.cost_tol {
            termination = Termination::Converged;
            break;
        }
        if grad_norm < st.grad_tol || sol.singular {
            termination = Termination::LocalMinimum;
            break;
        }
        for (t, d) in st.theta.iter_mut().zip(sol.x.iter()) {
            *t += d;
        }
    }
    Ok(OptimizerTrace { records, final_theta: st.theta, termination })
}

/// Per-step comparison of projected imaginary-time evolution with natural-gradient steps.
#[derive(Clone, Debug)]
pub struct ComparatorReport {
    pub dtau: f64,
    /// Parameter points of the natural-gradient trajectory.
    pub thetas: Vec<Vec<f64>>,
    /// `||delta_projected - delta_qng||` at each point.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
}

fn add(theta: &[f64], d: &DVector<f64>) -> Vec<f64> {
    theta.iter().zip(d.iter()).map(|(t, x)| t + x).collect()
}

/// Follows the natural-gradient trajectory for `<L|H|R>` with `eta = dtau` and, at each
/// point, evolves `R` by `e^{-H dtau}` and `L` by `e^{-H_L^dag dtau}` (`H_L = H` unless
/// given), renormalises the pair to `<L|R> = 1` and projects the displacement onto the
/// family through `Sym(FS^LR) delta = <d_i L|R' - R> + <L' - L|d_i R>`.
#[allow(clippy::too_many_arguments)]
pub fn imaginary_time_comparator(
    left: &dyn StateFamily,
    right: &dyn StateFamily,
    h: &CMat,
    h_left: Option<&CMat>,
    theta0: &[f64],
    dtau: f64,
    steps: usize,
    diff: &Differentiator,
) -> Result<ComparatorReport> {
    if !(dtau > 0.0 && dtau.is_finite()) {
        return Err(GeomError::Domain(format!("imaginary-time step {dtau} must be positive")));
    }
    let ur = expm(&(h * C64::from(-dtau)));
    let ul = expm(&(h_left.unwrap_or(h).adjoint() * C64::from(-dtau)));
    let mut theta = theta0.to_vec();
    let (mut thetas, mut deviations) = (Vec::new(), Vec::new());
    for _ in 0..steps {
        let (lj, rj) = kind_jets(left, right, &theta, NhKind::LR, diff, Order::First)?;
        let (l, r) = (basis_vector(&lj, h)?, basis_vector(&rj, h)?);
        let fs_sym = PairProducts::new(&lj, &rj)?.tensor(1.0).sym();

        let (_, grad) = expectation_and_gradient(&lj, &rj, h)?;
        let rhs = CVec::from_iterator(grad.len(), grad.iter().map(|z| -dtau * z));
        let qng = real_stacked_solve(&fs_sym, &rhs, SVD_CUTOFF)?;

        let (mut r2, mut l2) = (&ur * r, &ul * l);
        let s = crate::linalg::dot(&l2, &r2).sqrt();
        if s.norm() == 0.0 || !s.re.is_finite() {
            return Err(GeomError::Singular("evolved pair lost biorthogonality".into()));
        }
        r2 /= s;
        l2 /= s.conj();
        let (dr, dl) = (r2 - r, l2 - l);
        let proj_rhs = CVec::from_iterator(
            lj.n(),
            (0..lj.n()).map(|i| crate::linalg::dot(&lj.d1[i], &dr) + crate::linalg::dot(&dl, &rj.d1[i])),
        );
        let proj = real_stacked_solve(&fs_sym, &proj_rhs, SVD_CUTOFF)?;
        if qng.singular || proj.singular {
            return Err(GeomError::Singular("projection system".into()));
        }
        deviations.push((&proj.x - &qng.x).norm());
        thetas.push(theta.clone());
        theta = add(&theta, &qng.x);
    }
    let max_deviation = deviations.iter().cloned().fold(0.0, f64::max);
    Ok(ComparatorReport { dtau, thetas, deviations, max_deviation })
}

/// Convergence order `log2(D(dtau) / D(dtau/2))` of the largest per-step deviation
/// over the same imaginary-time window `[0, steps*dtau]`.
#[allow(clippy::too_many_arguments)]
pub fn comparator_order(
    left: &dyn StateFamily,
    right: &dyn StateFamily,
    h: &CMat,
    h_left: Option<&CMat>,
    theta0: &[f64],
    dtau: f64,
    steps: usize,
    diff: &Differentiator,
) -> Result<f64> {
    let a = imaginary_time_comparator(left, right, h, h_left, theta0, dtau, steps, diff)?;
    let b = imaginary_time_comparator(left, right, h, h_left, theta0, 0.5 * dtau, 2 * steps, diff)?;
    Ok((a.max_deviation / b.max_deviation).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{pauli_z, Qubit};

    #[test]
    fn hermitian_cost_rejects_non_hermitian() {
        let h = crate::models::pt_two_level(0.6, 1.0);
        assert!(CostSpec::new(h, CostKind::HermitianExpectation).is_err());
    }

    #[test]
    fn eigenstate_gives_zero_step() {
        let cost = CostSpec::new(pauli_z(), CostKind::HermitianExpectation).unwrap();
        let st = OptimizerState::new(vec![std::f64::consts::PI, 0.2], 0.1);
        let s = qng_step_hermitian(&Qubit, &cost, &st).unwrap();
        assert!(s.delta.norm() < 1e-14);
    }

    #[test]
    fn zero_iterations_give_empty_trace() {
        let cost = CostSpec::new(pauli_z(), CostKind::HermitianExpectation).unwrap();
        let mut st = OptimizerState::new(vec![2.5, 0.3], 0.1);
        st.max_iters = 0;
        let tr = run_qng(&Qubit, &cost, &st).unwrap();
        assert!(tr.records.is_empty());
        assert_eq!(tr.final_theta, vec![2.5, 0.3]);
    }
}
