//! Parametrized pure states, their derivatives, inner products and polar form.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{GeomError, Result};
use crate::linalg::{C64, CVec};
use crate::tol::EPS_P;

/// A point in parameter space.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterPoint(Vec<f64>);

impl ParameterPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GeomError::Shape("parameter point must have at least one coordinate".into()));
        }
        if let Some(k) = coords.iter().position(|x| !x.is_finite()) {
            return Err(GeomError::NonFinite(format!("parameter coordinate {k}")));
        }
        Ok(ParameterPoint(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Index set carrying the amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    /// Finite orthonormal basis; every point has weight 1.
    Basis,
    /// Uniform grid starting at `x0` with spacing `h`; trapezoid weights.
    Grid { x0: f64, h: f64 },
}

impl Support {
    pub fn weights(&self, len: usize) -> Vec<f64> {
        match *self {
            Support::Basis => vec![1.0; len],
            Support::Grid { h, .. } => {
                let mut w = vec![h; len];
                if len >= 2 {
                    w[0] = 0.5 * h;
                    w[len - 1] = 0.5 * h;
                }
                w
            }
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, Support::Grid { .. })
    }

    /// Sample coordinates for a grid support, indices for a basis.
    pub fn points(&self, len: usize) -> Vec<f64> {
        match *self {
            Support::Basis => (0..len).map(|k| k as f64).collect(),
            Support::Grid { x0, h } => (0..len).map(|k| x0 + h * k as f64).collect(),
        }
    }

    fn compatible(&self, other: &Support) -> bool {
        match (self, other) {
            (Support::Basis, Support::Basis) => true,
            (Support::Grid { x0: a, h: ha }, Support::Grid { x0: b, h: hb }) => {
                (a - b).abs() <= 1e-12 * (1.0 + a.abs()) && (ha - hb).abs() <= 1e-12 * ha.abs()
            }
            _ => false,
        }
    }
}

/// Uniform grid description `[min, max]` with `points` samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(GeomError::Domain(format!("grid bounds [{min}, {max}]")));
        }
        if points < 2 {
            return Err(GeomError::Domain("grid needs at least 2 points".into()));
        }
        Ok(GridSpec { min, max, points })
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.points - 1) as f64
    }

    pub fn support(&self) -> Support {
        Support::Grid { x0: self.min, h: self.spacing() }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.support().points(self.points)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormKind {
    Unit,
    Unnormalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    pub amps: CVec,
    pub support: Support,
    pub norm: NormKind,
}

impl PureState {
    pub fn basis(amps: CVec, norm: NormKind) -> Result<Self> {
        Self::build(amps, Support::Basis, norm)
    }

    pub fn grid(amps: CVec, x0: f64, h: f64, norm: NormKind) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GeomError::Domain(format!("grid spacing {h}")));
        }
        if amps.len() < 2 {
            return Err(GeomError::Shape("grid state needs at least 2 samples".into()));
        }
        Self::build(amps, Support::Grid { x0, h }, norm)
    }

    fn build(amps: CVec, support: Support, norm: NormKind) -> Result<Self> {
        if amps.is_empty() {
            return Err(GeomError::Shape("empty amplitude vector".into()));
        }
        if !crate::linalg::is_finite_vec(&amps) {
            return Err(GeomError::NonFinite("state amplitudes".into()));
        }
        Ok(PureState { amps, support, norm })
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.support.weights(self.amps.len())
    }

    pub fn norm_sqr(&self) -> f64 {
        inner(self, self).map(|z| z.re).unwrap_or(f64::NAN)
    }

    /// Same support and norm tag, new amplitudes.
    pub fn with_amps(&self, amps: CVec) -> PureState {
        PureState { amps, support: self.support, norm: self.norm }
    }
}

/// Weighted inner product of raw amplitude vectors on a common support.
pub fn inner_raw(support: &Support, a: &CVec, b: &CVec) -> C64 {
    match support {
        Support::Basis => crate::linalg::dot(a, b),
        Support::Grid { .. } => {
            let w = support.weights(a.len());
            a.iter().zip(b.iter()).zip(w.iter()).map(|((x, y), wk)| x.conj() * y * *wk).sum()
        }
    }
}

/// `<bra|ket>`, conjugate-linear in `bra`.
pub fn inner(bra: &PureState, ket: &PureState) -> Result<C64> {
    if bra.len() != ket.len() || !bra.support.compatible(&ket.support) {
        return Err(GeomError::Shape(format!(
            "inner product of states with {} and {} samples on different supports",
            bra.len(),
            ket.len()
        )));
    }
    Ok(inner_raw(&bra.support, &bra.amps, &ket.amps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// State with its first and (optionally) second parameter derivatives.
#[derive(Clone, Debug)]
pub struct Jet {
    pub state: PureState,
    pub d1: Vec<CVec>,
    /// `d2[i][j]`; empty for first-order jets.
    pub d2: Vec<Vec<CVec>>,
}

impl Jet {
    pub fn n(&self) -> usize {
        self.d1.len()
    }

    pub fn has_second(&self) -> bool {
        !self.d2.is_empty()
    }

    pub fn support(&self) -> Support {
        self.state.support
    }

    /// Applies a pointwise linear map to every component (e.g. a constant gauge factor).
    pub fn map(&self, f: impl Fn(&CVec) -> CVec) -> Jet {
        Jet {
            state: self.state.with_amps(f(&self.state.amps)),
            d1: self.d1.iter().map(&f).collect(),
            d2: self.d2.iter().map(|row| row.iter().map(&f).collect()).collect(),
        }
    }
}

/// A differentiable map from parameters to pure states.
pub trait StateFamily: Send + Sync {
    /// Number of parameters.
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    /// Closed domain box; `None` means unbounded on that axis.
    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY); self.dim()]
    }

    fn evaluate(&self, theta: &[f64]) -> Result<PureState>;

    /// Exact derivatives, when the family knows them.
    fn analytic_jet(&self, _theta: &[f64], _order: Order) -> Option<Result<Jet>> {
        None
    }
}

impl<T: StateFamily + ?Sized> StateFamily for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        (**self).bounds()
    }
    fn evaluate(&self, theta: &[f64]) -> Result<PureState> {
        (**self).evaluate(theta)
    }
    fn analytic_jet(&self, theta: &[f64], order: Order) -> Option<Result<Jet>> {
        (**self).analytic_jet(theta, order)
    }
}

impl<T: StateFamily + ?Sized> StateFamily for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        (**self).bounds()
    }
    fn evaluate(&self, theta: &[f64]) -> Result<PureState> {
        (**self).evaluate(theta)
    }
    fn analytic_jet(&self, theta: &[f64], order: Order) -> Option<Result<Jet>> {
        (**self).analytic_jet(theta, order)
    }
}

impl<T: StateFamily + ?Sized> StateFamily for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn bounds(&self) -> Vec<(f64, f64)> {
        (**self).bounds()
    }
    fn evaluate(&self, theta: &[f64]) -> Result<PureState> {
        (**self).evaluate(theta)
    }
    fn analytic_jet(&self, theta: &[f64], order: Order) -> Option<Result<Jet>> {
        (**self).analytic_jet(theta, order)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivMode {
    Analytic,
    CentralFd,
    RichardsonFd,
}

impl DerivMode {
    pub fn parse(s: &str) -> Option<DerivMode> {
        match s {
            "analytic" => Some(DerivMode::Analytic),
            "fd" | "central" | "central_fd" => Some(DerivMode::CentralFd),
            "richardson" | "richardson_fd" => Some(DerivMode::RichardsonFd),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DerivMode::Analytic => "analytic",
            DerivMode::CentralFd => "fd",
            DerivMode::RichardsonFd => "richardson",
        }
    }
}

/// How parameter derivatives are obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Differentiator {
    pub mode: DerivMode,
    /// Base first-derivative step, scaled by `max(1, |theta_i|)`.
    pub step: Option<f64>,
}

impl Default for Differentiator {
    fn default() -> Self {
        Differentiator { mode: DerivMode::CentralFd, step: None }
    }
}

impl Differentiator {
    pub fn analytic() -> Self {
        Differentiator { mode: DerivMode::Analytic, step: None }
    }

    pub fn central() -> Self {
        Differentiator { mode: DerivMode::CentralFd, step: None }
    }

    pub fn richardson() -> Self {
        Differentiator { mode: DerivMode::RichardsonFd, step: None }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = Some(h);
        self
    }

    /// Agreement tolerance appropriate for this mode.
    pub fn eps(&self) -> f64 {
        match self.mode {
            DerivMode::Analytic => crate::tol::EPS_ANALYTIC,
            _ => crate::tol::EPS_FD,
        }
    }

    fn steps(&self) -> (f64, f64) {
        match (self.mode, self.step) {
            (DerivMode::RichardsonFd, Some(h)) => (h, 2.0 * h),
            (DerivMode::RichardsonFd, None) => (1e-3, 2e-3),
            (_, Some(h)) => (h, 10.0 * h),
            (_, None) => (1e-5, 1e-4),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(GeomError::Domain(format!("finite-difference step {h}")));
            }
        }
        Ok(())
    }
}

/// Checks `theta` against a family's dimension and domain box.
pub fn check_point(family: &dyn StateFamily, theta: &[f64]) -> Result<()> {
    check_box(family.dim(), &family.bounds(), theta)
}

pub(crate) fn check_box(dim: usize, bounds: &[(f64, f64)], theta: &[f64]) -> Result<()> {
    if theta.len() != dim {
        return Err(GeomError::Shape(format!("expected {dim} parameters, got {}", theta.len())));
    }
    for (k, (&t, &(lo, hi))) in theta.iter().zip(bounds.iter()).enumerate() {
        if !t.is_finite() {
            return Err(GeomError::NonFinite(format!("parameter {k}")));
        }
        if t < lo || t > hi {
            return Err(GeomError::Domain(format!("parameter {k} = {t} outside [{lo}, {hi}]")));
        }
    }
    Ok(())
}

pub fn evaluate(family: &dyn StateFamily, theta: &[f64]) -> Result<PureState> {
    check_point(family, theta)?;
    let s = family.evaluate(theta)?;
    if !crate::linalg::is_finite_vec(&s.amps) {
        return Err(GeomError::NonFinite(format!("amplitudes of {}", family.name())));
    }
    Ok(s)
}

/// Finite-difference jet of an arbitrary vector-valued map.
///
/// Central mode uses `h1 = step * max(1,|t|)` for first derivatives and a
/// wider `h2` for second derivatives; Richardson mode combines steps `h` and `h/2`.
pub fn fd_jet_raw<F>(f: F, theta: &[f64], diff: &Differentiator, order: Order) -> Result<(CVec, Vec<CVec>, Vec<Vec<CVec>>)>
where
    F: Fn(&[f64]) -> Result<CVec>,
{
    diff.validate()?;
    let n = theta.len();
    let (b1, b2) = diff.steps();
    let richardson = diff.mode == DerivMode::RichardsonFd;
    let center = f(theta)?;
    let len = center.len();
    let shifted = |offs: &[(usize, f64)]| -> Result<CVec> {
        let mut t = theta.to_vec();
        for &(i, d) in offs {
            t[i] += d;
        }
        let v = f(&t)?;
        if v.len() != len {
            return Err(GeomError::Shape("stencil evaluation changed state length".into()));
        }
        Ok(v)
    };
    let scale = |i: usize| theta[i].abs().max(1.0);

    let first = |i: usize, h: f64| -> Result<CVec> {
        let p = shifted(&[(i, h)])?;
        let m = shifted(&[(i, -h)])?;
        Ok((p - m) / C64::from(2.0 * h))
    };
    let mut d1 = Vec::with_capacity(n);
    for i in 0..n {
        let h = b1 * scale(i);
        let d = if richardson {
            let coarse = first(i, h)?;
            let fine = first(i, 0.5 * h)?;
            (fine * C64::from(4.0) - coarse) / C64::from(3.0)
        } else {
            first(i, h)?
        };
        d1.push(d);
    }

    let mut d2 = Vec::new();
    if order == Order::Second {
        let pure = |i: usize, h: f64| -> Result<CVec> {
            let p = shifted(&[(i, h)])?;
            let m = shifted(&[(i, -h)])?;
            Ok((p - &center * C64::from(2.0) + m) / C64::from(h * h))
        };
        let mixed = |i: usize, j: usize, hi: f64, hj: f64| -> Result<CVec> {
            let pp = shifted(&[(i, hi), (j, hj)])?;
            let pm = shifted(&[(i, hi), (j, -hj)])?;
            let mp = shifted(&[(i, -hi), (j, hj)])?;
            let mm = shifted(&[(i, -hi), (j, -hj)])?;
            Ok((pp - pm - mp + mm) / C64::from(4.0 * hi * hj))
        };
        d2 = vec![vec![CVec::zeros(len); n]; n];
        for i in 0..n {
            for j in i..n {
                let hi = b2 * scale(i);
                let hj = b2 * scale(j);
                let eval = |hi: f64, hj: f64| if i == j { pure(i, hi) } else { mixed(i, j, hi, hj) };
                let d = if richardson {
                    let coarse = eval(hi, hj)?;
                    let fine = eval(0.5 * hi, 0.5 * hj)?;
                    (fine * C64::from(4.0) - coarse) / C64::from(3.0)
                } else {
                    eval(hi, hj)?
                };
                d2[j][i] = d.clone();
                d2[i][j] = d;
            }
        }
    }
    Ok((center, d1, d2))
}

/// State plus derivatives in the requested mode.
pub fn jet(family: &dyn StateFamily, theta: &[f64], diff: &Differentiator, order: Order) -> Result<Jet> {
    check_point(family, theta)?;
    let jet = match diff.mode {
        DerivMode::Analytic => match family.analytic_jet(theta, order) {
            Some(j) => j?,
            None => {
                return Err(GeomError::Unsupported(format!(
                    "family '{}' has no analytic derivatives",
                    family.name()
                )))
            }
        },
        _ => {
            let base = family.evaluate(theta)?;
            let support = base.support;
            let (center, d1, d2) = fd_jet_raw(
                |t| {
                    let s = family.evaluate(t)?;
                    if !s.support.compatible(&support) {
                        return Err(GeomError::Shape("support changed across stencil".into()));
                    }
                    Ok(s.amps)
                },
                theta,
                diff,
                order,
            )?;
            Jet { state: base.with_amps(center), d1, d2 }
        }
    };
    let finite = crate::linalg::is_finite_vec(&jet.state.amps)
        && jet.d1.iter().all(crate::linalg::is_finite_vec)
        && jet.d2.iter().flatten().all(crate::linalg::is_finite_vec);
    if !finite {
        return Err(GeomError::NonFinite(format!("derivatives of {}", family.name())));
    }
    Ok(jet)
}

/// `d Psi / d theta_i`.
pub fn derivative(family: &dyn StateFamily, theta: &[f64], i: usize, diff: &Differentiator) -> Result<CVec> {
    if i >= family.dim() {
        return Err(GeomError::Shape(format!("axis {i} out of range for {} parameters", family.dim())));
    }
    Ok(jet(family, theta, diff, Order::First)?.d1.swap_remove(i))
}

/// `d^2 Psi / d theta_i d theta_j`.
pub fn second_derivative(family: &dyn StateFamily, theta: &[f64], i: usize, j: usize, diff: &Differentiator) -> Result<CVec> {
    let n = family.dim();
    if i >= n || j >= n {
        return Err(GeomError::Shape(format!("axes ({i},{j}) out of range for {n} parameters")));
    }
    let mut jt = jet(family, theta, diff, Order::Second)?;
    Ok(jt.d2.swap_remove(i).swap_remove(j))
}

/// First derivatives of a real vector-valued map by Richardson-extrapolated
/// central differences. Used to differentiate tensors with respect to parameters.
pub fn gradient_of<F>(f: F, theta: &[f64]) -> Result<Vec<DVector<f64>>>
where
    F: Fn(&[f64]) -> Result<DVector<f64>>,
{
    let (_, d1, _) = fd_jet_raw(
        |t| Ok(f(t)?.map(C64::from)),
        theta,
        &Differentiator::richardson(),
        Order::First,
    )?;
    Ok(d1.into_iter().map(|v| v.map(|z| z.re)).collect())
}

/// Decomposition `Psi = sqrt(P) e^{i phi}`.
///
/// `p` is `|Psi|^2` as a density; expectations weight it by `weights`
/// (trapezoid weights on grids, 1 on a basis).
#[derive(Clone, Debug)]
pub struct PolarForm {
    pub p: Vec<f64>,
    pub phi: Vec<f64>,
    pub weights: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl PolarForm {
    pub fn total(&self) -> f64 {
        self.p.iter().zip(self.weights.iter()).map(|(p, w)| p * w).sum()
    }

    pub fn recompose(&self) -> CVec {
        CVec::from_iterator(
            self.p.len(),
            self.p.iter().zip(self.phi.iter()).map(|(p, ph)| C64::from_polar(p.sqrt(), *ph)),
        )
    }

    pub fn degenerate_fraction(&self) -> f64 {
        self.degenerate.iter().filter(|d| **d).count() as f64 / self.p.len() as f64
    }
}

pub fn polar(state: &PureState) -> Result<PolarForm> {
    let p: Vec<f64> = state.amps.iter().map(|z| z.norm_sqr()).collect();
    if p.iter().all(|x| *x == 0.0) {
        return Err(GeomError::ZeroState);
    }
    let degenerate: Vec<bool> = p.iter().map(|x| *x < EPS_P).collect();
    let raw: Vec<f64> = state.amps.iter().map(|z| z.arg()).collect();
    let phi = if state.support.is_grid() { unwrap_phase(&raw, &degenerate) } else { raw };
    Ok(PolarForm { p, phi, weights: state.weights(), degenerate })
}

/// Nearest-branch continuation along the sample order, skipping degenerate points.
pub fn unwrap_phase(raw: &[f64], skip: &[bool]) -> Vec<f64> {
    use std::f64::consts::{PI, TAU};
    let mut out = raw.to_vec();
    let mut last: Option<f64> = None;
    for k in 0..raw.len() {
        if skip[k] {
            continue;
        }
        if let Some(prev) = last {
            let mut d = (raw[k] - prev).rem_euclid(TAU);
            if d >= PI {
                d -= TAU;
            }
            out[k] = prev + d;
        }
        last = Some(out[k]);
    }
    out
}

/// `E_P[f]` over non-degenerate points.
pub fn expectation(polar: &PolarForm, f: &[f64]) -> Result<f64> {
    if f.len() != polar.p.len() {
        return Err(GeomError::Shape(format!("integrand has {} samples, density {}", f.len(), polar.p.len())));
    }
    let mut acc = 0.0;
    for k in 0..f.len() {
        if polar.degenerate[k] {
            continue;
        }
        if !f[k].is_finite() {
            return Err(GeomError::NonFinite(format!("integrand at sample {k}")));
        }
        acc += polar.weights[k] * polar.p[k] * f[k];
    }
    Ok(acc)
}

/// Log-amplitude and phase derivatives at each valid sample, built from
/// `u_i = d_i Psi / Psi` without taking logarithms or unwrapping.
#[derive(Clone, Debug)]
pub struct PolarJet {
    pub polar: PolarForm,
    /// Indices of samples with `P >= EPS_P`.
    pub valid: Vec<usize>,
    /// `dl[i][s]` is `d_i ln P` at the `s`-th valid sample.
    pub dl: Vec<Vec<f64>>,
    pub dphi: Vec<Vec<f64>>,
    /// `ddl[i][j][s]`; empty for first-order jets.
    pub ddl: Vec<Vec<Vec<f64>>>,
    pub ddphi: Vec<Vec<Vec<f64>>>,
    /// `P * weight` at valid samples.
    pub mass: Vec<f64>,
}

impl PolarJet {
    pub fn from_jet(jet: &Jet) -> Result<PolarJet> {
        let polar = polar(&jet.state)?;
        let n = jet.n();
        let valid: Vec<usize> = (0..polar.p.len()).filter(|&k| !polar.degenerate[k]).collect();
        let mass: Vec<f64> = valid.iter().map(|&k| polar.p[k] * polar.weights[k]).collect();
        let psi = &jet.state.amps;
        let u: Vec<Vec<C64>> = (0..n).map(|i| valid.iter().map(|&k| jet.d1[i][k] / psi[k]).collect()).collect();
        let dl = u.iter().map(|ui| ui.iter().map(|z| 2.0 * z.re).collect()).collect();
        let dphi = u.iter().map(|ui| ui.iter().map(|z| z.im).collect()).collect();
        let (mut ddl, mut ddphi) = (Vec::new(), Vec::new());
        if jet.has_second() {
            ddl = vec![vec![Vec::new(); n]; n];
            ddphi = vec![vec![Vec::new(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    let w: Vec<C64> = valid
                        .iter()
                        .enumerate()
                        .map(|(s, &k)| jet.d2[i][j][k] / psi[k] - u[i][s] * u[j][s])
                        .collect();
                    ddl[i][j] = w.iter().map(|z| 2.0 * z.re).collect();
                    ddphi[i][j] = w.iter().map(|z| z.im).collect();
                }
            }
        }
        Ok(PolarJet { polar, valid, dl, dphi, ddl, ddphi, mass })
    }

    pub fn n(&self) -> usize {
        self.dl.len()
    }

    pub fn has_second(&self) -> bool {
        !self.ddl.is_empty()
    }

    /// `E_P` of a per-valid-sample integrand.
    pub fn e(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.mass.iter().enumerate().map(|(s, m)| m * f(s)).sum()
    }

    /// Phase samples at valid points (unwrapped on grids).
    pub fn phase(&self) -> Vec<f64> {
        self.valid.iter().map(|&k| self.polar.phi[k]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn trapezoid_weights() {
        let w = Support::Grid { x0: 0.0, h: 0.5 }.weights(4);
        assert_eq!(w, vec![0.25, 0.5, 0.5, 0.25]);
        assert_eq!(Support::Basis.weights(3), vec![1.0; 3]);
    }

    #[test]
    fn polar_of_simple_state() {
        let s = PureState::basis(CVec::from_vec(vec![c(0.5f64.sqrt(), 0.0), c(0.0, 0.5f64.sqrt())]), NormKind::Unit).unwrap();
        let pf = polar(&s).unwrap();
        assert!((pf.p[0] - 0.5).abs() < 1e-15 && (pf.p[1] - 0.5).abs() < 1e-15);
        assert_eq!(pf.phi[0], 0.0);
        assert!((pf.phi[1] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn unwrap_crosses_branch_cut() {
        let raw = [3.0, -3.0, -2.9];
        let out = unwrap_phase(&raw, &[false; 3]);
        assert!((out[1] - (2.0 * std::f64::consts::PI - 3.0)).abs() < 1e-14);
        assert!((out[2] - out[1] - 0.1).abs() < 1e-14);
    }

    #[test]
    fn zero_state_is_rejected() {
        let s = PureState::basis(CVec::zeros(2), NormKind::Unnormalized).unwrap();
        assert_eq!(polar(&s).unwrap_err(), GeomError::ZeroState);
    }

    #[test]
    fn parameter_point_rejects_nan() {
        assert!(ParameterPoint::new(vec![0.0, f64::NAN]).is_err());
        assert!(ParameterPoint::new(vec![]).is_err());
        assert_eq!(ParameterPoint::new(vec![1.0]).unwrap().coords(), &[1.0]);
    }

    #[test]
    fn inner_rejects_mismatch() {
        let a = PureState::basis(CVec::zeros(2), NormKind::Unnormalized).unwrap();
        let b = PureState::basis(CVec::zeros(3), NormKind::Unnormalized).unwrap();
        assert!(matches!(inner(&a, &b), Err(GeomError::Shape(_))));
    }

    #[test]
    fn fd_jet_of_polynomial() {
        let f = |t: &[f64]| Ok(CVec::from_vec(vec![c(t[0] * t[0] * t[1], t[1].powi(3))]));
        for diff in [Differentiator::central(), Differentiator::richardson()] {
            let (_, d1, d2) = fd_jet_raw(f, &[0.7, -1.3], &diff, Order::Second).unwrap();
            assert!((d1[0][0] - c(2.0 * 0.7 * -1.3, 0.0)).norm() < 1e-8);
            assert!((d1[1][0] - c(0.49, 3.0 * 1.69)).norm() < 1e-8);
            assert!((d2[0][1][0] - c(1.4, 0.0)).norm() < 1e-6);
            assert!((d2[1][1][0] - c(0.0, 6.0 * -1.3)).norm() < 1e-6);
        }
    }
}
