use nalgebra::{DMatrix, SymmetricEigen};

use crate::classical_ig::{ClassicalFamily, Density, LogJet};
use crate::error::{GeomError, Result};
use crate::linalg::{CVec, C64};
use crate::state_model::{GridSpec, Jet, NormKind, Order, PureState, StateFamily};
use crate::tensor::ConnectionField;

/// Sampled `C(x)`, `F_j(x)`, `G_j(x)` defining
/// `Psi = exp(1/2 (C + theta^j (F_j + i G_j) - psi(theta)))`.
#[derive(Clone, Debug)]
pub struct ExponentialFamilySpec {
    pub grid: GridSpec,
    pub c: Vec<f64>,
    pub f: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub bounds: Vec<(f64, f64)>,
}

impl ExponentialFamilySpec {
    pub fn new(grid: GridSpec, c: Vec<f64>, f: Vec<Vec<f64>>, g: Vec<Vec<f64>>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        let m = grid.points;
        let n = f.len();
        if n == 0 || g.len() != n || bounds.len() != n {
            return Err(GeomError::Shape("need matching F, G and bounds for at least one parameter".into()));
        }
        if c.len() != m || f.iter().chain(g.iter()).any(|v| v.len() != m) {
            return Err(GeomError::Shape(format!("sample vectors must have {m} entries")));
        }
        if c.iter().chain(f.iter().flatten()).chain(g.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(GeomError::NonFinite("exponential family samples".into()));
        }
        let spec = ExponentialFamilySpec { grid, c, f, g, bounds };
        let min_eig = spec.independence_margin();
        if min_eig <= 1e-10 {
            return Err(GeomError::Singular(format!(
                "F_1..F_n and 1 are not independent (Gram eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(spec)
    }

    /// `C = -x^2`, `F = (x, x^2)`, `G = (0.3 x, 0.2 x^2)` on `[-8, 8]`.
    pub fn default_two_param() -> Self {
        let grid = GridSpec { min: -8.0, max: 8.0, points: 1601 };
        let xs = grid.xs();
        let c = xs.iter().map(|x| -x * x).collect();
        let f = vec![xs.clone(), xs.iter().map(|x| x * x).collect()];
        let g = vec![xs.iter().map(|x| 0.3 * x).collect(), xs.iter().map(|x| 0.2 * x * x).collect()];
        Self::new(grid, c, f, g, vec![(-4.0, 4.0), (-4.0, 0.6)]).expect("default spec is valid")
    }

    /// Same `C`, `F` with all `G_j = 0`.
    pub fn default_real() -> Self {
        let mut s = Self::default_two_param();
        for g in &mut s.g {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        s
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    /// Smallest eigenvalue of the weighted Gram matrix of `{F_1, .., F_n, 1}`
    /// after unit-normalizing each function.
    pub fn independence_margin(&self) -> f64 {
        let w = self.grid.support().weights(self.grid.points);
        let mut funcs: Vec<Vec<f64>> = self.f.clone();
        funcs.push(vec![1.0; self.grid.points]);
        let ip = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&w).map(|((x, y), wk)| x * y * wk).sum::<f64>();
        let norms: Vec<f64> = funcs.iter().map(|v| ip(v, v).sqrt().max(f64::MIN_POSITIVE)).collect();
        let k = funcs.len();
        let gram = DMatrix::from_fn(k, k, |a, b| ip(&funcs[a], &funcs[b]) / (norms[a] * norms[b]));
        SymmetricEigen::new(gram).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn exponent(&self, th: &[f64]) -> Vec<f64> {
        (0..self.grid.points)
            .map(|x| self.c[x] + (0..self.n()).map(|j| th[j] * self.f[j][x]).sum::<f64>())
            .collect()
    }

    /// Normalized density `P` together with `psi(theta)`.
    fn density_and_psi(&self, th: &[f64]) -> Result<(Vec<f64>, f64)> {
        let e = self.exponent(th);
        let shift = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(GeomError::Overflow("exponent of the exponential family".into()));
        }
        let w = self.grid.support().weights(self.grid.points);
        let z: f64 = e.iter().zip(&w).map(|(v, wk)| wk * (v - shift).exp()).sum();
        let psi = shift + z.ln();
        if !psi.is_finite() {
            return Err(GeomError::Overflow("log-partition".into()));
        }
        Ok((e.iter().map(|v| (v - psi).exp()).collect(), psi))
    }

    /// `psi(theta) = ln int exp(C + theta^j F_j) dx`, by log-sum-exp quadrature.
    pub fn normalizer(&self, th: &[f64]) -> Result<f64> {
        Ok(self.density_and_psi(th)?.1)
    }

    /// `d_i psi = E[F_i]` and `d_ij psi = Cov[F_i, F_j]`.
    pub fn psi_derivatives(&self, th: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (p, _) = self.density_and_psi(th)?;
        let w = self.grid.support().weights(self.grid.points);
        let e = |f: &dyn Fn(usize) -> f64| (0..p.len()).map(|x| w[x] * p[x] * f(x)).sum::<f64>();
        let n = self.n();
        let m: Vec<f64> = (0..n).map(|i| e(&|x| self.f[i][x])).collect();
        let cov = DMatrix::from_fn(n, n, |i, j| e(&|x| (self.f[i][x] - m[i]) * (self.f[j][x] - m[j])));
        Ok((m, cov))
    }

    fn check(&self, th: &[f64]) -> Result<()> {
        crate::state_model::check_box(self.n(), &self.bounds, th)
    }
}

/// Exponential-family wavefunction.
#[derive(Clone, Debug)]
pub struct ExpFamilyWave {
    pub spec: ExponentialFamilySpec,
}

impl ExpFamilyWave {
    pub fn new(spec: ExponentialFamilySpec) -> Self {
        ExpFamilyWave { spec }
    }
}

impl StateFamily for ExpFamilyWave {
    fn dim(&self) -> usize {
        self.spec.n()
    }

    fn name(&self) -> &str {
        "exp_family"
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.spec.bounds.clone()
    }

    fn evaluate(&self, th: &[f64]) -> Result<PureState> {
        let s = &self.spec;
        let (p, _) = s.density_and_psi(th)?;
        let amps = CVec::from_fn(p.len(), |x, _| {
            let phase = 0.5 * (0..s.n()).map(|j| th[j] * s.g[j][x]).sum::<f64>();
            C64::from_polar(p[x].sqrt(), phase)
        });
        PureState::grid(amps, s.grid.min, s.grid.spacing(), NormKind::Unit)
    }

    fn analytic_jet(&self, th: &[f64], order: Order) -> Option<Result<Jet>> {
        let run = || -> Result<Jet> {
            let s = &self.spec;
            let state = self.evaluate(th)?;
            let (dpsi, ddpsi) = s.psi_derivatives(th)?;
            let n = s.n();
            let m = state.len();
            let psi = &state.amps;
            // u_i = (A_i + i G_i)/2 with A_i = F_i - d_i psi; u_ij = -d_ij psi / 2
            let u: Vec<Vec<C64>> =
                (0..n).map(|i| (0..m).map(|x| C64::new(0.5 * (s.f[i][x] - dpsi[i]), 0.5 * s.g[i][x])).collect()).collect();
            let d1 = (0..n).map(|i| CVec::from_fn(m, |x, _| psi[x] * u[i][x])).collect();
            let d2 = match order {
                Order::First => Vec::new(),
                Order::Second => (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| CVec::from_fn(m, |x, _| psi[x] * (u[i][x] * u[j][x] - 0.5 * ddpsi[(i, j)])))
                            .collect()
                    })
                    .collect(),
            };
            Ok(Jet { state, d1, d2 })
        };
        Some(run())
    }
}

/// Closed-form geometry of the exponential-family wavefunction.
#[derive(Clone, Debug)]
pub struct ExpClosedForms {
    /// `1/4 d_ij psi + 1/4 Cov[G_i, G_j]`
    pub metric: DMatrix<f64>,
    /// Coefficient `omega` of the imaginary antisymmetric part, `1/4 (E[A_i G_j] - E[A_j G_i])`.
    pub omega: DMatrix<f64>,
    pub gamma_c: ConnectionField,
    pub nonmetricity: ConnectionField,
}

/// Closed forms in terms of `A_i = F_i - d_i psi` and `G_i`; the phase is `G/2`.
pub fn exp_family_closed_forms(spec: &ExponentialFamilySpec, th: &[f64], alpha: f64) -> Result<ExpClosedForms> {
    spec.check(th)?;
    let (p, _) = spec.density_and_psi(th)?;
    let (dpsi, ddpsi) = spec.psi_derivatives(th)?;
    let w = spec.grid.support().weights(spec.grid.points);
    let n = spec.n();
    let a: Vec<Vec<f64>> = (0..n).map(|i| spec.f[i].iter().map(|f| f - dpsi[i]).collect()).collect();
    let g = &spec.g;
    let e = |f: &dyn Fn(usize) -> f64| (0..p.len()).map(|x| w[x] * p[x] * f(x)).sum::<f64>();
    let eg: Vec<f64> = (0..n).map(|i| e(&|x| g[i][x])).collect();
    // ga[a][b] = E[G_a A_b]
    let ga: Vec<Vec<f64>> = (0..n).map(|s| (0..n).map(|t| e(&|x| g[s][x] * a[t][x])).collect()).collect();

    let metric = DMatrix::from_fn(n, n, |i, j| 0.25 * ddpsi[(i, j)] + 0.25 * (e(&|x| g[i][x] * g[j][x]) - eg[i] * eg[j]));
    let omega = DMatrix::from_fn(n, n, |i, j| 0.25 * (ga[j][i] - ga[i][j]));

    let aaa = ConnectionField::from_real(n, |i, j, k| e(&|x| a[i][x] * a[j][x] * a[k][x]));
    // E[G_k/2 G_(i A_j) - G_i G_j A_k / 4]
    let quantum = ConnectionField::from_real(n, |i, j, k| {
        e(&|x| 0.25 * g[k][x] * (g[i][x] * a[j][x] + g[j][x] * a[i][x]) - 0.25 * g[i][x] * g[j][x] * a[k][x])
    });
    // E[G_k/2] E[G_(i A_j)] + E[G_i/2] E[A_[j G_k]] + E[G_j/2] E[A_[i G_k]]
    let bracket = ConnectionField::from_real(n, |i, j, k| {
        0.25 * eg[k] * (ga[i][j] + ga[j][i]) + 0.25 * eg[i] * (ga[k][j] - ga[j][k]) + 0.25 * eg[j] * (ga[k][i] - ga[i][k])
    });
    let gamma_c = aaa.scale(0.25).add(&quantum).add(&bracket.scale(-1.0)).scale(0.5);
    let h = 0.5 * alpha;
    let nonmetricity = aaa.scale(-0.25 * h).add(&quantum.scale(-h)).add(&bracket.scale(h));
    Ok(ExpClosedForms { metric, omega, gamma_c, nonmetricity })
}

/// Classical exponential-family density `P = exp(C + theta^j F_j - psi)`.
#[derive(Clone, Debug)]
pub struct ExpFamilyDensity {
    pub spec: ExponentialFamilySpec,
}

impl ClassicalFamily for ExpFamilyDensity {
    fn dim(&self) -> usize {
        self.spec.n()
    }

    fn name(&self) -> &str {
        "exp_family_density"
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.spec.bounds.clone()
    }

    fn density(&self, th: &[f64]) -> Result<Density> {
        Ok(Density { p: self.spec.density_and_psi(th)?.0, support: self.spec.grid.support() })
    }

    fn analytic_log_jet(&self, th: &[f64]) -> Option<Result<LogJet>> {
        let run = || -> Result<LogJet> {
            let density = self.density(th)?;
            let (dpsi, ddpsi) = self.spec.psi_derivatives(th)?;
            let n = self.spec.n();
            let m = density.p.len();
            let dl = (0..n).map(|i| self.spec.f[i].iter().map(|f| f - dpsi[i]).collect()).collect();
            let ddl = (0..n).map(|i| (0..n).map(|j| vec![-ddpsi[(i, j)]; m]).collect()).collect();
            Ok(LogJet { density, dl, ddl })
        };
        Some(run())
    }
}

/// Normal density with `theta = (mu, sigma)` on a grid.
#[derive(Clone, Debug)]
pub struct GaussianDensity {
    pub grid: GridSpec,
}

impl Default for GaussianDensity {
    fn default() -> Self {
        GaussianDensity { grid: GridSpec { min: -20.0, max: 20.0, points: 4001 } }
    }
}

impl ClassicalFamily for GaussianDensity {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "gaussian_density"
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY), (1e-3, f64::INFINITY)]
    }

    fn density(&self, th: &[f64]) -> Result<Density> {
        let (mu, s) = (th[0], th[1]);
        let norm = 1.0 / (s * (2.0 * std::f64::consts::PI).sqrt());
        let p = self.grid.xs().iter().map(|x| norm * (-(x - mu).powi(2) / (2.0 * s * s)).exp()).collect();
        Ok(Density { p, support: self.grid.support() })
    }

    fn analytic_log_jet(&self, th: &[f64]) -> Option<Result<LogJet>> {
        let density = match self.density(th) {
            Ok(d) => d,
            Err(e) => return Some(Err(e)),
        };
        let (mu, s) = (th[0], th[1]);
        let xs = self.grid.xs();
        let dl = vec![
            xs.iter().map(|x| (x - mu) / (s * s)).collect(),
            xs.iter().map(|x| -1.0 / s + (x - mu).powi(2) / s.powi(3)).collect(),
        ];
        let mm: Vec<f64> = vec![-1.0 / (s * s); xs.len()];
        let ms: Vec<f64> = xs.iter().map(|x| -2.0 * (x - mu) / s.powi(3)).collect();
        let ss: Vec<f64> = xs.iter().map(|x| 1.0 / (s * s) - 3.0 * (x - mu).powi(2) / s.powi(4)).collect();
        let ddl = vec![vec![mm, ms.clone()], vec![ms, ss]];
        Some(Ok(LogJet { density, dl, ddl }))
    }
}

/// Two-outcome distribution `(1 - p, p)`.
#[derive(Clone, Debug, Default)]
pub struct Bernoulli;

impl ClassicalFamily for Bernoulli {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> &str {
        "bernoulli"
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(1e-9, 1.0 - 1e-9)]
    }

    fn density(&self, th: &[f64]) -> Result<Density> {
        Ok(Density { p: vec![1.0 - th[0], th[0]], support: crate::state_model::Support::Basis })
    }

    fn analytic_log_jet(&self, th: &[f64]) -> Option<Result<LogJet>> {
        let p = th[0];
        let density = match self.density(th) {
            Ok(d) => d,
            Err(e) => return Some(Err(e)),
        };
        let dl = vec![vec![-1.0 / (1.0 - p), 1.0 / p]];
        let ddl = vec![vec![vec![-1.0 / (1.0 - p).powi(2), -1.0 / (p * p)]]];
        Some(Ok(LogJet { density, dl, ddl }))
    }
}

/// A density that ignores its parameters.
#[derive(Clone, Debug)]
pub struct FixedDensity {
    pub density: Density,
    pub n: usize,
}

impl ClassicalFamily for FixedDensity {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &str {
        "fixed_density"
    }

    fn density(&self, _: &[f64]) -> Result<Density> {
        Ok(self.density.clone())
    }

    fn analytic_log_jet(&self, _: &[f64]) -> Option<Result<LogJet>> {
        let m = self.density.p.len();
        Some(Ok(LogJet {
            density: self.density.clone(),
            dl: vec![vec![0.0; m]; self.n],
            ddl: vec![vec![vec![0.0; m]; self.n]; self.n],
        }))
    }
}
