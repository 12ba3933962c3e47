use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result};
use crate::linalg::{c, expm, random_hermitian, random_state, CMat, CVec, C64, I};
use crate::state_model::{GridSpec, Jet, NormKind, Order, PureState, StateFamily, Support};

fn second_or_empty(order: Order, f: impl FnOnce() -> Vec<Vec<CVec>>) -> Vec<Vec<CVec>> {
    match order {
        Order::First => Vec::new(),
        Order::Second => f(),
    }
}

/// Bloch-sphere qubit `(cos(t/2), e^{i p} sin(t/2))` with `theta = (t, p)`.
#[derive(Clone, Debug, Default)]
pub struct Qubit;

impl StateFamily for Qubit {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "qubit"
    }

    fn evaluate(&self, th: &[f64]) -> Result<PureState> {
        let (t, p) = (th[0], th[1]);
        PureState::basis(
            CVec::from_vec(vec![c((0.5 * t).cos(), 0.0), C64::from_polar((0.5 * t).sin(), p)]),
            NormKind::Unit,
        )
    }

    fn analytic_jet(&self, th: &[f64], order: Order) -> Option<Result<Jet>> {
        let (t, p) = (th[0], th[1]);
        let (ch, sh) = ((0.5 * t).cos(), (0.5 * t).sin());
        let e = C64::from_polar(1.0, p);
        let v = |a: C64, b: C64| CVec::from_vec(vec![a, b]);
        let z = C64::from(0.0);
        let state = match self.evaluate(th) {
            Ok(s) => s,
            Err(err) => return Some(Err(err)),
        };
        let d1 = vec![v(c(-0.5 * sh, 0.0), e * (0.5 * ch)), v(z, I * e * sh)];
        let d2 = second_or_empty(order, || {
            let tt = v(c(-0.25 * ch, 0.0), e * (-0.25 * sh));
            let tp = v(z, I * e * (0.5 * ch));
            let pp = v(z, -e * sh);
            vec![vec![tt, tp.clone()], vec![tp, pp]]
        });
        Some(Ok(Jet { state, d1, d2 }))
    }
}

/// A parameter-independent state.
#[derive(Clone, Debug)]
pub struct ConstantFamily {
    pub state: PureState,
    pub n: usize,
}

impl ConstantFamily {
    pub fn new(state: PureState, n: usize) -> Self {
        ConstantFamily { state, n }
    }
}

impl StateFamily for ConstantFamily {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &str {
        "constant"
    }

    fn evaluate(&self, _: &[f64]) -> Result<PureState> {
        Ok(self.state.clone())
    }

    fn analytic_jet(&self, _: &[f64], order: Order) -> Option<Result<Jet>> {
        let zero = CVec::zeros(self.state.len());
        let d2 = second_or_empty(order, || vec![vec![zero.clone(); self.n]; self.n]);
        Some(Ok(Jet { state: self.state.clone(), d1: vec![zero.clone(); self.n], d2 }))
    }
}

/// `(pi s^2)^{-1/4} exp(-(x-mu)^2/(2 s^2))` on a grid, `theta = (mu, s)`.
#[derive(Clone, Debug)]
pub struct GaussianFamily {
    pub grid: GridSpec,
}

impl Default for GaussianFamily {
    fn default() -> Self {
        GaussianFamily { grid: GridSpec { min: -8.0, max: 8.0, points: 2048 } }
    }
}

impl GaussianFamily {
    fn log_derivs(&self, th: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<[f64; 2]>, Vec<[f64; 3]>) {
        let (mu, s) = (th[0], th[1]);
        let xs = self.grid.xs();
        let norm = (PI * s * s).powf(-0.25);
        let amps = xs.iter().map(|x| norm * (-(x - mu).powi(2) / (2.0 * s * s)).exp()).collect();
        // u_i = d_i Psi / Psi and u_ij = d_ij Psi / Psi
        let u = xs.iter().map(|x| {
            let y = x - mu;
            [y / (s * s), -0.5 / s + y * y / s.powi(3)]
        });
        let uu = xs.iter().map(|x| {
            let y = x - mu;
            let (um, us) = (y / (s * s), -0.5 / s + y * y / s.powi(3));
            [
                -1.0 / (s * s) + um * um,
                -2.0 * y / s.powi(3) + um * us,
                0.5 / (s * s) - 3.0 * y * y / s.powi(4) + us * us,
            ]
        });
        (xs.clone(), amps, u.collect(), uu.collect())
    }
}

impl StateFamily for GaussianFamily {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "gaussian"
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY), (1e-3, f64::INFINITY)]
    }

    fn evaluate(&self, th: &[f64]) -> Result<PureState> {
        let (_, amps, _, _) = self.log_derivs(th);
        let v = CVec::from_iterator(amps.len(), amps.into_iter().map(C64::from));
        PureState::grid(v, self.grid.min, self.grid.spacing(), NormKind::Unit)
    }

    fn analytic_jet(&self, th: &[f64], order: Order) -> Option<Result<Jet>> {
        let (_, amps, u, uu) = self.log_derivs(th);
        let m = amps.len();
        let state = match self.evaluate(th) {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let mk = |f: &dyn Fn(usize) -> f64| CVec::from_fn(m, |k, _| C64::from(amps[k] * f(k)));
        let d1 = vec![mk(&|k| u[k][0]), mk(&|k| u[k][1])];
        let d2 = second_or_empty(order, || {
            let mm = mk(&|k| uu[k][0]);
            let ms = mk(&|k| uu[k][1]);
            let ss = mk(&|k| uu[k][2]);
            vec![vec![mm, ms.clone()], vec![ms, ss]]
        });
        Some(Ok(Jet { state, d1, d2 }))
    }
}

/// `(2 pi)^{-1/4} exp(-(x-mu)^2/4 + i k x)` on a grid, `theta = (mu, k)`.
/// The density is a unit-variance normal; `k` drives a linear phase.
#[derive(Clone, Debug)]
pub struct GaussianWave {
    pub grid: GridSpec,
}

impl Default for GaussianWave {
    fn default() -> Self {
        GaussianWave { grid: GridSpec { min: -10.0, max: 10.0, points: 2001 } }
    }
}

impl StateFamily for GaussianWave {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> &str {
        "gaussian_wave"
    }

    fn evaluate(&self, th: &[f64]) -> Result<PureState> {
        let (mu, k) = (th[0], th[1]);
        let norm = (2.0 * PI).powf(-0.25);
        let xs = self.grid.xs();
        let v = CVec::from_iterator(xs.len(), xs.iter().map(|x| C64::from_polar(norm * (-(x - mu).powi(2) / 4.0).exp(), k * x)));
        PureState::grid(v, self.grid.min, self.grid.spacing(), NormKind::Unit)
    }

    fn analytic_jet(&self, th: &[f64], order: Order) -> Option<Result<Jet>> {
        let state = match self.evaluate(th) {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let mu = th[0];
        let xs = self.grid.xs();
        let psi = &state.amps;
        let m = xs.len();
        let um = |x: f64| C64::from(0.5 * (x - mu));
        let uk = |x: f64| I * x;
        let mk = |f: &dyn Fn(f64) -> C64| CVec::from_fn(m, |r, _| psi[r] * f(xs[r]));
        let d1 = vec![mk(&|x| um(x)), mk(&|x| uk(x))];
        let d2 = second_or_empty(order, || {
            let mm = mk(&|x| um(x) * um(x) - 0.5);
            let mkk = mk(&|x| um(x) * uk(x));
            let kk = mk(&|x| uk(x) * uk(x));
            vec![vec![mm, mkk.clone()], vec![mkk, kk]]
        });
        Some(Ok(Jet { state, d1, d2 }))
    }
}

/// Quadratic phase polynomial `beta(theta) = b0 + sum a_i t_i + sum_{i<=j} q_ij t_i t_j`.
#[derive(Clone, Debug)]
pub struct PhasePolynomial {
    pub constant: f64,
    pub linear: Vec<f64>,
    /// Symmetric matrix; `beta` contains `1/2 t^T Q t`.
    pub quadratic: Vec<Vec<f64>>,
}

impl PhasePolynomial {
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let constant = rng.random_range(-PI..PI);
        let linear = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut quadratic = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let q = rng.random_range(-1.0..1.0);
                quadratic[i][j] = q;
                quadratic[j][i] = q;
            }
        }
        PhasePolynomial { constant, linear, quadratic }
    }

    /// `beta = t_1^2 + t_2` style polynomial from explicit coefficients.
    pub fn new(constant: f64, linear: Vec<f64>, quadratic: Vec<Vec<f64>>) -> Self {
        PhasePolynomial { constant, linear, quadratic }
    }

    pub fn value(&self, t: &[f64]) -> f64 {
        let n = t.len();
        let mut v = self.constant;
        for i in 0..n {
            v += self.linear[i] * t[i];
            for j in 0..n {
                v += 0.5 * self.quadratic[i][j] * t[i] * t[j];
            }
        }
        v
    }

    pub fn gradient(&self, t: &[f64]) -> Vec<f64> {
        let n = t.len();
        (0..n).map(|i| self.linear[i] + (0..n).map(|j| self.quadratic[i][j] * t[j]).sum::<f64>()).collect()
    }
}

/// `e^{i beta(theta)} Psi(theta)`.
pub struct GaugeShifted<F> {
    pub inner: F,
    pub beta: PhasePolynomial,
    name: String,
}

impl<F: StateFamily> GaugeShifted<F> {
    pub fn new(inner: F, beta: PhasePolynomial) -> Self {
        let name = format!("{}+gauge", inner.name());
        GaugeShifted { inner, beta, name }
    }
}

impl<F: StateFamily> StateFamily for GaugeShifted<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.inner.bounds()
    }

    fn evaluate(&self, th: &[f64]) -> Result<PureState> {
        let s = self.inner.evaluate(th)?;
        let ph = C64::from_polar(1.0, self.beta.value(th));
        Ok(s.with_amps(&s.amps * ph))
    }

    fn analytic_jet(&self, th: &[f64], order: Order) -> Option<Result<Jet>> {
        let j = match self.inner.analytic_jet(th, order)? {
            Ok(j) => j,
            Err(e) => return Some(Err(e)),
        };
        let ph = C64::from_polar(1.0, self.beta.value(th));
        let db = self.beta.gradient(th);
        let n = j.n();
        let psi = &j.state.amps;
        let d1: Vec<CVec> = (0..n).map(|i| (&j.d1[i] + psi * (I * db[i])) * ph).collect();
        let d2 = if j.has_second() {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            let w = I * self.beta.quadratic[a][b] - db[a] * db[b];
                            (&j.d2[a][b] + &j.d1[b] * (I * db[a]) + &j.d1[a] * (I * db[b]) + psi * w) * ph
                        })
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        Some(Ok(Jet { state: j.state.with_amps(psi * ph), d1, d2 }))
    }
}

/// `Psi(theta) = prod_k exp(i theta_k H_k) psi0` with Hermitian `H_k`.
#[derive(Clone, Debug)]
pub struct UnitaryProductFamily {
    pub generators: Vec<CMat>,
    pub psi0: CVec,
    name: String,
}

impl UnitaryProductFamily {
    pub fn new(generators: Vec<CMat>, psi0: CVec) -> Result<Self> {
        if generators.is_empty() {
            return Err(GeomError::Shape("need at least one generator".into()));
        }
        let d = psi0.len();
        if generators.iter().any(|h| h.nrows() != d || h.ncols() != d) {
            return Err(GeomError::Shape("generator and state dimensions differ".into()));
        }
        let defect = (psi0.norm() - 1.0).abs();
        if defect > crate::tol::EPS_NORM {
            return Err(GeomError::Normalization { defect, context: "reference state".into() });
        }
        Ok(UnitaryProductFamily { generators, psi0, name: format!("unitary_product_d{d}") })
    }

    /// Random Hermitian generators and reference state from a seed.
    pub fn random(levels: usize, params: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens = (0..params).map(|_| random_hermitian(levels, &mut rng)).collect();
        let psi0 = random_state(levels, &mut rng);
        Self::new(gens, psi0).expect("random construction is valid")
    }

    /// Applies the product with generator insertions `i H_k` for each `k` in `ins`.
    fn apply(&self, th: &[f64], ins: &[usize]) -> CVec {
        let mut v = self.psi0.clone();
        for k in (0..self.generators.len()).rev() {
            let u = expm(&(&self.generators[k] * (I * th[k])));
            v = u * v;
            for _ in ins.iter().filter(|&&q| q == k) {
                v = &self.generators[k] * v * I;
            }
        }
        v
    }
}

impl StateFamily for UnitaryProductFamily {
    fn dim(&self) -> usize {
        self.generators.len()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, th: &[f64]) -> Result<PureState> {
        PureState::basis(self.apply(th, &[]), NormKind::Unit)
    }

    fn analytic_jet(&self, th: &[f64], order: Order) -> Option<Result<Jet>> {
        let n = self.dim();
        let state = match self.evaluate(th) {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let d1 = (0..n).map(|i| self.apply(th, &[i])).collect();
        let d2 = second_or_empty(order, || {
            let mut d2 = vec![vec![CVec::zeros(self.psi0.len()); n]; n];
            for i in 0..n {
                for j in i..n {
                    let v = self.apply(th, &[i, j]);
                    d2[j][i] = v.clone();
                    d2[i][j] = v;
                }
            }
            d2
        });
        Some(Ok(Jet { state, d1, d2 }))
    }
}

/// A real-amplitude family: the square root of a density on a grid. Its phase is trivial.
pub struct RealAmplitude<D> {
    pub density: D,
    name: String,
}

impl<D: crate::classical_ig::ClassicalFamily> RealAmplitude<D> {
    pub fn new(density: D) -> Self {
        let name = format!("sqrt_{}", density.name());
        RealAmplitude { density, name }
    }

}

impl<D: crate::classical_ig::ClassicalFamily> StateFamily for RealAmplitude<D> {
    fn dim(&self) -> usize {
        self.density.dim()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.density.bounds()
    }

    fn evaluate(&self, th: &[f64]) -> Result<PureState> {
        let d = self.density.density(th)?;
        let amps = CVec::from_iterator(d.p.len(), d.p.iter().map(|x| C64::from(x.sqrt())));
        match d.support {
            Support::Basis => PureState::basis(amps, NormKind::Unit),
            Support::Grid { x0, h } => PureState::grid(amps, x0, h, NormKind::Unit),
        }
    }

    fn analytic_jet(&self, th: &[f64], order: Order) -> Option<Result<Jet>> {
        let lj = match self.density.analytic_log_jet(th)? {
            Ok(j) => j,
            Err(e) => return Some(Err(e)),
        };
        let state = match self.evaluate(th) {
            Ok(s) => s,
            Err(e) => return Some(Err(e)),
        };
        let n = lj.dl.len();
        let psi = state.amps.clone();
        let m = psi.len();
        // Psi = exp(l/2): d_i Psi = Psi dl_i / 2, d_ij Psi = Psi (ddl_ij/2 + dl_i dl_j/4)
        let d1 = (0..n).map(|i| CVec::from_fn(m, |x, _| psi[x] * (0.5 * lj.dl[i][x]))).collect();
        let d2 = second_or_empty(order, || {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            CVec::from_fn(m, |x, _| psi[x] * (0.5 * lj.ddl[i][j][x] + 0.25 * lj.dl[i][x] * lj.dl[j][x]))
                        })
                        .collect()
                })
                .collect()
        });
        Some(Ok(Jet { state, d1, d2 }))
    }
}

pub type SharedFamily = Arc<dyn StateFamily>;
