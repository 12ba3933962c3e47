use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result};
use crate::linalg::{commutator_norm, dot, expm, hermiticity_defect, random_complex, random_hermitian, random_state, sandwich, CMat, CVec, C64, I};
use crate::state_model::{Jet, NormKind, Order, PureState, StateFamily};
use crate::tensor::GeometricTensor;
use crate::tol::EPS_NORM;

const COMMUTE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorVariant {
    /// One Hermitian generator set acting on one unit reference state.
    Hermitian,
    /// Separate generator sets and reference states for the two sides with
    /// `<l0_1|l0_2> = 1`.
    BiorthoPair,
}

/// `l_1(s) = exp(i s_k A1^k) l0_1`, `l_2(s) = exp(i s_k A2^k) l0_2`.
#[derive(Clone, Debug)]
pub struct GeneratorFamilySpec {
    pub a1: Vec<CMat>,
    pub a2: Vec<CMat>,
    pub l0_1: CVec,
    pub l0_2: CVec,
    pub variant: GeneratorVariant,
}

impl GeneratorFamilySpec {
    pub fn hermitian(generators: Vec<CMat>, l0: CVec) -> Result<Self> {
        if let Some(d) = generators.iter().map(hermiticity_defect).find(|d| *d > 1e-12) {
            return Err(GeomError::Domain(format!("generator is not Hermitian (defect {d:.3e})")));
        }
        let defect = (l0.norm_squared() - 1.0).abs();
        if defect > EPS_NORM {
            return Err(GeomError::Normalization { defect, context: "reference state".into() });
        }
        Self::check_shapes(&generators, &generators, &l0, &l0)?;
        Ok(GeneratorFamilySpec { a1: generators.clone(), a2: generators, l0_1: l0.clone(), l0_2: l0, variant: GeneratorVariant::Hermitian })
    }

    pub fn biortho_pair(a1: Vec<CMat>, a2: Vec<CMat>, l0_1: CVec, l0_2: CVec) -> Result<Self> {
        Self::check_shapes(&a1, &a2, &l0_1, &l0_2)?;
        let defect = (dot(&l0_1, &l0_2) - C64::from(1.0)).norm();
        if defect > EPS_NORM {
            return Err(GeomError::Normalization { defect, context: "reference pair <l0_1|l0_2>".into() });
        }
        Ok(GeneratorFamilySpec { a1, a2, l0_1, l0_2, variant: GeneratorVariant::BiorthoPair })
    }

    fn check_shapes(a1: &[CMat], a2: &[CMat], u: &CVec, v: &CVec) -> Result<()> {
        let d = u.len();
        if a1.is_empty() || a1.len() != a2.len() {
            return Err(GeomError::Shape("both sides need the same nonzero number of generators".into()));
        }
        if v.len() != d || a1.iter().chain(a2).any(|a| a.nrows() != d || a.ncols() != d) {
            return Err(GeomError::Shape("generator and state dimensions differ".into()));
        }
        Ok(())
    }

    /// Self-consistent pair: `A1^k = B^k` for a random complex `B`, `A2^k = (A1^k)^dag`,
    /// and a reference pair with `<l0_1|l0_2> = 1`.
    pub fn random_self_consistent(levels: usize, params: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_complex(levels, &mut rng) * C64::from(0.5);
        let mut a1 = Vec::with_capacity(params);
        let mut p = b.clone();
        for _ in 0..params {
            a1.push(p.clone());
            p = &p * &b;
        }
        let a2 = a1.iter().map(|a| a.adjoint()).collect();
        let (u, v) = random_reference_pair(levels, &mut rng);
        Self::biortho_pair(a1, a2, u, v).expect("construction is consistent")
    }

    /// Independent random generators on the two sides (normalization drifts with `s`).
    pub fn random_mismatched(levels: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = vec![random_hermitian(levels, &mut rng)];
        let a2 = vec![random_complex(levels, &mut rng)];
        let (u, v) = random_reference_pair(levels, &mut rng);
        Self::biortho_pair(a1, a2, u, v).expect("construction is consistent")
    }

    pub fn n(&self) -> usize {
        self.a1.len()
    }

    /// Largest pairwise commutator norm within each generator set.
    pub fn max_commutator(&self) -> f64 {
        let mut m: f64 = 0.0;
        for set in [&self.a1, &self.a2] {
            for i in 0..set.len() {
                for j in i + 1..set.len() {
                    m = m.max(commutator_norm(&set[i], &set[j]));
                }
            }
        }
        m
    }

    fn side_state(&self, one: bool, s: &[f64]) -> CVec {
        let (gens, l0) = if one { (&self.a1, &self.l0_1) } else { (&self.a2, &self.l0_2) };
        let mut v = l0.clone();
        for k in (0..gens.len()).rev() {
            v = expm(&(&gens[k] * (I * s[k]))) * v;
        }
        v
    }

    pub fn side(self: &Arc<Self>, one: bool) -> GeneratorSide {
        GeneratorSide { spec: Arc::clone(self), one, name: if one { "generator_side_1".into() } else { "generator_side_2".into() } }
    }
}

fn random_reference_pair(levels: usize, rng: &mut ChaCha8Rng) -> (CVec, CVec) {
    let v = random_state(levels, rng);
    let w = random_state(levels, rng);
    let w_perp = &w - &v * dot(&v, &w);
    (&v + w_perp * C64::from(0.5), v)
}

/// One side of a generator family as a state family of `s`.
#[derive(Clone, Debug)]
pub struct GeneratorSide {
    pub spec: Arc<GeneratorFamilySpec>,
    pub one: bool,
    name: String,
}

impl StateFamily for GeneratorSide {
    fn dim(&self) -> usize {
        self.spec.n()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, s: &[f64]) -> Result<PureState> {
        let norm = if self.spec.variant == GeneratorVariant::Hermitian { NormKind::Unit } else { NormKind::Unnormalized };
        PureState::basis(self.spec.side_state(self.one, s), norm)
    }

    fn analytic_jet(&self, s: &[f64], order: Order) -> Option<Result<Jet>> {
        let c = self.spec.max_commutator();
        if c > COMMUTE_TOL {
            return Some(Err(GeomError::NonCommuting(c)));
        }
        let state = match self.evaluate(s) {
            Ok(st) => st,
            Err(e) => return Some(Err(e)),
        };
        let gens = if self.one { &self.spec.a1 } else { &self.spec.a2 };
        let l = state.amps.clone();
        let n = gens.len();
        let d1 = (0..n).map(|k| &gens[k] * &l * I).collect();
        let d2 = match order {
            Order::First => Vec::new(),
            Order::Second => (0..n).map(|i| (0..n).map(|j| -(&gens[i] * (&gens[j] * &l))).collect()).collect(),
        };
        Some(Ok(Jet { state, d1, d2 }))
    }
}

/// `FS_ij = <l_1|(A1^i)^dag A2^j|l_2> - <l_1|(A1^i)^dag|l_2><l_1|A2^j|l_2>`.
pub fn commuting_generator_tensor(spec: &GeneratorFamilySpec, s: &[f64]) -> Result<GeometricTensor> {
    if s.len() != spec.n() {
        return Err(GeomError::Shape(format!("expected {} parameters, got {}", spec.n(), s.len())));
    }
    let c = spec.max_commutator();
    if c > COMMUTE_TOL {
        return Err(GeomError::NonCommuting(c));
    }
    let l1 = spec.side_state(true, s);
    let l2 = spec.side_state(false, s);
    let defect = (dot(&l1, &l2) - C64::from(1.0)).norm();
    if defect > EPS_NORM {
        return Err(GeomError::Normalization { defect, context: "pairing <l_1|l_2> drifted from 1".into() });
    }
    let n = spec.n();
    let a1d: Vec<CMat> = spec.a1.iter().map(|a| a.adjoint()).collect();
    Ok(GeometricTensor::new(CMat::from_fn(n, n, |i, j| {
        sandwich(&l1, &(&a1d[i] * &spec.a2[j]), &l2) - sandwich(&l1, &a1d[i], &l2) * sandwich(&l1, &spec.a2[j], &l2)
    })))
}

/// `|f'(s)|` for `f(s) = <l_1(s)|l_2(s)>` with a single generator on each side:
/// `f' = i u^dag Z(s)`, `Z = M (A2 - M^{-1} A1^dag M) v`, `M = e^{-i s A1^dag} e^{i s A2}`.
pub fn biortho_preservation_defect(spec: &GeneratorFamilySpec, s: f64) -> Result<f64> {
    if spec.n() != 1 {
        return Err(GeomError::Shape(format!("defect needs a single evolution parameter, spec has {}", spec.n())));
    }
    let a1d = spec.a1[0].adjoint();
    let a2 = &spec.a2[0];
    let m = expm(&(&a1d * (-I * s))) * expm(&(a2 * (I * s)));
    let m_inv = m.clone().try_inverse().ok_or_else(|| GeomError::Singular("M(s) is not invertible".into()))?;
    let z = &m * (a2 - &m_inv * &a1d * &m) * &spec.l0_2;
    Ok(dot(&spec.l0_1, &z).norm())
}

/// `f(s) = <l_1(s)|l_2(s)>` for a single-parameter spec.
pub fn biortho_overlap(spec: &GeneratorFamilySpec, s: &[f64]) -> C64 {
    dot(&spec.side_state(true, s), &spec.side_state(false, s))
}
