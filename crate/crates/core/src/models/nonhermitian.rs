use std::sync::Arc;

use crate::biortho::{biortho_eig, fix_phase};
use crate::error::{GeomError, Result};
use crate::linalg::{c, CMat, CVec, C64};
use crate::state_model::{check_box, Jet, NormKind, Order, PureState, StateFamily};
use crate::tol::EP_TOL;

/// `[[i gamma, g], [g, -i gamma]]`; eigenvalues `+-sqrt(g^2 - gamma^2)`.
pub fn pt_two_level(gamma: f64, g: f64) -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, gamma), c(g, 0.0), c(g, 0.0), c(0.0, -gamma)])
}

/// `n(t, p) . sigma`, a Hermitian field on the sphere.
pub fn spin_field(t: f64, p: f64) -> CMat {
    let (st, ct) = t.sin_cos();
    CMat::from_row_slice(2, 2, &[c(ct, 0.0), C64::from_polar(st, -p), C64::from_polar(st, p), c(-ct, 0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub type MatrixBuilder = Arc<dyn Fn(&[f64]) -> Result<CMat> + Send + Sync>;

/// Parameter-dependent non-Hermitian Hamiltonian.
#[derive(Clone)]
pub struct NonHermitianModelSpec {
    pub name: String,
    pub n_params: usize,
    pub bounds: Vec<(f64, f64)>,
    pub builder: MatrixBuilder,
    pub ep_tol: f64,
}

impl NonHermitianModelSpec {
    pub fn new(name: &str, n_params: usize, builder: MatrixBuilder) -> Self {
        NonHermitianModelSpec {
            name: name.to_string(),
            n_params,
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n_params],
            builder,
            ep_tol: EP_TOL,
        }
    }

    /// `pt_two_level` over `theta = (gamma, g)`.
    pub fn pt_two_level() -> Self {
        Self::new("pt_two_level", 2, Arc::new(|t: &[f64]| Ok(pt_two_level(t[0], t[1]))))
    }

    /// Hermitian `n . sigma` over `theta = (t, p)`.
    pub fn spin_field() -> Self {
        Self::new("spin_field", 2, Arc::new(|t: &[f64]| Ok(spin_field(t[0], t[1]))))
    }

    pub fn hamiltonian(&self, theta: &[f64]) -> Result<CMat> {
        check_box(self.n_params, &self.bounds, theta)?;
        let h = (self.builder)(theta)?;
        if !crate::linalg::is_finite_mat(&h) {
            return Err(GeomError::NonFinite(format!("Hamiltonian of {}", self.name)));
        }
        Ok(h)
    }

    pub fn family(&self, band: usize, side: Side, norm: VectorNorm) -> EigenvectorFamily {
        EigenvectorFamily { spec: self.clone(), band, side, norm, name: format!("{}:{band}:{side:?}:{norm:?}", self.name) }
    }

    /// Left and right eigenvector families with `<L|R> = 1`.
    pub fn biorthogonal_pair(&self, band: usize) -> (EigenvectorFamily, EigenvectorFamily) {
        (self.family(band, Side::Left, VectorNorm::Biorthogonal), self.family(band, Side::Right, VectorNorm::Biorthogonal))
    }

    /// Left and right eigenvector families, each of unit norm.
    pub fn unit_pair(&self, band: usize) -> (EigenvectorFamily, EigenvectorFamily) {
        (self.family(band, Side::Left, VectorNorm::Unit), self.family(band, Side::Right, VectorNorm::Unit))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VectorNorm {
    /// `<L|R> = 1` with unit right vectors.
    Biorthogonal,
    /// Each vector scaled to unit norm, phase fixed on its own.
    Unit,
}

/// One eigenvector of a parameter-dependent Hamiltonian as a state family.
/// Bands are indexed in `(Re, Im)` eigenvalue order.
#[derive(Clone)]
pub struct EigenvectorFamily {
    pub spec: NonHermitianModelSpec,
    pub band: usize,
    pub side: Side,
    pub norm: VectorNorm,
    name: String,
}

impl StateFamily for EigenvectorFamily {
    fn dim(&self) -> usize {
        self.spec.n_params
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.spec.bounds.clone()
    }

    fn evaluate(&self, theta: &[f64]) -> Result<PureState> {
        let h = self.spec.hamiltonian(theta)?;
        let es = biortho_eig(&h, self.spec.ep_tol)?;
        if self.band >= es.dim() {
            return Err(GeomError::Shape(format!("band {} of a {}-level system", self.band, es.dim())));
        }
        let v = match self.side {
            Side::Right => es.right_vector(self.band),
            Side::Left => es.left_vector(self.band),
        };
        match (self.norm, self.side) {
            (VectorNorm::Biorthogonal, Side::Right) => PureState::basis(v, NormKind::Unit),
            (VectorNorm::Biorthogonal, Side::Left) => PureState::basis(v, NormKind::Unnormalized),
            (VectorNorm::Unit, _) => {
                let n = v.norm();
                PureState::basis(fix_phase(&(v / C64::from(n))), NormKind::Unit)
            }
        }
    }
}

/// `R = M psi`, `L = M^{-dag} psi` for a unit family `psi`, so `<L|R> = <psi|psi> = 1`.
/// The Hamiltonian `M H0 M^{-1}` is then biorthogonal-Hermitian when `H0` is Hermitian.
#[derive(Clone)]
pub struct SimilarityPair<F> {
    pub base: F,
    pub m: CMat,
    pub m_inv_dag: CMat,
}

impl<F: StateFamily + Clone> SimilarityPair<F> {
    pub fn new(base: F, m: CMat) -> Result<Self> {
        let inv = m.clone().try_inverse().ok_or_else(|| GeomError::Singular("similarity transform".into()))?;
        Ok(SimilarityPair { base, m, m_inv_dag: inv.adjoint() })
    }

    pub fn hamiltonian(&self, h0: &CMat) -> CMat {
        &self.m * h0 * self.m_inv_dag.adjoint()
    }

    pub fn right(&self) -> MappedFamily<F> {
        MappedFamily { base: self.base.clone(), map: self.m.clone(), name: format!("{}:right", self.base.name()) }
    }

    pub fn left(&self) -> MappedFamily<F> {
        MappedFamily { base: self.base.clone(), map: self.m_inv_dag.clone(), name: format!("{}:left", self.base.name()) }
    }
}

/// `theta -> T psi(theta)` for a fixed matrix `T`.
#[derive(Clone)]
pub struct MappedFamily<F> {
    pub base: F,
    pub map: CMat,
    name: String,
}

impl<F: StateFamily> StateFamily for MappedFamily<F> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.base.bounds()
    }

    fn evaluate(&self, theta: &[f64]) -> Result<PureState> {
        let s = self.base.evaluate(theta)?;
        PureState::basis(&self.map * s.amps, NormKind::Unnormalized)
    }

    fn analytic_jet(&self, theta: &[f64], order: Order) -> Option<Result<Jet>> {
        let j = match self.base.analytic_jet(theta, order)? {
            Ok(j) => j,
            Err(e) => return Some(Err(e)),
        };
        let mut out = j.map(|v: &CVec| &self.map * v);
        out.state.norm = NormKind::Unnormalized;
        Some(Ok(out))
    }
}
