//! Non-Hermitian geometry: biorthogonal eigensystems, the LR/RL/LL/RR tensor
//! classes, complex Berry curvature, LR/RL and II connections, and the QFI of
//! pointwise-normalized non-unitary orbits.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::linalg::{self, dot, expm, null_vector, CMat, CVec, C64, I};
use crate::pairing::PairProducts;
use crate::state_model::{gradient_of, inner, jet, Differentiator, Jet, Order, PureState, StateFamily};
use crate::tensor::{DualConnectionPair, GeometricTensor};
use crate::tol::EPS_NORM;

/// Eigenvalues with biorthonormal right and left eigenvectors (as columns),
/// sorted by `(Re, Im)` of the eigenvalue.
#[derive(Clone, Debug)]
pub struct BiorthoEigensystem {
    pub eigenvalues: Vec<C64>,
    pub right: CMat,
    pub left: CMat,
}

impl BiorthoEigensystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn right_vector(&self, n: usize) -> CVec {
        self.right.column(n).into_owned()
    }

    pub fn left_vector(&self, n: usize) -> CVec {
        self.left.column(n).into_owned()
    }

    /// `max |<L_m|R_n> - delta_mn|`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let g = self.left.adjoint() * &self.right;
        let d = self.dim();
        linalg::max_abs(&(g - CMat::identity(d, d)))
    }

    /// Largest of `|H R_n - l_n R_n|` and `|H^dag L_n - conj(l_n) L_n|`.
    pub fn eigen_residual(&self, h: &CMat) -> f64 {
        let hd = h.adjoint();
        (0..self.dim())
            .map(|n| {
                let l = self.eigenvalues[n];
                let r = self.right_vector(n);
                let lv = self.left_vector(n);
                (h * &r - &r * l).norm().max((&hd * &lv - &lv * l.conj()).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Makes the first component whose magnitude reaches half the largest one real
/// and positive. Ties in magnitude are common (e.g. PT-symmetric eigenvectors),
/// so the first qualifying index gives a frame that is smooth away from crossings.
pub fn fix_phase(v: &CVec) -> CVec {
    let m = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if m == 0.0 {
        return v.clone();
    }
    let k = v.iter().position(|z| z.norm() >= 0.5 * m).unwrap_or(0);
    let ph = v[k].conj() / v[k].norm();
    v * ph
}

/// Eigen-decomposition with left vectors from `H^dag`, biorthonormalized so that
/// `<L_m|R_n> = delta_mn` and each right vector has unit norm.
///
/// Fails with `ExceptionalPoint` when two eigenvalues come closer than
/// `ep_tol * scale` or when a unit left/right pair has overlap below that bound.
pub fn biortho_eig(h: &CMat, ep_tol: f64) -> Result<BiorthoEigensystem> {
    if h.nrows() != h.ncols() {
        return Err(GeomError::Shape(format!("matrix is {}x{}", h.nrows(), h.ncols())));
    }
    if !linalg::is_finite_mat(h) {
        return Err(GeomError::NonFinite("Hamiltonian entries".into()));
    }
    let d = h.nrows();
    let scale = linalg::scale_of(h);
    let mut ev = linalg::eigenvalues(h)?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for a in 0..d {
        for b in a + 1..d {
            let gap = (ev[a] - ev[b]).norm();
            if gap < ep_tol * scale {
                return Err(GeomError::ExceptionalPoint(format!(
                    "eigenvalues {} and {} are {gap:.3e} apart",
                    fmt_c(ev[a]),
                    fmt_c(ev[b])
                )));
            }
        }
    }
    let id = CMat::identity(d, d);
    let hd = h.adjoint();
    let mut right = CMat::zeros(d, d);
    let mut left = CMat::zeros(d, d);
    for (n, &l) in ev.iter().enumerate() {
        let (r, _) = null_vector(&(h - &id * l));
        let (lv, _) = null_vector(&(&hd - &id * l.conj()));
        let r = fix_phase(&(&r / C64::from(r.norm())));
        let lv = &lv / C64::from(lv.norm());
        let ov = dot(&lv, &r);
        if ov.norm() < ep_tol {
            return Err(GeomError::ExceptionalPoint(format!(
                "left-right overlap {:.3e} at eigenvalue {}",
                ov.norm(),
                fmt_c(l)
            )));
        }
        let lv = &lv / ov.conj();
        right.set_column(n, &r);
        left.set_column(n, &lv);
    }
    Ok(BiorthoEigensystem { eigenvalues: ev, right, left })
}

fn fmt_c(z: C64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

/// Which states supply the bra and the ket, and which normalization applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NhKind {
    /// bra `L`, ket `R`, `<L|R> = 1`
    LR,
    /// bra `R`, ket `L`, `<R|L> = 1`
    RL,
    /// bra and ket `L`, `<L|L> = 1`
    LL,
    /// bra and ket `R`, `<R|R> = 1`
    RR,
}

impl NhKind {
    pub fn parse(s: &str) -> Option<NhKind> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Some(NhKind::LR),
            "rl" => Some(NhKind::RL),
            "ll" => Some(NhKind::LL),
            "rr" => Some(NhKind::RR),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            NhKind::LR => "lr",
            NhKind::RL => "rl",
            NhKind::LL => "ll",
            NhKind::RR => "rr",
        }
    }

    /// `(bra, ket)` as `(left?, left?)`.
    fn sides(&self) -> (bool, bool) {
        match self {
            NhKind::LR => (true, false),
            NhKind::RL => (false, true),
            NhKind::LL => (true, true),
            NhKind::RR => (false, false),
        }
    }
}

/// Bra and ket jets for a tensor kind, after checking the kind's normalization.
pub fn kind_jets(
    left: &dyn StateFamily,
    right: &dyn StateFamily,
    theta: &[f64],
    kind: NhKind,
    diff: &Differentiator,
    order: Order,
) -> Result<(Jet, Jet)> {
    let (bl, kl) = kind.sides();
    let need_left = bl || kl;
    let need_right = !bl || !kl;
    let lj = if need_left { Some(jet(left, theta, diff, order)?) } else { None };
    let rj = if need_right { Some(jet(right, theta, diff, order)?) } else { None };
    let pick = |is_left: bool| if is_left { lj.clone().unwrap() } else { rj.clone().unwrap() };
    let (bra, ket) = (pick(bl), pick(kl));
    check_kind_norm(&bra.state, &ket.state, kind)?;
    Ok((bra, ket))
}

pub fn check_kind_norm(bra: &PureState, ket: &PureState, kind: NhKind) -> Result<()> {
    let ov = inner(bra, ket)?;
    let defect = (ov - C64::from(1.0)).norm();
    if defect > EPS_NORM {
        return Err(GeomError::Normalization {
            defect,
            context: format!("{} tensor requires its pairing to equal 1", kind.as_str().to_uppercase()),
        });
    }
    Ok(())
}

/// `T_ij = <d_i bra|d_j ket> - <d_i bra|ket><bra|d_j ket>` for the chosen kind.
pub fn nh_fs_tensor(left: &dyn StateFamily, right: &dyn StateFamily, theta: &[f64], kind: NhKind, diff: &Differentiator) -> Result<GeometricTensor> {
    let (bra, ket) = kind_jets(left, right, theta, kind, diff, Order::First)?;
    Ok(PairProducts::new(&bra, &ket)?.tensor(1.0))
}

/// Complex curvature `-2i (antisymmetric part)` of the kind's tensor.
pub fn nh_berry_curvature(left: &dyn StateFamily, right: &dyn StateFamily, theta: &[f64], kind: NhKind, diff: &Differentiator) -> Result<CMat> {
    Ok(nh_fs_tensor(left, right, theta, kind, diff)?.curvature())
}

/// `-(d_i A_j - d_j A_i)` with `A_i = i <bra|d_i ket>` differentiated numerically.
pub fn nh_berry_curvature_curl(left: &dyn StateFamily, right: &dyn StateFamily, theta: &[f64], kind: NhKind, diff: &Differentiator) -> Result<CMat> {
    let n = theta.len();
    let conn = |t: &[f64]| -> Result<nalgebra::DVector<f64>> {
        let (bra, ket) = kind_jets(left, right, t, kind, diff, Order::First)?;
        let pp = PairProducts::new(&bra, &ket)?;
        let a: Vec<C64> = pp.a_db.iter().map(|z| I * z).collect();
        Ok(nalgebra::DVector::from_fn(2 * n, |r, _| if r < n { a[r].re } else { a[r - n].im }))
    };
    let da = gradient_of(conn, theta)?;
    Ok(CMat::from_fn(n, n, |i, j| {
        let dij = C64::new(da[i][j], da[i][n + j]);
        let dji = C64::new(da[j][i], da[j][n + i]);
        -(dij - dji)
    }))
}

/// Connections of a kind with their duality residual.
#[derive(Clone, Debug)]
pub struct NhConnections {
    pub pair: DualConnectionPair,
    /// LR/RL: `max |conj(G1 with bra and ket exchanged) - G2|`.
    /// LL/RR: `max |conj(gamma1) - gamma2|`.
    pub duality_residual: f64,
}

pub fn nh_connections(left: &dyn StateFamily, right: &dyn StateFamily, theta: &[f64], kind: NhKind, diff: &Differentiator) -> Result<NhConnections> {
    let (bra, ket) = kind_jets(left, right, theta, kind, diff, Order::Second)?;
    let pp = PairProducts::new(&bra, &ket)?;
    let pair = DualConnectionPair { gamma1: pp.gamma1(1.0)?, gamma2: pp.gamma2(1.0)?, bare1: pp.bare1()?, bare2: pp.bare2()? };
    let duality_residual = match kind {
        NhKind::LR | NhKind::RL => {
            let swapped = PairProducts::new(&ket, &bra)?;
            swapped.gamma1(1.0)?.conj().max_abs_diff(&pair.gamma2)
        }
        NhKind::LL | NhKind::RR => pair.gamma1.conj().max_abs_diff(&pair.gamma2),
    };
    Ok(NhConnections { pair, duality_residual })
}

/// `e^{-i H theta} psi0` scaled to unit norm at every `theta`.
#[derive(Clone, Debug)]
pub struct NormalizedGeneratorFamily {
    pub h: CMat,
    pub psi0: CVec,
}

impl NormalizedGeneratorFamily {
    pub fn new(h: CMat, psi0: &PureState) -> Result<Self> {
        if h.nrows() != psi0.len() || h.ncols() != psi0.len() {
            return Err(GeomError::Shape("generator and state dimensions differ".into()));
        }
        let defect = (psi0.norm_sqr() - 1.0).abs();
        if defect > EPS_NORM {
            return Err(GeomError::Normalization { defect, context: "reference state".into() });
        }
        Ok(NormalizedGeneratorFamily { h, psi0: psi0.amps.clone() })
    }

    fn raw(&self, theta: f64) -> Result<(CVec, f64)> {
        let v = expm(&(&self.h * (-I * theta))) * &self.psi0;
        let n = v.norm();
        if !(n > 1e-150) || !n.is_finite() {
            return Err(GeomError::Overflow(format!("norm {n:.3e} of the evolved state")));
        }
        Ok((v, n))
    }
}

impl StateFamily for NormalizedGeneratorFamily {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> &str {
        "normalized_generator"
    }

    fn evaluate(&self, theta: &[f64]) -> Result<PureState> {
        let (v, n) = self.raw(theta[0])?;
        PureState::basis(v / C64::from(n), crate::state_model::NormKind::Unit)
    }
}

/// `4 (<H^dag H> - <H^dag><H>)` in the pointwise-normalized state
/// `e^{-i H theta} psi0 / N(theta)`.
pub fn normalized_generator_qfi(h: &CMat, psi0: &PureState, theta: f64) -> Result<DMatrix<f64>> {
    let fam = NormalizedGeneratorFamily::new(h.clone(), psi0)?;
    let (v, n) = fam.raw(theta)?;
    let psi = v / C64::from(n);
    let hp = h * &psi;
    let e_hh = dot(&hp, &hp);
    let e_h = dot(&psi, &hp);
    let q = 4.0 * (e_hh - e_h.conj() * e_h);
    Ok(DMatrix::from_element(1, 1, q.re))
}
