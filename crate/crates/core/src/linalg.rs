//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{GeomError, Result};

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Plain Hermitian inner product `sum conj(a_k) b_k`.
pub fn dot(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `<a|M|b>` with the plain inner product.
pub fn sandwich(a: &CVec, m: &CMat, b: &CVec) -> C64 {
    dot(a, &(m * b))
}

pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

pub fn is_finite_vec(v: &CVec) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn is_finite_mat(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn commutator_norm(a: &CMat, b: &CMat) -> f64 {
    (a * b - b * a).norm()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_real(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Spectral radius bound used to scale exceptional-point tolerances.
pub fn scale_of(m: &CMat) -> f64 {
    let s = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if s > 0.0 { s } else { 1.0 }
}

/// Random Hermitian matrix with entries drawn uniformly from [-1, 1].
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> CMat {
    let a = CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::from(0.5)
}

/// Random complex matrix with entries drawn uniformly from [-1, 1].
pub fn random_complex<R: Rng>(d: usize, rng: &mut R) -> CMat {
    CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random unit vector.
pub fn random_state<R: Rng>(d: usize, rng: &mut R) -> CVec {
    let v = CVec::from_fn(d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let n = v.norm();
    v / C64::from(n)
}

/// Outcome of a pseudo-inverse solve.
#[derive(Clone, Debug)]
pub struct PinvSolution {
    pub x: DVector<f64>,
    /// Number of singular values kept.
    pub rank: usize,
    /// Ratio of largest to smallest kept singular value.
    pub condition: f64,
    /// True when every singular value fell below the cutoff.
    pub singular: bool,
}

/// Minimum-norm solution of `a x = b` through the SVD, dropping singular values
/// below `rel_cutoff * s_max`.
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, rel_cutoff: f64) -> Result<PinvSolution> {
    if a.nrows() != b.len() {
        return Err(GeomError::Shape(format!("matrix has {} rows, rhs has {}", a.nrows(), b.len())));
    }
    if !a.iter().chain(b.iter()).all(|x| x.is_finite()) {
        return Err(GeomError::NonFinite("pseudo-inverse input".into()));
    }
    let svd = a.clone().svd(true, true);
    let s = &svd.singular_values;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let ncols = a.ncols();
    if smax == 0.0 {
        return Ok(PinvSolution { x: DVector::zeros(ncols), rank: 0, condition: f64::INFINITY, singular: true });
    }
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut x = DVector::zeros(ncols);
    let mut rank = 0;
    let mut smin = f64::INFINITY;
    for (k, &sk) in s.iter().enumerate() {
        if sk > rel_cutoff * smax {
            rank += 1;
            smin = smin.min(sk);
            let coef = u.column(k).dot(b) / sk;
            x += vt.row(k).transpose() * coef;
        }
    }
    Ok(PinvSolution { x, rank, condition: smax / smin, singular: rank == 0 })
}

/// Least squares for a complex system with real unknowns: stacks real and
/// imaginary parts and solves through the pseudo-inverse.
pub fn real_stacked_solve(a: &CMat, b: &CVec, rel_cutoff: f64) -> Result<PinvSolution> {
    let (m, n) = a.shape();
    let ar = DMatrix::from_fn(2 * m, n, |r, k| if r < m { a[(r, k)].re } else { a[(r - m, k)].im });
    let br = DVector::from_fn(2 * m, |r, _| if r < m { b[r].re } else { b[r - m].im });
    pinv_solve(&ar, &br, rel_cutoff)
}

/// Right singular vector of the smallest singular value, with that value.
pub fn null_vector(m: &CMat) -> (CVec, f64) {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let (kmin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, &s)| if s < acc.1 { (k, s) } else { acc });
    let v = vt.row(kmin).transpose().map(|z| z.conj());
    (v, smin)
}

/// Eigenvalues of a complex square matrix from its Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if !is_finite_mat(m) {
        return Err(GeomError::NonFinite("matrix entries".into()));
    }
    let n = m.nrows();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15, 10_000)
        .ok_or_else(|| GeomError::Singular("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|k| t[(k, k)]).collect())
}

/// Angle in radians between two real vectors; zero if either vanishes.
pub fn angle_between(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_recovers_regular_solution() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let sol = pinv_solve(&a, &b, 1e-10).unwrap();
        assert!((&a * &sol.x - &b).norm() < 1e-14);
        assert_eq!(sol.rank, 2);
    }

    #[test]
    fn pinv_drops_null_space() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 0.0]);
        let sol = pinv_solve(&a, &b, 1e-10).unwrap();
        assert_eq!(sol.rank, 1);
        assert!((sol.x[0] - 2.0).abs() < 1e-15 && sol.x[1] == 0.0);
    }

    #[test]
    fn pinv_all_zero_is_singular() {
        let a = DMatrix::zeros(2, 2);
        let sol = pinv_solve(&a, &DVector::from_vec(vec![1.0, 0.0]), 1e-10).unwrap();
        assert!(sol.singular);
    }

    #[test]
    fn expm_of_pauli_rotation() {
        let sx = CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let t = 0.7;
        let u = expm(&(sx.clone() * c(0.0, t)));
        assert!((u[(0, 0)] - c(t.cos(), 0.0)).norm() < 1e-13);
        assert!((u[(0, 1)] - c(0.0, t.sin())).norm() < 1e-13);
    }

    #[test]
    fn null_vector_of_singular_matrix() {
        let m = CMat::from_row_slice(2, 2, &[c(1., 0.), c(1., 0.), c(1., 0.), c(1., 0.)]);
        let (v, s) = null_vector(&m);
        assert!(s < 1e-14);
        assert!((&m * &v).norm() < 1e-14);
    }

    #[test]
    fn schur_eigenvalues_of_triangular() {
        let m = CMat::from_row_slice(2, 2, &[c(2., 0.), c(5., 1.), c(0., 0.), c(-1., 0.5)]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0] - c(-1., 0.5)).norm() < 1e-12);
        assert!((ev[1] - c(2., 0.)).norm() < 1e-12);
    }
}
