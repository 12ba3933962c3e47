//! Rank-2 geometric tensors and rank-3 connection fields.

use nalgebra::DMatrix;

use crate::linalg::{CMat, C64};

/// Complex `n x n` tensor split into four canonical parts:
/// `M = g + i*omega + i*gtilde + omegatilde` with `g`, `gtilde` symmetric and
/// `omega`, `omegatilde` antisymmetric real matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricTensor {
    pub matrix: CMat,
}

impl GeometricTensor {
    pub fn new(matrix: CMat) -> Self {
        GeometricTensor { matrix }
    }

    pub fn zeros(n: usize) -> Self {
        GeometricTensor { matrix: CMat::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn sym(&self) -> CMat {
        (&self.matrix + self.matrix.transpose()) * C64::from(0.5)
    }

    pub fn antisym(&self) -> CMat {
        (&self.matrix - self.matrix.transpose()) * C64::from(0.5)
    }

    /// Real symmetric part.
    pub fn g(&self) -> DMatrix<f64> {
        self.sym().map(|z| z.re)
    }

    /// Imaginary antisymmetric part (coefficient of `i`).
    pub fn omega(&self) -> DMatrix<f64> {
        self.antisym().map(|z| z.im)
    }

    /// Imaginary symmetric part (coefficient of `i`).
    pub fn g_tilde(&self) -> DMatrix<f64> {
        self.sym().map(|z| z.im)
    }

    /// Real antisymmetric part.
    pub fn omega_tilde(&self) -> DMatrix<f64> {
        self.antisym().map(|z| z.re)
    }

    /// Largest deviation from `M_ji = conj(M_ij)`.
    pub fn hermiticity_defect(&self) -> f64 {
        crate::linalg::max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// Curvature two-form carried by the antisymmetric part, `-2i (antisym M)`.
    ///
    /// For a Hermitian tensor this is the real matrix `2*omega`.
    pub fn curvature(&self) -> CMat {
        self.antisym() * C64::new(0.0, -2.0)
    }

    pub fn max_abs_diff(&self, other: &GeometricTensor) -> f64 {
        crate::linalg::max_abs(&(&self.matrix - &other.matrix))
    }
}

/// Lowered connection coefficients `Gamma_{ij,k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionField {
    n: usize,
    data: Vec<C64>,
}

impl ConnectionField {
    pub fn zeros(n: usize) -> Self {
        ConnectionField { n, data: vec![C64::from(0.0); n * n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> C64) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.set(i, j, k, f(i, j, k));
                }
            }
        }
        out
    }

    pub fn from_real(n: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        Self::from_fn(n, |i, j, k| C64::from(f(i, j, k)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.data[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: C64) {
        let idx = self.idx(i, j, k);
        self.data[idx] = v;
    }

    pub fn values(&self) -> &[C64] {
        &self.data
    }

    pub fn re(&self) -> ConnectionField {
        self.map(|z| C64::from(z.re))
    }

    pub fn im(&self) -> ConnectionField {
        self.map(|z| C64::from(z.im))
    }

    pub fn conj(&self) -> ConnectionField {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> ConnectionField {
        ConnectionField { n: self.n, data: self.data.iter().map(|z| f(*z)).collect() }
    }

    pub fn add(&self, other: &ConnectionField) -> ConnectionField {
        assert_eq!(self.n, other.n, "connection dimension mismatch");
        ConnectionField { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> ConnectionField {
        self.map(|z| z * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ConnectionField) -> f64 {
        assert_eq!(self.n, other.n, "connection dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `max |Gamma_{ij,k} - Gamma_{ji,k}|`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r = r.max((self.get(i, j, k) - self.get(j, i, k)).norm());
                }
            }
        }
        r
    }

    /// Raises the last index with a (pseudo-)inverse metric: `Gamma^k_{ij}`.
    pub fn raise(&self, ginv: &DMatrix<f64>) -> ConnectionField {
        let n = self.n;
        ConnectionField::from_fn(n, |i, j, k| (0..n).map(|l| self.get(i, j, l) * ginv[(k, l)]).sum())
    }
}

/// A pair of gauge-invariant connections and their bare counterparts.
#[derive(Clone, Debug)]
pub struct DualConnectionPair {
    pub gamma1: ConnectionField,
    pub gamma2: ConnectionField,
    pub bare1: ConnectionField,
    pub bare2: ConnectionField,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn parts_recompose() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.3), c(0.2, -0.7), c(-0.5, 0.4), c(2.0, -0.1)]);
        let t = GeometricTensor::new(m.clone());
        let re = t.g() + t.omega_tilde();
        let im = t.omega() + t.g_tilde();
        for i in 0..2 {
            for j in 0..2 {
                assert!((c(re[(i, j)], im[(i, j)]) - m[(i, j)]).norm() < 1e-15);
            }
        }
        assert_eq!(t.g(), t.g().transpose());
        assert_eq!(t.omega(), -t.omega().transpose());
    }

    #[test]
    fn connection_indexing_and_symmetry() {
        let f = ConnectionField::from_real(2, |i, j, k| (i + j) as f64 + 10.0 * k as f64);
        assert_eq!(f.get(1, 0, 1), c(11.0, 0.0));
        assert_eq!(f.symmetry_residual(), 0.0);
        let g = ConnectionField::from_real(2, |i, _, _| i as f64);
        assert_eq!(g.symmetry_residual(), 1.0);
    }
}
