//! Classical information geometry: Fisher-Rao metric, alpha-embeddings,
//! alpha-connections and the classical duality.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::linalg::{C64, CVec};
use crate::state_model::{check_box, Support, fd_jet_raw, gradient_of, DerivMode, Differentiator, Order};
use crate::tensor::ConnectionField;
use crate::tol::{EPS_NORM, EPS_P};

/// Probability density or mass function on a fixed support.
#[derive(Clone, Debug)]
pub struct Density {
    pub p: Vec<f64>,
    pub support: Support,
}

impl Density {
    /// Quadrature weights (1 for a finite outcome set).
    pub fn weights(&self) -> Vec<f64> {
        self.support.weights(self.p.len())
    }

    pub fn total(&self) -> f64 {
        self.p.iter().zip(self.weights()).map(|(p, w)| p * w).sum()
    }
}

/// Derivatives of `ln P` at each support point.
#[derive(Clone, Debug)]
pub struct LogJet {
    pub density: Density,
    /// `dl[i][x]`
    pub dl: Vec<Vec<f64>>,
    /// `ddl[i][j][x]`
    pub ddl: Vec<Vec<Vec<f64>>>,
}

pub trait ClassicalFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY); self.dim()]
    }

    fn density(&self, theta: &[f64]) -> Result<Density>;

    fn analytic_log_jet(&self, _theta: &[f64]) -> Option<Result<LogJet>> {
        None
    }
}

fn checked_density(family: &dyn ClassicalFamily, theta: &[f64]) -> Result<Density> {
    check_box(family.dim(), &family.bounds(), theta)?;
    let d = family.density(theta)?;
    if d.p.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(GeomError::NonFinite(format!("density of {} must be finite and nonnegative", family.name())));
    }
    let defect = (d.total() - 1.0).abs();
    if defect > EPS_NORM {
        return Err(GeomError::Normalization { defect, context: format!("density of {}", family.name()) });
    }
    Ok(d)
}

/// Log-derivatives, analytic when available and when `diff` asks for it, otherwise
/// from finite differences of `P` itself.
pub fn log_jet(family: &dyn ClassicalFamily, theta: &[f64], diff: &Differentiator) -> Result<LogJet> {
    let density = checked_density(family, theta)?;
    if diff.mode == DerivMode::Analytic {
        return match family.analytic_log_jet(theta) {
            Some(j) => j,
            None => Err(GeomError::Unsupported(format!("family '{}' has no analytic derivatives", family.name()))),
        };
    }
    let (_, d1, d2) = fd_jet_raw(
        |t| Ok(CVec::from_iterator(density.p.len(), family.density(t)?.p.into_iter().map(C64::from))),
        theta,
        diff,
        Order::Second,
    )?;
    let n = theta.len();
    let m = density.p.len();
    let safe = |x: usize| density.p[x] >= EPS_P;
    let dl: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..m).map(|x| if safe(x) { d1[i][x].re / density.p[x] } else { 0.0 }).collect())
        .collect();
    let ddl = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..m)
                        .map(|x| if safe(x) { d2[i][j][x].re / density.p[x] - dl[i][x] * dl[j][x] } else { 0.0 })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(LogJet { density, dl, ddl })
}

impl LogJet {
    /// `E_P[f(x)]` over points with `P >= EPS_P`.
    pub fn e(&self, f: impl Fn(usize) -> f64) -> f64 {
        let d = &self.density;
        let w = d.weights();
        (0..d.p.len()).filter(|&x| d.p[x] >= EPS_P).map(|x| w[x] * d.p[x] * f(x)).sum()
    }

    pub fn n(&self) -> usize {
        self.dl.len()
    }
}

/// `g_ij = E[d_i ln P d_j ln P]`.
pub fn fisher_rao(family: &dyn ClassicalFamily, theta: &[f64], diff: &Differentiator) -> Result<DMatrix<f64>> {
    let lj = log_jet(family, theta, diff)?;
    Ok(fisher_from_jet(&lj))
}

fn fisher_from_jet(lj: &LogJet) -> DMatrix<f64> {
    let n = lj.n();
    DMatrix::from_fn(n, n, |i, j| lj.e(|x| lj.dl[i][x] * lj.dl[j][x]))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || (alpha.abs() - 1.0).abs() == 0.0 {
        return Err(GeomError::ExcludedAlpha(alpha));
    }
    Ok(())
}

/// Pointwise alpha-embedding `l_alpha = 2/(1-alpha) P^{(1-alpha)/2}`.
pub fn alpha_embedding(density: &Density, alpha: f64) -> Result<Vec<f64>> {
    if alpha == 1.0 || !alpha.is_finite() {
        return Err(GeomError::ExcludedAlpha(alpha));
    }
    Ok(density.p.iter().map(|p| 2.0 / (1.0 - alpha) * p.powf(0.5 * (1.0 - alpha))).collect())
}

/// `g^(alpha)_ij = sum_x w d_i l_alpha d_j l_{-alpha}` with the derivatives of the
/// embeddings formed explicitly from powers of `P`.
pub fn classical_alpha_metric(family: &dyn ClassicalFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<DMatrix<f64>> {
    check_alpha(alpha)?;
    let lj = log_jet(family, theta, diff)?;
    let d = &lj.density;
    let w = d.weights();
    let n = lj.n();
    // d_i l_alpha = P^{(1-alpha)/2} d_i ln P
    let dla = |i: usize, x: usize, a: f64| d.p[x].powf(0.5 * (1.0 - a)) * lj.dl[i][x];
    Ok(DMatrix::from_fn(n, n, |i, j| {
        (0..d.p.len())
            .filter(|&x| d.p[x] >= EPS_P)
            .map(|x| w[x] * dla(i, x, alpha) * dla(j, x, -alpha))
            .sum()
    }))
}

/// `Gamma^(alpha)_{ij,k} = E[(d_ij l + (1-alpha)/2 d_i l d_j l) d_k l]`.
pub fn classical_alpha_connection(family: &dyn ClassicalFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<ConnectionField> {
    check_alpha(alpha)?;
    let lj = log_jet(family, theta, diff)?;
    Ok(alpha_connection_from_jet(&lj, alpha))
}

fn alpha_connection_from_jet(lj: &LogJet, alpha: f64) -> ConnectionField {
    let c = 0.5 * (1.0 - alpha);
    ConnectionField::from_real(lj.n(), |i, j, k| {
        lj.e(|x| (lj.ddl[i][j][x] + c * lj.dl[i][x] * lj.dl[j][x]) * lj.dl[k][x])
    })
}

/// `max |d_k g_ij - Gamma^(alpha)_{ik,j} - Gamma^(-alpha)_{jk,i}|`, with `d_k g`
/// from extrapolated central differences of the Fisher-Rao metric.
pub fn classical_duality_residual(family: &dyn ClassicalFamily, theta: &[f64], alpha: f64, diff: &Differentiator) -> Result<f64> {
    check_alpha(alpha)?;
    let lj = log_jet(family, theta, diff)?;
    let n = lj.n();
    let gp = alpha_connection_from_jet(&lj, alpha);
    let gm = alpha_connection_from_jet(&lj, -alpha);
    let dg = gradient_of(|t| Ok(flatten(&fisher_rao(family, t, diff)?)), theta)?;
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let lhs = dg[k][i * n + j];
                r = r.max((lhs - gp.get(i, k, j).re - gm.get(j, k, i).re).abs());
            }
        }
    }
    Ok(r)
}

pub(crate) fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.ncols();
    DVector::from_fn(m.nrows() * n, |r, _| m[(r / n, r % n)])
}

#[cfg(test)]
mod tests {
    use super::*;

    struct TwoPoint;

    impl ClassicalFamily for TwoPoint {
        fn dim(&self) -> usize {
            1
        }
        fn name(&self) -> &str {
            "two-point"
        }
        fn bounds(&self) -> Vec<(f64, f64)> {
            vec![(0.0, 1.0)]
        }
        fn density(&self, t: &[f64]) -> Result<Density> {
            Ok(Density { p: vec![1.0 - t[0], t[0]], support: Support::Basis })
        }
    }

    #[test]
    fn excluded_alpha_rejected() {
        let f = TwoPoint;
        assert_eq!(
            classical_alpha_metric(&f, &[0.5], 1.0, &Differentiator::central()).unwrap_err(),
            GeomError::ExcludedAlpha(1.0)
        );
        assert!(classical_alpha_connection(&f, &[0.5], -1.0, &Differentiator::central()).is_err());
    }

    #[test]
    fn fd_fisher_of_two_point() {
        let g = fisher_rao(&TwoPoint, &[0.3], &Differentiator::central()).unwrap();
        assert!((g[(0, 0)] - 1.0 / 0.21).abs() < 1e-8);
    }

    #[test]
    fn analytic_mode_requires_closure() {
        assert!(matches!(
            fisher_rao(&TwoPoint, &[0.3], &Differentiator::analytic()),
            Err(GeomError::Unsupported(_))
        ));
    }

    #[test]
    fn embedding_values() {
        let d = Density { p: vec![0.25, 0.75], support: Support::Basis };
        let l = alpha_embedding(&d, 0.0).unwrap();
        assert!((l[0] - 1.0).abs() < 1e-15);
    }
}
