//! Tensors and connections built from a bra family `a` and a ket family `b`.
//!
//! With `c` the pairing constant (`1` when `<a|b> = 1`):
//!
//! * `T_ij  = <d_i a|d_j b> - c <d_i a|b><a|d_j b>`
//! * `G1_ij,k = <d_ij a|d_k b> - c(<d_ij a|b><a|d_k b> + <d_i a|b><d_j a|d_k b> + <d_j a|b><d_i a|d_k b>)
//!   + 2c^2 <d_i a|b><d_j a|b><a|d_k b>`
//! * `G2_ij,k` the same with the roles of bra and ket exchanged.

use crate::error::{GeomError, Result};
use crate::linalg::{C64, CVec};
use crate::state_model::{inner_raw, Jet, Support};
use crate::tensor::{ConnectionField, GeometricTensor};

/// Inner products between a bra jet and a ket jet.
pub struct PairProducts {
    pub n: usize,
    pub ab: C64,
    /// `<a|d_j b>`
    pub a_db: Vec<C64>,
    /// `<d_i a|b>`
    pub da_b: Vec<C64>,
    /// `<d_i a|d_j b>`
    pub da_db: Vec<Vec<C64>>,
    second: Option<Second>,
}

struct Second {
    /// `<d_ij a|b>`
    dda_b: Vec<Vec<C64>>,
    /// `<a|d_ij b>`
    a_ddb: Vec<Vec<C64>>,
    /// `<d_ij a|d_k b>` indexed `[i][j][k]`
    dda_db: Vec<Vec<Vec<C64>>>,
    /// `<d_k a|d_ij b>` indexed `[i][j][k]`
    da_ddb: Vec<Vec<Vec<C64>>>,
}

impl PairProducts {
    pub fn new(a: &Jet, b: &Jet) -> Result<PairProducts> {
        if a.n() != b.n() {
            return Err(GeomError::Shape(format!("bra has {} parameters, ket {}", a.n(), b.n())));
        }
        if a.state.len() != b.state.len() || std::mem::discriminant(&a.support()) != std::mem::discriminant(&b.support()) {
            return Err(GeomError::Shape("bra and ket live on different supports".into()));
        }
        let sup: Support = a.support();
        let ip = |x: &CVec, y: &CVec| inner_raw(&sup, x, y);
        let n = a.n();
        let (sa, sb) = (&a.state.amps, &b.state.amps);
        let ab = ip(sa, sb);
        let a_db = (0..n).map(|j| ip(sa, &b.d1[j])).collect();
        let da_b = (0..n).map(|i| ip(&a.d1[i], sb)).collect();
        let da_db = (0..n).map(|i| (0..n).map(|j| ip(&a.d1[i], &b.d1[j])).collect()).collect();
        let second = if a.has_second() && b.has_second() {
            let grid3 = |f: &dyn Fn(usize, usize, usize) -> C64| -> Vec<Vec<Vec<C64>>> {
                (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| f(i, j, k)).collect()).collect()).collect()
            };
            Some(Second {
                dda_b: (0..n).map(|i| (0..n).map(|j| ip(&a.d2[i][j], sb)).collect()).collect(),
                a_ddb: (0..n).map(|i| (0..n).map(|j| ip(sa, &b.d2[i][j])).collect()).collect(),
                dda_db: grid3(&|i, j, k| ip(&a.d2[i][j], &b.d1[k])),
                da_ddb: grid3(&|i, j, k| ip(&a.d1[k], &b.d2[i][j])),
            })
        } else {
            None
        };
        Ok(PairProducts { n, ab, a_db, da_b, da_db, second })
    }

    fn second(&self) -> Result<&Second> {
        self.second
            .as_ref()
            .ok_or_else(|| GeomError::Unsupported("connection requires second-order jets".into()))
    }

    pub fn tensor(&self, c: f64) -> GeometricTensor {
        let n = self.n;
        GeometricTensor::new(crate::linalg::CMat::from_fn(n, n, |i, j| {
            self.da_db[i][j] - self.da_b[i] * self.a_db[j] * c
        }))
    }

    /// Bare `<d_ij a|d_k b>`.
    pub fn bare1(&self) -> Result<ConnectionField> {
        let s = self.second()?;
        Ok(ConnectionField::from_fn(self.n, |i, j, k| s.dda_db[i][j][k]))
    }

    /// Bare `<d_k a|d_ij b>`.
    pub fn bare2(&self) -> Result<ConnectionField> {
        let s = self.second()?;
        Ok(ConnectionField::from_fn(self.n, |i, j, k| s.da_ddb[i][j][k]))
    }

    pub fn gamma1(&self, c: f64) -> Result<ConnectionField> {
        let s = self.second()?;
        let (db, da) = (&self.a_db, &self.da_b);
        Ok(ConnectionField::from_fn(self.n, |i, j, k| {
            s.dda_db[i][j][k]
                - (s.dda_b[i][j] * db[k] + da[i] * self.da_db[j][k] + da[j] * self.da_db[i][k]) * c
                + da[i] * da[j] * db[k] * (2.0 * c * c)
        }))
    }

    pub fn gamma2(&self, c: f64) -> Result<ConnectionField> {
        let s = self.second()?;
        let (db, da) = (&self.a_db, &self.da_b);
        Ok(ConnectionField::from_fn(self.n, |i, j, k| {
            s.da_ddb[i][j][k]
                - (da[k] * s.a_ddb[i][j] + db[i] * self.da_db[k][j] + db[j] * self.da_db[k][i]) * c
                + da[k] * db[i] * db[j] * (2.0 * c * c)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::state_model::{NormKind, PureState};

    fn jet(v: [C64; 2], d: [[C64; 2]; 1], dd: [C64; 2]) -> Jet {
        Jet {
            state: PureState::basis(CVec::from_vec(v.to_vec()), NormKind::Unnormalized).unwrap(),
            d1: vec![CVec::from_vec(d[0].to_vec())],
            d2: vec![vec![CVec::from_vec(dd.to_vec())]],
        }
    }

    #[test]
    fn slot_swap_duality_is_exact() {
        let a = jet([c(0.3, 0.1), c(-0.2, 0.9)], [[c(1.0, 0.5), c(0.1, -0.3)]], [c(0.7, 0.0), c(-0.4, 0.2)]);
        let b = jet([c(0.8, -0.2), c(0.5, 0.5)], [[c(-0.6, 0.1), c(0.2, 0.2)]], [c(0.3, 0.3), c(0.9, -0.1)]);
        let ab = PairProducts::new(&a, &b).unwrap();
        let ba = PairProducts::new(&b, &a).unwrap();
        let lhs = ba.gamma1(0.75).unwrap().conj();
        let rhs = ab.gamma2(0.75).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        let t1 = ab.tensor(0.75).matrix;
        let t2 = ba.tensor(0.75).matrix.adjoint();
        assert!((t1 - t2).norm() < 1e-15);
    }
}
