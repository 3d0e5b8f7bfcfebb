//! Cholesky parameterization of pattern-subordinate SPD matrices.
//!
//! Order the vertices by the graph's perfect elimination ordering and let R
//! be upper triangular with nonzeros only on the diagonal and at permuted
//! edge positions. Then M = RᵀR (mapped back to original labels) is SPD and
//! subordinate to the graph: any off-pattern entry of RᵀR would require two
//! later neighbors of some vertex to be non-adjacent, which the PEO rules
//! out. The zeros are exact, not rounded.
//!
//! Parameters are the log of each diagonal entry (so positivity is
//! unrepresentable to violate) followed by the raw off-diagonal entries,
//! p + |edges| in total.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::ChordalGraph;
use crate::matrix::SymMatrix;

/// A sparse upper-triangular Cholesky factor tied to a chordal pattern.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    p: usize,
    /// peo[k] = original vertex at elimination position k.
    peo: Vec<usize>,
    peo_pos: Vec<usize>,
    /// Allowed strictly-upper slots in elimination coordinates, sorted.
    offdiag: Vec<(usize, usize)>,
    /// log-diagonal entries (p of them), then one value per offdiag slot.
    x: Vec<f64>,
}

impl SparseCholesky {
    /// The identity factor on the graph's pattern: all parameters zero,
    /// so R = I and M = I.
    pub fn from_graph(g: &ChordalGraph) -> Self {
        let p = g.p();
        let peo = g.peo().to_vec();
        let peo_pos: Vec<usize> = (0..p).map(|v| g.peo_position(v)).collect();
        let mut offdiag: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (peo_pos[i], peo_pos[j]);
                (a.min(b), a.max(b))
            })
            .collect();
        offdiag.sort_unstable();
        let n = p + offdiag.len();
        SparseCholesky {
            p,
            peo,
            peo_pos,
            offdiag,
            x: vec![0.0; n],
        }
    }

    /// Reads the parameters off an SPD matrix that is exactly subordinate to
    /// the graph: factor it in elimination order and record the pattern
    /// entries. Fails if the matrix is not positive definite or if the
    /// factor has off-pattern entries (i.e. the input was not subordinate).
    pub fn from_spd_matrix(g: &ChordalGraph, m: &SymMatrix) -> Result<Self> {
        if m.dim() != g.p() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{} but the graph has {} vertices",
                m.dim(),
                m.dim(),
                g.p()
            )));
        }
        let mut sc = Self::from_graph(g);
        let p = sc.p;
        let a = DMatrix::from_fn(p, p, |k, l| m.get(sc.peo[k], sc.peo[l]));
        let chol = a.cholesky().ok_or_else(|| Error::NotPsd(
            "matrix to factor is not positive definite".into(),
        ))?;
        let r = chol.l().transpose();
        let scale = m.max_abs().max(1.0);
        let mut allowed = vec![false; p * p];
        for &(k, l) in &sc.offdiag {
            allowed[k * p + l] = true;
        }
        for k in 0..p {
            for l in (k + 1)..p {
                if !allowed[k * p + l] && r[(k, l)].abs() > 1e-14 * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not subordinate to the pattern: factor entry at \
                         ({}, {}) is {}",
                        sc.peo[k].min(sc.peo[l]) + 1,
                        sc.peo[k].max(sc.peo[l]) + 1,
                        r[(k, l)]
                    )));
                }
            }
        }
        for k in 0..p {
            sc.x[k] = r[(k, k)].ln();
        }
        for (t, &(k, l)) in sc.offdiag.iter().enumerate() {
            sc.x[p + t] = r[(k, l)];
        }
        Ok(sc)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_params(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn set_x(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.x.len(), "parameter count is fixed by the pattern");
        self.x.copy_from_slice(x);
    }

    pub fn peo(&self) -> &[usize] {
        &self.peo
    }

    /// Strictly-upper factor slots in elimination coordinates, aligned with
    /// the parameter tail: slot t maps to parameter p + t.
    pub fn offdiag_slots(&self) -> &[(usize, usize)] {
        &self.offdiag
    }

    /// Builds (R, M) from the stored parameters.
    pub fn realize(&self) -> (DMatrix<f64>, SymMatrix) {
        self.realize_at(&self.x)
    }

    /// Builds (R, M) from an explicit parameter vector: R upper triangular
    /// in elimination coordinates, M = RᵀR mapped back to original labels.
    pub fn realize_at(&self, x: &[f64]) -> (DMatrix<f64>, SymMatrix) {
        assert_eq!(x.len(), self.x.len(), "parameter count is fixed by the pattern");
        let p = self.p;
        let mut r = DMatrix::zeros(p, p);
        for k in 0..p {
            r[(k, k)] = x[k].exp();
        }
        for (t, &(k, l)) in self.offdiag.iter().enumerate() {
            r[(k, l)] = x[p + t];
        }
        let a = r.tr_mul(&r);
        let m = DMatrix::from_fn(p, p, |i, j| a[(self.peo_pos[i], self.peo_pos[j])]);
        (r, SymMatrix::from_symmetric_unchecked(m))
    }

    /// Reindexes a matrix on original labels into elimination coordinates.
    pub(crate) fn to_elimination(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.p, self.p, |k, l| m[(self.peo[k], self.peo[l])])
    }
}
