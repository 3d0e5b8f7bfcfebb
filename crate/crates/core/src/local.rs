//! Local formulas on clique trees.
//!
//! For a matrix M whose inverse is subordinate to a chordal graph, the
//! inverse and log-determinant decompose over the clique tree:
//!
//!   L(M) = Σ_cliques (M[c])⁻¹ − Σ_separators (M[j])⁻¹   (scatter-added)
//!   log det M = Σ_cliques log det M[c] − Σ_separators log det M[j]
//!
//! Only clique-sized blocks are ever factored, so cost follows the graph,
//! not the full dimension. `L` is defined for any matrix with invertible
//! blocks; C = M·L(M) − I measures how far M is from having a subordinate
//! inverse and is exactly zero on the doubly sparse set.
//!
//! `markov_complete` goes the other way: given only the clique blocks, it
//! fills the remaining entries so the inverse of the result is subordinate
//! to the graph (the completion that maximizes the log-determinant).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{pattern_subordinate, ChordalGraph, CliqueTree};
use crate::matrix::SymMatrix;

/// A factorization pivot below this fraction of the block's largest entry
/// marks the block singular.
const PIVOT_REL_TOL: f64 = 1e-12;

/// Applies the local function L: sum of scattered clique-block inverses
/// minus scattered separator-block inverses. The output is subordinate to
/// the underlying graph by construction. Equals M⁻¹ exactly when M⁻¹ is
/// subordinate.
pub fn local_inverse(m: &SymMatrix, t: &CliqueTree) -> Result<SymMatrix> {
    let p = m.dim();
    check_tree_covers(t, p)?;
    let mut acc = DMatrix::zeros(p, p);
    for c in t.cliques() {
        let inv = invert_block(m, c)?;
        scatter_add(&mut acc, c, &inv, 1.0);
    }
    for s in t.separators() {
        if s.is_empty() {
            continue;
        }
        let inv = invert_block(m, s)?;
        scatter_add(&mut acc, s, &inv, -1.0);
    }
    Ok(SymMatrix::from_symmetric_unchecked(acc))
}

/// Local log-determinant: Σ logdet over cliques minus Σ logdet over
/// separators, each via Cholesky. Equals log det M when M is positive
/// definite with subordinate inverse.
pub fn local_logdet(m: &SymMatrix, t: &CliqueTree) -> Result<f64> {
    check_tree_covers(t, m.dim())?;
    let mut total = 0.0;
    for c in t.cliques() {
        total += block_logdet(m, c)?;
    }
    for s in t.separators() {
        if !s.is_empty() {
            total -= block_logdet(m, s)?;
        }
    }
    Ok(total)
}

/// The constraint residual C = M·L(M) − I and its Frobenius norm. C is not
/// symmetric away from the feasible set, so it is returned as a plain
/// matrix; it vanishes exactly when M⁻¹ is subordinate to the graph.
pub fn constraint_residual(m: &SymMatrix, t: &CliqueTree) -> Result<(DMatrix<f64>, f64)> {
    let l = local_inverse(m, t)?;
    let mut c = m.as_dmatrix() * l.as_dmatrix();
    for i in 0..m.dim() {
        c[(i, i)] -= 1.0;
    }
    let norm = c.norm();
    Ok((c, norm))
}

/// True iff both M and M⁻¹ follow the pattern: M is subordinate to `g`
/// within tol·max|M| entrywise, and ‖M·L(M) − I‖_F ≤ tol.
pub fn is_doubly_sparse(
    m: &SymMatrix,
    g: &ChordalGraph,
    t: &CliqueTree,
    tol: f64,
) -> Result<bool> {
    let scale = m.max_abs();
    if !pattern_subordinate(m, g, tol * scale)? {
        return Ok(false);
    }
    let (_, norm) = constraint_residual(m, t)?;
    Ok(norm <= tol)
}

/// A matrix specified only on the cliques of a tree: block `i` gives the
/// entries of clique `i`. Blocks must be symmetric and agree wherever
/// cliques overlap.
#[derive(Debug, Clone)]
pub struct PartialMatrix {
    p: usize,
    tree: CliqueTree,
    blocks: Vec<DMatrix<f64>>,
}

impl PartialMatrix {
    pub fn new(p: usize, tree: CliqueTree, blocks: Vec<DMatrix<f64>>) -> Result<Self> {
        if blocks.len() != tree.cliques().len() {
            return Err(Error::DimensionMismatch(format!(
                "{} blocks for {} cliques",
                blocks.len(),
                tree.cliques().len()
            )));
        }
        check_tree_covers(&tree, p)?;
        let mut sym_blocks = Vec::with_capacity(blocks.len());
        for (i, (c, b)) in tree.cliques().iter().zip(blocks).enumerate() {
            if b.nrows() != c.len() || b.ncols() != c.len() {
                return Err(Error::DimensionMismatch(format!(
                    "block {} is {}x{} but its clique has {} vertices",
                    i,
                    b.nrows(),
                    b.ncols(),
                    c.len()
                )));
            }
            sym_blocks.push(SymMatrix::from_dense(b)?.into_dmatrix());
        }
        let pm = PartialMatrix {
            p,
            tree,
            blocks: sym_blocks,
        };
        pm.check_overlaps()?;
        Ok(pm)
    }

    /// Extracts the clique blocks of a full matrix; overlaps agree trivially.
    pub fn from_matrix(m: &SymMatrix, tree: &CliqueTree) -> Result<Self> {
        check_tree_covers(tree, m.dim())?;
        let blocks = tree
            .cliques()
            .iter()
            .map(|c| m.principal_submatrix(c))
            .collect();
        Ok(PartialMatrix {
            p: m.dim(),
            tree: tree.clone(),
            blocks,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn tree(&self) -> &CliqueTree {
        &self.tree
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    /// Adjacent cliques must agree on their separator entries. Agreement
    /// across tree edges implies agreement for every overlapping pair, by
    /// the running intersection property.
    fn check_overlaps(&self) -> Result<()> {
        let cliques = self.tree.cliques();
        for e in self.tree.edges() {
            let (ca, cb) = (&cliques[e.a], &cliques[e.b]);
            let (ba, bb) = (&self.blocks[e.a], &self.blocks[e.b]);
            let scale = ba.amax().max(bb.amax()).max(1.0);
            for &u in &e.sep {
                for &v in &e.sep {
                    let left = ba[(index_in(ca, u), index_in(ca, v))];
                    let right = bb[(index_in(cb, u), index_in(cb, v))];
                    if (left - right).abs() > 1e-12 * scale {
                        return Err(Error::InconsistentOverlap {
                            row: u,
                            col: v,
                            left,
                            right,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Completes a partially specified matrix so that its inverse is
/// subordinate to the graph. Works outward from the root clique: each new
/// clique contributes its block, then every entry between previously placed
/// vertices A and the clique's new vertices ν is set to
/// M[A,s]·M[s,s]⁻¹·M[s,ν] across the edge's separator s. An empty separator
/// completes the cross block to zero.
pub fn markov_complete(pm: &PartialMatrix) -> Result<SymMatrix> {
    let p = pm.p();
    let tree = pm.tree();
    let cliques = tree.cliques();
    let k = cliques.len();
    let mut m = DMatrix::zeros(p, p);
    let mut placed = vec![false; p];

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (ei, e) in tree.edges().iter().enumerate() {
        adj[e.a].push(ei);
        adj[e.b].push(ei);
    }

    write_block(&mut m, &cliques[tree.root()], &pm.blocks()[tree.root()]);
    for &v in &cliques[tree.root()] {
        placed[v] = true;
    }

    let mut visited = vec![false; k];
    visited[tree.root()] = true;
    let mut queue = std::collections::VecDeque::from([tree.root()]);
    while let Some(cur) = queue.pop_front() {
        for &ei in &adj[cur] {
            let e = &tree.edges()[ei];
            let next = if e.a == cur { e.b } else { e.a };
            if visited[next] {
                continue;
            }
            visited[next] = true;

            let cb = &cliques[next];
            let s = &e.sep;
            let nu: Vec<usize> = cb
                .iter()
                .copied()
                .filter(|v| s.binary_search(v).is_err())
                .collect();
            let a: Vec<usize> = (0..p)
                .filter(|&v| placed[v] && s.binary_search(&v).is_err())
                .collect();

            write_block(&mut m, cb, &pm.blocks()[next]);
            if !a.is_empty() && !nu.is_empty() && !s.is_empty() {
                let s_inv = invert_dense(extract(&m, s, s)).ok_or_else(|| {
                    Error::SingularBlock {
                        vertices: s.clone(),
                    }
                })?;
                let cross = extract(&m, &a, s) * s_inv * extract(&m, s, &nu);
                for (ai, &av) in a.iter().enumerate() {
                    for (ni, &nv) in nu.iter().enumerate() {
                        m[(av, nv)] = cross[(ai, ni)];
                        m[(nv, av)] = cross[(ai, ni)];
                    }
                }
            }
            for &v in &nu {
                placed[v] = true;
            }
            queue.push_back(next);
        }
    }
    Ok(SymMatrix::from_symmetric_unchecked(m))
}

// ---- block helpers ----

/// Inverts the principal submatrix on `idx`, naming the block on failure.
pub(crate) fn invert_block(m: &SymMatrix, idx: &[usize]) -> Result<DMatrix<f64>> {
    invert_dense(m.principal_submatrix(idx)).ok_or_else(|| Error::SingularBlock {
        vertices: idx.to_vec(),
    })
}

/// Inverse of a symmetric block: Cholesky first, pivoted LU as the fallback
/// for indefinite blocks. A pivot below PIVOT_REL_TOL of the block's scale
/// means singular. The result is symmetrized so downstream sums stay
/// exactly symmetric.
fn invert_dense(sub: DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = sub.nrows();
    let scale = sub.amax();
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let inv = match sub.clone().cholesky() {
        Some(chol) => {
            let l_diag_min = (0..n).map(|i| chol.l_dirty()[(i, i)]).fold(f64::MAX, f64::min);
            if l_diag_min * l_diag_min < PIVOT_REL_TOL * scale {
                return None;
            }
            chol.inverse()
        }
        None => {
            let lu = sub.lu();
            let u = lu.u();
            if (0..n).any(|i| u[(i, i)].abs() < PIVOT_REL_TOL * scale) {
                return None;
            }
            lu.try_inverse()?
        }
    };
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = inv[(i, i)];
        for j in (i + 1)..n {
            let avg = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    Some(out)
}

fn block_logdet(m: &SymMatrix, idx: &[usize]) -> Result<f64> {
    let sub = m.principal_submatrix(idx);
    let scale = sub.amax();
    let not_pd = || Error::NotPositiveDefinite {
        vertices: idx.to_vec(),
    };
    if scale == 0.0 || !scale.is_finite() {
        return Err(not_pd());
    }
    let chol = sub.cholesky().ok_or_else(not_pd)?;
    let mut logdet = 0.0;
    for i in 0..idx.len() {
        let l_ii = chol.l_dirty()[(i, i)];
        if l_ii * l_ii < PIVOT_REL_TOL * scale {
            return Err(not_pd());
        }
        logdet += 2.0 * l_ii.ln();
    }
    Ok(logdet)
}

pub(crate) fn scatter_add(acc: &mut DMatrix<f64>, idx: &[usize], block: &DMatrix<f64>, sign: f64) {
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            acc[(i, j)] += sign * block[(a, b)];
        }
    }
}

fn write_block(m: &mut DMatrix<f64>, idx: &[usize], block: &DMatrix<f64>) {
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            m[(i, j)] = block[(a, b)];
        }
    }
}

pub(crate) fn extract(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |a, b| m[(rows[a], cols[b])])
}

fn index_in(clique: &[usize], v: usize) -> usize {
    clique
        .binary_search(&v)
        .expect("separator vertex belongs to its cliques")
}

/// Every clique vertex must fit in the matrix and every row must belong to
/// some clique, or the formulas would silently skip entries.
fn check_tree_covers(t: &CliqueTree, p: usize) -> Result<()> {
    let mut covered = vec![false; p];
    for c in t.cliques() {
        for &v in c {
            if v >= p {
                return Err(Error::DimensionMismatch(format!(
                    "clique vertex {} exceeds matrix dimension {p}",
                    v + 1
                )));
            }
            covered[v] = true;
        }
    }
    if let Some(v) = covered.iter().position(|&c| !c) {
        return Err(Error::DimensionMismatch(format!(
            "vertex {} is in no clique of the tree",
            v + 1
        )));
    }
    Ok(())
}
