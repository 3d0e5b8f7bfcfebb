//! Stock chordal patterns and random instance generators for tests and
//! benchmarks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::cholesky::SparseCholesky;
use crate::error::Result;
use crate::graph::{ChordalGraph, CliqueTree};
use crate::matrix::SymMatrix;

/// Banded pattern: edge (i, j) iff |i − j| ≤ b. Interval graphs are chordal.
pub fn banded(p: usize, b: usize) -> Result<ChordalGraph> {
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p.min(i + b + 1) {
            edges.push((i, j));
        }
    }
    ChordalGraph::from_edges(p, &edges)
}

/// A chain of `k` cliques of `size` vertices, consecutive cliques sharing
/// `overlap` vertices. The simplest tree-of-cliques family.
pub fn path_of_cliques(k: usize, size: usize, overlap: usize) -> Result<ChordalGraph> {
    assert!(k >= 1 && size >= 1 && overlap < size);
    let stride = size - overlap;
    let p = size + (k - 1) * stride;
    let mut edges = Vec::new();
    for c in 0..k {
        let start = c * stride;
        for i in start..(start + size) {
            for j in (i + 1)..(start + size) {
                edges.push((i, j));
            }
        }
    }
    ChordalGraph::from_edges(p, &edges)
}

/// A random chordal graph: sample edges independently, then triangulate.
pub fn random_chordal(p: usize, edge_prob: f64, rng: &mut impl Rng) -> ChordalGraph {
    let mut edges = Vec::new();
    for i in 0..p {
        for j in (i + 1)..p {
            if rng.random_bool(edge_prob) {
                edges.push((i, j));
            }
        }
    }
    ChordalGraph::triangulate(p, &edges)
        .expect("valid simple graph")
        .0
}

/// A random SPD matrix subordinate to the pattern, built as RᵀR from random
/// factor parameters. Its dense inverse generally fills every entry, which
/// makes the pair a good oracle instance for the local formulas.
pub fn random_subordinate_precision(g: &ChordalGraph, rng: &mut impl Rng) -> SymMatrix {
    let mut sc = SparseCholesky::from_graph(g);
    let x: Vec<f64> = (0..sc.n_params())
        .map(|i| {
            if i < g.p() {
                rng.random_range(-0.3..0.3)
            } else {
                rng.random_range(-0.5..0.5)
            }
        })
        .collect();
    sc.set_x(&x);
    sc.realize().1
}

/// A random doubly sparse SPD matrix on a two-clique graph: cliques
/// A = {0..a+s}, B = {a..a+s+b} overlapping in the separator of size s.
///
/// The off-diagonal block between the clique privates must vanish, and the
/// Markov completion fills it with M[A',s]·M[s,s]⁻¹·M[s,B']; so we choose
/// M[A',s] = UVᵀ of rank below s and M[s,B'] = M[s,s]·Z with VᵀZ = 0, which
/// forces the completed block to zero while keeping both cliques dense.
/// Diagonal blocks get SPD Schur complements, so the whole matrix is SPD
/// and its inverse is subordinate by the completion property.
pub fn random_doubly_sparse_two_clique(
    a: usize,
    s: usize,
    b: usize,
    rng: &mut impl Rng,
) -> (ChordalGraph, SymMatrix) {
    assert!(a >= 1 && s >= 1 && b >= 1);
    let p = a + s + b;
    let mut edges = Vec::new();
    for i in 0..(a + s) {
        for j in (i + 1)..(a + s) {
            edges.push((i, j));
        }
    }
    for i in a..p {
        for j in (i + 1)..p {
            edges.push((i, j));
        }
    }
    let g = ChordalGraph::from_edges(p, &edges).expect("two overlapping cliques are chordal");

    let r = rng.random_range(0..s); // rank of the A-to-separator block
    let u = DMatrix::from_fn(a, r, |_, _| rng.random_range(-1.0..1.0));
    let vt = DMatrix::from_fn(r, s, |_, _| rng.random_range(-1.0..1.0));
    let m12 = &u * &vt;

    let w = DMatrix::from_fn(s, s, |_, _| rng.random_range(-1.0..1.0));
    let m22 = &w * w.transpose() + DMatrix::<f64>::identity(s, s) * (s as f64);

    // Z with rows of Vᵀ orthogonal to its columns: project them out.
    let raw = DMatrix::from_fn(s, b, |_, _| rng.random_range(-1.0..1.0));
    let z = if r > 0 {
        let vtv = &vt * vt.transpose();
        let sol = vtv
            .lu()
            .solve(&(&vt * &raw))
            .expect("random Vᵀ has full row rank");
        &raw - vt.transpose() * sol
    } else {
        raw
    };
    let m23 = &m22 * &z;

    // SPD diagonal blocks via prescribed Schur complements.
    let m22_inv = m22
        .clone()
        .cholesky()
        .expect("m22 is SPD by construction")
        .inverse();
    let da = random_spd(a, rng);
    let m11 = &m12 * &m22_inv * m12.transpose() + da;
    let db = random_spd(b, rng);
    let m33 = z.transpose() * &m22 * &z + db;

    let mut m = DMatrix::zeros(p, p);
    m.view_mut((0, 0), (a, a)).copy_from(&m11);
    m.view_mut((0, a), (a, s)).copy_from(&m12);
    m.view_mut((a, 0), (s, a)).copy_from(&m12.transpose());
    m.view_mut((a, a), (s, s)).copy_from(&m22);
    m.view_mut((a, a + s), (s, b)).copy_from(&m23);
    m.view_mut((a + s, a), (b, s)).copy_from(&m23.transpose());
    m.view_mut((a + s, a + s), (b, b)).copy_from(&m33);
    let m = SymMatrix::from_dense(m).expect("assembled matrix is symmetric");
    debug_assert!(m.as_dmatrix().clone().cholesky().is_some());
    (g, m)
}

fn random_spd(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let k = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &k * k.transpose() + DMatrix::<f64>::identity(n, n) * (0.5 + n as f64 * 0.5)
}

/// A random doubly sparse SPD matrix on an arbitrary chordal pattern, grown
/// clique by clique along the tree.
///
/// Adding clique c over separator s introduces ν = c∖s. The Markov
/// completion would fill M[A,ν] = M[A,s]·M[s,s]⁻¹·M[s,ν] for the already
/// placed vertices A outside s; choosing M[s,ν] = M[s,s]·W with the columns
/// of W in the kernel of M[A,s] forces those fills to zero, so the inverse
/// stays subordinate after every step. The ν-diagonal block is the induced
/// quadratic form plus a random SPD slack (positive definiteness via the
/// Schur complement), with the cross block rescaled so entries stay O(1)
/// along arbitrarily long clique chains. The running local inverse, which
/// equals the true inverse of the placed principal submatrix, supplies
/// (M⁻¹)[s,s] without any dense work.
pub fn random_doubly_sparse(
    g: &ChordalGraph,
    t: &CliqueTree,
    rng: &mut impl Rng,
) -> SymMatrix {
    let p = g.p();
    let cliques = t.cliques();
    let mut m = DMatrix::zeros(p, p);
    let mut inv = DMatrix::zeros(p, p);
    let mut placed = vec![false; p];

    // parents before children
    let mut adj = vec![Vec::new(); cliques.len()];
    for e in t.edges() {
        adj[e.a].push(e.b);
        adj[e.b].push(e.a);
    }
    let mut order = vec![t.root()];
    let mut seen = vec![false; cliques.len()];
    seen[t.root()] = true;
    let mut head = 0;
    while head < order.len() {
        let c = order[head];
        head += 1;
        for &nb in &adj[c] {
            if !seen[nb] {
                seen[nb] = true;
                order.push(nb);
            }
        }
    }
    debug_assert_eq!(order.len(), cliques.len());

    for &ci in &order {
        let clique = &cliques[ci];
        // by the running-intersection property the placed part of a clique
        // is exactly its separator toward the processed subtree
        let sep: Vec<usize> = clique.iter().copied().filter(|&v| placed[v]).collect();
        let nu: Vec<usize> = clique.iter().copied().filter(|&v| !placed[v]).collect();
        assert!(!nu.is_empty(), "maximal cliques never re-add all vertices");

        if sep.is_empty() {
            let block = random_spd(nu.len(), rng);
            write_sym_block(&mut m, &nu, &block);
        } else {
            let constrained: Vec<usize> = (0..p)
                .filter(|&a| placed[a] && !sep.contains(&a))
                .filter(|&a| sep.iter().any(|&sv| m[(a, sv)] != 0.0))
                .collect();
            let rows = crate::local::extract(&m, &constrained, &sep);
            let basis = kernel_basis(&rows);
            let xi = DMatrix::from_fn(basis.ncols(), nu.len(), |_, _| {
                rng.random_range(-0.8..0.8)
            });
            let m_ss = crate::local::extract(&m, &sep, &sep);
            let mut y = &m_ss * (&basis * &xi);

            // bound the induced quadratic form so block scales stay flat
            let q = crate::local::extract(&inv, &sep, &sep);
            let quad = y.transpose() * &q * &y;
            let top = quad.diagonal().amax();
            if top > 1.0 {
                y /= top.sqrt();
            }
            let quad = y.transpose() * &q * &y;
            let z = &quad + random_spd(nu.len(), rng);

            for (si, &vs) in sep.iter().enumerate() {
                for (ni, &vn) in nu.iter().enumerate() {
                    m[(vs, vn)] = y[(si, ni)];
                    m[(vn, vs)] = y[(si, ni)];
                }
            }
            write_sym_block(&mut m, &nu, &z);

            let sep_inv = invert_spd(&crate::local::extract(&m, &sep, &sep));
            crate::local::scatter_add(&mut inv, &sep, &sep_inv, -1.0);
        }
        let clique_inv = invert_spd(&crate::local::extract(&m, clique, clique));
        crate::local::scatter_add(&mut inv, clique, &clique_inv, 1.0);
        for &v in &nu {
            placed[v] = true;
        }
    }
    SymMatrix::from_symmetric_unchecked(m)
}

/// Writes a block onto index set `idx` mirrored through its upper triangle,
/// keeping the host exactly symmetric.
fn write_sym_block(m: &mut DMatrix<f64>, idx: &[usize], block: &DMatrix<f64>) {
    for i in 0..idx.len() {
        for j in i..idx.len() {
            let v = 0.5 * (block[(i, j)] + block[(j, i)]);
            m[(idx[i], idx[j])] = v;
            m[(idx[j], idx[i])] = v;
        }
    }
}

fn invert_spd(block: &DMatrix<f64>) -> DMatrix<f64> {
    let raw = block
        .clone()
        .cholesky()
        .expect("blocks are SPD by construction")
        .inverse();
    0.5 * (&raw + raw.transpose())
}

/// Orthonormal basis of the kernel of `rows` (columns of the result), via
/// projection of coordinate vectors against a Gram-Schmidt row-space basis.
/// Good to machine precision for the small separator sizes used here.
fn kernel_basis(rows: &DMatrix<f64>) -> DMatrix<f64> {
    let s = rows.ncols();
    let max_norm = (0..rows.nrows())
        .map(|i| rows.row(i).norm())
        .fold(0.0f64, f64::max);
    let mut row_space: Vec<DVector<f64>> = Vec::new();
    for i in 0..rows.nrows() {
        let mut v = rows.row(i).transpose();
        for _ in 0..2 {
            for b in &row_space {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        if v.norm() > 1e-10 * max_norm.max(1e-300) {
            let n = v.norm();
            row_space.push(v / n);
        }
    }
    let dim = s - row_space.len();
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    for i in 0..s {
        if kernel.len() == dim {
            break;
        }
        let mut v = DVector::zeros(s);
        v[i] = 1.0;
        for _ in 0..2 {
            for b in row_space.iter().chain(&kernel) {
                let c = b.dot(&v);
                v -= b * c;
            }
        }
        if v.norm() > 1e-6 {
            let n = v.norm();
            kernel.push(v / n);
        }
    }
    debug_assert_eq!(kernel.len(), dim);
    let mut out = DMatrix::zeros(s, kernel.len());
    for (j, v) in kernel.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::pattern_subordinate;
    use crate::local::{constraint_residual, is_doubly_sparse};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn banded_pattern_shape() {
        let g = banded(5, 2).unwrap();
        assert!(g.contains_edge(0, 2));
        assert!(!g.contains_edge(0, 3));
        assert_eq!(g.edge_count(), 4 + 3); // |i-j|=1: 4 edges, |i-j|=2: 3 edges
        assert_eq!(banded(4, 0).unwrap().edge_count(), 0);
    }

    #[test]
    fn path_of_cliques_shape() {
        let g = path_of_cliques(3, 3, 1).unwrap();
        assert_eq!(g.p(), 7);
        let cliques = g.maximal_cliques();
        assert_eq!(
            cliques,
            vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 6]]
        );
    }

    #[test]
    fn random_chordal_is_chordal() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let g = random_chordal(10, 0.3, &mut rng);
            let (_, fill) = ChordalGraph::triangulate(g.p(), &g.edges()).unwrap();
            assert!(fill.is_empty());
        }
    }

    #[test]
    fn subordinate_precision_is_spd_and_on_pattern() {
        let mut rng = StdRng::seed_from_u64(5);
        let g = banded(12, 3).unwrap();
        let theta = random_subordinate_precision(&g, &mut rng);
        assert!(pattern_subordinate(&theta, &g, 0.0).unwrap());
        assert!(theta.as_dmatrix().clone().cholesky().is_some());
    }

    #[test]
    fn two_clique_instances_are_doubly_sparse() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..10 {
            let (g, m) = random_doubly_sparse_two_clique(3, 2, 4, &mut rng);
            let t = g.clique_tree();
            assert!(pattern_subordinate(&m, &g, 0.0).unwrap());
            let (_, cnorm) = constraint_residual(&m, &t).unwrap();
            assert!(cnorm <= 1e-8, "constraint norm {cnorm}");
            assert!(is_doubly_sparse(&m, &g, &t, 1e-8).unwrap());
        }
    }

    #[test]
    fn general_instances_are_doubly_sparse_on_varied_patterns() {
        let mut rng = StdRng::seed_from_u64(14);
        let graphs = vec![
            banded(12, 2).unwrap(),
            banded(9, 3).unwrap(),
            path_of_cliques(4, 4, 2).unwrap(),
            path_of_cliques(5, 3, 1).unwrap(),
            random_chordal(10, 0.35, &mut rng),
            ChordalGraph::from_edges(3, &[]).unwrap(),
        ];
        for g in graphs {
            let t = g.clique_tree();
            for _ in 0..5 {
                let m = random_doubly_sparse(&g, &t, &mut rng);
                assert!(pattern_subordinate(&m, &g, 0.0).unwrap());
                assert!(
                    m.as_dmatrix().clone().cholesky().is_some(),
                    "instance must be SPD"
                );
                assert!(is_doubly_sparse(&m, &g, &t, 1e-8).unwrap());
                // dense oracle: the local formula must equal the true inverse
                let dense = m.as_dmatrix().clone().try_inverse().unwrap();
                let local = crate::local::local_inverse(&m, &t).unwrap();
                let scale = dense.amax();
                assert!(
                    (local.as_dmatrix() - &dense).amax() <= 1e-10 * scale,
                    "local inverse drifts from dense on p={}",
                    g.p()
                );
            }
        }
    }

    #[test]
    fn general_generator_couples_across_separators() {
        // on a banded chain the first extension always has kernel room, so
        // nonzero cross-separator entries must appear
        let mut rng = StdRng::seed_from_u64(23);
        let g = banded(4, 2).unwrap();
        let t = g.clique_tree();
        let coupled = (0..10).any(|_| {
            let m = random_doubly_sparse(&g, &t, &mut rng);
            m.get(1, 3).abs() > 1e-6 || m.get(2, 3).abs() > 1e-6
        });
        assert!(coupled, "generator never produced cross-clique coupling");
    }

    #[test]
    fn long_chains_stay_bounded_and_well_conditioned() {
        let mut rng = StdRng::seed_from_u64(31);
        let g = banded(300, 2).unwrap();
        let t = g.clique_tree();
        let m = random_doubly_sparse(&g, &t, &mut rng);
        assert!(m.max_abs() < 1e3, "entries grew to {}", m.max_abs());
        assert!(is_doubly_sparse(&m, &g, &t, 1e-8).unwrap());
    }
}
