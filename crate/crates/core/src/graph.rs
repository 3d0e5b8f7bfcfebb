//! Chordal graphs and their clique decompositions.
//!
//! A `ChordalGraph` carries a perfect elimination ordering (PEO) found by
//! maximum cardinality search; construction fails on non-chordal input and
//! returns a chordless cycle as the witness. From the PEO we enumerate the
//! maximal cliques and build a clique (junction) tree whose separators feed
//! the local inverse and determinant formulas.
//!
//! Vertices are 0-based everywhere in this API. File formats and error
//! messages are 1-based.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// An undirected graph verified chordal, with a perfect elimination ordering.
#[derive(Debug, Clone)]
pub struct ChordalGraph {
    p: usize,
    adj: Vec<BTreeSet<usize>>,
    /// peo[k] = vertex eliminated k-th.
    peo: Vec<usize>,
    /// peo_pos[v] = elimination position of vertex v.
    peo_pos: Vec<usize>,
}

/// A clique tree: maximal cliques plus spanning-tree edges labeled with
/// separators. Separators appear once per tree edge, so a set occurring on
/// several edges is counted with multiplicity by the local formulas.
#[derive(Debug, Clone)]
pub struct CliqueTree {
    cliques: Vec<Vec<usize>>,
    edges: Vec<TreeEdge>,
    root: usize,
}

/// One clique-tree edge between cliques `a` and `b` with their intersection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub sep: Vec<usize>,
}

impl ChordalGraph {
    /// Validates the edge list and verifies chordality via maximum
    /// cardinality search. On non-chordal input the error carries a
    /// chordless cycle of length >= 4.
    pub fn from_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let adj = build_adjacency(p, edges)?;
        let peo = mcs_order(p, &adj);
        let mut peo_pos = vec![0usize; p];
        for (k, &v) in peo.iter().enumerate() {
            peo_pos[v] = k;
        }
        if verify_peo(&adj, &peo, &peo_pos).is_some() {
            let witness = chordless_cycle(p, &adj)
                .expect("ordering rejected, so a chordless cycle exists");
            return Err(Error::NotChordal { witness });
        }
        Ok(ChordalGraph {
            p,
            adj,
            peo,
            peo_pos,
        })
    }

    /// Triangulates an arbitrary simple graph by greedy minimum-fill
    /// elimination. Returns the chordal result and the added edges (sorted).
    /// Chordal input comes back unchanged with an empty fill list.
    ///
    /// Ties are broken by smallest fill count, then lexicographically
    /// smallest fill-edge set, then lowest vertex index, so the 4-cycle
    /// gains chord (1,3) rather than (2,4).
    pub fn triangulate(p: usize, edges: &[(usize, usize)]) -> Result<(Self, Vec<(usize, usize)>)> {
        let adj = build_adjacency(p, edges)?;
        let mut work = adj.clone();
        let mut alive: BTreeSet<usize> = (0..p).collect();
        let mut fill: Vec<(usize, usize)> = Vec::new();

        while !alive.is_empty() {
            let mut best: Option<(usize, Vec<(usize, usize)>)> = None;
            for &v in &alive {
                let nbrs: Vec<usize> = work[v].iter().copied().collect();
                let mut v_fill = Vec::new();
                for (i, &x) in nbrs.iter().enumerate() {
                    for &y in &nbrs[i + 1..] {
                        if !work[x].contains(&y) {
                            v_fill.push((x, y));
                        }
                    }
                }
                let better = match &best {
                    None => true,
                    Some((_, b_fill)) => {
                        (v_fill.len(), &v_fill) < (b_fill.len(), b_fill)
                    }
                };
                if better {
                    let done = v_fill.is_empty();
                    best = Some((v, v_fill));
                    if done {
                        break; // no vertex beats zero fill with the lex-least (empty) set
                    }
                }
            }
            let (v, v_fill) = best.expect("alive set is nonempty");
            for &(x, y) in &v_fill {
                work[x].insert(y);
                work[y].insert(x);
                fill.push((x, y));
            }
            for &u in &work[v].clone() {
                work[u].remove(&v);
            }
            work[v].clear();
            alive.remove(&v);
        }

        fill.sort_unstable();
        let mut all_edges: Vec<(usize, usize)> = edges_of(&adj);
        all_edges.extend_from_slice(&fill);
        let g = Self::from_edges(p, &all_edges)
            .expect("elimination fill always yields a chordal graph");
        Ok((g, fill))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|n| n.len()).sum::<usize>() / 2
    }

    /// All edges as (i, j) with i < j, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        edges_of(&self.adj)
    }

    pub fn contains_edge(&self, i: usize, j: usize) -> bool {
        self.adj.get(i).is_some_and(|n| n.contains(&j))
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Elimination order: `peo()[0]` is eliminated first.
    pub fn peo(&self) -> &[usize] {
        &self.peo
    }

    pub fn peo_position(&self, v: usize) -> usize {
        self.peo_pos[v]
    }

    /// Neighbors of `v` eliminated after `v`, ascending by vertex index.
    /// By the PEO property they are pairwise adjacent.
    pub fn later_neighbors(&self, v: usize) -> Vec<usize> {
        self.adj[v]
            .iter()
            .copied()
            .filter(|&u| self.peo_pos[u] > self.peo_pos[v])
            .collect()
    }

    /// Every maximal clique, each sorted ascending, cliques in
    /// lexicographic order. For a chordal graph there are at most `p`.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let mut cliques = Vec::new();
        for v in 0..self.p {
            let madj = self.later_neighbors(v);
            // {v} + madj(v) is dominated exactly when some earlier neighbor
            // u has all of madj(v) adjacent to it: then the candidate of u
            // strictly contains this one.
            let dominated = self
                .adj[v]
                .iter()
                .filter(|&&u| self.peo_pos[u] < self.peo_pos[v])
                .any(|&u| madj.iter().all(|&x| self.adj[u].contains(&x)));
            if !dominated {
                let mut c = madj;
                c.push(v);
                c.sort_unstable();
                cliques.push(c);
            }
        }
        cliques.sort();
        cliques
    }

    /// Builds a clique tree by Prim's algorithm on the clique intersection
    /// graph, maximizing separator sizes. Starts from the first clique;
    /// ties go to the lowest clique index. Any maximum-weight spanning tree
    /// has the running intersection property, which `CliqueTree::verify`
    /// checks directly.
    pub fn clique_tree(&self) -> CliqueTree {
        let cliques = self.maximal_cliques();
        let k = cliques.len();
        let mut edges = Vec::with_capacity(k.saturating_sub(1));
        if k > 0 {
            let mut in_tree = vec![false; k];
            let mut key = vec![-1isize; k];
            let mut parent = vec![0usize; k];
            in_tree[0] = true;
            for j in 1..k {
                key[j] = intersect_sorted(&cliques[0], &cliques[j]).len() as isize;
            }
            for _ in 1..k {
                let next = (0..k)
                    .filter(|&j| !in_tree[j])
                    .max_by_key(|&j| (key[j], std::cmp::Reverse(j)))
                    .expect("some clique is still outside the tree");
                let sep = intersect_sorted(&cliques[parent[next]], &cliques[next]);
                edges.push(TreeEdge {
                    a: parent[next],
                    b: next,
                    sep,
                });
                in_tree[next] = true;
                for j in 0..k {
                    if !in_tree[j] {
                        let w = intersect_sorted(&cliques[next], &cliques[j]).len() as isize;
                        if w > key[j] {
                            key[j] = w;
                            parent[j] = next;
                        }
                    }
                }
            }
        }
        let tree = CliqueTree {
            cliques,
            edges,
            root: 0,
        };
        debug_assert!(tree.verify(self).is_ok());
        tree
    }

    // ---- file format: JSON {p, edges} with 1-based vertices ----

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        write_graph_json(self.p, &self.edges(), writer)
    }

    pub fn write_json_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_json(std::fs::File::create(path)?)
    }
}

/// Reads `{p, edges}` JSON (1-based vertices) without requiring chordality,
/// returning 0-based edges. Callers decide whether to verify or triangulate.
pub fn read_graph_json<R: Read>(mut reader: R) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut buf = String::new();
    reader.read_to_string(&mut buf)?;
    let parsed: GraphJson = serde_json::from_str(&buf)?;
    let mut edges = Vec::with_capacity(parsed.edges.len());
    for &(a, b) in &parsed.edges {
        if a == 0 || b == 0 || a > parsed.p || b > parsed.p {
            return Err(Error::InvalidInput(format!(
                "edge ({a}, {b}) out of range for p = {}",
                parsed.p
            )));
        }
        edges.push((a - 1, b - 1));
    }
    Ok((parsed.p, edges))
}

pub fn read_graph_json_path<P: AsRef<Path>>(path: P) -> Result<(usize, Vec<(usize, usize)>)> {
    read_graph_json(std::fs::File::open(path)?)
}

/// Writes `{p, edges}` JSON, converting 0-based edges to 1-based.
pub fn write_graph_json<W: Write>(
    p: usize,
    edges: &[(usize, usize)],
    mut writer: W,
) -> Result<()> {
    let mut one_based: Vec<(usize, usize)> = edges
        .iter()
        .map(|&(i, j)| (i.min(j) + 1, i.max(j) + 1))
        .collect();
    one_based.sort_unstable();
    one_based.dedup();
    let json = serde_json::to_string_pretty(&GraphJson {
        p,
        edges: one_based,
    })?;
    writer.write_all(json.as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    p: usize,
    edges: Vec<(usize, usize)>,
}

impl CliqueTree {
    /// Assembles a tree from explicit parts without validation; callers that
    /// build nonstandard trees (e.g. alternative maximum-weight spanning
    /// trees) should follow up with `verify`.
    pub fn from_parts(cliques: Vec<Vec<usize>>, edges: Vec<TreeEdge>, root: usize) -> Self {
        CliqueTree {
            cliques,
            edges,
            root,
        }
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Separators with multiplicity, one per tree edge (empty ones included).
    pub fn separators(&self) -> impl Iterator<Item = &[usize]> {
        self.edges.iter().map(|e| e.sep.as_slice())
    }

    /// Checks every clique-tree invariant against the graph: spanning tree
    /// shape, separators equal to endpoint intersections, pairwise
    /// non-containment, each clique complete in `g`, and the running
    /// intersection property (cliques containing any vertex form a subtree).
    pub fn verify(&self, g: &ChordalGraph) -> Result<()> {
        let k = self.cliques.len();
        let fail = |msg: String| Err(Error::InvalidInput(msg));
        if k == 0 {
            return if g.p() == 0 {
                Ok(())
            } else {
                fail("no cliques for a nonempty graph".into())
            };
        }
        if self.edges.len() != k - 1 {
            return fail(format!("{} tree edges for {} cliques", self.edges.len(), k));
        }
        // Connectivity over the tree edges.
        let mut seen = vec![false; k];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        let mut adj = vec![Vec::new(); k];
        for e in &self.edges {
            if e.a >= k || e.b >= k {
                return fail(format!("tree edge ({}, {}) out of range", e.a, e.b));
            }
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
        while let Some(c) = stack.pop() {
            for &d in &adj[c] {
                if !seen[d] {
                    seen[d] = true;
                    stack.push(d);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return fail("tree edges do not connect all cliques".into());
        }
        for e in &self.edges {
            if e.sep != intersect_sorted(&self.cliques[e.a], &self.cliques[e.b]) {
                return fail(format!(
                    "separator of edge ({}, {}) is not the clique intersection",
                    e.a, e.b
                ));
            }
        }
        for (i, c) in self.cliques.iter().enumerate() {
            for (x_i, &x) in c.iter().enumerate() {
                for &y in &c[x_i + 1..] {
                    if !g.contains_edge(x, y) {
                        return fail(format!("clique {i} is not complete in the graph"));
                    }
                }
            }
            for (j, d) in self.cliques.iter().enumerate() {
                if i != j && intersect_sorted(c, d).len() == c.len() {
                    return fail(format!("clique {i} is contained in clique {j}"));
                }
            }
        }
        // Running intersection: for each vertex, the cliques holding it
        // induce a connected subgraph of the tree.
        for v in 0..g.p() {
            let holders: Vec<usize> = (0..k)
                .filter(|&i| self.cliques[i].binary_search(&v).is_ok())
                .collect();
            if holders.is_empty() {
                return fail(format!("vertex {} is in no clique", v + 1));
            }
            let mut reach = vec![false; k];
            reach[holders[0]] = true;
            let mut stack = vec![holders[0]];
            while let Some(c) = stack.pop() {
                for &d in &adj[c] {
                    if !reach[d] && self.cliques[d].binary_search(&v).is_ok() {
                        reach[d] = true;
                        stack.push(d);
                    }
                }
            }
            if holders.iter().any(|&h| !reach[h]) {
                return fail(format!(
                    "cliques containing vertex {} are not connected in the tree",
                    v + 1
                ));
            }
        }
        Ok(())
    }

    // ---- file format: JSON {cliques, edges: [{a, b, sep}]}, 1-based ----

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        let json = serde_json::to_string_pretty(&CliqueTreeJson {
            cliques: self
                .cliques
                .iter()
                .map(|c| c.iter().map(|v| v + 1).collect())
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| TreeEdgeJson {
                    a: e.a + 1,
                    b: e.b + 1,
                    sep: e.sep.iter().map(|v| v + 1).collect(),
                })
                .collect(),
        })?;
        writer.write_all(json.as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn write_json_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_json(std::fs::File::create(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CliqueTreeJson {
    cliques: Vec<Vec<usize>>,
    edges: Vec<TreeEdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct TreeEdgeJson {
    a: usize,
    b: usize,
    sep: Vec<usize>,
}

/// True iff every entry of `m` off the diagonal and off the edge set is at
/// most `tol` in magnitude.
pub fn pattern_subordinate(m: &SymMatrix, g: &ChordalGraph, tol: f64) -> Result<bool> {
    if m.dim() != g.p() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but the graph has {} vertices",
            m.dim(),
            m.dim(),
            g.p()
        )));
    }
    for i in 0..m.dim() {
        for j in (i + 1)..m.dim() {
            if !g.contains_edge(i, j) && m.get(i, j).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---- internals ----

fn build_adjacency(p: usize, edges: &[(usize, usize)]) -> Result<Vec<BTreeSet<usize>>> {
    let mut adj = vec![BTreeSet::new(); p];
    for &(i, j) in edges {
        if i >= p || j >= p {
            return Err(Error::InvalidInput(format!(
                "edge ({}, {}) out of range for p = {p}",
                i + 1,
                j + 1
            )));
        }
        if i == j {
            return Err(Error::InvalidInput(format!("self-loop at vertex {}", i + 1)));
        }
        adj[i].insert(j);
        adj[j].insert(i);
    }
    Ok(adj)
}

fn edges_of(adj: &[BTreeSet<usize>]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, nbrs) in adj.iter().enumerate() {
        for &j in nbrs.range((i + 1)..) {
            out.push((i, j));
        }
    }
    out
}

/// Maximum cardinality search. Visits the vertex with the most visited
/// neighbors (ties to the lowest index); the elimination order is the
/// reverse of the visit order, and it is a PEO iff the graph is chordal.
fn mcs_order(p: usize, adj: &[BTreeSet<usize>]) -> Vec<usize> {
    let mut weight = vec![0usize; p];
    let mut visited = vec![false; p];
    let mut visit = Vec::with_capacity(p);
    for _ in 0..p {
        let v = (0..p)
            .filter(|&v| !visited[v])
            .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
            .expect("unvisited vertex remains");
        visited[v] = true;
        visit.push(v);
        for &u in &adj[v] {
            if !visited[u] {
                weight[u] += 1;
            }
        }
    }
    visit.reverse();
    visit
}

/// Returns a violating triple (v, x, y) if the ordering is not a PEO:
/// x and y are both later neighbors of v but not adjacent to each other.
fn verify_peo(
    adj: &[BTreeSet<usize>],
    peo: &[usize],
    peo_pos: &[usize],
) -> Option<(usize, usize, usize)> {
    for &v in peo {
        let later: Vec<usize> = adj[v]
            .iter()
            .copied()
            .filter(|&u| peo_pos[u] > peo_pos[v])
            .collect();
        for (i, &x) in later.iter().enumerate() {
            for &y in &later[i + 1..] {
                if !adj[x].contains(&y) {
                    return Some((v, x, y));
                }
            }
        }
    }
    None
}

/// Finds a chordless cycle of length >= 4 in a non-chordal graph: for each
/// vertex v and non-adjacent neighbor pair (x, y), the shortest x-y path
/// avoiding v and v's other neighbors closes into a chordless cycle with v.
/// Some triple must succeed, because any chordless cycle supplies one.
fn chordless_cycle(p: usize, adj: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
    for v in 0..p {
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &x) in nbrs.iter().enumerate() {
            for &y in &nbrs[i + 1..] {
                if adj[x].contains(&y) {
                    continue;
                }
                let mut blocked = vec![false; p];
                blocked[v] = true;
                for &u in &nbrs {
                    if u != x && u != y {
                        blocked[u] = true;
                    }
                }
                if let Some(path) = bfs_path(adj, x, y, &blocked) {
                    let mut cycle = vec![v];
                    cycle.extend(path);
                    return Some(cycle);
                }
            }
        }
    }
    None
}

/// Shortest path from `from` to `to` through unblocked vertices, inclusive.
fn bfs_path(
    adj: &[BTreeSet<usize>],
    from: usize,
    to: usize,
    blocked: &[bool],
) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; adj.len()];
    let mut queue = std::collections::VecDeque::new();
    prev[from] = from;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut w = to;
            while w != from {
                w = prev[w];
                path.push(w);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &adj[u] {
            if !blocked[w] && prev[w] == usize::MAX {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn cycle_edges(p: usize) -> Vec<(usize, usize)> {
        (0..p).map(|i| (i, (i + 1) % p)).collect()
    }

    #[test]
    fn six_vertex_two_clique_pattern_is_chordal() {
        let g = fixtures::two_clique_graph();
        assert_eq!(
            g.maximal_cliques(),
            vec![vec![0, 1, 2, 3], vec![2, 3, 4, 5]]
        );
        let tree = g.clique_tree();
        assert_eq!(tree.edges().len(), 1);
        assert_eq!(tree.edges()[0].sep, vec![2, 3]);
        tree.verify(&g).unwrap();
    }

    #[test]
    fn four_cycle_witness_is_the_cycle_itself() {
        let err = ChordalGraph::from_edges(4, &cycle_edges(4)).unwrap_err();
        match err {
            Error::NotChordal { witness } => assert_eq!(witness, vec![0, 1, 2, 3]),
            other => panic!("expected NotChordal, got {other}"),
        }
    }

    #[test]
    fn complete_graph_is_chordal() {
        let mut edges = Vec::new();
        for i in 0..5 {
            for j in (i + 1)..5 {
                edges.push((i, j));
            }
        }
        let g = ChordalGraph::from_edges(5, &edges).unwrap();
        assert_eq!(g.maximal_cliques(), vec![vec![0, 1, 2, 3, 4]]);
    }

    #[test]
    fn edgeless_graph_cliques_are_singletons() {
        let g = ChordalGraph::from_edges(3, &[]).unwrap();
        assert_eq!(g.maximal_cliques(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn path_cliques_are_its_edges() {
        let g = ChordalGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(g.maximal_cliques(), vec![vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn tridiagonal_clique_tree() {
        let g = ChordalGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let tree = g.clique_tree();
        assert_eq!(
            tree.cliques(),
            &[vec![0, 1], vec![1, 2], vec![2, 3]]
        );
        let mut seps: Vec<Vec<usize>> = tree.separators().map(|s| s.to_vec()).collect();
        seps.sort();
        assert_eq!(seps, vec![vec![1], vec![2]]);
        tree.verify(&g).unwrap();
    }

    #[test]
    fn two_disjoint_blocks_get_an_empty_separator() {
        let g = ChordalGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let tree = g.clique_tree();
        assert_eq!(tree.cliques().len(), 2);
        assert_eq!(tree.edges().len(), 1);
        assert!(tree.edges()[0].sep.is_empty());
        tree.verify(&g).unwrap();
    }

    #[test]
    fn four_cycle_fill_is_the_lex_smallest_chord() {
        let (g, fill) = ChordalGraph::triangulate(4, &cycle_edges(4)).unwrap();
        assert_eq!(fill, vec![(0, 2)]);
        assert!(g.contains_edge(0, 2));
        assert_eq!(g.edge_count(), 5);
    }

    #[test]
    fn chordal_input_needs_no_fill() {
        let fx = fixtures::two_clique_graph();
        let (g, fill) = ChordalGraph::triangulate(6, &fx.edges()).unwrap();
        assert!(fill.is_empty());
        assert_eq!(g.edges(), fx.edges());
    }

    #[test]
    fn five_cycle_needs_two_chords() {
        let (_, fill) = ChordalGraph::triangulate(5, &cycle_edges(5)).unwrap();
        assert_eq!(fill.len(), 2);
    }

    #[test]
    fn rejects_self_loops_and_out_of_range_edges() {
        assert!(ChordalGraph::from_edges(3, &[(1, 1)]).is_err());
        assert!(ChordalGraph::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn subordinate_checks_only_non_edges() {
        let fx = fixtures::two_clique_graph();
        let m = fixtures::covariance_six();
        assert!(pattern_subordinate(&m, &fx, 0.0).unwrap());
        assert!(pattern_subordinate(&SymMatrix::identity(6), &fx, 0.0).unwrap());

        let path = ChordalGraph::from_edges(
            6,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)],
        )
        .unwrap();
        // entry (1,3) = 4 sits on a path non-edge
        assert!(!pattern_subordinate(&m, &path, 0.0).unwrap());

        assert!(pattern_subordinate(&SymMatrix::identity(5), &path, 0.0).is_err());
    }

    #[test]
    fn graph_json_round_trip() {
        let g = fixtures::two_clique_graph();
        let mut buf = Vec::new();
        g.write_json(&mut buf).unwrap();
        let (p, edges) = read_graph_json(buf.as_slice()).unwrap();
        assert_eq!(p, 6);
        let back = ChordalGraph::from_edges(p, &edges).unwrap();
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn graph_json_rejects_bad_vertices() {
        let bad = r#"{"p": 3, "edges": [[0, 2]]}"#;
        assert!(read_graph_json(bad.as_bytes()).is_err());
        let bad = r#"{"p": 3, "edges": [[1, 4]]}"#;
        assert!(read_graph_json(bad.as_bytes()).is_err());
    }

    #[test]
    fn clique_tree_json_shape() {
        let g = fixtures::two_clique_graph();
        let mut buf = Vec::new();
        g.clique_tree().write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["cliques"][0], serde_json::json!([1, 2, 3, 4]));
        assert_eq!(v["edges"][0]["sep"], serde_json::json!([3, 4]));
    }

    // ---- brute-force oracle for chordality ----

    /// An induced cycle of length >= 4 exists iff some vertex subset induces
    /// a subgraph where every vertex has degree exactly 2 and which is
    /// connected. Feasible for p <= 12.
    fn has_chordless_cycle_bruteforce(p: usize, edges: &[(usize, usize)]) -> bool {
        let mut adj = vec![vec![false; p]; p];
        for &(i, j) in edges {
            adj[i][j] = true;
            adj[j][i] = true;
        }
        for mask in 0u32..(1 << p) {
            if mask.count_ones() < 4 {
                continue;
            }
            let verts: Vec<usize> = (0..p).filter(|&v| mask & (1 << v) != 0).collect();
            let degs: Vec<usize> = verts
                .iter()
                .map(|&v| verts.iter().filter(|&&u| adj[v][u]).count())
                .collect();
            if degs.iter().any(|&d| d != 2) {
                continue;
            }
            let mut seen = vec![false; verts.len()];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(a) = stack.pop() {
                for b in 0..verts.len() {
                    if !seen[b] && adj[verts[a]][verts[b]] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            if seen.iter().all(|&s| s) {
                return true;
            }
        }
        false
    }

    fn arb_graph(max_p: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
        (1..=max_p).prop_flat_map(|p| {
            let pairs: Vec<(usize, usize)> = (0..p)
                .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
                .collect();
            let n = pairs.len();
            proptest::collection::vec(any::<bool>(), n).prop_map(move |bits| {
                let edges = pairs
                    .iter()
                    .zip(&bits)
                    .filter(|(_, &b)| b)
                    .map(|(&e, _)| e)
                    .collect();
                (p, edges)
            })
        })
    }

    fn is_valid_peo(g: &ChordalGraph) -> bool {
        verify_peo(&g.adj, &g.peo, &g.peo_pos).is_none()
    }

    proptest! {
        #[test]
        fn chordality_matches_bruteforce((p, edges) in arb_graph(9)) {
            let verdict = ChordalGraph::from_edges(p, &edges);
            let has_hole = has_chordless_cycle_bruteforce(p, &edges);
            match verdict {
                Ok(g) => {
                    prop_assert!(!has_hole);
                    prop_assert!(is_valid_peo(&g));
                }
                Err(Error::NotChordal { witness }) => {
                    prop_assert!(has_hole);
                    // the witness really is a chordless cycle
                    let n = witness.len();
                    prop_assert!(n >= 4);
                    let adj = build_adjacency(p, &edges).unwrap();
                    for i in 0..n {
                        for j in (i + 1)..n {
                            let adjacent = adj[witness[i]].contains(&witness[j]);
                            let consecutive = j == i + 1 || (i == 0 && j == n - 1);
                            prop_assert_eq!(adjacent, consecutive);
                        }
                    }
                }
                Err(other) => prop_assert!(false, "unexpected error {}", other),
            }
        }

        #[test]
        fn triangulation_is_chordal_idempotent_and_conservative((p, edges) in arb_graph(9)) {
            let (g, fill) = ChordalGraph::triangulate(p, &edges).unwrap();
            for &(i, j) in &edges {
                prop_assert!(g.contains_edge(i, j));
            }
            prop_assert_eq!(g.edge_count(), {
                let mut uniq: Vec<_> = edges.iter()
                    .map(|&(i, j)| (i.min(j), i.max(j))).collect();
                uniq.sort_unstable();
                uniq.dedup();
                uniq.len() + fill.len()
            });
            let (_, fill2) = ChordalGraph::triangulate(p, &g.edges()).unwrap();
            prop_assert!(fill2.is_empty());
            if fill.is_empty() {
                prop_assert!(ChordalGraph::from_edges(p, &edges).is_ok());
            }
        }

        #[test]
        fn clique_tree_invariants_hold_on_triangulated_graphs((p, edges) in arb_graph(9)) {
            let (g, _) = ChordalGraph::triangulate(p, &edges).unwrap();
            let cliques = g.maximal_cliques();
            prop_assert!(cliques.len() <= p);
            let tree = g.clique_tree();
            prop_assert!(tree.verify(&g).is_ok());
            // vertex-counting identity: clique sizes minus separator sizes
            let c_sum: usize = tree.cliques().iter().map(|c| c.len()).sum();
            let s_sum: usize = tree.separators().map(|s| s.len()).sum();
            prop_assert_eq!(c_sum - s_sum, p);
        }
    }
}
