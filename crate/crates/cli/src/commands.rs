//! Subcommand implementations. Every handler reads all of its input files
//! before doing any work, writes machine-readable artifacts under the
//! `--out` prefix, and prints a short human summary to stdout. The returned
//! byte is the process exit code.

use dscov::dataio;
use dscov::graph::read_graph_json_path;
use dscov::patterns;
use dscov::{
    estimate as run_estimate, local_inverse as run_local_inverse, local_logdet as run_local_logdet,
    markov_complete, sample_covariance, simulate_gaussian, ChordalGraph, Error,
    EstimatorOptions, GradientMode, PartialMatrix, Result, SymMatrix,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::{
    BenchArgs, BenchFamily, CheckChordalArgs, CliqueTreeArgs, CompleteArgs, EstimateArgs,
    HeatmapArgs, LocalInverseArgs, LocalLogdetArgs, ResidualsArgs, SimulateArgs, TriangulateArgs,
};

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// 1-based display of a 0-based vertex set.
fn fmt_vertices(vs: &[usize]) -> String {
    let parts: Vec<String> = vs.iter().map(|v| (v + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn load_graph(path: &Path) -> Result<ChordalGraph> {
    let (p, edges) = read_graph_json_path(path)?;
    ChordalGraph::from_edges(p, &edges)
}

fn load_matrix_for_graph(matrix: &Path, g: &ChordalGraph) -> Result<SymMatrix> {
    let m = SymMatrix::read_path(matrix)?;
    if m.dim() != g.p() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {0}x{0} but the graph has {1} vertices",
            m.dim(),
            g.p()
        )));
    }
    Ok(m)
}

pub fn check_chordal(a: &CheckChordalArgs) -> Result<u8> {
    let (p, edges) = read_graph_json_path(&a.graph)?;
    println!("graph: {p} vertices, {} edges", edges.len());
    match ChordalGraph::from_edges(p, &edges) {
        Ok(g) => {
            let order: Vec<String> = g.peo().iter().map(|v| (v + 1).to_string()).collect();
            println!("chordal: yes");
            println!("elimination order: {}", order.join(" "));
            let t = g.clique_tree();
            let cliques: Vec<String> = t.cliques().iter().map(|c| fmt_vertices(c)).collect();
            println!("cliques: {}", cliques.join(" "));
            let seps: Vec<String> = t.edges().iter().map(|e| fmt_vertices(&e.sep)).collect();
            if !seps.is_empty() {
                println!("separators: {}", seps.join(" "));
            }
            if let Some(out) = &a.out {
                let path = with_suffix(out, ".cliquetree.json");
                t.write_json_path(&path)?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Err(Error::NotChordal { witness }) => {
            println!("chordal: no");
            println!("chordless cycle: {}", fmt_vertices(&witness));
            Ok(2)
        }
        Err(e) => Err(e),
    }
}

pub fn clique_tree(a: &CliqueTreeArgs) -> Result<u8> {
    let g = load_graph(&a.graph)?;
    let t = g.clique_tree();
    t.verify(&g)?;
    let path = with_suffix(&a.out, ".cliquetree.json");
    t.write_json_path(&path)?;
    let sizes: Vec<String> = t.cliques().iter().map(|c| c.len().to_string()).collect();
    println!(
        "{} cliques (sizes {}) on {} vertices",
        t.cliques().len(),
        sizes.join(","),
        g.p()
    );
    for e in t.edges() {
        println!(
            "  {} -- {}  separator {}",
            fmt_vertices(&t.cliques()[e.a]),
            fmt_vertices(&t.cliques()[e.b]),
            fmt_vertices(&e.sep)
        );
    }
    println!("wrote {}", path.display());
    Ok(0)
}

pub fn triangulate(a: &TriangulateArgs) -> Result<u8> {
    let (p, edges) = read_graph_json_path(&a.graph)?;
    let (g, fills) = ChordalGraph::triangulate(p, &edges)?;
    let path = with_suffix(&a.out, ".graph.json");
    g.write_json_path(&path)?;
    println!(
        "added {} fill edge(s); result has {} edges and {} cliques",
        fills.len(),
        g.edge_count(),
        g.maximal_cliques().len()
    );
    for &(i, j) in &fills {
        println!("  fill ({}, {})", i + 1, j + 1);
    }
    println!("wrote {}", path.display());
    Ok(0)
}

pub fn local_inverse(a: &LocalInverseArgs) -> Result<u8> {
    let g = load_graph(&a.graph)?;
    let m = load_matrix_for_graph(&a.matrix, &g)?;
    let t = g.clique_tree();
    let start = Instant::now();
    let theta = run_local_inverse(&m, &t)?;
    let elapsed = start.elapsed();
    let csv = with_suffix(&a.out, ".theta.csv");
    let json = with_suffix(&a.out, ".theta.json");
    theta.write_csv_path(&csv)?;
    theta.write_json_path(&json)?;
    println!(
        "inverted {0}x{0} through {1} clique block(s) in {2:.3} ms",
        m.dim(),
        t.cliques().len(),
        elapsed.as_secs_f64() * 1e3
    );
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(0)
}

pub fn local_logdet(a: &LocalLogdetArgs) -> Result<u8> {
    let g = load_graph(&a.graph)?;
    let m = load_matrix_for_graph(&a.matrix, &g)?;
    let t = g.clique_tree();
    let value = run_local_logdet(&m, &t)?;
    let path = with_suffix(&a.out, ".logdet.json");
    serde_json::to_writer_pretty(
        File::create(&path)?,
        &serde_json::json!({ "p": m.dim(), "logdet": value }),
    )?;
    println!("log determinant: {value:.15e}");
    println!("wrote {}", path.display());
    Ok(0)
}

pub fn complete(a: &CompleteArgs) -> Result<u8> {
    let g = load_graph(&a.graph)?;
    let m = load_matrix_for_graph(&a.matrix, &g)?;
    let t = g.clique_tree();
    let pm = PartialMatrix::from_matrix(&m, &t)?;
    let completed = markov_complete(&pm)?;

    let p = g.p();
    let mut fills = 0usize;
    let mut max_fill = 0.0f64;
    for i in 0..p {
        for j in (i + 1)..p {
            if !g.contains_edge(i, j) {
                fills += 1;
                max_fill = max_fill.max(completed.get(i, j).abs());
            }
        }
    }
    let csv = with_suffix(&a.out, ".completed.csv");
    let json = with_suffix(&a.out, ".completed.json");
    completed.write_csv_path(&csv)?;
    completed.write_json_path(&json)?;
    println!("filled {fills} off-pattern entr(ies); max magnitude {max_fill:.6e}");
    println!(
        "log determinant of the completion: {:.15e}",
        run_local_logdet(&completed, &t)?
    );
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(0)
}

pub fn estimate(a: &EstimateArgs) -> Result<u8> {
    let sources = [a.cov.is_some(), a.data.is_some(), a.truth.is_some()];
    if sources.iter().filter(|&&b| b).count() != 1 {
        return Err(Error::InvalidInput(
            "choose exactly one input: --cov, --data, or --truth".into(),
        ));
    }
    if a.graph.is_some() == a.sector.is_some() {
        return Err(Error::InvalidInput(
            "choose exactly one pattern: --graph or --sector".into(),
        ));
    }
    if a.sector.is_some() && a.data.is_none() {
        return Err(Error::InvalidInput(
            "--sector requires --data; its column names identify the vertices".into(),
        ));
    }

    // Resolve observations or a covariance, naming the columns if known.
    let mut names: Option<Vec<String>> = None;
    let mut written: Vec<PathBuf> = Vec::new();
    let s = if let Some(path) = &a.cov {
        SymMatrix::read_path(path)?
    } else {
        let x = if let Some(path) = &a.data {
            let (n, x) = dataio::read_observations_csv(File::open(path)?)?;
            names = Some(n);
            x
        } else {
            let truth_path = a.truth.as_ref().expect("one source is set");
            let v = SymMatrix::read_path(truth_path)?;
            let n = a.n.ok_or_else(|| {
                Error::InvalidInput("--n is required when simulating with --truth".into())
            })?;
            let x = simulate_gaussian(&v, n, a.seed)?;
            let cols: Vec<String> = (1..=v.dim()).map(|i| format!("x{i}")).collect();
            let data_path = with_suffix(&a.out, ".data.csv");
            dataio::write_observations_csv(&cols, &x, File::create(&data_path)?)?;
            written.push(data_path);
            x
        };
        println!("sample covariance from {} observation row(s)", x.nrows());
        let (s, _) = sample_covariance(&x)?;
        let s_path = with_suffix(&a.out, ".s.csv");
        s.write_csv_path(&s_path)?;
        written.push(s_path);
        s
    };

    let (g, t) = if let Some(path) = &a.graph {
        let g = load_graph(path)?;
        let t = g.clique_tree();
        (g, t)
    } else {
        let spec = dataio::read_sector_spec_path(a.sector.as_ref().expect("sector is set"))?;
        dataio::sector_graph(&spec, names.as_ref().expect("--sector implies --data"))?
    };
    println!(
        "pattern: {} vertices, {} edges, {} cliques",
        g.p(),
        g.edge_count(),
        t.cliques().len()
    );

    let mut opts = EstimatorOptions::default();
    if let Some(v) = a.tol {
        opts.constraint_tol = v;
    }
    if let Some(v) = a.max_outer {
        opts.max_outer = v;
    }
    if let Some(v) = a.max_inner {
        opts.max_inner = v;
    }
    if let Some(v) = a.penalty_init {
        opts.penalty_init = v;
    }
    if let Some(v) = a.penalty_growth {
        opts.penalty_growth = v;
    }
    if a.fd {
        opts.gradient_mode = GradientMode::FiniteDifference;
    }

    let result = run_estimate(&s, &g, &t, &opts)?;
    for it in &result.trace {
        println!(
            "outer {:>3}  objective {:<20.12}  |C| {:>10.3e}  rho {:>8.1e}  inner {}",
            it.outer, it.objective, it.constraint_norm, it.penalty, it.inner_iterations
        );
    }

    let mhat = with_suffix(&a.out, ".mhat.csv");
    let thetahat = with_suffix(&a.out, ".thetahat.csv");
    let result_json = with_suffix(&a.out, ".result.json");
    result.m_hat.write_csv_path(&mhat)?;
    result.theta_hat.write_csv_path(&thetahat)?;
    result.write_json(File::create(&result_json)?)?;
    written.extend([mhat, thetahat, result_json]);

    println!(
        "objective {:.12}  constraint norm {:.3e}  ({} outer / {} inner iterations)",
        result.objective, result.constraint_norm, result.outer_iterations, result.inner_iterations
    );
    let files: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    println!("wrote {}", files.join(", "));

    if result.converged {
        println!("converged: yes");
        Ok(0)
    } else {
        eprintln!(
            "did not converge within {} outer iterations (|C| = {:.3e}); outputs written",
            result.outer_iterations, result.constraint_norm
        );
        Ok(4)
    }
}

pub fn simulate(a: &SimulateArgs) -> Result<u8> {
    let v = SymMatrix::read_path(&a.truth)?;
    let x = simulate_gaussian(&v, a.n, a.seed)?;
    let cols: Vec<String> = (1..=v.dim()).map(|i| format!("x{i}")).collect();
    let data_path = with_suffix(&a.out, ".data.csv");
    dataio::write_observations_csv(&cols, &x, File::create(&data_path)?)?;
    let summary_path = with_suffix(&a.out, ".summary.json");
    serde_json::to_writer_pretty(
        File::create(&summary_path)?,
        &serde_json::json!({
            "p": v.dim(),
            "n": a.n,
            "seed": a.seed,
            "truth": a.truth.display().to_string(),
            "data": data_path.display().to_string(),
        }),
    )?;
    println!(
        "simulated {} draw(s) of dimension {} with seed {}",
        a.n,
        v.dim(),
        a.seed
    );
    println!("wrote {} and {}", data_path.display(), summary_path.display());
    Ok(0)
}

pub fn residuals(a: &ResidualsArgs) -> Result<u8> {
    let panel = dataio::read_prices_csv_path(&a.prices)?;
    let returns = dataio::log_returns(&panel)?.with_index(&a.index)?;
    let reg = dataio::index_residuals(&returns)?;

    let res_path = with_suffix(&a.out, ".residuals.csv");
    dataio::write_observations_csv(reg.tickers(), reg.residuals(), File::create(&res_path)?)?;
    let reg_path = with_suffix(&a.out, ".regression.json");
    serde_json::to_writer_pretty(
        File::create(&reg_path)?,
        &serde_json::json!({
            "index": a.index,
            "observations": reg.residuals().nrows(),
            "dropped_price_rows": panel.dropped_rows(),
            "tickers": reg.tickers(),
            "betas": reg.betas(),
            "alphas": reg.alphas(),
        }),
    )?;

    println!(
        "{} return observation(s) on {} ticker(s) against {} ({} incomplete price row(s) dropped)",
        reg.residuals().nrows(),
        reg.tickers().len(),
        a.index,
        panel.dropped_rows()
    );
    println!("wrote {} and {}", res_path.display(), reg_path.display());
    Ok(0)
}

pub fn heatmap(a: &HeatmapArgs) -> Result<u8> {
    let m = SymMatrix::read_path(&a.matrix)?;
    let labels: Vec<String> = match &a.labels {
        Some(l) => l.clone(),
        None => (1..=m.dim()).map(|i| i.to_string()).collect(),
    };
    let cov_path = with_suffix(&a.out, ".covariance.csv");
    let corr_path = with_suffix(&a.out, ".correlation.csv");
    dataio::export_heatmap_data(
        &m,
        &labels,
        File::create(&cov_path)?,
        File::create(&corr_path)?,
    )?;
    println!(
        "exported {0}x{0} covariance and correlation triples",
        m.dim()
    );
    println!("wrote {} and {}", cov_path.display(), corr_path.display());
    Ok(0)
}

#[derive(Serialize)]
struct BenchRow {
    family: String,
    p: usize,
    reps: usize,
    local_median_seconds: f64,
    dense_median_seconds: f64,
    max_rel_discrepancy: f64,
    deterministic: bool,
}

pub fn bench(a: &BenchArgs) -> Result<u8> {
    if a.reps == 0 {
        return Err(Error::InvalidInput("--reps must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for &p in &a.sizes {
        let g = bench_graph(a, p)?;
        let t = g.clique_tree();
        // one fixed instance per size so repetitions measure timing only
        let mut rng = ChaCha8Rng::seed_from_u64(
            a.seed ^ (p as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let m = patterns::random_doubly_sparse(&g, &t, &mut rng);

        let mut local_times = Vec::with_capacity(a.reps);
        let mut dense_times = Vec::with_capacity(a.reps);
        let mut max_rel = 0.0f64;
        let mut deterministic = true;
        let mut first: Option<SymMatrix> = None;
        for _ in 0..a.reps {
            let start = Instant::now();
            let theta = run_local_inverse(&m, &t)?;
            local_times.push(start.elapsed().as_secs_f64());

            let start = Instant::now();
            let dense = m.as_dmatrix().clone().try_inverse().ok_or_else(|| {
                Error::SingularBlock {
                    vertices: (0..p).collect(),
                }
            })?;
            dense_times.push(start.elapsed().as_secs_f64());

            let rel = (theta.as_dmatrix() - &dense).amax() / dense.amax();
            max_rel = max_rel.max(rel);
            match &first {
                Some(f) => deterministic &= f == &theta,
                None => first = Some(theta),
            }
        }
        rows.push(BenchRow {
            family: family_name(a.family).to_string(),
            p,
            reps: a.reps,
            local_median_seconds: median(&mut local_times),
            dense_median_seconds: median(&mut dense_times),
            max_rel_discrepancy: max_rel,
            deterministic,
        });
    }

    let csv_path = with_suffix(&a.out, ".bench.csv");
    let json_path = with_suffix(&a.out, ".bench.json");
    let mut csv = String::from(
        "family,p,reps,local_median_seconds,dense_median_seconds,max_rel_discrepancy,deterministic\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{:.9e},{:.9e},{:.9e},{}\n",
            r.family,
            r.p,
            r.reps,
            r.local_median_seconds,
            r.dense_median_seconds,
            r.max_rel_discrepancy,
            r.deterministic
        ));
    }
    std::fs::write(&csv_path, csv)?;
    serde_json::to_writer_pretty(File::create(&json_path)?, &rows)?;

    println!(
        "{:<18} {:>6} {:>16} {:>16} {:>13} {:>13}",
        "family", "p", "local median s", "dense median s", "speedup", "discrepancy"
    );
    for r in &rows {
        println!(
            "{:<18} {:>6} {:>16.6} {:>16.6} {:>13.2} {:>13.3e}",
            r.family,
            r.p,
            r.local_median_seconds,
            r.dense_median_seconds,
            r.dense_median_seconds / r.local_median_seconds,
            r.max_rel_discrepancy
        );
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(0)
}

fn family_name(f: BenchFamily) -> &'static str {
    match f {
        BenchFamily::Banded => "banded",
        BenchFamily::TwoBlockBridge => "two-block-bridge",
        BenchFamily::PathOfCliques => "path-of-cliques",
        BenchFamily::Complete => "complete",
    }
}

fn bench_graph(a: &BenchArgs, p: usize) -> Result<ChordalGraph> {
    match a.family {
        BenchFamily::Banded => patterns::banded(p, a.band),
        BenchFamily::TwoBlockBridge => two_block_bridge(p),
        BenchFamily::PathOfCliques => {
            let k = a.cliques;
            let ov = a.overlap;
            if k < 1 {
                return Err(Error::InvalidInput("--cliques must be at least 1".into()));
            }
            let total = p + (k - 1) * ov;
            if total % k != 0 {
                return Err(Error::InvalidInput(format!(
                    "p = {p} is not reachable with {k} equal cliques overlapping by {ov}"
                )));
            }
            patterns::path_of_cliques(k, total / k, ov)
        }
        BenchFamily::Complete => {
            let edges: Vec<(usize, usize)> =
                (0..p).flat_map(|i| ((i + 1)..p).map(move |j| (i, j))).collect();
            ChordalGraph::from_edges(p, &edges)
        }
    }
}

/// Two cliques sharing exactly two vertices: {0..h+1} and {h..p-1}.
fn two_block_bridge(p: usize) -> Result<ChordalGraph> {
    if p < 4 {
        return Err(Error::InvalidInput(format!(
            "two-block-bridge needs p >= 4, got {p}"
        )));
    }
    let h = p / 2;
    let mut edges = Vec::new();
    for i in 0..=(h + 1) {
        for j in (i + 1)..=(h + 1) {
            edges.push((i, j));
        }
    }
    for i in h..p {
        for j in (i + 1)..p {
            if i > h + 1 || j > h + 1 {
                edges.push((i, j));
            }
        }
    }
    ChordalGraph::from_edges(p, &edges)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("timings are finite"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
