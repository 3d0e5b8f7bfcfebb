//! Data preparation for covariance estimation on financial panels: price
//! series to log returns, single-index regression residuals, sector-based
//! graph construction, and heatmap/observation file formats.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ChordalGraph, CliqueTree};
use crate::matrix::{format_f64, SymMatrix};

/// Aligned price history. Rows with any missing cell are dropped at read
/// time; `dropped_rows` reports how many.
#[derive(Debug, Clone)]
pub struct PricePanel {
    dates: Vec<String>,
    tickers: Vec<String>,
    prices: DMatrix<f64>,
    dropped_rows: usize,
}

impl PricePanel {
    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn prices(&self) -> &DMatrix<f64> {
        &self.prices
    }

    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn n(&self) -> usize {
        self.prices.nrows()
    }

    pub fn p(&self) -> usize {
        self.prices.ncols()
    }
}

/// Log-return panel. Dates are opaque ordered strings (ISO-8601
/// recommended, which sorts correctly as text).
#[derive(Debug, Clone)]
pub struct ReturnsPanel {
    dates: Vec<String>,
    tickers: Vec<String>,
    values: DMatrix<f64>,
    index_column: Option<usize>,
}

impl ReturnsPanel {
    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn index_column(&self) -> Option<usize> {
        self.index_column
    }

    pub fn index_ticker(&self) -> Option<&str> {
        self.index_column.map(|i| self.tickers[i].as_str())
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    /// Designates the market-index column by ticker name.
    pub fn with_index(mut self, ticker: &str) -> Result<Self> {
        let pos = self
            .tickers
            .iter()
            .position(|t| t == ticker)
            .ok_or_else(|| {
                Error::InvalidInput(format!("index ticker '{ticker}' is not in the panel"))
            })?;
        self.index_column = Some(pos);
        Ok(self)
    }
}

/// Reads a price CSV with header `date,TICKER1,TICKER2,...`. Cells that are
/// empty, `NA`, or `NaN` (case-insensitive) mark the whole row as incomplete
/// and the row is dropped. Dates must be strictly increasing as strings.
pub fn read_prices_csv<R: Read>(reader: R) -> Result<PricePanel> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(Error::Parse(
            "price CSV needs a date column and at least one ticker column".into(),
        ));
    }
    if !headers[0].trim().eq_ignore_ascii_case("date") {
        return Err(Error::Parse(format!(
            "price CSV must start with a 'date' column, found '{}'",
            headers[0].trim()
        )));
    }
    let tickers: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    let mut seen = BTreeSet::new();
    for t in &tickers {
        if t.is_empty() {
            return Err(Error::Parse("price CSV has an empty ticker name".into()));
        }
        if !seen.insert(t.clone()) {
            return Err(Error::Parse(format!("duplicate ticker '{t}' in price CSV")));
        }
    }

    let mut dates = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dropped = 0usize;
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let date = record[0].trim().to_string();
        if date.is_empty() {
            return Err(Error::Parse(format!("price row {} has an empty date", idx + 1)));
        }
        let cells: Vec<&str> = record.iter().skip(1).map(str::trim).collect();
        if cells.iter().any(|c| is_missing(c)) {
            dropped += 1;
            continue;
        }
        let mut row = Vec::with_capacity(tickers.len());
        for (c, ticker) in cells.iter().zip(&tickers) {
            let v: f64 = c.parse().map_err(|_| {
                Error::Parse(format!("price '{c}' for {ticker} at {date} is not a number"))
            })?;
            row.push(v);
        }
        dates.push(date);
        rows.push(row);
    }
    for w in dates.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Parse(format!(
                "price dates out of order: '{}' is not after '{}'",
                w[1], w[0]
            )));
        }
    }
    let prices = DMatrix::from_fn(rows.len(), tickers.len(), |i, j| rows[i][j]);
    Ok(PricePanel {
        dates,
        tickers,
        prices,
        dropped_rows: dropped,
    })
}

pub fn read_prices_csv_path<P: AsRef<Path>>(path: P) -> Result<PricePanel> {
    read_prices_csv(File::open(path)?)
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan")
}

/// rₜ = ln(pₜ / pₜ₋₁) per ticker; output has one fewer row than the panel.
pub fn log_returns(panel: &PricePanel) -> Result<ReturnsPanel> {
    let (n, p) = (panel.n(), panel.p());
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "{n} aligned price row(s); need at least 3 to form 2 return observations"
        )));
    }
    for i in 0..n {
        for j in 0..p {
            let v = panel.prices[(i, j)];
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "non-positive price {v} for {} at {}",
                    panel.tickers[j], panel.dates[i]
                )));
            }
        }
    }
    let values = DMatrix::from_fn(n - 1, p, |i, j| {
        (panel.prices[(i + 1, j)] / panel.prices[(i, j)]).ln()
    });
    Ok(ReturnsPanel {
        dates: panel.dates[1..].to_vec(),
        tickers: panel.tickers.clone(),
        values,
        index_column: None,
    })
}

/// Per-ticker ordinary least squares of returns on (intercept, index).
#[derive(Debug, Clone)]
pub struct IndexRegression {
    tickers: Vec<String>,
    residuals: DMatrix<f64>,
    betas: Vec<f64>,
    alphas: Vec<f64>,
}

impl IndexRegression {
    /// Tickers of the residual columns (panel order, index excluded).
    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn residuals(&self) -> &DMatrix<f64> {
        &self.residuals
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }
}

/// Regresses every non-index column on the index with an intercept and
/// returns the residual panel. Residual columns are orthogonal to the index
/// and have zero mean up to rounding.
pub fn index_residuals(panel: &ReturnsPanel) -> Result<IndexRegression> {
    let idx = panel.index_column.ok_or_else(|| {
        Error::InvalidInput("no index ticker designated; call with_index first".into())
    })?;
    let n = panel.n();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "{n} return observation(s); need at least 3 for a regression"
        )));
    }
    let x = panel.values.column(idx);
    let x_mean = x.sum() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - x_mean) * (v - x_mean)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidInput(
            "index return series has zero variance; regression is undefined".into(),
        ));
    }

    let p_out = panel.p() - 1;
    let mut tickers = Vec::with_capacity(p_out);
    let mut betas = Vec::with_capacity(p_out);
    let mut alphas = Vec::with_capacity(p_out);
    let mut residuals = DMatrix::zeros(n, p_out);
    let mut out = 0;
    for j in 0..panel.p() {
        if j == idx {
            continue;
        }
        let y = panel.values.column(j);
        let y_mean = y.sum() / n as f64;
        let sxy: f64 = x
            .iter()
            .zip(y.iter())
            .map(|(xv, yv)| (xv - x_mean) * (yv - y_mean))
            .sum();
        let beta = sxy / sxx;
        let alpha = y_mean - beta * x_mean;
        for i in 0..n {
            residuals[(i, out)] = y[i] - alpha - beta * x[i];
        }
        tickers.push(panel.tickers[j].clone());
        betas.push(beta);
        alphas.push(alpha);
        out += 1;
    }
    Ok(IndexRegression {
        tickers,
        residuals,
        betas,
        alphas,
    })
}

/// Two-clique sector layout: each group, together with the bridge tickers,
/// forms one complete clique; the bridge is the separator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorSpec {
    groups: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    bridge: Vec<String>,
}

impl SectorSpec {
    pub fn new(groups: BTreeMap<String, Vec<String>>, bridge: Vec<String>) -> Self {
        SectorSpec { groups, bridge }
    }

    pub fn groups(&self) -> &BTreeMap<String, Vec<String>> {
        &self.groups
    }

    pub fn bridge(&self) -> &[String] {
        &self.bridge
    }
}

pub fn read_sector_spec<R: Read>(reader: R) -> Result<SectorSpec> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn read_sector_spec_path<P: AsRef<Path>>(path: P) -> Result<SectorSpec> {
    read_sector_spec(File::open(path)?)
}

/// Builds the chordal graph and clique tree for a sector spec over the given
/// ticker order (ticker position = vertex index).
///
/// With two groups the cliques are (group ∪ bridge) each and the clique-tree
/// separator is exactly the bridge; a single group with an empty bridge gives
/// one complete clique. More groups are not supported.
pub fn sector_graph(spec: &SectorSpec, tickers: &[String]) -> Result<(ChordalGraph, CliqueTree)> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, t) in tickers.iter().enumerate() {
        if index.insert(t.as_str(), i).is_some() {
            return Err(Error::InvalidInput(format!("duplicate ticker '{t}'")));
        }
    }
    let lookup = |t: &String, whence: &str| -> Result<usize> {
        index.get(t.as_str()).copied().ok_or_else(|| {
            Error::InvalidInput(format!("{whence} names unknown ticker '{t}'"))
        })
    };

    match spec.groups.len() {
        0 => {
            return Err(Error::InvalidInput("sector spec has no groups".into()));
        }
        1 | 2 => {}
        n => {
            return Err(Error::InvalidInput(format!(
                "unsupported topology: {n} groups share one bridge; only two-clique sector graphs are supported"
            )));
        }
    }
    if spec.groups.len() == 1 && !spec.bridge.is_empty() {
        return Err(Error::InvalidInput(
            "a bridge requires exactly two groups".into(),
        ));
    }

    let mut bridge = BTreeSet::new();
    for t in &spec.bridge {
        if !bridge.insert(lookup(t, "bridge")?) {
            return Err(Error::InvalidInput(format!("duplicate bridge ticker '{t}'")));
        }
    }
    let mut group_sets: Vec<(String, BTreeSet<usize>)> = Vec::new();
    for (name, members) in &spec.groups {
        let mut set = BTreeSet::new();
        for t in members {
            if !set.insert(lookup(t, &format!("group '{name}'"))?) {
                return Err(Error::InvalidInput(format!(
                    "duplicate ticker '{t}' in group '{name}'"
                )));
            }
        }
        if set.is_empty() {
            return Err(Error::InvalidInput(format!("group '{name}' is empty")));
        }
        group_sets.push((name.clone(), set));
    }
    if group_sets.len() == 2 {
        let shared: Vec<usize> = group_sets[0]
            .1
            .intersection(&group_sets[1].1)
            .copied()
            .filter(|v| !bridge.contains(v))
            .collect();
        if let Some(&v) = shared.first() {
            return Err(Error::InvalidInput(format!(
                "ticker '{}' is in both groups but not in the bridge",
                tickers[v]
            )));
        }
    }

    let cliques: Vec<BTreeSet<usize>> = group_sets
        .iter()
        .map(|(_, set)| set.union(&bridge).copied().collect())
        .collect();
    if cliques.len() == 2 {
        if cliques[0].is_subset(&cliques[1]) || cliques[1].is_subset(&cliques[0]) {
            return Err(Error::InvalidInput(
                "one sector clique contains the other; two distinct cliques are required".into(),
            ));
        }
    }
    let covered: BTreeSet<usize> = cliques.iter().flatten().copied().collect();
    for (i, t) in tickers.iter().enumerate() {
        if !covered.contains(&i) {
            return Err(Error::InvalidInput(format!(
                "ticker '{t}' is not covered by any group"
            )));
        }
    }

    let mut edges = Vec::new();
    for c in &cliques {
        let members: Vec<usize> = c.iter().copied().collect();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                edges.push((i, j));
            }
        }
    }
    let g = ChordalGraph::from_edges(tickers.len(), &edges)?;
    let t = g.clique_tree();
    t.verify(&g)?;
    if cliques.len() == 2 {
        debug_assert_eq!(t.cliques().len(), 2);
        debug_assert_eq!(
            t.edges()[0].sep,
            bridge.iter().copied().collect::<Vec<_>>()
        );
    }
    Ok((g, t))
}

/// mᵢⱼ / √(mᵢᵢ·mⱼⱼ), with the diagonal set to exactly 1.
pub fn correlation_matrix(m: &SymMatrix) -> Result<SymMatrix> {
    let p = m.dim();
    for i in 0..p {
        if !(m.get(i, i) > 0.0) {
            return Err(Error::InvalidInput(format!(
                "diagonal entry {} is {}; cannot normalize to a correlation",
                i + 1,
                m.get(i, i)
            )));
        }
    }
    let mut out = DMatrix::identity(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            let r = m.get(i, j) / (m.get(i, i) * m.get(j, j)).sqrt();
            out[(i, j)] = r;
            out[(j, i)] = r;
        }
    }
    Ok(SymMatrix::from_symmetric_unchecked(out))
}

/// Writes `row,col,value` triples in row-major order, one per matrix entry.
pub fn write_heatmap_csv<W: Write>(m: &SymMatrix, labels: &[String], mut w: W) -> Result<()> {
    let p = m.dim();
    if labels.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for a {p}x{p} matrix",
            labels.len()
        )));
    }
    writeln!(w, "row,col,value")?;
    for i in 0..p {
        for j in 0..p {
            writeln!(w, "{},{},{}", labels[i], labels[j], format_f64(m.get(i, j)))?;
        }
    }
    Ok(())
}

/// Reads a heatmap CSV back into a matrix; label order is first appearance.
pub fn read_heatmap_csv<R: Read>(reader: R) -> Result<(SymMatrix, Vec<String>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut labels: Vec<String> = Vec::new();
    let mut pos: HashMap<String, usize> = HashMap::new();
    let mut triples: Vec<(usize, usize, f64)> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != 3 {
            return Err(Error::Parse(format!(
                "heatmap row has {} fields, expected row,col,value",
                record.len()
            )));
        }
        let mut id = |name: &str| -> usize {
            *pos.entry(name.to_string()).or_insert_with(|| {
                labels.push(name.to_string());
                labels.len() - 1
            })
        };
        let i = id(record[0].trim());
        let j = id(record[1].trim());
        let v: f64 = record[2].trim().parse().map_err(|_| {
            Error::Parse(format!("heatmap value '{}' is not a number", &record[2]))
        })?;
        triples.push((i, j, v));
    }
    let p = labels.len();
    if triples.len() != p * p {
        return Err(Error::Parse(format!(
            "heatmap has {} entries for {p} labels; expected {}",
            triples.len(),
            p * p
        )));
    }
    let mut seen = vec![false; p * p];
    let mut out = DMatrix::zeros(p, p);
    for (i, j, v) in triples {
        if seen[i * p + j] {
            return Err(Error::Parse(format!(
                "duplicate heatmap entry for ({}, {})",
                labels[i], labels[j]
            )));
        }
        seen[i * p + j] = true;
        out[(i, j)] = v;
    }
    Ok((SymMatrix::from_dense(out)?, labels))
}

/// Writes the raw matrix and its correlation-normalized variant as heatmap
/// CSVs.
pub fn export_heatmap_data<W1: Write, W2: Write>(
    m: &SymMatrix,
    labels: &[String],
    covariance_out: W1,
    correlation_out: W2,
) -> Result<()> {
    let corr = correlation_matrix(m)?;
    write_heatmap_csv(m, labels, covariance_out)?;
    write_heatmap_csv(&corr, labels, correlation_out)?;
    Ok(())
}

/// Observation CSV: header of variable names, one row per observation.
pub fn write_observations_csv<W: Write>(
    names: &[String],
    data: &DMatrix<f64>,
    mut w: W,
) -> Result<()> {
    if names.len() != data.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} data columns",
            names.len(),
            data.ncols()
        )));
    }
    writeln!(w, "{}", names.join(","))?;
    for i in 0..data.nrows() {
        let row: Vec<String> = (0..data.ncols()).map(|j| format_f64(data[(i, j)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_observations_csv<R: Read>(reader: R) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    if names.is_empty() || names.iter().any(|n| n.is_empty()) {
        return Err(Error::Parse(
            "observation CSV needs a header of nonempty variable names".into(),
        ));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(names.len());
        for (k, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "observation row {}, column {}: '{}' is not a number",
                    idx + 1,
                    names[k],
                    cell.trim()
                ))
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("observation CSV has no data rows".into()));
    }
    let data = DMatrix::from_fn(rows.len(), names.len(), |i, j| rows[i][j]);
    Ok((names, data))
}
