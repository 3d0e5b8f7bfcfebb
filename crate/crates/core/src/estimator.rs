//! Constrained maximum-likelihood estimation of doubly sparse covariance.
//!
//! The estimate minimizes trace(L(M)·S) + 2·Σ ln Rₖₖ over M = RᵀR with R a
//! sparse Cholesky factor on the pattern, subject to C = M·L(M) − I = 0.
//! The factor parameterization keeps M positive definite and subordinate to
//! the graph for free; the constraint makes the inverse subordinate too.
//!
//! Constraint handling is an augmented Lagrangian over the upper-triangle
//! entries of C (the lower triangle is redundant: if the upper triangle of
//! M·L(M) − I vanishes for SPD M, the whole matrix does). Each outer
//! iteration minimizes the smooth augmented objective with a BFGS line
//! search; multipliers update on accepted iterates and the penalty grows
//! tenfold whenever ‖C‖_F fails to shrink by a factor of four.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::cholesky::SparseCholesky;
use crate::error::{Error, Result};
use crate::graph::{ChordalGraph, CliqueTree};
use crate::local::{extract, invert_block, local_inverse, scatter_add};
use crate::matrix::SymMatrix;

/// How the inner solver obtains gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    /// Terminal requirement on ‖M·L(M) − I‖_F.
    pub constraint_tol: f64,
    /// Initial quadratic penalty weight.
    pub penalty_init: f64,
    /// Multiplier applied to the penalty when the constraint norm fails to
    /// shrink by 4x between outer iterations. Must exceed 1.
    pub penalty_growth: f64,
    pub max_outer: usize,
    /// Iteration budget for each inner BFGS minimization.
    pub max_inner: usize,
    /// Inner stop: ‖∇‖ ≤ inner_grad_tol · (1 + |value|).
    pub inner_grad_tol: f64,
    pub gradient_mode: GradientMode,
    /// Relative step for finite-difference gradients.
    pub fd_step: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            constraint_tol: 1e-6,
            penalty_init: 10.0,
            penalty_growth: 10.0,
            max_outer: 40,
            max_inner: 500,
            inner_grad_tol: 1e-8,
            gradient_mode: GradientMode::Analytic,
            fd_step: 1e-5,
        }
    }
}

/// One outer augmented-Lagrangian iteration, as recorded in the trace.
#[derive(Debug, Clone, Serialize)]
pub struct OuterIterate {
    pub outer: usize,
    pub objective: f64,
    pub constraint_norm: f64,
    pub penalty: f64,
    /// The constraint norm did not increase relative to the best accepted
    /// iterate; multipliers were updated.
    pub accepted: bool,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct EstimateResult {
    pub m_hat: SymMatrix,
    /// L(m_hat), the estimated precision matrix.
    pub theta_hat: SymMatrix,
    pub objective: f64,
    pub constraint_norm: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    pub trace: Vec<OuterIterate>,
}

impl EstimateResult {
    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        #[derive(Serialize)]
        struct ResultJson<'a> {
            p: usize,
            m_hat: Vec<Vec<f64>>,
            theta_hat: Vec<Vec<f64>>,
            objective: f64,
            constraint_norm: f64,
            outer_iterations: usize,
            inner_iterations: usize,
            converged: bool,
            trace: &'a [OuterIterate],
        }
        let rows = |m: &SymMatrix| -> Vec<Vec<f64>> {
            (0..m.dim())
                .map(|i| (0..m.dim()).map(|j| m.get(i, j)).collect())
                .collect()
        };
        let json = serde_json::to_string_pretty(&ResultJson {
            p: self.m_hat.dim(),
            m_hat: rows(&self.m_hat),
            theta_hat: rows(&self.theta_hat),
            objective: self.objective,
            constraint_norm: self.constraint_norm,
            outer_iterations: self.outer_iterations,
            inner_iterations: self.inner_iterations,
            converged: self.converged,
            trace: &self.trace,
        })?;
        writer.write_all(json.as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }
}

/// Mean and covariance with divisor n: S = (1/n)·Σ (xᵢ − μ̂)(xᵢ − μ̂)ᵀ.
/// Rows of `data` are observations.
pub fn sample_covariance(data: &DMatrix<f64>) -> Result<(SymMatrix, Vec<f64>)> {
    let (n, p) = (data.nrows(), data.ncols());
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "{n} observation(s); need at least 2 for a covariance"
        )));
    }
    let mean: Vec<f64> = (0..p).map(|j| data.column(j).sum() / n as f64).collect();
    let centered = DMatrix::from_fn(n, p, |i, j| data[(i, j)] - mean[j]);
    let s = centered.tr_mul(&centered) / n as f64;
    Ok((SymMatrix::from_dense(s)?, mean))
}

/// Draws n rows from N(0, V) with a self-contained seeded generator, so the
/// output is a pure function of (V, n, seed).
pub fn simulate_gaussian(v: &SymMatrix, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    let p = v.dim();
    let chol = v
        .as_dmatrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPsd("simulation covariance must be positive definite".into()))?;
    let l = chol.l();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, p);
    let mut z = DVector::zeros(p);
    for i in 0..n {
        for k in 0..p {
            z[k] = StandardNormal.sample(&mut rng);
        }
        let x = &l * &z;
        for j in 0..p {
            out[(i, j)] = x[j];
        }
    }
    Ok(out)
}

/// trace(L(M(x))·S) + 2·Σ ln Rₖₖ at the factor's stored parameters.
pub fn objective(sc: &SparseCholesky, s: &SymMatrix, t: &CliqueTree) -> Result<f64> {
    Ok(assemble(sc, sc.x(), s, t)?.objective)
}

/// Analytic gradient of `objective` with respect to the parameter vector.
pub fn objective_gradient(sc: &SparseCholesky, s: &SymMatrix, t: &CliqueTree) -> Result<Vec<f64>> {
    let a = assemble(sc, sc.x(), s, t)?;
    Ok(gradient(sc, &a, s, t, None))
}

/// Central finite-difference gradient of `objective`; the oracle used to
/// validate the analytic assembly.
pub fn objective_gradient_fd(
    sc: &SparseCholesky,
    s: &SymMatrix,
    t: &CliqueTree,
    step: f64,
) -> Result<Vec<f64>> {
    let x = sc.x().to_vec();
    fd_gradient(&x, step, |xt| Ok(assemble(sc, xt, s, t)?.objective))
}

/// Fits the doubly sparse covariance to a sample covariance. Non-convergence
/// within the outer budget is reported in the result, not as an error; the
/// trace records every outer iterate.
pub fn estimate(
    s: &SymMatrix,
    g: &ChordalGraph,
    t: &CliqueTree,
    opts: &EstimatorOptions,
) -> Result<EstimateResult> {
    if s.dim() != g.p() {
        return Err(Error::DimensionMismatch(format!(
            "sample covariance is {}x{} but the graph has {} vertices",
            s.dim(),
            s.dim(),
            g.p()
        )));
    }
    assert!(opts.constraint_tol > 0.0 && opts.inner_grad_tol > 0.0 && opts.fd_step > 0.0);
    assert!(opts.penalty_init > 0.0 && opts.penalty_growth > 1.0);
    check_psd(s)?;

    let p = s.dim();
    let sc = initial_point(s, g)?;
    let mut x = sc.x().to_vec();

    let mut lambda = DMatrix::zeros(p, p);
    let mut rho = opts.penalty_init;
    let mut best_cnorm = f64::INFINITY;
    let mut trace: Vec<OuterIterate> = Vec::new();
    let mut total_inner = 0;
    let mut converged = false;

    for outer in 1..=opts.max_outer {
        let inner = bfgs(
            x.clone(),
            |xt| {
                let (val, grad, _, _) =
                    aug_eval(&sc, xt, s, t, &lambda, rho, true, opts)?;
                Ok((val, grad.expect("gradient was requested")))
            },
            opts.max_inner,
            opts.inner_grad_tol,
        )?;
        x = inner.x;
        total_inner += inner.iters;

        let (_, _, obj, cnorm) = aug_eval(&sc, &x, s, t, &lambda, rho, false, opts)?;
        let accepted = cnorm <= best_cnorm;
        trace.push(OuterIterate {
            outer,
            objective: obj,
            constraint_norm: cnorm,
            penalty: rho,
            accepted,
            inner_iterations: inner.iters,
        });

        // A stalled inner solve at a feasible point is as converged as
        // doubles allow: with a large penalty the augmented gradient is
        // dominated by rounding noise scaled by rho, so it can never be
        // re-certified against the gradient tolerance.
        if cnorm <= opts.constraint_tol && (inner.converged || inner.stalled) {
            converged = true;
            break;
        }
        if accepted {
            // first-order multiplier update on the penalized entries
            let a = assemble(&sc, &x, s, t)?;
            let c = residual(&a);
            for i in 0..p {
                for j in i..p {
                    lambda[(i, j)] += rho * c[(i, j)];
                }
            }
            if cnorm > 0.25 * best_cnorm {
                rho = (rho * opts.penalty_growth).min(1e12);
            }
            best_cnorm = cnorm;
        } else {
            rho = (rho * opts.penalty_growth).min(1e12);
        }
    }

    let a = assemble(&sc, &x, s, t)?;
    let cnorm = residual(&a).norm();
    let theta_hat = local_inverse(&a.m, t)?;
    Ok(EstimateResult {
        m_hat: a.m,
        theta_hat,
        objective: a.objective,
        constraint_norm: cnorm,
        outer_iterations: trace.len(),
        inner_iterations: total_inner,
        converged,
        trace,
    })
}

// ---- objective assembly ----

struct Assembled {
    r: DMatrix<f64>,
    m: SymMatrix,
    l: SymMatrix,
    clique_inv: Vec<DMatrix<f64>>,
    sep_inv: Vec<Option<DMatrix<f64>>>,
    objective: f64,
}

fn assemble(sc: &SparseCholesky, x: &[f64], s: &SymMatrix, t: &CliqueTree) -> Result<Assembled> {
    let (r, m) = sc.realize_at(x);
    if !m.max_abs().is_finite() {
        return Err(Error::InvalidInput("factor parameters overflowed".into()));
    }
    let p = m.dim();
    let mut acc = DMatrix::zeros(p, p);
    let mut clique_inv = Vec::with_capacity(t.cliques().len());
    for c in t.cliques() {
        let inv = invert_block(&m, c)?;
        scatter_add(&mut acc, c, &inv, 1.0);
        clique_inv.push(inv);
    }
    let mut sep_inv = Vec::with_capacity(t.edges().len());
    for e in t.edges() {
        if e.sep.is_empty() {
            sep_inv.push(None);
            continue;
        }
        let inv = invert_block(&m, &e.sep)?;
        scatter_add(&mut acc, &e.sep, &inv, -1.0);
        sep_inv.push(Some(inv));
    }
    let l = SymMatrix::from_symmetric_unchecked(acc);
    let trace_ls = frob_inner(l.as_dmatrix(), s.as_dmatrix());
    let logdet_term: f64 = 2.0 * x[..p].iter().sum::<f64>();
    Ok(Assembled {
        r,
        m,
        l,
        clique_inv,
        sep_inv,
        objective: trace_ls + logdet_term,
    })
}

/// C = M·L − I from an assembled point.
fn residual(a: &Assembled) -> DMatrix<f64> {
    let mut c = a.m.as_dmatrix() * a.l.as_dmatrix();
    for i in 0..a.m.dim() {
        c[(i, i)] -= 1.0;
    }
    c
}

/// Augmented value (and gradient): objective plus Σ_{i≤j} λᵢⱼCᵢⱼ + ρ/2·Cᵢⱼ².
/// Also reports the plain objective and the full ‖C‖_F.
fn aug_eval(
    sc: &SparseCholesky,
    x: &[f64],
    s: &SymMatrix,
    t: &CliqueTree,
    lambda: &DMatrix<f64>,
    rho: f64,
    want_grad: bool,
    opts: &EstimatorOptions,
) -> Result<(f64, Option<Vec<f64>>, f64, f64)> {
    let a = assemble(sc, x, s, t)?;
    let p = a.m.dim();
    let c = residual(&a);
    let cnorm = c.norm();
    let mut penalty = 0.0;
    for i in 0..p {
        for j in i..p {
            let cij = c[(i, j)];
            penalty += lambda[(i, j)] * cij + 0.5 * rho * cij * cij;
        }
    }
    let value = a.objective + penalty;
    if !want_grad {
        return Ok((value, None, a.objective, cnorm));
    }
    let grad = match opts.gradient_mode {
        GradientMode::Analytic => {
            // Λ holds the active multipliers λ + ρC on the penalized entries.
            let mut cap = DMatrix::zeros(p, p);
            for i in 0..p {
                for j in i..p {
                    cap[(i, j)] = lambda[(i, j)] + rho * c[(i, j)];
                }
            }
            gradient(sc, &a, s, t, Some(&cap))
        }
        GradientMode::FiniteDifference => fd_gradient(x, opts.fd_step, |xt| {
            let (v, _, _, _) = aug_eval(sc, xt, s, t, lambda, rho, false, opts)?;
            Ok(v)
        })?,
    };
    Ok((value, Some(grad), a.objective, cnorm))
}

/// Assembles the parameter-space gradient from clique-block pieces.
///
/// With B the block inverse and ⟨D, dM⟩ the matrix differential of the
/// value, the objective contributes −Σ_c scatter(B·S[c]·B) over cliques plus
/// the mirrored separator terms (from d trace(L·S)). With Λ the active
/// multipliers, the constraint adds Λ·L (from dM·L) and the same scatter
/// shape with Q = M·Λ in place of S (from M·dL). Chaining through M = RᵀR
/// in elimination coordinates gives G = R·(D + Dᵀ); off-diagonal slots read
/// G directly, diagonal slots pick up the exp reparameterization and the
/// 2·Σ ln Rₖₖ term.
fn gradient(
    sc: &SparseCholesky,
    a: &Assembled,
    s: &SymMatrix,
    t: &CliqueTree,
    cap: Option<&DMatrix<f64>>,
) -> Vec<f64> {
    let p = a.m.dim();
    let mut d = DMatrix::zeros(p, p);
    for (c, b) in t.cliques().iter().zip(&a.clique_inv) {
        let w = b * s.principal_submatrix(c) * b;
        scatter_add(&mut d, c, &w, -1.0);
    }
    for (e, b) in t.edges().iter().zip(&a.sep_inv) {
        if let Some(b) = b {
            let w = b * s.principal_submatrix(&e.sep) * b;
            scatter_add(&mut d, &e.sep, &w, 1.0);
        }
    }
    if let Some(cap) = cap {
        d += cap * a.l.as_dmatrix();
        let q = a.m.as_dmatrix() * cap;
        for (c, b) in t.cliques().iter().zip(&a.clique_inv) {
            let w = b * extract(&q, c, c) * b;
            scatter_add(&mut d, c, &w, -1.0);
        }
        for (e, b) in t.edges().iter().zip(&a.sep_inv) {
            if let Some(b) = b {
                let w = b * extract(&q, &e.sep, &e.sep) * b;
                scatter_add(&mut d, &e.sep, &w, 1.0);
            }
        }
    }
    let dsym = &d + d.transpose();
    let g = &a.r * sc.to_elimination(&dsym);
    let mut grad = vec![0.0; sc.n_params()];
    for k in 0..p {
        grad[k] = g[(k, k)] * a.r[(k, k)] + 2.0;
    }
    for (slot, &(k, l)) in sc.offdiag_slots().iter().enumerate() {
        grad[p + slot] = g[(k, l)];
    }
    grad
}

fn fd_gradient<F>(x: &[f64], step: f64, mut value: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut grad = vec![0.0; x.len()];
    let mut xt = x.to_vec();
    for i in 0..x.len() {
        let h = step * x[i].abs().max(1.0);
        xt[i] = x[i] + h;
        let up = value(&xt)?;
        xt[i] = x[i] - h;
        let down = value(&xt)?;
        xt[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

// ---- initialization ----

/// Zero the non-edges of S, then shift the diagonal just enough to factor:
/// first try no shift, then ε = 1e-6·trace/p doubled until SPD.
fn initial_point(s: &SymMatrix, g: &ChordalGraph) -> Result<SparseCholesky> {
    let p = s.dim();
    let mut proj = DMatrix::zeros(p, p);
    for i in 0..p {
        proj[(i, i)] = s.get(i, i);
        for j in (i + 1)..p {
            if g.contains_edge(i, j) {
                proj[(i, j)] = s.get(i, j);
                proj[(j, i)] = s.get(i, j);
            }
        }
    }
    let trace = proj.trace();
    let eps0 = if trace > 0.0 {
        1e-6 * trace / p as f64
    } else {
        1e-6
    };
    let mut eps = 0.0;
    for _ in 0..120 {
        let mut shifted = proj.clone();
        for i in 0..p {
            shifted[(i, i)] += eps;
        }
        let cand = SymMatrix::from_symmetric_unchecked(shifted);
        if let Ok(sc) = SparseCholesky::from_spd_matrix(g, &cand) {
            return Ok(sc);
        }
        eps = if eps == 0.0 { eps0 } else { eps * 2.0 };
    }
    Err(Error::NotPsd(
        "could not shift the projected sample covariance to positive definite".into(),
    ))
}

fn check_psd(s: &SymMatrix) -> Result<()> {
    let eig = s.as_dmatrix().clone().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if min < -1e-8 * max.max(1e-12) {
        return Err(Error::NotPsd(format!(
            "sample covariance has eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

// ---- inner solver: BFGS with a strong Wolfe line search ----

struct InnerResult {
    x: Vec<f64>,
    iters: usize,
    converged: bool,
    /// Line search exhausted along steepest descent: no decrease is
    /// representable in double precision from this point.
    stalled: bool,
}

fn bfgs<F>(x0: Vec<f64>, mut f: F, max_iter: usize, grad_tol: f64) -> Result<InnerResult>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = DVector::from_vec(x0);
    let (mut fx, g0) = f(x.as_slice())?;
    let mut gx = DVector::from_vec(g0);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut iters = 0;
    let mut converged = false;
    let mut stalled = false;

    while iters < max_iter {
        if gx.norm() <= grad_tol * (1.0 + fx.abs()) {
            converged = true;
            break;
        }
        let mut dir = -(&h * &gx);
        if dir.dot(&gx) >= 0.0 {
            h = DMatrix::identity(n, n);
            dir = -gx.clone();
        }
        let Some(step) = wolfe_search(&mut f, &x, fx, &gx, &dir) else {
            // no acceptable step along this direction; a fresh steepest
            // descent direction is the only remaining option
            if h == DMatrix::<f64>::identity(n, n) {
                stalled = true;
                break;
            }
            h = DMatrix::identity(n, n);
            iters += 1;
            continue;
        };
        let s = &step.x - &x;
        let y = &step.grad - &gx;
        let sy = s.dot(&y);
        if sy > 1e-10 * s.norm() * y.norm() {
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            let rho = 1.0 / sy;
            h += (rho * rho * yhy + rho) * (&s * s.transpose())
                - rho * (&s * hy.transpose() + &hy * s.transpose());
        }
        x = step.x;
        fx = step.value;
        gx = step.grad;
        iters += 1;
    }
    Ok(InnerResult {
        x: x.as_slice().to_vec(),
        iters,
        converged,
        stalled,
    })
}

struct StepPoint {
    x: DVector<f64>,
    value: f64,
    grad: DVector<f64>,
}

const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;

/// Bracket-and-zoom strong Wolfe search. Evaluation failures (overflow far
/// along the ray) act as +∞ and shrink the bracket.
fn wolfe_search<F>(
    f: &mut F,
    x0: &DVector<f64>,
    f0: f64,
    g0: &DVector<f64>,
    dir: &DVector<f64>,
) -> Option<StepPoint>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let dphi0 = g0.dot(dir);
    debug_assert!(dphi0 < 0.0);
    let mut eval = |alpha: f64| -> Option<StepPoint> {
        let xt = x0 + dir * alpha;
        match f(xt.as_slice()) {
            Ok((v, g)) if v.is_finite() => Some(StepPoint {
                x: xt,
                value: v,
                grad: DVector::from_vec(g),
            }),
            _ => None,
        }
    };

    // Near the optimum the true decrease per step drops below the rounding
    // granularity of the value itself, and decrease-based acceptance would
    // stall far from the achievable gradient floor. Classification therefore
    // gets a small value cushion, and points whose value is flat within that
    // cushion are steered by the slope sign instead; flat descending points
    // are accepted on the slope alone (approximate Wolfe conditions).
    let eps_f = 1e-12 * (1.0 + f0.abs());
    let approx_ok = |value: f64, dphi: f64| -> bool {
        value <= f0 + eps_f
            && dphi >= WOLFE_C2 * dphi0
            && dphi <= -(2.0 * WOLFE_C1 - 1.0) * dphi0
    };
    let strong_ok = |alpha: f64, value: f64, dphi: f64| -> bool {
        value <= f0 + WOLFE_C1 * alpha * dphi0 && dphi.abs() <= -WOLFE_C2 * dphi0
    };

    let mut alpha_lo = 0.0;
    let mut best: Option<StepPoint> = None;
    let mut alpha = 1.0;
    let mut bracket_hi = None;

    let note_best = |pt: &StepPoint, best: &mut Option<StepPoint>| {
        if pt.value < best.as_ref().map_or(f0, |b| b.value) {
            *best = Some(StepPoint {
                x: pt.x.clone(),
                value: pt.value,
                grad: pt.grad.clone(),
            });
        }
    };

    for _ in 0..25 {
        match eval(alpha) {
            None => {
                bracket_hi = Some(alpha);
                break;
            }
            Some(pt) => {
                let dphi = pt.grad.dot(dir);
                if strong_ok(alpha, pt.value, dphi) || approx_ok(pt.value, dphi) {
                    return Some(pt);
                }
                note_best(&pt, &mut best);
                if pt.value > f0 + WOLFE_C1 * alpha * dphi0 + eps_f || dphi >= 0.0 {
                    // measurably above the acceptance line, or the minimum
                    // was passed: an acceptable point lies in (lo, alpha)
                    bracket_hi = Some(alpha);
                    break;
                }
                // still descending at an acceptable value: advance
                alpha_lo = alpha;
                alpha *= 2.5;
                if alpha > 1e6 {
                    return Some(best.unwrap_or(pt));
                }
            }
        }
    }
    let mut alpha_hi = bracket_hi?;

    // zoom: invariant dφ(lo) < 0 with value(lo) within the cushion of the
    // acceptance line, hi either past the minimum or measurably too high
    for _ in 0..40 {
        let mid = 0.5 * (alpha_lo + alpha_hi);
        if (alpha_hi - alpha_lo).abs() <= 1e-16 * alpha_hi.abs().max(1.0) {
            break;
        }
        match eval(mid) {
            None => {
                alpha_hi = mid;
            }
            Some(pt) => {
                let dphi = pt.grad.dot(dir);
                if strong_ok(mid, pt.value, dphi) || approx_ok(pt.value, dphi) {
                    return Some(pt);
                }
                note_best(&pt, &mut best);
                if pt.value > f0 + WOLFE_C1 * mid * dphi0 + eps_f || dphi >= 0.0 {
                    alpha_hi = mid;
                } else {
                    alpha_lo = mid;
                }
            }
        }
    }
    // fall back to the best point that at least decreased the value
    best.filter(|pt| pt.value < f0)
}

fn frob_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
