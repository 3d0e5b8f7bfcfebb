//! Covariance estimation under double sparsity.
//!
//! A symmetric matrix is *subordinate* to a graph when every off-diagonal
//! entry at a non-edge is zero; it is *doubly sparse* when the matrix and
//! its inverse are both subordinate to the same chordal graph. On chordal
//! graphs the inverse, log-determinant, and positive definite completion of
//! such matrices decompose into clique-sized pieces, which this crate uses
//! both as fast linear algebra and as the constraint defining a maximum
//! likelihood covariance estimator:
//!
//! minimize trace(L(M)·S) + log det M over pattern-subordinate SPD M,
//! subject to C = M·L(M) − I = 0,
//!
//! where L is the clique-local inverse formula and S a sample covariance.
//! M is parameterized through a sparse Cholesky factor on the perfect
//! elimination ordering, so subordination and positive definiteness hold by
//! construction, and the constraint is enforced with an augmented
//! Lagrangian.
//!
//! Module map: [`graph`] builds chordal graphs, elimination orderings, and
//! clique trees; [`local`] holds the clique-local formulas and Markov
//! completion; [`cholesky`] the factor parameterization; [`estimator`] the
//! constrained solver and Gaussian simulator; [`dataio`] price panels,
//! index regressions, sector graphs, and file formats; [`patterns`] stock
//! patterns and random instance generators; [`fixtures`] small reference
//! matrices used throughout the tests.

pub mod cholesky;
pub mod dataio;
pub mod error;
pub mod estimator;
pub mod fixtures;
pub mod graph;
pub mod local;
pub mod matrix;
pub mod patterns;

pub use cholesky::SparseCholesky;
pub use error::{Error, Result};
pub use estimator::{
    estimate, objective, objective_gradient, objective_gradient_fd, sample_covariance,
    simulate_gaussian, EstimateResult, EstimatorOptions, GradientMode, OuterIterate,
};
pub use graph::{pattern_subordinate, ChordalGraph, CliqueTree, TreeEdge};
pub use local::{
    constraint_residual, is_doubly_sparse, local_inverse, local_logdet, markov_complete,
    PartialMatrix,
};
pub use matrix::SymMatrix;
