//! Hand-checked 6x6 reference data shared by the test suites.
//!
//! `covariance_six` and `precision_six` are exact inverses of each other
//! (the precision entries are integers over 21540), and both are subordinate
//! to `two_clique_graph`. `sample_covariance_six` is a recorded n=100 sample
//! covariance drawn from `covariance_six`, and `reference_estimate_six` is
//! the doubly sparse estimate a constrained fit reached on it, both rounded
//! to three decimals.

use crate::graph::ChordalGraph;
use crate::matrix::SymMatrix;

/// Six vertices, maximal cliques {0,1,2,3} and {2,3,4,5}, separator {2,3}.
pub fn two_clique_graph() -> ChordalGraph {
    let edges = [
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 3),
        (2, 4),
        (2, 5),
        (3, 4),
        (3, 5),
        (4, 5),
    ];
    ChordalGraph::from_edges(6, &edges).expect("fixture graph is chordal")
}

/// SPD covariance subordinate to the two-clique pattern whose inverse is
/// subordinate to the same pattern.
pub fn covariance_six() -> SymMatrix {
    SymMatrix::from_rows(&[
        vec![13.0, 8.0, 4.0, 2.0, 0.0, 0.0],
        vec![8.0, 13.0, 2.0, 1.0, 0.0, 0.0],
        vec![4.0, 2.0, 10.0, 6.0, 1.0, 1.0],
        vec![2.0, 1.0, 6.0, 13.0, 10.0, 10.0],
        vec![0.0, 0.0, 1.0, 10.0, 13.0, 8.0],
        vec![0.0, 0.0, 1.0, 10.0, 8.0, 13.0],
    ])
    .expect("fixture matrix is symmetric")
}

/// Exact inverse of `covariance_six`: integer entries divided by 21540.
pub fn precision_six() -> SymMatrix {
    let ints: [[f64; 6]; 6] = [
        [2960.0, -1690.0, -900.0, 90.0, 0.0, 0.0],
        [-1690.0, 2675.0, 150.0, -15.0, 0.0, 0.0],
        [-900.0, 150.0, 8715.0, -12180.0, 5385.0, 5385.0],
        [90.0, -15.0, -12180.0, 23835.0, -10770.0, -10770.0],
        [0.0, 0.0, 5385.0, -10770.0, 7539.0, 3231.0],
        [0.0, 0.0, 5385.0, -10770.0, 3231.0, 7539.0],
    ];
    let rows: Vec<Vec<f64>> = ints
        .iter()
        .map(|r| r.iter().map(|v| v / 21540.0).collect())
        .collect();
    SymMatrix::from_rows(&rows).expect("fixture matrix is symmetric")
}

/// Sample covariance of n=100 draws from `covariance_six`, to three decimals.
/// Not subordinate to the pattern (sampling noise fills every entry).
pub fn sample_covariance_six() -> SymMatrix {
    SymMatrix::from_rows(&[
        vec![16.703, 8.774, 4.113, 2.629, -0.25, 1.16],
        vec![8.774, 11.559, 1.92, 0.01, -1.605, -0.854],
        vec![4.113, 1.92, 10.07, 5.813, 1.245, 0.947],
        vec![2.629, 0.01, 5.813, 12.424, 10.227, 9.68],
        vec![-0.25, -1.605, 1.245, 10.227, 13.958, 7.88],
        vec![1.16, -0.854, 0.947, 9.68, 7.88, 13.345],
    ])
    .expect("fixture matrix is symmetric")
}

/// Doubly sparse constrained fit to `sample_covariance_six`, to three
/// decimals. Used as a likelihood yardstick, not as an exact target.
pub fn reference_estimate_six() -> SymMatrix {
    SymMatrix::from_rows(&[
        vec![37.126, 16.09, 2.384, 1.175, 0.0, 0.0],
        vec![16.09, 26.676, 1.477, 0.728, 0.0, 0.0],
        vec![2.384, 1.477, 10.933, 2.507, -2.974, -2.811],
        vec![1.175, 0.728, 2.507, 6.07, 4.989, 4.715],
        vec![0.0, 0.0, -2.974, 4.989, 18.091, 5.179],
        vec![0.0, 0.0, -2.811, 4.715, 5.179, 18.607],
    ])
    .expect("fixture matrix is symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The pair really is a matrix and its inverse, and both sides follow
    /// the pattern. Dense inversion is the oracle.
    #[test]
    fn covariance_and_precision_are_exact_inverses() {
        let v = covariance_six().into_dmatrix();
        let theta = precision_six().into_dmatrix();
        let prod = &v * &theta;
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (prod[(i, j)] - expect).abs() < 1e-12,
                    "product deviates at ({i}, {j}): {}",
                    prod[(i, j)]
                );
            }
        }
    }

    #[test]
    fn both_sides_follow_the_pattern() {
        let g = two_clique_graph();
        assert!(crate::graph::pattern_subordinate(&covariance_six(), &g, 0.0).unwrap());
        assert!(crate::graph::pattern_subordinate(&precision_six(), &g, 0.0).unwrap());
        assert!(
            !crate::graph::pattern_subordinate(&sample_covariance_six(), &g, 0.0).unwrap()
        );
        assert!(crate::graph::pattern_subordinate(&reference_estimate_six(), &g, 0.0).unwrap());
    }

    #[test]
    fn fixture_matrices_are_positive_definite() {
        for m in [
            covariance_six(),
            precision_six(),
            sample_covariance_six(),
            reference_estimate_six(),
        ] {
            assert!(m.into_dmatrix().cholesky().is_some());
        }
    }
}
