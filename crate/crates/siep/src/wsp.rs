//! Decides the commutant non-degeneracy condition: a symmetric matrix `A`
//! passes when `X = O` is the only symmetric matrix with zero diagonal
//! commuting with `A`. The condition is linear in `X`, so the verdict is a
//! kernel computation on an `m x m` constraint matrix, `m = n(n-1)/2`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{sym_eigen, Matrix, SymMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum WspError {
    #[error("constraint matrix needs order >= 2, got {0}")]
    OrderTooSmall(usize),
}

pub const DEFAULT_WSP_TOL: f64 = 1e-9;

/// Verdict plus the numbers needed to audit it. The singular-value gap
/// (smallest kept vs largest dropped) makes borderline decisions visible;
/// sides without a value (order 1, or empty kept/dropped sets) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WspCertificate {
    pub holds: bool,
    pub kernel_dimension: usize,
    /// Zero-diagonal, unit-Frobenius commuting direction; present iff the
    /// property fails.
    pub witness: Option<SymMatrix>,
    pub smallest_kept_singular_value: Option<f64>,
    pub largest_dropped_singular_value: Option<f64>,
}

/// Strictly-upper index pairs of an order-n matrix in lexicographic order;
/// fixes the row/column convention shared by the floating-point and exact
/// constraint systems.
pub(crate) fn pair_positions(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Coefficient matrix of the map `X -> strict upper triangle of [X, A]`
/// restricted to zero-diagonal symmetric `X`. Columns are the unknowns
/// `x_pq` (p<q); rows are the entries `[X,A]_ij` (i<j). The strict upper
/// triangle suffices because `[X, A]` is skew-symmetric.
pub fn wsp_constraint_matrix(a: &SymMatrix) -> Result<Matrix, WspError> {
    let n = a.order();
    if n < 2 {
        return Err(WspError::OrderTooSmall(n));
    }
    let pairs = pair_positions(n);
    let m = pairs.len();
    let mut c = Matrix::zeros(m, m);
    for (row, &(i, j)) in pairs.iter().enumerate() {
        for (col, &(p, q)) in pairs.iter().enumerate() {
            let mut v = 0.0;
            if i == p {
                v += a.get(q, j);
            }
            if i == q {
                v += a.get(p, j);
            }
            if j == q {
                v -= a.get(i, p);
            }
            if j == p {
                v -= a.get(i, q);
            }
            c.set(row, col, v);
        }
    }
    Ok(c)
}

/// Kernel decision with a relative singular-value threshold.
///
/// Singular values come from the symmetric embedding `[[0, C], [C^T, 0]]`,
/// whose eigenvalues are exactly plus/minus the singular values of `C`. This
/// keeps absolute accuracy near machine precision even for exact kernels;
/// eigensolving `C^T C` instead would square the condition and report true
/// zeros around 1e-8 of the largest singular value, above the default
/// threshold.
pub fn has_wsp(a: &SymMatrix, tol: f64) -> WspCertificate {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = a.order();
    if n < 2 {
        // Every 1x1 matrix passes: there is no nonzero zero-diagonal X.
        return WspCertificate {
            holds: true,
            kernel_dimension: 0,
            witness: None,
            smallest_kept_singular_value: None,
            largest_dropped_singular_value: None,
        };
    }
    let c = wsp_constraint_matrix(a).expect("order checked");
    let m = c.rows();

    let mut h = SymMatrix::zeros(2 * m);
    for i in 0..m {
        for j in 0..m {
            h.set(i, m + j, c.get(i, j));
        }
    }
    let eig = sym_eigen(&h);
    let mut abs: Vec<f64> = eig.spectrum.values().iter().map(|v| v.abs()).collect();
    abs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // |eigenvalues| list every singular value twice; take one of each pair.
    let singulars: Vec<f64> = (0..m).map(|k| abs[2 * k]).collect();

    let sigma_max = singulars[m - 1];
    let threshold = tol * if sigma_max > 0.0 { sigma_max } else { 1.0 };
    let kernel_dimension = singulars.iter().filter(|&&s| s <= threshold).count();
    let smallest_kept = singulars.iter().copied().find(|&s| s > threshold);
    let largest_dropped = singulars
        .iter()
        .copied()
        .filter(|&s| s <= threshold)
        .last();

    let witness = if kernel_dimension > 0 {
        Some(witness_from_embedding(&eig.vectors, &eig.spectrum, m, threshold, n))
    } else {
        None
    };

    WspCertificate {
        holds: kernel_dimension == 0,
        kernel_dimension,
        witness,
        smallest_kept_singular_value: smallest_kept,
        largest_dropped_singular_value: largest_dropped,
    }
}

/// Builds a unit-Frobenius witness from the small-eigenvalue subspace of the
/// embedding. Eigenvectors there split as (u, v) with C v ~ 0; the basis
/// vector with the largest bottom half has bottom norm^2 >= 1/2, so the
/// extracted v is well-scaled.
fn witness_from_embedding(
    vectors: &Matrix,
    spectrum: &crate::linalg::Spectrum,
    m: usize,
    threshold: f64,
    n: usize,
) -> SymMatrix {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for (col, &lam) in spectrum.values().iter().enumerate() {
        if lam.abs() > threshold {
            continue;
        }
        let full = vectors.column(col);
        let bottom: Vec<f64> = full[m..].to_vec();
        let norm2 = bottom.iter().map(|x| x * x).sum::<f64>();
        if best.as_ref().map_or(true, |(b, _)| norm2 > *b) {
            best = Some((norm2, bottom));
        }
    }
    let (_, v) = best.expect("kernel nonempty");
    let mut x = SymMatrix::zeros(n);
    for (idx, &(p, q)) in pair_positions(n).iter().enumerate() {
        x.set(p, q, v[idx]);
    }
    let fro = x.frobenius_norm();
    let mut unit = SymMatrix::zeros(n);
    for &(p, q) in &pair_positions(n) {
        unit.set(p, q, x.get(p, q) / fro);
    }
    unit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, operator_norm};
    use crate::oracle::wsp_exact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn arrow_matrix() -> SymMatrix {
        SymMatrix::from_rows(&[
            vec![4.0, 0.0, 1.0],
            vec![0.0, 3.0, 0.0],
            vec![1.0, 0.0, 2.0],
        ])
        .unwrap()
    }

    fn ladder_matrix() -> SymMatrix {
        SymMatrix::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn constraint_matrix_two_by_two() {
        let c = wsp_constraint_matrix(&SymMatrix::diag(&[1.0, 2.0]).unwrap()).unwrap();
        assert_eq!((c.rows(), c.cols()), (1, 1));
        assert_eq!(c.get(0, 0), 1.0); // (XA - AX)_01 = x01 * (a11 - a00)

        let scalar = wsp_constraint_matrix(&SymMatrix::diag(&[1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(scalar.get(0, 0), 0.0);
    }

    #[test]
    fn constraint_matrix_rejects_order_one() {
        let a = SymMatrix::diag(&[3.0]).unwrap();
        assert_eq!(wsp_constraint_matrix(&a).unwrap_err(), WspError::OrderTooSmall(1));
        assert!(has_wsp(&a, DEFAULT_WSP_TOL).holds);
    }

    #[test]
    fn arrow_matrix_passes() {
        let cert = has_wsp(&arrow_matrix(), DEFAULT_WSP_TOL);
        assert!(cert.holds);
        assert_eq!(cert.kernel_dimension, 0);
        assert!(cert.witness.is_none());
        assert!(cert.smallest_kept_singular_value.unwrap() > 0.0);
    }

    #[test]
    fn tridiagonal_counterexample_fails_with_witness() {
        let b = ladder_matrix();
        let cert = has_wsp(&b, DEFAULT_WSP_TOL);
        assert!(!cert.holds);
        assert_eq!(cert.kernel_dimension, 1);
        let w = cert.witness.unwrap();
        for i in 0..3 {
            assert_eq!(w.get(i, i), 0.0);
        }
        assert!((w.frobenius_norm() - 1.0).abs() <= 1e-12);
        // Kernel direction is (1,1,-1)/sqrt(6) in (x01,x02,x12) up to sign.
        let e = 1.0 / 6f64.sqrt();
        assert!((w.get(0, 1).abs() - e).abs() <= 1e-9);
        assert!((w.get(0, 2).abs() - e).abs() <= 1e-9);
        assert!((w.get(1, 2).abs() - e).abs() <= 1e-9);
        assert!(w.get(0, 1) * w.get(1, 2) < 0.0);

        let residual = commutator(&w, &b).unwrap().max_abs();
        assert!(residual <= 1e-8 * operator_norm(&b).max(1.0));
    }

    #[test]
    fn two_by_two_characterization() {
        let distinct = SymMatrix::from_rows(&[vec![1.0, 5.0], vec![5.0, 2.0]]).unwrap();
        assert!(has_wsp(&distinct, DEFAULT_WSP_TOL).holds);
        let equal = SymMatrix::from_rows(&[vec![2.0, 7.0], vec![7.0, 2.0]]).unwrap();
        let cert = has_wsp(&equal, DEFAULT_WSP_TOL);
        assert!(!cert.holds);
        assert_eq!(cert.kernel_dimension, 1);
    }

    #[test]
    fn shift_invariance_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(2..=5);
            let mut a = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    a.set(i, j, rng.gen_range(-3.0..3.0));
                }
            }
            let c: f64 = rng.gen_range(-10.0..10.0);
            let mut shifted = a.clone();
            for i in 0..n {
                shifted.set(i, i, a.get(i, i) + c);
            }
            assert_eq!(
                has_wsp(&a, DEFAULT_WSP_TOL).holds,
                has_wsp(&shifted, DEFAULT_WSP_TOL).holds
            );
        }
    }

    #[test]
    fn agrees_with_exact_oracle_on_integer_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..60 {
            let n = rng.gen_range(2..=6);
            let mut a = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    a.set(i, j, rng.gen_range(-3i64..=3) as f64);
                }
            }
            let cert = has_wsp(&a, DEFAULT_WSP_TOL);
            let (exact_dim, _) = wsp_exact(&a).unwrap();
            assert_eq!(cert.kernel_dimension, exact_dim, "matrix {a:?}");
        }
    }

    #[test]
    fn singular_value_gap_is_recorded() {
        let cert = has_wsp(&ladder_matrix(), DEFAULT_WSP_TOL);
        let kept = cert.smallest_kept_singular_value.unwrap();
        let dropped = cert.largest_dropped_singular_value.unwrap();
        assert!(dropped < 1e-12 * kept, "gap should be enormous: {dropped} vs {kept}");

        let scalar22 = SymMatrix::diag(&[1.0, 1.0]).unwrap();
        let cert = has_wsp(&scalar22, DEFAULT_WSP_TOL);
        assert!(cert.smallest_kept_singular_value.is_none());
        assert_eq!(cert.largest_dropped_singular_value, Some(0.0));
    }
}
