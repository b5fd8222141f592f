//! Dense symmetric linear algebra: storage, a cyclic Jacobi eigensolver,
//! operator norms, commutators, and Hausdorff distance between spectra.
//! Everything is deterministic and allocation-simple; orders stay small
//! (tens), so O(n^3) dense kernels are the right tool.

mod eigen;
mod matrix;

pub use eigen::{sym_eigen, EigenDecomposition, Spectrum};
pub use matrix::{Matrix, MatrixError, SymMatrix};

/// Spectral norm `max |eigenvalue|`.
pub fn operator_norm(a: &SymMatrix) -> f64 {
    let spectrum = sym_eigen(a).spectrum;
    let values = spectrum.values();
    values[0].abs().max(values[values.len() - 1].abs())
}

/// `XA - AX`; skew-symmetric when both arguments are symmetric.
pub fn commutator(x: &SymMatrix, a: &SymMatrix) -> Result<Matrix, MatrixError> {
    if x.order() != a.order() {
        return Err(MatrixError::OrderMismatch(x.order(), a.order()));
    }
    let (xd, ad) = (x.to_dense(), a.to_dense());
    Ok(xd.matmul(&ad).sub(&ad.matmul(&xd)))
}

/// Diagonals of `A^0, A^1, ..., A^(k_max-1)`; row `k` is `diag(A^k)`.
/// These are the rows of the power-sum Jacobian in the diagonal unknowns.
pub fn power_diagonals(a: &SymMatrix, k_max: usize) -> Vec<Vec<f64>> {
    let n = a.order();
    let ad = a.to_dense();
    let mut power = Matrix::identity(n);
    let mut out = Vec::with_capacity(k_max);
    for k in 0..k_max {
        if k > 0 {
            power = power.matmul(&ad);
        }
        out.push((0..n).map(|i| power.get(i, i)).collect());
    }
    out
}

/// Hausdorff distance between two finite point sets on the line.
pub fn hausdorff_distance(a: &[f64], b: &[f64]) -> Result<f64, MatrixError> {
    if a.is_empty() || b.is_empty() {
        return Err(MatrixError::EmptySet);
    }
    let directed = |from: &[f64], to: &[f64]| -> f64 {
        from.iter()
            .map(|x| to.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn three_by_three() -> SymMatrix {
        SymMatrix::from_rows(&[
            vec![4.0, 0.0, 1.0],
            vec![0.0, 3.0, 0.0],
            vec![1.0, 0.0, 2.0],
        ])
        .unwrap()
    }

    #[test]
    fn eigen_of_arrow_matrix() {
        // Exact spectrum: {3 - sqrt(2), 3, 3 + sqrt(2)}.
        let eig = sym_eigen(&three_by_three());
        let expect = [3.0 - 2f64.sqrt(), 3.0, 3.0 + 2f64.sqrt()];
        for (got, want) in eig.spectrum.values().iter().zip(expect) {
            assert!((got - want).abs() <= 1e-13, "got {got}, want {want}");
        }
    }

    #[test]
    fn eigen_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..100 {
            let n = rng.gen_range(1..=20);
            let mut a = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    a.set(i, j, rng.gen_range(-5.0..5.0));
                }
            }
            let eig = sym_eigen(&a);
            let v = &eig.vectors;
            let gram = v.transpose().matmul(v).sub(&Matrix::identity(n));
            assert!(gram.max_abs() <= 1e-12 * n as f64, "trial {trial}: V not orthogonal");

            let mut lam = Matrix::zeros(n, n);
            for (i, &e) in eig.spectrum.values().iter().enumerate() {
                lam.set(i, i, e);
            }
            let recon = v.matmul(&lam).matmul(&v.transpose());
            let err = recon.sub(&a.to_dense()).max_abs();
            let scale = (n as f64) * operator_norm(&a).max(1.0);
            assert!(err <= 1e-10 * scale, "trial {trial}: reconstruction error {err}");

            let sorted = eig.spectrum.values();
            assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eigen_is_deterministic() {
        let a = three_by_three();
        let e1 = sym_eigen(&a);
        let e2 = sym_eigen(&a);
        assert_eq!(e1.spectrum.values(), e2.spectrum.values());
        assert_eq!(e1.vectors, e2.vectors);
    }

    #[test]
    fn operator_norm_of_arrow_matrix() {
        let got = operator_norm(&three_by_three());
        assert!((got - (3.0 + 2f64.sqrt())).abs() <= 1e-13);
    }

    #[test]
    fn operator_norm_order_one() {
        assert_eq!(operator_norm(&SymMatrix::diag(&[-2.5]).unwrap()), 2.5);
    }

    #[test]
    fn commutator_is_skew() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let mut x = SymMatrix::zeros(n);
            let mut a = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    x.set(i, j, rng.gen_range(-1.0..1.0));
                    a.set(i, j, rng.gen_range(-1.0..1.0));
                }
            }
            let c = commutator(&x, &a).unwrap();
            let skew = c.transpose().sub(&c);
            for i in 0..n {
                for j in 0..n {
                    let want = -2.0 * c.get(i, j);
                    assert!((skew.get(i, j) - want).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn commutator_order_mismatch() {
        let x = SymMatrix::zeros(2);
        let a = SymMatrix::zeros(3);
        assert_eq!(commutator(&x, &a).unwrap_err(), MatrixError::OrderMismatch(2, 3));
    }

    #[test]
    fn power_diagonals_of_arrow_matrix() {
        // A^0, A^1, A^2 diagonals computed by hand.
        let rows = power_diagonals(&three_by_three(), 3);
        assert_eq!(rows[0], vec![1.0, 1.0, 1.0]);
        assert_eq!(rows[1], vec![4.0, 3.0, 2.0]);
        assert_eq!(rows[2], vec![17.0, 9.0, 5.0]);
    }

    #[test]
    fn hausdorff_point_vs_harmonic() {
        let a = [0.0];
        let b: Vec<f64> = (1..=10).map(|k| 1.0 / k as f64).collect();
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn hausdorff_symmetry_and_identity() {
        let a = [0.5, 1.5, -3.0];
        let b = [0.25, 2.0];
        let d1 = hausdorff_distance(&a, &b).unwrap();
        let d2 = hausdorff_distance(&b, &a).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        assert!(hausdorff_distance(&[], &a).is_err());
    }

    #[test]
    fn negative_zero_is_normalized() {
        let mut m = SymMatrix::zeros(2);
        m.set(0, 1, -0.0);
        assert!(m.get(0, 1).to_bits() == 0.0f64.to_bits());
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(SymMatrix::diag(&[]).is_err());
        assert!(SymMatrix::diag(&[f64::NAN]).is_err());
        assert!(SymMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![0.0, 1.0]]).is_err());
    }
}
