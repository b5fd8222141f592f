use serde::{Deserialize, Serialize};

use super::matrix::{Matrix, SymMatrix};

/// Eigenvalues sorted ascending; always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn from_unsorted(mut values: Vec<f64>) -> Spectrum {
        assert!(!values.is_empty() && values.iter().all(|v| v.is_finite()));
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Spectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// max - min; 0 for a singleton.
    pub fn spread(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }

    /// Smallest gap between consecutive eigenvalues; +inf for a singleton.
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Spectral factorization `A = V diag(spectrum) V^T`, eigenvector in column
/// `k` for eigenvalue `k` (ascending order).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub spectrum: Spectrum,
    pub vectors: Matrix,
}

const MAX_JACOBI_SWEEPS: usize = 100;

/// Cyclic Jacobi with accumulated rotations. Sweeps stop once the
/// off-diagonal Frobenius mass drops below 1e-14 of the matrix norm.
/// Deterministic: identical input bits give identical output bits.
pub fn sym_eigen(a: &SymMatrix) -> EigenDecomposition {
    let n = a.order();
    let mut m = a.to_dense();
    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let stop = 1e-14 * norm;

    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_diag_mass(&m) <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new_col, v.get(row, old_col));
        }
    }
    EigenDecomposition { spectrum: Spectrum::from_unsorted(values), vectors }
}

fn off_diag_mass(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m.get(i, j) * m.get(i, j);
            }
        }
    }
    s.sqrt()
}

/// One two-sided rotation in the (p,q) plane annihilating m[p][q].
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    if apq == 0.0 {
        return;
    }
    let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = m.rows();

    for k in 0..n {
        let mkp = m.get(k, p);
        let mkq = m.get(k, q);
        m.set(k, p, c * mkp - s * mkq);
        m.set(k, q, s * mkp + c * mkq);
    }
    for k in 0..n {
        let mpk = m.get(p, k);
        let mqk = m.get(q, k);
        m.set(p, k, c * mpk - s * mqk);
        m.set(q, k, s * mpk + c * mqk);
    }
    // Force the annihilated pair to exact zero; rounding would otherwise
    // leave ~1e-17 residue that slows the sweep count.
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}
