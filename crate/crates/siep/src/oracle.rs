//! Independent brute-force verifiers: exact rational elimination for the
//! commutant kernel and characteristic-polynomial spectrum checks. These
//! share no code path with the floating-point verdicts they audit.

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg::{Matrix, Spectrum, SymMatrix};
use crate::wsp::pair_positions;

/// Reduced fraction with big-integer parts; denominator kept positive by
/// the underlying representation.
pub type Rational = BigRational;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("order {0} exceeds the exact-arithmetic limit {1}")]
    OrderTooLarge(usize, usize),
    #[error("entry ({0},{1}) is not representable as a rational")]
    NonRational(usize, usize),
}

/// Zero-diagonal symmetric matrix with exact rational entries, stored as the
/// strictly-upper entries in lexicographic pair order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactKernelElement {
    n: usize,
    upper: Vec<Rational>,
}

impl ExactKernelElement {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        if i == j {
            return Rational::zero();
        }
        let (p, q) = if i < j { (i, j) } else { (j, i) };
        let idx = pair_positions(self.n)
            .iter()
            .position(|&pq| pq == (p, q))
            .expect("pair in range");
        self.upper[idx].clone()
    }

    pub fn upper_entries(&self) -> &[Rational] {
        &self.upper
    }

    pub fn to_f64_matrix(&self) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.n);
        for (idx, &(p, q)) in pair_positions(self.n).iter().enumerate() {
            m.set(p, q, self.upper[idx].to_f64().expect("finite"));
        }
        m
    }
}

const WSP_EXACT_MAX_ORDER: usize = 8;

/// Exact kernel of the commutant constraint map: solves `[X, A] = O` over
/// the rationals for zero-diagonal symmetric `X`. No tolerances anywhere.
pub fn wsp_exact(a: &SymMatrix) -> Result<(usize, Vec<ExactKernelElement>), OracleError> {
    let n = a.order();
    if n > WSP_EXACT_MAX_ORDER {
        return Err(OracleError::OrderTooLarge(n, WSP_EXACT_MAX_ORDER));
    }
    if n == 1 {
        return Ok((0, vec![]));
    }
    let entry = |i: usize, j: usize| -> Result<Rational, OracleError> {
        Rational::from_float(a.get(i, j)).ok_or(OracleError::NonRational(i, j))
    };

    // Same row/column convention as the floating-point constraint matrix:
    // rows are strictly-upper commutator entries, columns the unknowns x_pq.
    let pairs = pair_positions(n);
    let m = pairs.len();
    let mut rows: Vec<Vec<Rational>> = vec![vec![Rational::zero(); m]; m];
    for (r, &(i, j)) in pairs.iter().enumerate() {
        for (c, &(p, q)) in pairs.iter().enumerate() {
            let mut v = Rational::zero();
            if i == p {
                v += entry(q, j)?;
            }
            if i == q {
                v += entry(p, j)?;
            }
            if j == q {
                v -= entry(i, p)?;
            }
            if j == p {
                v -= entry(i, q)?;
            }
            rows[r][c] = v;
        }
    }

    let basis_vectors = rational_nullspace(&mut rows, m);
    let basis = basis_vectors
        .into_iter()
        .map(|upper| ExactKernelElement { n, upper })
        .collect::<Vec<_>>();
    Ok((basis.len(), basis))
}

/// Reduced row echelon form in place, then nullspace basis vectors with the
/// leading nonzero entry normalized to 1.
fn rational_nullspace(rows: &mut [Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut pivot_cols = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot_row) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let inv = rows[rank][col].clone();
        for c in col..cols {
            let v = rows[rank][c].clone() / inv.clone();
            rows[rank][c] = v;
        }
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in col..cols {
                    let delta = factor.clone() * rows[rank][c].clone();
                    rows[r][c] -= delta;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }

    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::with_capacity(free_cols.len());
    for &free in &free_cols {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -rows[r][free].clone();
        }
        let lead = v.iter().find(|x| !x.is_zero()).cloned().unwrap();
        for x in &mut v {
            let scaled = x.clone() / lead.clone();
            *x = scaled;
        }
        basis.push(v);
    }
    basis
}

const CHARPOLY_MAX_ORDER: usize = 12;

/// Monic characteristic polynomial coefficients `[c_0, ..., c_{n-1}, 1]` of
/// `det(tI - A)` via the Leverrier-Faddeev recursion, traces taken with
/// compensated summation.
pub fn charpoly_coefficients(a: &SymMatrix) -> Result<Vec<f64>, OracleError> {
    let n = a.order();
    if n > CHARPOLY_MAX_ORDER {
        return Err(OracleError::OrderTooLarge(n, CHARPOLY_MAX_ORDER));
    }
    let ad = a.to_dense();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = Matrix::identity(n);
    for k in 1..=n {
        m = ad.matmul(&m);
        let c = -compensated_trace(&m) / k as f64;
        coeffs[n - k] = c;
        for i in 0..n {
            m.set(i, i, m.get(i, i) + c);
        }
    }
    Ok(coeffs)
}

fn compensated_trace(m: &Matrix) -> f64 {
    // Kahan summation over the diagonal.
    let mut sum = 0.0;
    let mut carry = 0.0;
    for i in 0..m.rows() {
        let y = m.get(i, i) - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn horner_derivative(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for k in (1..coeffs.len()).rev() {
        acc = acc * t + coeffs[k] * k as f64;
    }
    acc
}

/// Audits a claimed spectrum against the characteristic polynomial:
/// each claimed eigenvalue must be a root up to backward error
/// `|p(x)| <= tol * derivative scale`, and p must alternate sign across the
/// midpoints of well-separated consecutive claims.
pub fn charpoly_spectrum_check(
    a: &SymMatrix,
    claimed: &Spectrum,
    tol: f64,
) -> Result<bool, OracleError> {
    assert!(tol > 0.0);
    let n = a.order();
    if claimed.len() != n {
        return Ok(false);
    }
    let coeffs = charpoly_coefficients(a)?;
    let values = claimed.values();

    let coeff_scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for &lam in values {
        let p = horner(&coeffs, lam);
        let dp = horner_derivative(&coeffs, lam);
        // Floor the derivative scale so exact zeros of p' (would only arise
        // from repeated roots) cannot force a spurious rejection.
        let scale = dp.abs().max(1e-3 * coeff_scale.max(1.0));
        if p.abs() > tol * scale {
            return Ok(false);
        }
    }

    let spread = values[n - 1] - values[0];
    for i in 0..n.saturating_sub(1) {
        let gap = values[i + 1] - values[i];
        if gap <= 1e-7 * spread.max(1.0) {
            continue; // too tight for a meaningful sign probe
        }
        let mid = 0.5 * (values[i] + values[i + 1]);
        let p = horner(&coeffs, mid);
        // Monic polynomial: sign between claims i and i+1 (0-based) is
        // (-1)^(n-1-i) when all roots are simple.
        let expect_positive = (n - 1 - i) % 2 == 0;
        if p != 0.0 && (p > 0.0) != expect_positive {
            return Ok(false);
        }
    }
    Ok(true)
}
