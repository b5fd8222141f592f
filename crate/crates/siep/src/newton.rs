//! The power-sum map `g(M) = (tr M, tr M^2 / 2, ..., tr M^n / n)`, its
//! Jacobian in the diagonal unknowns, and the continuation-Newton solver
//! that restores `g` to a target after off-diagonal entries are frozen in.
//!
//! Matching power sums force a matching characteristic polynomial, hence a
//! matching spectrum, so driving `g` to `powersum_targets(lambda)` is how a
//! prescribed spectrum is restored after a perturbation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{operator_norm, power_diagonals, Matrix, SymMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum NewtonError {
    #[error("eigenvalue targets contain duplicates")]
    DuplicateValues,
    #[error("jacobian numerically singular (condition estimate {estimate:.3e})")]
    JacobianSingular { estimate: f64 },
    #[error("no convergence: residual {residual:.3e} after {iterations} Newton iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("no edge scaling satisfies the norm budget {budget:.3e}")]
    BudgetInfeasible { budget: f64 },
}

/// Right-hand side of the diagonal correction: `p_k = (1/k) sum_i lambda_i^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSumTarget {
    p: Vec<f64>,
}

impl PowerSumTarget {
    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Builds the target vector from pairwise-distinct eigenvalues. The running
/// powers and the summation order mirror `g_eval` exactly, so a diagonal
/// matrix holding `lambdas` has residual zero to the last bit.
pub fn powersum_targets(lambdas: &[f64]) -> Result<PowerSumTarget, NewtonError> {
    assert!(!lambdas.is_empty() && lambdas.iter().all(|v| v.is_finite()));
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(NewtonError::DuplicateValues);
    }
    let n = lambdas.len();
    let mut powers = vec![1.0; n];
    let mut p = Vec::with_capacity(n);
    for k in 1..=n {
        let mut sum = 0.0;
        for (i, &lam) in lambdas.iter().enumerate() {
            powers[i] *= lam;
            sum += powers[i];
        }
        p.push(sum / k as f64);
    }
    Ok(PowerSumTarget { p })
}

/// `g(M)`: component `k` (1-indexed) is `(1/k) tr M^k`.
pub fn g_eval(m: &SymMatrix) -> Vec<f64> {
    let n = m.order();
    let md = m.to_dense();
    let mut power = Matrix::identity(n);
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        power = power.matmul(&md);
        let mut tr = 0.0;
        for i in 0..n {
            tr += power.get(i, i);
        }
        out.push(tr / k as f64);
    }
    out
}

/// Jacobian of `g` in the diagonal entries: row `k` (0-indexed) is
/// `diag(A^k)`, since d/dx_i of (1/k) tr A^k is (A^(k-1))_ii.
pub fn jac_x(a: &SymMatrix) -> Matrix {
    let n = a.order();
    let rows = power_diagonals(a, n);
    let mut j = Matrix::zeros(n, n);
    for (k, row) in rows.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            j.set(k, i, v);
        }
    }
    j
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Max-norm residual required of `g - target`.
    pub tol: f64,
    /// Newton iteration cap per continuation step.
    pub max_iterations: usize,
    /// Accepted continuation points cap.
    pub max_continuation_steps: usize,
    /// Condition-estimate ceiling before the Jacobian counts as singular.
    pub condition_limit: f64,
}

impl Default for NewtonOptions {
    fn default() -> NewtonOptions {
        NewtonOptions {
            tol: 1e-12,
            max_iterations: 50,
            max_continuation_steps: 60,
            condition_limit: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    pub converged: bool,
    /// Total Newton iterations across all continuation points.
    pub iterations: usize,
    /// Max-norm of `g - target` at the returned matrix.
    pub final_residual: f64,
    /// Largest condition estimate seen in any accepted Newton solve.
    pub jacobian_condition_estimate: f64,
    pub continuation_steps: usize,
}

impl NewtonReport {
    /// Report for a step that needed no solving (already exact).
    pub(crate) fn trivial(final_residual: f64) -> NewtonReport {
        NewtonReport {
            converged: true,
            iterations: 0,
            final_residual,
            jacobian_condition_estimate: 1.0,
            continuation_steps: 0,
        }
    }
}

/// Corrects the diagonal of `a0` so that `g` hits `target`, keeping every
/// off-diagonal entry of `a0` frozen. The entries at `new_edges` are walked
/// in by a shared continuation factor `s`: they start at zero (where the
/// diagonal `a0` carries is already a solution) and grow toward the values
/// stored in `a0`, with full Newton solves on the diagonal at each accepted
/// `s` and step halving on failure.
///
/// When `norm_budget` is given, the operator-norm distance from the
/// reference (a0 with new edges zeroed) is enforced by halving the final
/// `s` target until the budget holds; the returned new-edge values are then
/// `s * a0[edge]`.
pub fn solve_diagonal_correction(
    a0: &SymMatrix,
    new_edges: &[(usize, usize)],
    target: &PowerSumTarget,
    norm_budget: Option<f64>,
    opts: &NewtonOptions,
) -> Result<(SymMatrix, NewtonReport), NewtonError> {
    let n = a0.order();
    assert_eq!(target.len(), n, "target length must match order");
    if let Some(b) = norm_budget {
        assert!(b > 0.0);
    }

    let mut reference = a0.clone();
    for &(i, j) in new_edges {
        assert!(i < j && j < n, "new edge ({i},{j}) out of range");
        reference.set(i, j, 0.0);
    }

    if new_edges.is_empty() {
        let mut m = a0.clone();
        let mut report = NewtonReport::trivial(0.0);
        newton_run(&mut m, target, opts, &mut report)?;
        if let Some(b) = norm_budget {
            if !(operator_norm(&m.sub(&reference).expect("same order")) < b) {
                return Err(NewtonError::BudgetInfeasible { budget: b });
            }
        }
        return Ok((m, report));
    }

    let hats: Vec<f64> = new_edges.iter().map(|&(i, j)| a0.get(i, j)).collect();
    let mut s_target = 1.0f64;
    loop {
        let mut report = NewtonReport::trivial(0.0);
        let m = continuation_walk(&reference, new_edges, &hats, target, s_target, opts, &mut report)?;
        match norm_budget {
            None => return Ok((m, report)),
            Some(b) => {
                let delta = operator_norm(&m.sub(&reference).expect("same order"));
                if delta < b {
                    return Ok((m, report));
                }
                s_target /= 2.0;
                if s_target < 2f64.powi(-20) {
                    return Err(NewtonError::BudgetInfeasible { budget: b });
                }
            }
        }
    }
}

/// Walks s from 0 to `s_target` with adaptive halving; `m` starts at the
/// reference, whose diagonal solves the s=0 system by construction.
fn continuation_walk(
    reference: &SymMatrix,
    new_edges: &[(usize, usize)],
    hats: &[f64],
    target: &PowerSumTarget,
    s_target: f64,
    opts: &NewtonOptions,
    report: &mut NewtonReport,
) -> Result<SymMatrix, NewtonError> {
    let mut m = reference.clone();
    let mut last_good = m.clone();
    let mut s = 0.0f64;
    let mut h = s_target;
    let min_h = s_target * 2f64.powi(-30);

    newton_run(&mut m, target, opts, report)?;
    last_good.clone_from(&m);

    while s < s_target {
        let trial = (s + h).min(s_target);
        for (k, &(i, j)) in new_edges.iter().enumerate() {
            m.set(i, j, trial * hats[k]);
        }
        match newton_run(&mut m, target, opts, report) {
            Ok(()) => {
                s = trial;
                last_good.clone_from(&m);
                report.continuation_steps += 1;
                if report.continuation_steps > opts.max_continuation_steps {
                    return Err(NewtonError::NoConvergence {
                        residual: report.final_residual,
                        iterations: report.iterations,
                    });
                }
            }
            Err(e @ NewtonError::JacobianSingular { .. }) if h <= min_h => return Err(e),
            Err(NewtonError::NoConvergence { residual, iterations }) if h <= min_h => {
                return Err(NewtonError::NoConvergence { residual, iterations });
            }
            Err(_) => {
                h /= 2.0;
                m.clone_from(&last_good);
                if h < min_h {
                    return Err(NewtonError::NoConvergence {
                        residual: report.final_residual,
                        iterations: report.iterations,
                    });
                }
            }
        }
    }
    Ok(m)
}

/// Full Newton on the diagonal of `m` in place. On failure `m` is left at
/// the failed iterate; callers roll back.
fn newton_run(
    m: &mut SymMatrix,
    target: &PowerSumTarget,
    opts: &NewtonOptions,
    report: &mut NewtonReport,
) -> Result<(), NewtonError> {
    let n = m.order();
    for iter in 0..=opts.max_iterations {
        let g = g_eval(m);
        let mut residual = 0.0f64;
        let mut rhs = vec![0.0; n];
        for k in 0..n {
            rhs[k] = target.values()[k] - g[k];
            residual = residual.max(rhs[k].abs());
        }
        report.final_residual = residual;
        if residual <= opts.tol {
            report.converged = true;
            polish(m, target, report);
            return Ok(());
        }
        if iter == opts.max_iterations {
            break;
        }
        let j = jac_x(m);
        let (delta, cond) = lu_solve(&j, &rhs).ok_or(NewtonError::JacobianSingular {
            estimate: f64::INFINITY,
        })?;
        if cond > opts.condition_limit {
            return Err(NewtonError::JacobianSingular { estimate: cond });
        }
        report.jacobian_condition_estimate = report.jacobian_condition_estimate.max(cond);
        for i in 0..n {
            m.set(i, i, m.get(i, i) + delta[i]);
        }
        report.iterations += 1;
    }
    report.converged = false;
    Err(NewtonError::NoConvergence {
        residual: report.final_residual,
        iterations: report.iterations,
    })
}

/// Up to two extra Newton steps after the stopping test fires, each kept
/// only if it strictly reduces the residual. Stopping at the threshold
/// alone leaves an O(tol * cond(J)) error in the diagonal, which on
/// clustered spectra eats into the norm budgets; one more quadratic step
/// lands at the rounding floor of g_eval instead. Never fails — any
/// trouble keeps the current iterate.
fn polish(m: &mut SymMatrix, target: &PowerSumTarget, report: &mut NewtonReport) {
    let n = m.order();
    for _ in 0..2 {
        if report.final_residual == 0.0 {
            return;
        }
        let g = g_eval(m);
        let mut rhs = vec![0.0; n];
        for k in 0..n {
            rhs[k] = target.values()[k] - g[k];
        }
        let Some((delta, _)) = lu_solve(&jac_x(m), &rhs) else { return };
        let saved: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        if delta.iter().zip(&saved).any(|(d, s)| !(d + s).is_finite()) {
            return;
        }
        for i in 0..n {
            m.set(i, i, saved[i] + delta[i]);
        }
        let g2 = g_eval(m);
        let mut residual = 0.0f64;
        for k in 0..n {
            residual = residual.max((target.values()[k] - g2[k]).abs());
        }
        if residual < report.final_residual {
            report.final_residual = residual;
            report.iterations += 1;
        } else {
            for i in 0..n {
                m.set(i, i, saved[i]);
            }
            return;
        }
    }
}

/// Partial-pivot LU solve; returns the solution and a cheap condition
/// estimate (ratio of extreme pivot magnitudes). None on an exactly zero
/// pivot.
fn lu_solve(a: &Matrix, b: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n = a.rows();
    assert_eq!(a.cols(), n);
    assert_eq!(b.len(), n);
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let mut pivot_max = 0.0f64;
    let mut pivot_min = f64::INFINITY;

    for col in 0..n {
        let mut best = col;
        for row in (col + 1)..n {
            if lu.get(row, col).abs() > lu.get(best, col).abs() {
                best = row;
            }
        }
        if lu.get(best, col) == 0.0 {
            return None;
        }
        if best != col {
            for j in 0..n {
                let tmp = lu.get(col, j);
                lu.set(col, j, lu.get(best, j));
                lu.set(best, j, tmp);
            }
            x.swap(col, best);
        }
        let pivot = lu.get(col, col);
        pivot_max = pivot_max.max(pivot.abs());
        pivot_min = pivot_min.min(pivot.abs());
        for row in (col + 1)..n {
            let factor = lu.get(row, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            lu.set(row, col, factor);
            for j in (col + 1)..n {
                lu.set(row, j, lu.get(row, j) - factor * lu.get(col, j));
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        x[col] /= lu.get(col, col);
        for row in 0..col {
            x[row] -= lu.get(row, col) * x[col];
        }
    }
    Some((x, pivot_max / pivot_min))
}
