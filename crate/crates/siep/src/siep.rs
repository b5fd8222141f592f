//! The finite driver: grow a matrix one vertex per step. Each step appends
//! the next eigenvalue as a new diagonal block, switches on the new row's
//! edges at a small amplitude, corrects the diagonal by the continuation
//! Newton solver so the full target spectrum is restored, and certifies
//! that the commutant condition survived. The step stays within an
//! operator-norm budget, which is what later lets truncation towers
//! converge.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{validate_pattern, FiniteGraph};
use crate::linalg::{hausdorff_distance, operator_norm, sym_eigen, Spectrum, SymMatrix};
use crate::newton::{
    g_eval, powersum_targets, solve_diagonal_correction, NewtonError, NewtonOptions, NewtonReport,
};
use crate::wsp::{has_wsp, WspCertificate};

#[derive(Debug, Error)]
pub enum SiepError {
    #[error("duplicate eigenvalues in target spectrum")]
    DuplicateEigenvalues,
    #[error("eigenvalue {lambda} collides with the current spectrum (gap {gap:.3e})")]
    EigenvalueCollision { lambda: f64, gap: f64 },
    #[error("commutant certificate lost after perturbation ({retries} shrinking retries)")]
    WspLost { retries: usize },
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<SiepError>,
    },
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("solution failed final verification: {0}")]
    Verification(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub newton: NewtonOptions,
    /// Minimum magnitude for any created edge entry.
    pub edge_floor: f64,
    /// Relative singular-value threshold for the commutant certificates.
    pub wsp_tol: f64,
    /// Final spectrum check: Hausdorff distance <= spectrum_tol * max(1, spread).
    pub spectrum_tol: f64,
    /// Optional cap on every step budget; the effective budget for the step
    /// that produces an order-k matrix is min(cap, 2^-(k-1)).
    pub budget_cap: Option<f64>,
    /// Explicit budgets per step (index 0 = the step producing order 2);
    /// overrides the cap/schedule when present.
    pub budget_schedule: Option<Vec<f64>>,
    /// How many times a step may halve its edge amplitude to win back the
    /// commutant certificate before giving up.
    pub max_wsp_retries: usize,
}

impl Default for SolveOptions {
    fn default() -> SolveOptions {
        SolveOptions {
            newton: NewtonOptions::default(),
            edge_floor: 1e-10,
            wsp_tol: 1e-9,
            spectrum_tol: 1e-8,
            budget_cap: None,
            budget_schedule: None,
            max_wsp_retries: 12,
        }
    }
}

impl SolveOptions {
    /// Budget for the step producing an order-`k` matrix (k >= 2).
    pub fn budget_for_order(&self, k: usize) -> f64 {
        if let Some(schedule) = &self.budget_schedule {
            if let Some(&b) = schedule.get(k - 2) {
                return b;
            }
        }
        let geometric = 2f64.powi(-(k as i32 - 1));
        match self.budget_cap {
            Some(cap) => cap.min(geometric),
            None => geometric,
        }
    }
}

/// Everything needed to audit one accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Order of the matrix this step produced.
    pub step_index: usize,
    pub appended_eigenvalue: f64,
    /// New edges as (lower vertex, new vertex, final value).
    pub new_edges: Vec<(usize, usize, f64)>,
    /// Operator norm of (result - previous ⊕ [eigenvalue]).
    pub achieved_norm_delta: f64,
    pub budget: f64,
    pub wsp: WspCertificate,
    /// Convergence data of the diagonal correction. The solve runs on the
    /// affinely normalized system (spectrum mapped into [-1,1]), so the
    /// residual is reported on that scale.
    pub newton: NewtonReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiepSolution {
    pub matrix: SymMatrix,
    pub graph: FiniteGraph,
    pub target_spectrum: Spectrum,
    pub per_step: Vec<StepRecord>,
}

/// Extends an order n-1 matrix to order n: appends `lambda_new` on the
/// diagonal, creates `new_edges` from earlier vertices to the new one, and
/// corrects the diagonal so the spectrum becomes σ(a_prev) ∪ {lambda_new}.
///
/// Old off-diagonal entries are preserved bit-for-bit and non-edges stay
/// bit-zero; only the diagonal and the new border row change.
pub fn step_extend(
    a_prev: &SymMatrix,
    lambda_new: f64,
    new_edges: &[usize],
    budget: f64,
    opts: &SolveOptions,
) -> Result<(SymMatrix, StepRecord), SiepError> {
    assert!(budget > 0.0 && lambda_new.is_finite());
    let n_prev = a_prev.order();
    let n = n_prev + 1;

    let mut edges: Vec<usize> = new_edges.to_vec();
    edges.sort_unstable();
    edges.dedup();
    if edges.iter().any(|&j| j >= n_prev) {
        return Err(SiepError::Input(format!(
            "new edges {edges:?} must reference vertices below {n_prev}"
        )));
    }

    let prior = sym_eigen(a_prev).spectrum;
    let mut targets: Vec<f64> = prior.values().to_vec();
    targets.push(lambda_new);
    let spread = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - targets.iter().cloned().fold(f64::INFINITY, f64::min);
    let gap = prior
        .values()
        .iter()
        .map(|&v| (v - lambda_new).abs())
        .fold(f64::INFINITY, f64::min);
    if gap <= 1e-6 * spread {
        return Err(SiepError::EigenvalueCollision { lambda: lambda_new, gap });
    }

    let a_ref = a_prev.oplus(lambda_new);

    if edges.is_empty() {
        let wsp = has_wsp(&a_ref, opts.wsp_tol);
        if !wsp.holds {
            return Err(SiepError::WspLost { retries: 0 });
        }
        let target = powersum_targets(&targets)?;
        let residual = g_eval(&a_ref)
            .iter()
            .zip(target.values())
            .map(|(g, t)| (g - t).abs())
            .fold(0.0, f64::max);
        let record = StepRecord {
            step_index: n,
            appended_eigenvalue: lambda_new,
            new_edges: vec![],
            achieved_norm_delta: 0.0,
            budget,
            wsp,
            newton: NewtonReport::trivial(residual),
        };
        return Ok((a_ref, record));
    }

    // Normalize so the target spectrum spans [-1, 1]: raw power sums blow up
    // as spread^n and would destroy the Newton solve in double precision.
    let hi = targets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = targets.iter().cloned().fold(f64::INFINITY, f64::min);
    let shift = 0.5 * (hi + lo);
    let scale = 0.5 * (hi - lo);
    let mu: Vec<f64> = targets.iter().map(|&t| (t - shift) / scale).collect();
    let target_mu = powersum_targets(&mu)?;
    let a_ref_mu = a_ref.affine(shift, scale);

    let d = edges.len() as f64;
    let eps_hat = budget / (4.0 * d.sqrt());
    if eps_hat < opts.edge_floor {
        return Err(SiepError::Newton(NewtonError::BudgetInfeasible { budget }));
    }
    let positions: Vec<(usize, usize)> = edges.iter().map(|&j| (j, n - 1)).collect();

    let mut retries = 0;
    loop {
        let amp = eps_hat * 0.5f64.powi(retries as i32);
        if amp < opts.edge_floor {
            return Err(SiepError::WspLost { retries });
        }
        let mut base_mu = a_ref_mu.clone();
        for &(j, v) in &positions {
            base_mu.set(j, v, amp / scale);
        }
        let (m_mu, report) = solve_diagonal_correction(
            &base_mu,
            &positions,
            &target_mu,
            Some(budget / scale),
            &opts.newton,
        )?;

        // Map back without touching old entries: bit-identity of previously
        // created edges (and zeros) must survive every later step.
        let mut m = a_ref.clone();
        for i in 0..n {
            m.set(i, i, m_mu.get(i, i) * scale + shift);
        }
        for &(j, v) in &positions {
            m.set(j, v, m_mu.get(j, v) * scale);
        }

        let delta = operator_norm(&m.sub(&a_ref).expect("same order"));
        if !(delta < budget) {
            retries += 1;
            if retries > opts.max_wsp_retries {
                return Err(SiepError::Newton(NewtonError::BudgetInfeasible { budget }));
            }
            continue;
        }
        if positions.iter().any(|&(j, v)| m.get(j, v).abs() < opts.edge_floor) {
            return Err(SiepError::Newton(NewtonError::BudgetInfeasible { budget }));
        }

        let wsp = has_wsp(&m, opts.wsp_tol);
        if !wsp.holds {
            retries += 1;
            if retries > opts.max_wsp_retries {
                return Err(SiepError::WspLost { retries });
            }
            continue;
        }

        let record = StepRecord {
            step_index: n,
            appended_eigenvalue: lambda_new,
            new_edges: positions.iter().map(|&(j, v)| (j, v, m.get(j, v))).collect(),
            achieved_norm_delta: delta,
            budget,
            wsp,
            newton: report,
        };
        return Ok((m, record));
    }
}

/// Solves the full problem: a symmetric matrix whose off-diagonal support
/// is exactly `graph` and whose spectrum is `lambdas`. Vertices are
/// processed in label order; step k (producing order k) uses
/// `opts.budget_for_order(k)`.
pub fn solve_finite(
    graph: &FiniteGraph,
    lambdas: &[f64],
    opts: &SolveOptions,
) -> Result<SiepSolution, SiepError> {
    let n = graph.vertex_count();
    if n == 0 || lambdas.len() != n {
        return Err(SiepError::Input(format!(
            "graph has {n} vertices but {} eigenvalues were given",
            lambdas.len()
        )));
    }
    if lambdas.iter().any(|v| !v.is_finite()) {
        return Err(SiepError::Input("eigenvalues must be finite".into()));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(SiepError::DuplicateEigenvalues);
    }

    let mut matrix = SymMatrix::diag(&lambdas[..1]).expect("nonempty");
    let mut per_step = Vec::with_capacity(n.saturating_sub(1));
    for k in 2..=n {
        let new_vertex = k - 1;
        let edges = graph.neighbors_below(new_vertex);
        let budget = opts.budget_for_order(k);
        let (next, record) = step_extend(&matrix, lambdas[new_vertex], &edges, budget, opts)
            .map_err(|e| SiepError::Step { step: k, source: Box::new(e) })?;
        matrix = next;
        per_step.push(record);
    }

    let pattern = validate_pattern(&matrix, graph, opts.edge_floor)
        .map_err(|e| SiepError::Verification(e.to_string()))?;
    if !pattern.ok {
        return Err(SiepError::Verification(format!(
            "pattern violations: {:?}",
            pattern.violations
        )));
    }
    let spectrum = sym_eigen(&matrix).spectrum;
    let dist = hausdorff_distance(spectrum.values(), lambdas)
        .map_err(|e| SiepError::Verification(e.to_string()))?;
    let spread = sorted[n - 1] - sorted[0];
    if dist > opts.spectrum_tol * spread.max(1.0) {
        return Err(SiepError::Verification(format!(
            "spectrum off by {dist:.3e} (allowed {:.3e})",
            opts.spectrum_tol * spread.max(1.0)
        )));
    }

    Ok(SiepSolution {
        matrix,
        graph: graph.clone(),
        target_spectrum: Spectrum::from_unsorted(lambdas.to_vec()),
        per_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSource;

    #[test]
    fn order_one_to_two_matches_closed_form() {
        let a = SymMatrix::diag(&[2.0]).unwrap();
        let (m, record) = step_extend(&a, 5.0, &[0], 0.5, &SolveOptions::default()).unwrap();
        assert_eq!(m.order(), 2);
        let eps = m.get(0, 1);
        assert!(eps > 0.0);
        // trace 7 and det 10: diagonal solves d0+d1=7, d0*d1 - eps^2 = 10.
        assert!((m.get(0, 0) + m.get(1, 1) - 7.0).abs() <= 1e-10);
        assert!((m.get(0, 0) * m.get(1, 1) - eps * eps - 10.0).abs() <= 1e-9);
        assert!(record.achieved_norm_delta < 0.5);
        assert!(record.wsp.holds);
        let eig = sym_eigen(&m);
        assert!((eig.spectrum.values()[0] - 2.0).abs() <= 1e-9);
        assert!((eig.spectrum.values()[1] - 5.0).abs() <= 1e-9);
    }

    #[test]
    fn no_edges_is_exact_direct_sum() {
        let a = SymMatrix::diag(&[1.0, 4.0]).unwrap();
        let (m, record) = step_extend(&a, 2.0, &[], 0.25, &SolveOptions::default()).unwrap();
        assert_eq!(m, a.oplus(2.0));
        assert_eq!(record.achieved_norm_delta, 0.0);
        assert!(record.wsp.holds);
        assert_eq!(record.newton.iterations, 0);
    }

    #[test]
    fn budget_below_edge_floor_is_infeasible() {
        let a = SymMatrix::diag(&[2.0]).unwrap();
        let err = step_extend(&a, 5.0, &[0], 1e-12, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, SiepError::Newton(NewtonError::BudgetInfeasible { .. })));
    }

    #[test]
    fn eigenvalue_collision_is_rejected() {
        let a = SymMatrix::diag(&[2.0, 7.0]).unwrap();
        let err = step_extend(&a, 2.0, &[0], 0.25, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, SiepError::EigenvalueCollision { .. }));
    }

    #[test]
    fn empty_graph_solution_is_exact_diagonal() {
        let g = FiniteGraph::new(4, &[]).unwrap();
        let sol = solve_finite(&g, &[1.0, 2.0, 3.0, 4.0], &SolveOptions::default()).unwrap();
        assert_eq!(sol.matrix, SymMatrix::diag(&[1.0, 2.0, 3.0, 4.0]).unwrap());
        assert!(sol.per_step.iter().all(|r| r.achieved_norm_delta == 0.0));
    }

    #[test]
    fn path_graph_three_vertices() {
        let g = crate::graph::induced_prefix(&GraphSource::Path, 3).unwrap();
        let sol = solve_finite(&g, &[0.0, 1.0, 2.0], &SolveOptions::default()).unwrap();
        assert!(sol.matrix.get(0, 1).abs() >= 1e-10);
        assert!(sol.matrix.get(1, 2).abs() >= 1e-10);
        assert_eq!(sol.matrix.get(0, 2), 0.0);
        let eig = sym_eigen(&sol.matrix);
        for (got, want) in eig.spectrum.values().iter().zip([0.0, 1.0, 2.0]) {
            assert!((got - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn single_far_edge_matches_arrow_pattern() {
        let g = FiniteGraph::new(3, &[(0, 2)]).unwrap();
        let lambdas = [3.0 - 2f64.sqrt(), 3.0, 3.0 + 2f64.sqrt()];
        let sol = solve_finite(&g, &lambdas, &SolveOptions::default()).unwrap();
        assert!(sol.matrix.get(0, 2).abs() >= 1e-10);
        assert_eq!(sol.matrix.get(0, 1), 0.0);
        assert_eq!(sol.matrix.get(1, 2), 0.0);
        let eig = sym_eigen(&sol.matrix);
        for (got, want) in eig.spectrum.values().iter().zip(lambdas) {
            assert!((got - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn old_edges_survive_later_steps_bitwise() {
        let g = crate::graph::induced_prefix(&GraphSource::Path, 5).unwrap();
        let sol = solve_finite(&g, &[0.5, 1.0, 2.0, 3.5, 5.0], &SolveOptions::default()).unwrap();
        for record in &sol.per_step {
            for &(i, j, value) in &record.new_edges {
                assert_eq!(
                    sol.matrix.get(i, j).to_bits(),
                    value.to_bits(),
                    "edge ({i},{j}) changed after its creating step"
                );
            }
        }
    }

    #[test]
    fn per_step_certificates_hold() {
        let g = crate::graph::induced_prefix(&GraphSource::Star, 6).unwrap();
        let lambdas = [-2.0, -1.0, 0.5, 1.5, 3.0, 4.5];
        let sol = solve_finite(&g, &lambdas, &SolveOptions::default()).unwrap();
        assert_eq!(sol.per_step.len(), 5);
        for record in &sol.per_step {
            assert!(record.wsp.holds);
            assert!(record.achieved_norm_delta < record.budget);
            assert_eq!(record.budget, 2f64.powi(-(record.step_index as i32 - 1)));
        }
    }

    #[test]
    fn duplicate_eigenvalues_rejected() {
        let g = FiniteGraph::new(3, &[(0, 1)]).unwrap();
        let err = solve_finite(&g, &[1.0, 1.0, 2.0], &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, SiepError::DuplicateEigenvalues));
        let err = solve_finite(&g, &[1.0, 2.0], &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, SiepError::Input(_)));
    }
}
