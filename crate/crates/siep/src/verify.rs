//! Independent re-derivation of everything a persisted artifact claims.
//!
//! Every check recomputes from the stored matrices and configuration alone
//! — never from the claimed certificates — and then compares. A single
//! corrupted matrix entry or JSON field therefore surfaces as a named
//! failed check rather than silently passing.

use std::fmt;
use std::path::Path;

use crate::graph::{induced_prefix, validate_pattern};
use crate::infinite::{certify_spectrum, fingerprint_from_certificate, TruncationTower};
use crate::io::{
    read_solution_dir, read_tower_dir, IoError, SolutionArtifact, TowerArtifact, SOLUTION_JSON,
    TOWER_JSON,
};
use crate::linalg::{hausdorff_distance, operator_norm, sym_eigen, Spectrum, SymMatrix};
use crate::oracle::{charpoly_spectrum_check, OracleError};
use crate::wsp::has_wsp;

/// Relative tolerance when a recomputed norm is compared against a stored
/// one. Recomputation runs the same arithmetic on bit-identical inputs, so
/// this only needs to absorb representation noise, not method error.
const RECOMPUTE_RTOL: f64 = 1e-9;

const CHARPOLY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// "solution" or "tower".
    pub kind: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.ok)
    }

    fn push(&mut self, name: &str, ok: bool, detail: String) {
        self.checks.push(Check { name: name.to_string(), ok, detail });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} artifact: {} checks", self.kind, self.checks.len())?;
        for c in &self.checks {
            let tag = if c.ok { " ok " } else { "FAIL" };
            writeln!(f, "  [{tag}] {}: {}", c.name, c.detail)?;
        }
        let verdict = if self.passed() { "all checks passed" } else { "RE-CHECK FAILED" };
        write!(f, "{verdict}")
    }
}

/// Dispatches on the directory layout: `solution.json` or `tower.json`.
pub fn verify_artifact(dir: &Path) -> Result<VerifyReport, IoError> {
    if dir.join(SOLUTION_JSON).is_file() {
        verify_solution_dir(dir)
    } else if dir.join(TOWER_JSON).is_file() {
        verify_tower_dir(dir)
    } else {
        Err(IoError::Parse(format!(
            "{}: neither {SOLUTION_JSON} nor {TOWER_JSON} found",
            dir.display()
        )))
    }
}

pub fn verify_solution_dir(dir: &Path) -> Result<VerifyReport, IoError> {
    let (artifact, matrix) = read_solution_dir(dir)?;
    Ok(check_solution(&artifact, &matrix))
}

pub fn check_solution(artifact: &SolutionArtifact, matrix: &SymMatrix) -> VerifyReport {
    let mut report = VerifyReport { kind: "solution".into(), checks: Vec::new() };
    let n = matrix.order();
    let opts = &artifact.options;

    let shape_ok = artifact.graph.vertex_count() == n
        && artifact.target_spectrum.len() == n
        && artifact.per_step.len() == n - 1
        && artifact.target_spectrum.iter().all(|v| v.is_finite());
    report.push(
        "shape",
        shape_ok,
        format!(
            "order {n}, graph on {} vertices, {} targets, {} step records",
            artifact.graph.vertex_count(),
            artifact.target_spectrum.len(),
            artifact.per_step.len()
        ),
    );
    if !shape_ok {
        return report;
    }

    match validate_pattern(matrix, &artifact.graph, opts.edge_floor) {
        Ok(p) => report.push(
            "pattern",
            p.ok,
            if p.ok {
                format!("off-diagonal support matches all {} edges", artifact.graph.edge_count())
            } else {
                format!("{} violations, first: {:?}", p.violations.len(), p.violations[0])
            },
        ),
        Err(e) => report.push("pattern", false, e.to_string()),
    }

    let spectrum = sym_eigen(matrix).spectrum;
    let spread = artifact
        .target_spectrum
        .iter()
        .fold(f64::NEG_INFINITY, |m, v| m.max(*v))
        - artifact.target_spectrum.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let allowance = opts.spectrum_tol * spread.max(1.0);
    match hausdorff_distance(spectrum.values(), &artifact.target_spectrum) {
        Ok(dist) => report.push(
            "spectrum",
            dist <= allowance,
            format!("hausdorff distance {dist:.3e} (allowed {allowance:.3e})"),
        ),
        Err(e) => report.push("spectrum", false, e.to_string()),
    }

    let claimed = Spectrum::from_unsorted(artifact.target_spectrum.clone());
    match charpoly_spectrum_check(matrix, &claimed, CHARPOLY_TOL) {
        Ok(pass) => report.push(
            "charpoly-oracle",
            pass,
            format!("characteristic polynomial root check at tol {CHARPOLY_TOL:.0e}"),
        ),
        Err(OracleError::OrderTooLarge(got, max)) => report.push(
            "charpoly-oracle",
            true,
            format!("skipped: order {got} above oracle limit {max}"),
        ),
        Err(e) => report.push("charpoly-oracle", false, e.to_string()),
    }

    let wsp = has_wsp(matrix, opts.wsp_tol);
    let mut wsp_ok = wsp.holds;
    let mut wsp_detail = format!(
        "recomputed: holds={}, kernel dimension {}",
        wsp.holds, wsp.kernel_dimension
    );
    if let Some(last) = artifact.per_step.last() {
        let consistent =
            last.wsp.holds == wsp.holds && last.wsp.kernel_dimension == wsp.kernel_dimension;
        wsp_ok &= consistent;
        if !consistent {
            wsp_detail.push_str(&format!(
                "; stored final record disagrees (holds={}, kernel dimension {})",
                last.wsp.holds, last.wsp.kernel_dimension
            ));
        }
    }
    report.push("wsp", wsp_ok, wsp_detail);

    let mut steps_ok = true;
    let mut steps_detail = String::new();
    let mut seen_appended: Vec<u64> = Vec::new();
    for (t, rec) in artifact.per_step.iter().enumerate() {
        let k = t + 2;
        let mut complaints = Vec::new();
        if rec.step_index != k {
            complaints.push(format!("step_index {} (expected {k})", rec.step_index));
        }
        let expected_budget = opts.budget_for_order(k);
        if rec.budget.to_bits() != expected_budget.to_bits() {
            complaints.push(format!("budget {} (schedule says {expected_budget})", rec.budget));
        }
        if !(rec.achieved_norm_delta < rec.budget) {
            complaints.push(format!(
                "delta {} not under budget {}",
                rec.achieved_norm_delta, rec.budget
            ));
        }
        if !rec.wsp.holds {
            complaints.push("stored certificate has holds=false".into());
        }
        if !rec.newton.converged {
            complaints.push("stored correction did not converge".into());
        }
        let expected_edges = artifact.graph.neighbors_below(k - 1);
        let recorded: Vec<usize> = rec.new_edges.iter().map(|&(i, _, _)| i).collect();
        if recorded != expected_edges
            || rec.new_edges.iter().any(|&(_, j, _)| j != k - 1)
        {
            complaints.push("recorded edges disagree with the graph".into());
        }
        for &(i, j, v) in &rec.new_edges {
            if matrix.get(i, j).to_bits() != v.to_bits() {
                complaints.push(format!(
                    "entry ({i},{j}) = {} in matrix, {v} in record",
                    matrix.get(i, j)
                ));
            } else if v.abs() < opts.edge_floor {
                complaints.push(format!("entry ({i},{j}) = {v} under edge floor"));
            }
        }
        let bits = rec.appended_eigenvalue.to_bits();
        if !artifact.target_spectrum.iter().any(|v| v.to_bits() == bits) {
            complaints.push(format!(
                "appended eigenvalue {} is not a target",
                rec.appended_eigenvalue
            ));
        }
        if seen_appended.contains(&bits) {
            complaints.push(format!("eigenvalue {} appended twice", rec.appended_eigenvalue));
        }
        seen_appended.push(bits);
        if !complaints.is_empty() {
            steps_ok = false;
            steps_detail.push_str(&format!("step {k}: {}; ", complaints.join(", ")));
        }
    }
    if steps_ok {
        steps_detail = format!(
            "{} records: budgets on schedule, deltas under budget, border entries bit-exact",
            artifact.per_step.len()
        );
    }
    report.push("step-records", steps_ok, steps_detail);

    report
}

pub fn verify_tower_dir(dir: &Path) -> Result<VerifyReport, IoError> {
    let (artifact, matrices) = read_tower_dir(dir)?;
    Ok(check_tower(&artifact, matrices))
}

pub fn check_tower(artifact: &TowerArtifact, matrices: Vec<SymMatrix>) -> VerifyReport {
    let mut report = VerifyReport { kind: "tower".into(), checks: Vec::new() };
    let levels = artifact.levels;
    let opts = &artifact.options;

    let shape_ok = levels >= 1
        && matrices.len() == levels
        && artifact.level_files.len() == levels
        && artifact.lambdas.len() == levels
        && artifact.budgets.len() == levels - 1
        && artifact.step_norm_deltas.len() == levels - 1
        && artifact.per_step.len() == levels - 1
        && matrices.iter().enumerate().all(|(i, m)| m.order() == i + 1);
    report.push(
        "shape",
        shape_ok,
        format!("{levels} levels, orders 1..={levels}, {} step records", artifact.per_step.len()),
    );
    if !shape_ok {
        return report;
    }

    let lambdas_ok = match artifact.sequence.terms(levels) {
        Ok(expected) => {
            let same = expected
                .iter()
                .zip(&artifact.lambdas)
                .all(|(a, b)| a.to_bits() == b.to_bits());
            report.push(
                "lambda-sequence",
                same,
                if same {
                    format!("{levels} stored eigenvalue targets match the sequence bit-for-bit")
                } else {
                    "stored eigenvalue targets disagree with the declared sequence".into()
                },
            );
            same
        }
        Err(e) => {
            report.push("lambda-sequence", false, e.to_string());
            false
        }
    };

    let mut pattern_ok = true;
    let mut pattern_detail = String::new();
    for (idx, m) in matrices.iter().enumerate() {
        let n = idx + 1;
        match induced_prefix(&artifact.graph, n)
            .map_err(|e| e.to_string())
            .and_then(|g| validate_pattern(m, &g, opts.edge_floor).map_err(|e| e.to_string()))
        {
            Ok(p) if p.ok => {}
            Ok(p) => {
                pattern_ok = false;
                pattern_detail.push_str(&format!(
                    "level {n}: {} violations, first {:?}; ",
                    p.violations.len(),
                    p.violations[0]
                ));
            }
            Err(e) => {
                pattern_ok = false;
                pattern_detail.push_str(&format!("level {n}: {e}; "));
            }
        }
    }
    if pattern_ok {
        pattern_detail = format!("all {levels} levels match their graph prefix");
    }
    report.push("level-pattern", pattern_ok, pattern_detail);

    let mut budget_ok = true;
    let mut budget_detail = String::new();
    for (t, &b) in artifact.budgets.iter().enumerate() {
        let expected = opts.budget_for_order(t + 2);
        if b.to_bits() != expected.to_bits() {
            budget_ok = false;
            budget_detail
                .push_str(&format!("level {}: stored {b}, schedule {expected}; ", t + 2));
        }
    }
    if budget_ok {
        budget_detail = format!("{} budgets follow the halving schedule", artifact.budgets.len());
    }
    report.push("budget-schedule", budget_ok, budget_detail);

    let mut delta_ok = true;
    let mut delta_detail = String::new();
    let mut max_ratio = 0.0f64;
    for t in 0..levels - 1 {
        let reference = matrices[t].oplus(artifact.lambdas[t + 1]);
        let diff = match matrices[t + 1].sub(&reference) {
            Ok(d) => d,
            Err(e) => {
                delta_ok = false;
                delta_detail.push_str(&format!("level {}: {e}; ", t + 2));
                continue;
            }
        };
        let recomputed = operator_norm(&diff);
        let stored = artifact.step_norm_deltas[t];
        let agrees = if stored == 0.0 {
            recomputed == 0.0
        } else {
            (recomputed - stored).abs() <= RECOMPUTE_RTOL * stored
        };
        let under = recomputed < artifact.budgets[t];
        let consistent =
            artifact.per_step[t].achieved_norm_delta.to_bits() == stored.to_bits();
        if !(agrees && under && consistent) {
            delta_ok = false;
            delta_detail.push_str(&format!(
                "level {}: recomputed {recomputed}, stored {stored}, budget {}; ",
                t + 2,
                artifact.budgets[t]
            ));
        }
        if artifact.budgets[t] > 0.0 {
            max_ratio = max_ratio.max(recomputed / artifact.budgets[t]);
        }
    }
    if delta_ok {
        delta_detail = format!(
            "recomputed every step norm; worst delta/budget ratio {max_ratio:.3e}"
        );
    }
    report.push("step-deltas", delta_ok, delta_detail);

    let mut wsp_ok = true;
    let mut wsp_detail = String::new();
    for t in 0..levels - 1 {
        let cert = has_wsp(&matrices[t + 1], opts.wsp_tol);
        let stored = &artifact.per_step[t].wsp;
        if cert.holds != stored.holds || cert.kernel_dimension != stored.kernel_dimension {
            wsp_ok = false;
            wsp_detail.push_str(&format!(
                "level {}: recomputed holds={} dim {}, stored holds={} dim {}; ",
                t + 2,
                cert.holds,
                cert.kernel_dimension,
                stored.holds,
                stored.kernel_dimension
            ));
        }
    }
    if wsp_ok {
        wsp_detail = format!("recomputed certificates for levels 2..={levels} match the records");
    }
    report.push("level-wsp", wsp_ok, wsp_detail);

    // The remaining certificates are recomputed from a tower rebuilt out of
    // the stored pieces, so they only hold when those pieces are untouched.
    let tower = TruncationTower {
        matrices,
        step_norm_deltas: artifact.step_norm_deltas.clone(),
        budgets: artifact.budgets.clone(),
        per_step: artifact.per_step.clone(),
        lambdas: artifact.lambdas.clone(),
        sequence: artifact.sequence.clone(),
        graph: artifact.graph.clone(),
    };

    if lambdas_ok {
        let cert = certify_spectrum(&tower, artifact.certificate.tail_sample.len());
        let cert_ok = cert == artifact.certificate;
        report.push(
            "certificate",
            cert_ok,
            if cert_ok {
                format!(
                    "recomputed spectrum, tail sample, and tail bound {:.3e} all match",
                    cert.tail_bound
                )
            } else {
                "recomputed certificate differs from the stored one".into()
            },
        );

        let fp_ok = if artifact.fingerprint.resolution > 0.0 {
            let fp = fingerprint_from_certificate(
                &cert,
                artifact.fingerprint.resolution,
                artifact.sequence.declared_limit_points.as_deref(),
            );
            fp == artifact.fingerprint
        } else {
            false
        };
        report.push(
            "fingerprint",
            fp_ok,
            if fp_ok {
                format!(
                    "recomputed at resolution {:.3e}: {} essential, {} isolated",
                    artifact.fingerprint.resolution,
                    artifact.fingerprint.essential_spectrum_estimate.len(),
                    artifact.fingerprint.isolated_points.len()
                )
            } else {
                "recomputed fingerprint differs from the stored one".into()
            },
        );

        let top_spectrum = &cert.matrix_spectrum;
        let mut worst = 0.0f64;
        for &l in &artifact.lambdas {
            let d = top_spectrum
                .iter()
                .fold(f64::INFINITY, |m, &s| m.min((s - l).abs()));
            worst = worst.max(d);
        }
        report.push(
            "lambda-containment",
            worst <= tower.tail_bound(),
            format!(
                "every built eigenvalue within {worst:.3e} of the top level (bound {:.3e})",
                tower.tail_bound()
            ),
        );
    } else {
        report.push("certificate", false, "skipped: eigenvalue targets unverified".into());
        report.push("fingerprint", false, "skipped: eigenvalue targets unverified".into());
        report.push("lambda-containment", false, "skipped: eigenvalue targets unverified".into());
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSource;
    use crate::infinite::{build_tower, DenseSequenceSpec};
    use crate::io::{save_matrix, write_solution_dir, write_tower_dir, SOLUTION_MATRIX};
    use crate::siep::{solve_finite, SolveOptions};

    fn tower_fingerprint(
        tower: &TruncationTower,
        cert: &crate::infinite::SpectralCertificate,
    ) -> crate::infinite::SpectralFingerprint {
        fingerprint_from_certificate(
            cert,
            2.0 * tower.tail_bound(),
            tower.sequence.declared_limit_points.as_deref(),
        )
    }

    #[test]
    fn fresh_solution_passes_every_check() {
        let g = induced_prefix(&GraphSource::Path, 5).unwrap();
        let opts = SolveOptions::default();
        let solution = solve_finite(&g, &[0.25, 1.0, 2.0, 3.5, 5.0], &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_solution_dir(dir.path(), &solution, 9, &opts).unwrap();
        let report = verify_artifact(dir.path()).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.kind, "solution");
    }

    #[test]
    fn corrupted_matrix_entry_is_detected() {
        let g = induced_prefix(&GraphSource::Path, 5).unwrap();
        let opts = SolveOptions::default();
        let solution = solve_finite(&g, &[0.25, 1.0, 2.0, 3.5, 5.0], &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_solution_dir(dir.path(), &solution, 9, &opts).unwrap();

        let mut corrupted = solution.matrix.clone();
        corrupted.set(1, 1, corrupted.get(1, 1) + 0.37);
        save_matrix(&dir.path().join(SOLUTION_MATRIX), &corrupted).unwrap();

        let report = verify_artifact(dir.path()).unwrap();
        assert!(!report.passed());
        let spectrum = report.checks.iter().find(|c| c.name == "spectrum").unwrap();
        assert!(!spectrum.ok);
    }

    #[test]
    fn corrupted_edge_entry_is_detected_bitwise() {
        let g = induced_prefix(&GraphSource::Path, 4).unwrap();
        let opts = SolveOptions::default();
        let solution = solve_finite(&g, &[0.5, 1.5, 2.5, 4.0], &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_solution_dir(dir.path(), &solution, 9, &opts).unwrap();

        // Smallest possible corruption: one unit in the last place.
        let mut corrupted = solution.matrix.clone();
        let v = corrupted.get(2, 3);
        corrupted.set(2, 3, f64::from_bits(v.to_bits() + 1));
        save_matrix(&dir.path().join(SOLUTION_MATRIX), &corrupted).unwrap();

        let report = verify_artifact(dir.path()).unwrap();
        let steps = report.checks.iter().find(|c| c.name == "step-records").unwrap();
        assert!(!steps.ok, "{report}");
    }

    #[test]
    fn fresh_tower_passes_every_check() {
        let opts = SolveOptions::default();
        let tower =
            build_tower(&GraphSource::Star, &DenseSequenceSpec::harmonic(), 7, &opts).unwrap();
        let cert = certify_spectrum(&tower, 40);
        let fp = tower_fingerprint(&tower, &cert);
        let dir = tempfile::tempdir().unwrap();
        write_tower_dir(dir.path(), &tower, &cert, &fp, 3, &opts).unwrap();
        let report = verify_artifact(dir.path()).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.kind, "tower");
    }

    #[test]
    fn corrupted_tower_level_is_detected() {
        let opts = SolveOptions::default();
        let tower =
            build_tower(&GraphSource::Star, &DenseSequenceSpec::harmonic(), 7, &opts).unwrap();
        let cert = certify_spectrum(&tower, 40);
        let fp = tower_fingerprint(&tower, &cert);
        let dir = tempfile::tempdir().unwrap();
        write_tower_dir(dir.path(), &tower, &cert, &fp, 3, &opts).unwrap();

        let mut corrupted = tower.level(4).clone();
        corrupted.set(0, 3, corrupted.get(0, 3) * 2.0);
        save_matrix(&dir.path().join(crate::io::level_file_name(4)), &corrupted).unwrap();

        let report = verify_artifact(dir.path()).unwrap();
        assert!(!report.passed());
        let deltas = report.checks.iter().find(|c| c.name == "step-deltas").unwrap();
        assert!(!deltas.ok, "{report}");
    }

    #[test]
    fn corrupted_stored_lambda_is_detected() {
        let opts = SolveOptions::default();
        let tower =
            build_tower(&GraphSource::Empty, &DenseSequenceSpec::harmonic(), 6, &opts).unwrap();
        let cert = certify_spectrum(&tower, 20);
        let fp = tower_fingerprint(&tower, &cert);
        let dir = tempfile::tempdir().unwrap();
        write_tower_dir(dir.path(), &tower, &cert, &fp, 3, &opts).unwrap();

        let path = dir.path().join(crate::io::TOWER_JSON);
        let text = std::fs::read_to_string(&path).unwrap();
        let mut artifact: crate::io::TowerArtifact = serde_json::from_str(&text).unwrap();
        artifact.lambdas[3] += 1e-3;
        std::fs::write(&path, serde_json::to_string_pretty(&artifact).unwrap()).unwrap();

        let report = verify_artifact(dir.path()).unwrap();
        assert!(!report.passed());
        let lam = report.checks.iter().find(|c| c.name == "lambda-sequence").unwrap();
        assert!(!lam.ok, "{report}");
    }

    #[test]
    fn missing_artifact_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(verify_artifact(dir.path()).is_err());
    }
}
