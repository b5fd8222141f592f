//! On-disk formats. All numeric output uses Rust's shortest round-trip
//! decimal formatting, so write -> read is bit-exact and `verify` can
//! re-derive certificates without representation drift.
//!
//! - COO-SYM matrices: first line `n`, then `i j value` with `i <= j`
//!   (implied symmetry; absent entries are zero).
//! - Spectra: one decimal per line.
//! - Finite graphs: JSON `{"n": ..., "edges": [[i,j], ...]}`.
//! - Solve artifact: directory with `solution.json` + `matrix.coo`.
//! - Tower artifact: directory with `tower.json` + `level_###.coo`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{FiniteGraph, GraphSource};
use crate::infinite::{
    DenseSequenceSpec, SpectralCertificate, SpectralFingerprint, TruncationTower,
};
use crate::linalg::SymMatrix;
use crate::siep::{SiepSolution, SolveOptions, StepRecord};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

/// Serializes the upper triangle; zero entries are omitted (the reader
/// fills them back as bit-zero).
pub fn write_coo_sym(m: &SymMatrix) -> String {
    let n = m.order();
    let mut out = String::new();
    let _ = writeln!(out, "{n}");
    for i in 0..n {
        for j in i..n {
            let v = m.get(i, j);
            if v != 0.0 {
                let _ = writeln!(out, "{i} {j} {v}");
            }
        }
    }
    out
}

pub fn parse_coo_sym(text: &str) -> Result<SymMatrix, IoError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n: usize = lines
        .next()
        .ok_or_else(|| IoError::Parse("empty matrix file".into()))?
        .parse()
        .map_err(|_| IoError::Parse("first line must be the matrix order".into()))?;
    if n == 0 {
        return Err(IoError::Parse("matrix order must be at least 1".into()));
    }
    let mut m = SymMatrix::zeros(n);
    let mut seen = std::collections::BTreeSet::new();
    for line in lines {
        let mut tok = line.split_whitespace();
        let (i, j, v) = match (tok.next(), tok.next(), tok.next(), tok.next()) {
            (Some(i), Some(j), Some(v), None) => (i, j, v),
            _ => return Err(IoError::Parse(format!("bad entry line `{line}`"))),
        };
        let i: usize = i.parse().map_err(|_| IoError::Parse(format!("bad index `{i}`")))?;
        let j: usize = j.parse().map_err(|_| IoError::Parse(format!("bad index `{j}`")))?;
        let v: f64 = v.parse().map_err(|_| IoError::Parse(format!("bad value `{v}`")))?;
        if i > j || j >= n {
            return Err(IoError::Parse(format!("entry ({i},{j}) out of range for order {n}")));
        }
        if !v.is_finite() {
            return Err(IoError::Parse(format!("entry ({i},{j}) is not finite")));
        }
        if !seen.insert((i, j)) {
            return Err(IoError::Parse(format!("duplicate entry ({i},{j})")));
        }
        m.set(i, j, v);
    }
    Ok(m)
}

pub fn load_matrix(path: &Path) -> Result<SymMatrix, IoError> {
    parse_coo_sym(&read_file(path)?)
}

pub fn save_matrix(path: &Path, m: &SymMatrix) -> Result<(), IoError> {
    write_file(path, &write_coo_sym(m))
}

pub fn format_spectrum(values: &[f64]) -> String {
    let mut out = String::new();
    for v in values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn parse_spectrum(text: &str) -> Result<Vec<f64>, IoError> {
    let mut values = Vec::new();
    for line in text.lines() {
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| IoError::Parse(format!("bad eigenvalue `{tok}`")))?;
            if !v.is_finite() {
                return Err(IoError::Parse(format!("eigenvalue `{tok}` is not finite")));
            }
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(IoError::Parse("spectrum file holds no values".into()));
    }
    Ok(values)
}

pub fn load_spectrum(path: &Path) -> Result<Vec<f64>, IoError> {
    parse_spectrum(&read_file(path)?)
}

/// `{"n": ..., "edges": [[i,j], ...]}` with validation.
pub fn parse_graph_json(text: &str) -> Result<FiniteGraph, IoError> {
    #[derive(Deserialize)]
    struct Raw {
        n: usize,
        edges: Vec<(usize, usize)>,
    }
    let raw: Raw =
        serde_json::from_str(text).map_err(|e| IoError::Parse(format!("graph JSON: {e}")))?;
    FiniteGraph::new(raw.n, &raw.edges).map_err(|e| IoError::Parse(e.to_string()))
}

pub fn load_graph_json(path: &Path) -> Result<FiniteGraph, IoError> {
    parse_graph_json(&read_file(path)?)
}

pub fn format_graph_json(g: &FiniteGraph) -> String {
    #[derive(Serialize)]
    struct Raw {
        n: usize,
        edges: Vec<(usize, usize)>,
    }
    let raw = Raw { n: g.vertex_count(), edges: g.edges().collect() };
    serde_json::to_string_pretty(&raw).expect("serializable") + "\n"
}

pub fn load_graph_source(path: &Path) -> Result<GraphSource, IoError> {
    GraphSource::parse_ladj(&read_file(path)?).map_err(|e| IoError::Parse(e.to_string()))
}

/// Metadata half of a solve artifact; the matrix lives next to it in
/// COO-SYM so it can be inspected and corrupted independently.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionArtifact {
    pub seed: u64,
    pub options: SolveOptions,
    pub graph: FiniteGraph,
    pub target_spectrum: Vec<f64>,
    pub per_step: Vec<StepRecord>,
    pub matrix_file: String,
}

pub const SOLUTION_JSON: &str = "solution.json";
pub const SOLUTION_MATRIX: &str = "matrix.coo";

pub fn write_solution_dir(
    dir: &Path,
    solution: &SiepSolution,
    seed: u64,
    options: &SolveOptions,
) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::File { path: dir.to_path_buf(), source })?;
    let artifact = SolutionArtifact {
        seed,
        options: options.clone(),
        graph: solution.graph.clone(),
        target_spectrum: solution.target_spectrum.values().to_vec(),
        per_step: solution.per_step.clone(),
        matrix_file: SOLUTION_MATRIX.into(),
    };
    let json = serde_json::to_string_pretty(&artifact).expect("serializable") + "\n";
    write_file(&dir.join(SOLUTION_JSON), &json)?;
    save_matrix(&dir.join(SOLUTION_MATRIX), &solution.matrix)
}

pub fn read_solution_dir(dir: &Path) -> Result<(SolutionArtifact, SymMatrix), IoError> {
    let artifact: SolutionArtifact =
        serde_json::from_str(&read_file(&dir.join(SOLUTION_JSON))?)
            .map_err(|e| IoError::Parse(format!("solution.json: {e}")))?;
    let matrix = load_matrix(&dir.join(&artifact.matrix_file))?;
    Ok((artifact, matrix))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TowerArtifact {
    pub seed: u64,
    pub options: SolveOptions,
    pub sequence: DenseSequenceSpec,
    pub graph: GraphSource,
    pub levels: usize,
    pub lambdas: Vec<f64>,
    pub budgets: Vec<f64>,
    pub step_norm_deltas: Vec<f64>,
    pub per_step: Vec<StepRecord>,
    pub level_files: Vec<String>,
    pub certificate: SpectralCertificate,
    pub fingerprint: SpectralFingerprint,
}

pub const TOWER_JSON: &str = "tower.json";

pub fn level_file_name(level: usize) -> String {
    format!("level_{level:03}.coo")
}

pub fn write_tower_dir(
    dir: &Path,
    tower: &TruncationTower,
    certificate: &SpectralCertificate,
    fingerprint: &SpectralFingerprint,
    seed: u64,
    options: &SolveOptions,
) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::File { path: dir.to_path_buf(), source })?;
    let mut level_files = Vec::with_capacity(tower.levels());
    for (idx, m) in tower.matrices.iter().enumerate() {
        let name = level_file_name(idx + 1);
        save_matrix(&dir.join(&name), m)?;
        level_files.push(name);
    }
    let artifact = TowerArtifact {
        seed,
        options: options.clone(),
        sequence: tower.sequence.clone(),
        graph: tower.graph.clone(),
        levels: tower.levels(),
        lambdas: tower.lambdas.clone(),
        budgets: tower.budgets.clone(),
        step_norm_deltas: tower.step_norm_deltas.clone(),
        per_step: tower.per_step.clone(),
        level_files,
        certificate: certificate.clone(),
        fingerprint: fingerprint.clone(),
    };
    let json = serde_json::to_string_pretty(&artifact).expect("serializable") + "\n";
    write_file(&dir.join(TOWER_JSON), &json)
}

pub fn read_tower_dir(dir: &Path) -> Result<(TowerArtifact, Vec<SymMatrix>), IoError> {
    let artifact: TowerArtifact = serde_json::from_str(&read_file(&dir.join(TOWER_JSON))?)
        .map_err(|e| IoError::Parse(format!("tower.json: {e}")))?;
    let mut matrices = Vec::with_capacity(artifact.level_files.len());
    for name in &artifact.level_files {
        matrices.push(load_matrix(&dir.join(name))?);
    }
    Ok((artifact, matrices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coo_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = rng.gen_range(1..=12);
            let mut m = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    if rng.gen_bool(0.6) {
                        // Awkward magnitudes on purpose.
                        m.set(i, j, rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-12..12)));
                    }
                }
            }
            let text = write_coo_sym(&m);
            let back = parse_coo_sym(&text).unwrap();
            assert_eq!(m, back);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(m.get(i, j).to_bits(), back.get(i, j).to_bits());
                }
            }
        }
    }

    #[test]
    fn coo_parser_rejects_malformed_input() {
        assert!(parse_coo_sym("").is_err());
        assert!(parse_coo_sym("0\n").is_err());
        assert!(parse_coo_sym("2\n1 0 3.0\n").is_err()); // i > j
        assert!(parse_coo_sym("2\n0 2 3.0\n").is_err()); // out of range
        assert!(parse_coo_sym("2\n0 1 3.0\n0 1 4.0\n").is_err()); // duplicate
        assert!(parse_coo_sym("2\n0 1 nope\n").is_err());
        assert!(parse_coo_sym("2\n0 1\n").is_err());
    }

    #[test]
    fn spectrum_round_trip() {
        let values = vec![3.0 - 2f64.sqrt(), 3.0, 3.0 + 2f64.sqrt(), -1.25e-13];
        let text = format_spectrum(&values);
        let back = parse_spectrum(&text).unwrap();
        assert_eq!(values, back);
        assert!(parse_spectrum("\n\n").is_err());
    }

    #[test]
    fn graph_json_round_trip() {
        let g = FiniteGraph::new(4, &[(0, 1), (2, 3)]).unwrap();
        let text = format_graph_json(&g);
        assert_eq!(parse_graph_json(&text).unwrap(), g);
        assert!(parse_graph_json("{\"n\": 2, \"edges\": [[0, 2]]}").is_err());
    }

    #[test]
    fn solution_artifact_round_trip() {
        use crate::graph::induced_prefix;
        let g = induced_prefix(&GraphSource::Path, 4).unwrap();
        let opts = SolveOptions::default();
        let solution = crate::siep::solve_finite(&g, &[0.5, 1.5, 2.5, 4.0], &opts).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_solution_dir(dir.path(), &solution, 42, &opts).unwrap();
        let (artifact, matrix) = read_solution_dir(dir.path()).unwrap();
        assert_eq!(artifact.seed, 42);
        assert_eq!(matrix, solution.matrix);
        assert_eq!(artifact.per_step, solution.per_step);
        assert_eq!(artifact.graph, g);
    }

    #[test]
    fn tower_artifact_round_trip() {
        use crate::infinite::{
            build_tower, certify_spectrum, fingerprint_from_certificate, DenseSequenceSpec,
        };
        let opts = SolveOptions::default();
        let tower =
            build_tower(&GraphSource::Star, &DenseSequenceSpec::harmonic(), 6, &opts).unwrap();
        let cert = certify_spectrum(&tower, 30);
        let fp = fingerprint_from_certificate(
            &cert,
            2.0 * tower.tail_bound(),
            tower.sequence.declared_limit_points.as_deref(),
        );
        let dir = tempfile::tempdir().unwrap();
        write_tower_dir(dir.path(), &tower, &cert, &fp, 7, &opts).unwrap();
        let (artifact, matrices) = read_tower_dir(dir.path()).unwrap();
        assert_eq!(artifact.levels, 6);
        assert_eq!(matrices.len(), 6);
        for (a, b) in matrices.iter().zip(&tower.matrices) {
            assert_eq!(a, b);
        }
        assert_eq!(artifact.certificate, cert);
        assert_eq!(artifact.fingerprint, fp);
    }
}
