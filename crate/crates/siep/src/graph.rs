//! Finite simple graphs, infinite graphs as streamed lower-adjacency
//! prefixes, built-in families, and pattern validation of solved matrices.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::SymMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge ({0},{1}) is out of range for {2} vertices")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("stream exhausted at vertex {0}")]
    StreamExhausted(usize),
    #[error("matrix order {0} does not match vertex count {1}")]
    OrderMismatch(usize, usize),
    #[error("bad graph file: {0}")]
    Parse(String),
}

/// Simple undirected graph on vertices `0..n-1`; edges stored as a set of
/// pairs `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl FiniteGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<FiniteGraph, GraphError> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= n {
                return Err(GraphError::EdgeOutOfRange(i, j, n));
            }
            set.insert((i, j));
        }
        Ok(FiniteGraph { n, edges: set })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        self.edges.contains(&(i, j))
    }

    /// Neighbors of `v` with index strictly below `v`, ascending.
    pub fn neighbors_below(&self, v: usize) -> Vec<usize> {
        (0..v).filter(|&u| self.has_edge(u, v)).collect()
    }
}

/// A (possibly infinite) graph described procedurally or by explicit
/// lower-neighbor rows. Vertex `k`'s row only mentions vertices `< k`, so a
/// prefix of rows is a full description of the induced subgraph on `0..k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum GraphSource {
    Path,
    /// Center is vertex 0; every later vertex attaches to it.
    Star,
    Complete,
    Empty,
    /// Erdos-Renyi on the lower triangle: edge {j,k} (j<k) present with
    /// probability `p`. Each vertex's row has its own generator seeded from
    /// (seed, k), so prefixes never change when the stream is extended.
    Random { p: f64, seed: u64 },
    Explicit { rows: Vec<Vec<usize>> },
}

impl GraphSource {
    pub fn stream(&self) -> LowerAdjacencyStream {
        LowerAdjacencyStream { source: self.clone(), next_vertex: 0 }
    }

    /// Lower-neighbor row of vertex `k`, or None past the end of an
    /// explicit source.
    fn row(&self, k: usize) -> Option<Vec<usize>> {
        match self {
            GraphSource::Path => Some(if k == 0 { vec![] } else { vec![k - 1] }),
            GraphSource::Star => Some(if k == 0 { vec![] } else { vec![0] }),
            GraphSource::Complete => Some((0..k).collect()),
            GraphSource::Empty => Some(vec![]),
            GraphSource::Random { p, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(mix(*seed, k as u64));
                Some((0..k).filter(|_| rng.gen::<f64>() < *p).collect())
            }
            GraphSource::Explicit { rows } => rows.get(k).cloned(),
        }
    }

    pub fn parse_ladj(text: &str) -> Result<GraphSource, GraphError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| GraphError::Parse("empty file".into()))?;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("ladj") || tokens.next() != Some("v1") {
            return Err(GraphError::Parse("header must start with `ladj v1`".into()));
        }
        let mut family: Option<String> = None;
        let mut seed: Option<u64> = None;
        let mut p: Option<f64> = None;
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| GraphError::Parse(format!("bad header token `{tok}`")))?;
            match key {
                "family" => family = Some(value.to_string()),
                "seed" => {
                    seed = Some(value.parse().map_err(|_| {
                        GraphError::Parse(format!("bad seed `{value}`"))
                    })?)
                }
                "p" => {
                    p = Some(value.parse().map_err(|_| {
                        GraphError::Parse(format!("bad probability `{value}`"))
                    })?)
                }
                _ => return Err(GraphError::Parse(format!("unknown header key `{key}`"))),
            }
        }
        match family.as_deref() {
            Some("path") => Ok(GraphSource::Path),
            Some("star") => Ok(GraphSource::Star),
            Some("complete") => Ok(GraphSource::Complete),
            Some("empty") => Ok(GraphSource::Empty),
            Some("random") => {
                let p = p.ok_or_else(|| GraphError::Parse("random family needs p=".into()))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(GraphError::Parse(format!("p={p} outside [0,1]")));
                }
                Ok(GraphSource::Random { p, seed: seed.unwrap_or(0) })
            }
            Some(other) => Err(GraphError::Parse(format!("unknown family `{other}`"))),
            None => {
                // Body line k holds the lower neighbors of vertex k.
                let mut rows = Vec::new();
                for (k, line) in lines.enumerate() {
                    let mut row = Vec::new();
                    for tok in line.split_whitespace() {
                        let j: usize = tok.parse().map_err(|_| {
                            GraphError::Parse(format!("bad vertex index `{tok}`"))
                        })?;
                        if j >= k {
                            return Err(GraphError::Parse(format!(
                                "vertex {k}: neighbor {j} is not strictly lower"
                            )));
                        }
                        row.push(j);
                    }
                    row.sort_unstable();
                    row.dedup();
                    rows.push(row);
                }
                Ok(GraphSource::Explicit { rows })
            }
        }
    }

    pub fn to_ladj(&self) -> String {
        match self {
            GraphSource::Path => "ladj v1 family=path\n".into(),
            GraphSource::Star => "ladj v1 family=star\n".into(),
            GraphSource::Complete => "ladj v1 family=complete\n".into(),
            GraphSource::Empty => "ladj v1 family=empty\n".into(),
            GraphSource::Random { p, seed } => {
                format!("ladj v1 family=random seed={seed} p={p}\n")
            }
            GraphSource::Explicit { rows } => {
                let mut out = String::from("ladj v1\n");
                for row in rows {
                    let line: Vec<String> = row.iter().map(|j| j.to_string()).collect();
                    let _ = writeln!(out, "{}", line.join(" "));
                }
                out
            }
        }
    }

    /// Snapshot of the first `n` rows as an explicit source; used to embed a
    /// self-contained copy of the graph in artifacts.
    pub fn freeze_prefix(&self, n: usize) -> Result<GraphSource, GraphError> {
        let mut rows = Vec::with_capacity(n);
        for k in 0..n {
            rows.push(self.row(k).ok_or(GraphError::StreamExhausted(k))?);
        }
        Ok(GraphSource::Explicit { rows })
    }
}

/// Single-consumer cursor over a [`GraphSource`]; yields the lower-neighbor
/// list of vertex 0, 1, 2, ... in order.
#[derive(Debug, Clone)]
pub struct LowerAdjacencyStream {
    source: GraphSource,
    next_vertex: usize,
}

impl LowerAdjacencyStream {
    pub fn next_vertex(&mut self) -> Result<Vec<usize>, GraphError> {
        let k = self.next_vertex;
        let row = self.source.row(k).ok_or(GraphError::StreamExhausted(k))?;
        debug_assert!(row.iter().all(|&j| j < k));
        self.next_vertex += 1;
        Ok(row)
    }
}

fn mix(seed: u64, k: u64) -> u64 {
    // splitmix64 step over seed^k; decorrelates per-vertex generators.
    let mut z = seed ^ k.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Induced subgraph on vertices `0..n-1`, assembled from the first `n`
/// stream rows.
pub fn induced_prefix(source: &GraphSource, n: usize) -> Result<FiniteGraph, GraphError> {
    assert!(n >= 1, "prefix length must be at least 1");
    let mut stream = source.stream();
    let mut edges = Vec::new();
    for k in 0..n {
        for j in stream.next_vertex()? {
            edges.push((j, k));
        }
    }
    FiniteGraph::new(n, &edges)
}

/// Pattern violations found by [`validate_pattern`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PatternViolation {
    /// Edge {i,j} whose matrix entry has magnitude below the floor.
    MissingEdge { i: usize, j: usize, value: f64 },
    /// Non-edge position holding a value that is not bit-zero.
    NonZeroNonEdge { i: usize, j: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub ok: bool,
    pub violations: Vec<PatternViolation>,
}

/// Checks that the off-diagonal support of `a` is exactly the edge set of
/// `g`: edge entries at magnitude >= `edge_floor`, non-edge entries bit-zero.
pub fn validate_pattern(
    a: &SymMatrix,
    g: &FiniteGraph,
    edge_floor: f64,
) -> Result<PatternReport, GraphError> {
    if a.order() != g.vertex_count() {
        return Err(GraphError::OrderMismatch(a.order(), g.vertex_count()));
    }
    let mut violations = Vec::new();
    for i in 0..a.order() {
        for j in (i + 1)..a.order() {
            let v = a.get(i, j);
            if g.has_edge(i, j) {
                if v.abs() < edge_floor {
                    violations.push(PatternViolation::MissingEdge { i, j, value: v });
                }
            } else if v.to_bits() != 0 {
                violations.push(PatternViolation::NonZeroNonEdge { i, j, value: v });
            }
        }
    }
    Ok(PatternReport { ok: violations.is_empty(), violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_yield_expected_prefixes() {
        let path = induced_prefix(&GraphSource::Path, 3).unwrap();
        assert_eq!(path.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);

        let star = induced_prefix(&GraphSource::Star, 4).unwrap();
        assert_eq!(star.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (0, 3)]);

        let empty = induced_prefix(&GraphSource::Empty, 5).unwrap();
        assert_eq!(empty.edge_count(), 0);

        let complete = induced_prefix(&GraphSource::Complete, 4).unwrap();
        assert_eq!(complete.edge_count(), 6);
    }

    #[test]
    fn prefixes_are_nested() {
        let src = GraphSource::Random { p: 0.4, seed: 99 };
        for n in 1..12 {
            let small = induced_prefix(&src, n).unwrap();
            let large = induced_prefix(&src, n + 1).unwrap();
            for e in small.edges() {
                assert!(large.has_edge(e.0, e.1));
            }
            // New edges touch only the new vertex.
            for (i, j) in large.edges() {
                if !small.has_edge(i, j) {
                    assert_eq!(j, n);
                }
            }
        }
    }

    #[test]
    fn random_family_replays() {
        let src = GraphSource::Random { p: 0.5, seed: 1234 };
        let a = induced_prefix(&src, 20).unwrap();
        let b = induced_prefix(&src, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ladj_round_trip_families() {
        for src in [
            GraphSource::Path,
            GraphSource::Star,
            GraphSource::Complete,
            GraphSource::Empty,
            GraphSource::Random { p: 0.25, seed: 7 },
        ] {
            let text = src.to_ladj();
            assert_eq!(GraphSource::parse_ladj(&text).unwrap(), src);
        }
    }

    #[test]
    fn ladj_explicit_round_trip() {
        let src = GraphSource::Explicit {
            rows: vec![vec![], vec![0], vec![], vec![0, 2]],
        };
        let text = src.to_ladj();
        assert_eq!(text, "ladj v1\n\n0\n\n0 2\n");
        assert_eq!(GraphSource::parse_ladj(&text).unwrap(), src);

        let g = induced_prefix(&src, 4).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 3), (2, 3)]);
        assert!(matches!(
            induced_prefix(&src, 5).unwrap_err(),
            GraphError::StreamExhausted(4)
        ));
    }

    #[test]
    fn ladj_rejects_bad_input() {
        assert!(GraphSource::parse_ladj("").is_err());
        assert!(GraphSource::parse_ladj("adj v1\n").is_err());
        assert!(GraphSource::parse_ladj("ladj v1 family=ring\n").is_err());
        assert!(GraphSource::parse_ladj("ladj v1 family=random\n").is_err());
        assert!(GraphSource::parse_ladj("ladj v1\n\n1\n").is_err()); // 1 not < 1
    }

    #[test]
    fn validate_pattern_reports_violations() {
        let a = SymMatrix::from_rows(&[
            vec![4.0, 0.0, 1.0],
            vec![0.0, 3.0, 0.0],
            vec![1.0, 0.0, 2.0],
        ])
        .unwrap();
        let single_edge = FiniteGraph::new(3, &[(0, 2)]).unwrap();
        assert!(validate_pattern(&a, &single_edge, 0.5).unwrap().ok);

        let wrong = FiniteGraph::new(3, &[(0, 1)]).unwrap();
        let report = validate_pattern(&a, &wrong, 0.5).unwrap();
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 2);

        let diag = SymMatrix::diag(&[1.0, 2.0, 3.0]).unwrap();
        let empty = FiniteGraph::new(3, &[]).unwrap();
        assert!(validate_pattern(&diag, &empty, 0.0).unwrap().ok);
    }

    #[test]
    fn validate_pattern_monotone_in_floor() {
        let mut a = SymMatrix::zeros(3);
        a.set(0, 1, 0.3);
        a.set(0, 0, 1.0);
        let g = FiniteGraph::new(3, &[(0, 1)]).unwrap();
        assert!(validate_pattern(&a, &g, 0.3).unwrap().ok);
        assert!(validate_pattern(&a, &g, 0.1).unwrap().ok);
        assert!(!validate_pattern(&a, &g, 0.5).unwrap().ok);
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert_eq!(
            FiniteGraph::new(3, &[(1, 1)]).unwrap_err(),
            GraphError::SelfLoop(1)
        );
        assert_eq!(
            FiniteGraph::new(3, &[(0, 3)]).unwrap_err(),
            GraphError::EdgeOutOfRange(0, 3, 3)
        );
    }
}
