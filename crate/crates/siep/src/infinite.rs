//! Infinite problems by truncation: build a tower of finite solutions whose
//! consecutive embeddings differ by less than `2^-n` in operator norm, so
//! the tower converges to a bounded self-adjoint operator. The spectrum of
//! the limit is certified from the top level plus a sampled diagonal tail
//! (spectra of self-adjoint operators move at most the operator-norm
//! distance), the essential spectrum is estimated from accumulation of the
//! sample, and two towers are compared up to approximate unitary
//! equivalence by their spectral fingerprints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{induced_prefix, validate_pattern, GraphError, GraphSource};
use crate::linalg::{hausdorff_distance, sym_eigen, SymMatrix};
use crate::siep::{step_extend, SiepError, SolveOptions, StepRecord};

#[derive(Debug, Error)]
pub enum InfiniteError {
    #[error("sequence exhausted at term {0}")]
    SequenceExhausted(usize),
    #[error("sequence terms are not pairwise distinct (value {0})")]
    DuplicateTerm(f64),
    #[error("term {value} exceeds the declared bound {bound}")]
    OutOfBound { value: f64, bound: f64 },
    #[error("level {level}: {source}")]
    Step {
        level: usize,
        #[source]
        source: SiepError,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("tower failed verification: {0}")]
    Verification(String),
}

/// One convergent sequence `limit + (first - limit) * ratio^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergentSeq {
    pub limit: f64,
    pub first: f64,
    pub ratio: f64,
}

/// Enumeration strategies for a countable dense subset of a compact set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSource {
    /// 1, 1/2, 1/3, ... (dense in {1/k} ∪ {0}).
    Harmonic,
    /// 0, 1, 1/2, 1/3, ...: same closure, different enumeration. The two
    /// orderings give diagonal operators that are approximately but not
    /// exactly unitarily equivalent.
    HarmonicWithZero,
    /// lo, hi, then the dyadic midpoints level by level; dense in [lo, hi].
    Dyadic { lo: f64, hi: f64 },
    /// Round-robin interleaving of finitely many convergent sequences.
    Interleaved { sequences: Vec<ConvergentSeq> },
    Explicit { values: Vec<f64> },
}

/// A compact set presented the only computable way: a bounded sequence
/// enumerating a dense subset, with optional declared limit points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseSequenceSpec {
    pub source: SequenceSource,
    /// Uniform bound on |term|.
    pub bound: f64,
    pub declared_limit_points: Option<Vec<f64>>,
}

impl DenseSequenceSpec {
    pub fn harmonic() -> DenseSequenceSpec {
        DenseSequenceSpec {
            source: SequenceSource::Harmonic,
            bound: 1.0,
            declared_limit_points: Some(vec![0.0]),
        }
    }

    pub fn harmonic_with_zero() -> DenseSequenceSpec {
        DenseSequenceSpec {
            source: SequenceSource::HarmonicWithZero,
            bound: 1.0,
            declared_limit_points: Some(vec![0.0]),
        }
    }

    pub fn dyadic(lo: f64, hi: f64) -> DenseSequenceSpec {
        assert!(lo < hi && lo.is_finite() && hi.is_finite());
        DenseSequenceSpec {
            source: SequenceSource::Dyadic { lo, hi },
            bound: lo.abs().max(hi.abs()),
            declared_limit_points: None,
        }
    }

    pub fn interleaved(sequences: Vec<ConvergentSeq>) -> DenseSequenceSpec {
        assert!(!sequences.is_empty());
        let bound = sequences
            .iter()
            .map(|s| s.limit.abs().max(s.first.abs()))
            .fold(0.0f64, f64::max);
        let limits = sequences.iter().map(|s| s.limit).collect();
        DenseSequenceSpec {
            source: SequenceSource::Interleaved { sequences },
            bound,
            declared_limit_points: Some(limits),
        }
    }

    pub fn explicit(values: Vec<f64>, declared_limit_points: Option<Vec<f64>>) -> DenseSequenceSpec {
        let bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        DenseSequenceSpec {
            source: SequenceSource::Explicit { values },
            bound,
            declared_limit_points,
        }
    }

    /// Term k (0-based), or None past the end of an explicit list.
    pub fn term(&self, k: usize) -> Option<f64> {
        match &self.source {
            SequenceSource::Harmonic => Some(1.0 / (k + 1) as f64),
            SequenceSource::HarmonicWithZero => {
                if k == 0 {
                    Some(0.0)
                } else {
                    Some(1.0 / k as f64)
                }
            }
            SequenceSource::Dyadic { lo, hi } => Some(dyadic_term(*lo, *hi, k)),
            SequenceSource::Interleaved { sequences } => {
                let s = &sequences[k % sequences.len()];
                let i = (k / sequences.len()) as i32;
                Some(s.limit + (s.first - s.limit) * s.ratio.powi(i))
            }
            SequenceSource::Explicit { values } => values.get(k).copied(),
        }
    }

    /// First `count` terms, validated distinct and within the bound.
    pub fn terms(&self, count: usize) -> Result<Vec<f64>, InfiniteError> {
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let t = self.term(k).ok_or(InfiniteError::SequenceExhausted(k))?;
            out.push(t);
        }
        self.validate(&out)?;
        Ok(out)
    }

    /// Up to `count` terms: stops quietly at the end of explicit lists.
    pub fn terms_available(&self, count: usize) -> Result<Vec<f64>, InfiniteError> {
        let mut out = Vec::new();
        for k in 0..count {
            match self.term(k) {
                Some(t) => out.push(t),
                None => break,
            }
        }
        self.validate(&out)?;
        Ok(out)
    }

    fn validate(&self, terms: &[f64]) -> Result<(), InfiniteError> {
        for &t in terms {
            if t.abs() > self.bound {
                return Err(InfiniteError::OutOfBound { value: t, bound: self.bound });
            }
        }
        let mut sorted = terms.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(InfiniteError::DuplicateTerm(w[0]));
        }
        Ok(())
    }
}

/// lo, hi, then odd numerators level by level: 1/2, 1/4, 3/4, 1/8, ...
fn dyadic_term(lo: f64, hi: f64, k: usize) -> f64 {
    match k {
        0 => lo,
        1 => hi,
        _ => {
            let idx = k - 2;
            // Level d >= 1 holds 2^(d-1) terms starting at offset 2^(d-1)-1.
            let d = usize::BITS - (idx + 1).leading_zeros();
            let start = (1usize << (d - 1)) - 1;
            let numerator = (2 * (idx - start) + 1) as f64;
            lo + (hi - lo) * numerator / (1u64 << d) as f64
        }
    }
}

/// Finite truncations Ã_1..Ã_N of one infinite problem, with the recorded
/// geometric chain of embedding distances.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncationTower {
    /// Level n (order n) at index n-1.
    pub matrices: Vec<SymMatrix>,
    /// delta_n = ‖Ã_n ⊕ [λ_{n+1}] − Ã_{n+1}‖op at index n-1; always < 2^-n.
    pub step_norm_deltas: Vec<f64>,
    /// Budget 2^-n enforced on delta_n, same indexing.
    pub budgets: Vec<f64>,
    pub per_step: Vec<StepRecord>,
    pub lambdas: Vec<f64>,
    pub sequence: DenseSequenceSpec,
    pub graph: GraphSource,
}

impl TruncationTower {
    pub fn levels(&self) -> usize {
        self.matrices.len()
    }

    /// Level n, order n (1-based).
    pub fn level(&self, n: usize) -> &SymMatrix {
        &self.matrices[n - 1]
    }

    pub fn top(&self) -> &SymMatrix {
        self.matrices.last().expect("tower nonempty")
    }

    /// Error bound on the whole unbuilt tail: sum of budgets 2^-k, k >= N.
    pub fn tail_bound(&self) -> f64 {
        2f64.powi(1 - self.levels() as i32)
    }
}

/// Builds the tower level by level. Every step runs under budget `2^-n`
/// (capped further by `opts`), re-measured by a direct operator-norm
/// evaluation; the pattern of each level is validated against the graph
/// prefix before the tower is returned.
pub fn build_tower(
    graph: &GraphSource,
    seq: &DenseSequenceSpec,
    levels: usize,
    opts: &SolveOptions,
) -> Result<TruncationTower, InfiniteError> {
    assert!(levels >= 1, "a tower has at least one level");
    let lambdas = seq.terms(levels)?;

    let mut stream = graph.stream();
    stream.next_vertex()?; // vertex 0 has no lower neighbors

    let mut matrices = vec![SymMatrix::diag(&lambdas[..1]).expect("nonempty")];
    let mut per_step = Vec::new();
    let mut step_norm_deltas = Vec::new();
    let mut budgets = Vec::new();

    for k in 2..=levels {
        let row = stream.next_vertex()?;
        let budget = opts.budget_for_order(k);
        let (next, record) = step_extend(&matrices[k - 2], lambdas[k - 1], &row, budget, opts)
            .map_err(|e| InfiniteError::Step { level: k, source: e })?;
        debug_assert!(record.achieved_norm_delta < budget);
        step_norm_deltas.push(record.achieved_norm_delta);
        budgets.push(budget);
        per_step.push(record);
        matrices.push(next);
    }

    for (idx, m) in matrices.iter().enumerate() {
        let prefix = induced_prefix(graph, idx + 1)?;
        let report = validate_pattern(m, &prefix, opts.edge_floor)?;
        if !report.ok {
            return Err(InfiniteError::Verification(format!(
                "level {} pattern violations: {:?}",
                idx + 1,
                report.violations
            )));
        }
    }

    Ok(TruncationTower {
        matrices,
        step_norm_deltas,
        budgets,
        per_step,
        lambdas,
        sequence: seq.clone(),
        graph: graph.clone(),
    })
}

/// What the finite tower certifies about the spectrum of the limit
/// operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCertificate {
    pub truncation_level: usize,
    /// σ(Ã_N) ∪ sampled tail diagonal values, sorted.
    pub approx_spectrum: Vec<f64>,
    /// σ(Ã_N) alone, sorted (used for multiplicity counting).
    pub matrix_spectrum: Vec<f64>,
    /// The sampled tail terms λ_{N+1}, ..., λ_{N+M}.
    pub tail_sample: Vec<f64>,
    /// 2^-(N-1): everything the unbuilt tail can move the spectrum.
    pub tail_bound: f64,
    pub hausdorff_guarantee: String,
}

/// Certifies the top level: the limit operator's spectrum lies within
/// `tail_bound` (Hausdorff) of the block-diagonal truncation's spectrum,
/// which is σ(Ã_N) together with the remaining diagonal tail; the tail is
/// represented by its first `tail_len` terms.
pub fn certify_spectrum(tower: &TruncationTower, tail_len: usize) -> SpectralCertificate {
    let n = tower.levels();
    let matrix_spectrum: Vec<f64> = sym_eigen(tower.top()).spectrum.values().to_vec();
    let all = tower
        .sequence
        .terms_available(n + tail_len)
        .expect("prefix already validated");
    let tail_sample: Vec<f64> = all[n.min(all.len())..].to_vec();

    let mut approx = matrix_spectrum.clone();
    approx.extend_from_slice(&tail_sample);
    approx.sort_by(|a, b| a.partial_cmp(b).unwrap());
    approx.dedup();

    let tail_bound = tower.tail_bound();
    SpectralCertificate {
        truncation_level: n,
        approx_spectrum: approx,
        matrix_spectrum,
        tail_sample,
        tail_bound,
        hausdorff_guarantee: format!(
            "Hausdorff distance between the limit spectrum and the level-{n} \
             truncation spectrum is at most {tail_bound:.6e}; the truncation \
             spectrum is represented by its computed eigenvalues plus a finite \
             tail sample, so distances are certified against the sampled \
             subset of the limit set, not the abstract set itself."
        ),
    }
}

pub const DEFAULT_CLUSTER_MIN: usize = 5;

/// Cluster representatives of the sample's accumulation regions: a sample
/// point is a candidate when at least `cluster_min` other points lie within
/// `delta`; candidate runs of width `delta` are averaged and representatives
/// closer than `delta` merged, so the result is `delta`-separated and covers
/// every accumulation region within about `2 * delta`.
pub fn limit_points_min(sample: &[f64], delta: f64, cluster_min: usize) -> Vec<f64> {
    assert!(delta > 0.0);
    if sample.is_empty() {
        return vec![];
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Candidates by windowed neighbor count (excluding the point itself).
    let mut candidates = Vec::new();
    let mut lo = 0usize;
    let mut hi = 0usize;
    for i in 0..xs.len() {
        while xs[i] - xs[lo] > delta {
            lo += 1;
        }
        if hi < i {
            hi = i;
        }
        while hi + 1 < xs.len() && xs[hi + 1] - xs[i] <= delta {
            hi += 1;
        }
        if hi - lo >= cluster_min {
            candidates.push(xs[i]);
        }
    }
    if candidates.is_empty() {
        return vec![];
    }

    // Split candidate chains at gaps > delta, then cut each chain into runs
    // of width <= delta and average each run.
    let mut reps: Vec<(f64, usize)> = Vec::new();
    let mut start = 0usize;
    for i in 0..candidates.len() {
        let chain_break = i + 1 == candidates.len() || candidates[i + 1] - candidates[i] > delta;
        if chain_break {
            let mut run_begin = start;
            for j in start..=i {
                if candidates[j] - candidates[run_begin] > delta {
                    reps.push(run_mean(&candidates[run_begin..j]));
                    run_begin = j;
                }
            }
            reps.push(run_mean(&candidates[run_begin..=i]));
            start = i + 1;
        }
    }

    // Merge representatives closer than delta (weighted), repeating until
    // the set is delta-separated.
    loop {
        let mut merged = false;
        let mut out: Vec<(f64, usize)> = Vec::with_capacity(reps.len());
        for &(x, w) in &reps {
            match out.last_mut() {
                Some(&mut (ref mut px, ref mut pw)) if x - *px < delta => {
                    let total = *pw + w;
                    *px = (*px * *pw as f64 + x * w as f64) / total as f64;
                    *pw = total;
                    merged = true;
                }
                _ => out.push((x, w)),
            }
        }
        reps = out;
        if !merged {
            break;
        }
    }
    reps.into_iter().map(|(x, _)| x).collect()
}

fn run_mean(run: &[f64]) -> (f64, usize) {
    (run.iter().sum::<f64>() / run.len() as f64, run.len())
}

/// [`limit_points_min`] with the default cluster size.
pub fn limit_points(sample: &[f64], delta: f64) -> Vec<f64> {
    limit_points_min(sample, delta, DEFAULT_CLUSTER_MIN)
}

/// The two invariants that decide approximate unitary equivalence for
/// bounded self-adjoint operators: the essential spectrum, and eigenvalue
/// multiplicities away from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralFingerprint {
    /// Limit-point cluster representatives of the certified spectrum.
    pub essential_spectrum_estimate: Vec<f64>,
    /// (value, multiplicity) for certified points farther than the
    /// resolution from the essential estimate.
    pub isolated_points: Vec<(f64, usize)>,
    /// Clustering resolution delta used.
    pub resolution: f64,
    /// tail_bound + delta/2: how far a certified value may sit from the
    /// matrix eigenvalue that witnesses it.
    pub certification_window: f64,
    /// Set when the declared limit set is a single point c: the operator is
    /// then a compact perturbation of c times the identity.
    pub compact_perturbation_of: Option<f64>,
}

/// Fingerprint from an existing certificate; `declared_limit_points` feeds
/// the compact-perturbation flag.
pub fn fingerprint_from_certificate(
    cert: &SpectralCertificate,
    delta: f64,
    declared_limit_points: Option<&[f64]>,
) -> SpectralFingerprint {
    assert!(delta > 0.0);
    let estimate = limit_points(&cert.approx_spectrum, delta);
    let window = cert.tail_bound + delta / 2.0;

    let mut isolated: Vec<(f64, usize)> = Vec::new();
    for &x in &cert.approx_spectrum {
        let dist = estimate
            .iter()
            .map(|e| (e - x).abs())
            .fold(f64::INFINITY, f64::min);
        if dist <= delta {
            continue;
        }
        let multiplicity = cert
            .matrix_spectrum
            .iter()
            .filter(|&&e| (e - x).abs() <= window)
            .count();
        if multiplicity == 0 {
            continue; // a bare tail point: not certified by the matrix
        }
        // Merge with an already recorded isolated point when both are
        // witnessed by the same eigenvalue cluster.
        if let Some(last) = isolated.last() {
            if (x - last.0).abs() <= window {
                continue;
            }
        }
        isolated.push((x, multiplicity));
    }

    let compact_perturbation_of = match declared_limit_points {
        Some([single]) => Some(*single),
        _ => None,
    };

    SpectralFingerprint {
        essential_spectrum_estimate: estimate,
        isolated_points: isolated,
        resolution: delta,
        certification_window: window,
        compact_perturbation_of,
    }
}

/// Fingerprint at resolution `delta` with the default tail sample
/// (10 terms per built level).
pub fn fingerprint(tower: &TruncationTower, delta: f64) -> SpectralFingerprint {
    let cert = certify_spectrum(tower, 10 * tower.levels());
    fingerprint_from_certificate(
        &cert,
        delta,
        tower.sequence.declared_limit_points.as_deref(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    /// Hausdorff distance between the essential estimates (None when both
    /// are empty).
    pub essential_hausdorff: Option<f64>,
    pub mismatches: Vec<String>,
    pub verdict: String,
}

/// Compares two fingerprints up to their certification tolerances. Both
/// criteria must agree: essential estimates within the coarser resolution
/// (Hausdorff), and isolated points matched one-to-one with equal
/// multiplicities. An unmatched isolated point is tolerated only when the
/// other tower's certified sample contains it within the window (a
/// truncation-boundary artifact, not a spectral difference).
pub fn compare_fingerprints(
    a: &SpectralFingerprint,
    cert_a: &SpectralCertificate,
    b: &SpectralFingerprint,
    cert_b: &SpectralCertificate,
) -> EquivalenceVerdict {
    let mut mismatches = Vec::new();
    let tol = a.resolution.max(b.resolution);
    let window = a.certification_window.max(b.certification_window);

    let ea = &a.essential_spectrum_estimate;
    let eb = &b.essential_spectrum_estimate;
    let essential_hausdorff = match (ea.is_empty(), eb.is_empty()) {
        (true, true) => None,
        (false, false) => {
            let d = hausdorff_distance(ea, eb).expect("nonempty");
            if d > tol {
                mismatches.push(format!(
                    "essential estimates differ by {d:.3e} (allowed {tol:.3e})"
                ));
            }
            Some(d)
        }
        _ => {
            mismatches.push("one essential estimate is empty, the other is not".into());
            None
        }
    };

    match_isolated(a, b, cert_b, window, "left", &mut mismatches);
    match_isolated(b, a, cert_a, window, "right", &mut mismatches);

    let equivalent = mismatches.is_empty();
    EquivalenceVerdict {
        equivalent,
        essential_hausdorff,
        mismatches,
        verdict: if equivalent {
            "approximately unitarily equivalent".into()
        } else {
            "not certified equivalent".into()
        },
    }
}

fn match_isolated(
    from: &SpectralFingerprint,
    to: &SpectralFingerprint,
    to_cert: &SpectralCertificate,
    window: f64,
    side: &str,
    mismatches: &mut Vec<String>,
) {
    for &(x, mult) in &from.isolated_points {
        let best = to
            .isolated_points
            .iter()
            .min_by(|p, q| {
                (p.0 - x).abs().partial_cmp(&(q.0 - x).abs()).unwrap()
            })
            .filter(|p| (p.0 - x).abs() <= window);
        match best {
            Some(&(_, other_mult)) => {
                if other_mult != mult {
                    mismatches.push(format!(
                        "{side} isolated point {x} has multiplicity {mult} vs {other_mult}"
                    ));
                }
            }
            None => {
                let sampled = to_cert
                    .approx_spectrum
                    .iter()
                    .any(|&s| (s - x).abs() <= window);
                if !sampled {
                    mismatches.push(format!(
                        "{side} isolated point {x} (multiplicity {mult}) has no counterpart"
                    ));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator_norm;

    #[test]
    fn harmonic_terms() {
        let seq = DenseSequenceSpec::harmonic();
        assert_eq!(seq.terms(3).unwrap(), vec![1.0, 0.5, 1.0 / 3.0]);
        let zero_first = DenseSequenceSpec::harmonic_with_zero();
        assert_eq!(zero_first.terms(3).unwrap(), vec![0.0, 1.0, 0.5]);
    }

    #[test]
    fn dyadic_enumeration_is_dense_and_distinct() {
        let seq = DenseSequenceSpec::dyadic(0.0, 1.0);
        let terms = seq.terms(16).unwrap();
        assert_eq!(&terms[..7], &[0.0, 1.0, 0.5, 0.25, 0.75, 0.125, 0.375]);
        let big = seq.terms(500).unwrap();
        assert_eq!(big.len(), 500);
    }

    #[test]
    fn explicit_sequences_validate() {
        let seq = DenseSequenceSpec::explicit(vec![0.5, 0.25, 0.5], None);
        assert!(matches!(seq.terms(3), Err(InfiniteError::DuplicateTerm(_))));
        let seq = DenseSequenceSpec::explicit(vec![0.5, 0.25], None);
        assert!(matches!(seq.terms(3), Err(InfiniteError::SequenceExhausted(2))));
        assert_eq!(seq.terms_available(5).unwrap(), vec![0.5, 0.25]);
    }

    #[test]
    fn empty_graph_tower_is_exactly_diagonal() {
        let tower = build_tower(
            &GraphSource::Empty,
            &DenseSequenceSpec::harmonic(),
            5,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(tower.levels(), 5);
        let expect =
            SymMatrix::diag(&[1.0, 0.5, 1.0 / 3.0, 0.25, 0.2]).unwrap();
        assert_eq!(tower.top(), &expect);
        assert!(tower.step_norm_deltas.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn star_tower_respects_budgets() {
        let tower = build_tower(
            &GraphSource::Star,
            &DenseSequenceSpec::harmonic(),
            8,
            &SolveOptions::default(),
        )
        .unwrap();
        for (i, &delta) in tower.step_norm_deltas.iter().enumerate() {
            let budget = 2f64.powi(-(i as i32 + 1));
            assert!(delta < budget, "delta_{} = {delta} >= {budget}", i + 1);
            assert!(delta > 0.0);
        }
        // Star pattern at the top level: row 0 fully active, rest zero.
        let top = tower.top();
        for j in 1..8 {
            assert!(top.get(0, j).abs() >= 1e-10);
        }
        for i in 1..8 {
            for j in (i + 1)..8 {
                assert_eq!(top.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn telescoping_bound_holds() {
        let tower = build_tower(
            &GraphSource::Star,
            &DenseSequenceSpec::harmonic(),
            9,
            &SolveOptions::default(),
        )
        .unwrap();
        let n_top = tower.levels();
        for n in 1..n_top {
            // Embed level n as Ã_n ⊕ diag(λ_{n+1}..λ_N) and compare.
            let mut embedded = tower.level(n).clone();
            for k in n..n_top {
                embedded = embedded.oplus(tower.lambdas[k]);
            }
            let d = operator_norm(&tower.top().sub(&embedded).unwrap());
            let allowed: f64 = (n..n_top).map(|k| 2f64.powi(-(k as i32))).sum();
            assert!(d <= allowed, "telescoping failed at n={n}: {d} > {allowed}");
        }
    }

    #[test]
    fn tail_bound_formula() {
        let tower = build_tower(
            &GraphSource::Empty,
            &DenseSequenceSpec::harmonic(),
            11,
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(tower.tail_bound(), 1.0 / 1024.0);
        let cert = certify_spectrum(&tower, 7);
        assert_eq!(cert.tail_bound, 1.0 / 1024.0);
        assert_eq!(cert.truncation_level, 11);
        assert_eq!(cert.tail_sample.len(), 7);
        assert_eq!(cert.tail_sample[0], 1.0 / 12.0);
    }

    #[test]
    fn certificate_contains_prefix_terms() {
        let tower = build_tower(
            &GraphSource::Star,
            &DenseSequenceSpec::harmonic(),
            10,
            &SolveOptions::default(),
        )
        .unwrap();
        let cert = certify_spectrum(&tower, 50);
        for &lam in &tower.lambdas {
            let dist = cert
                .approx_spectrum
                .iter()
                .map(|x| (x - lam).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(dist <= cert.tail_bound, "{lam} sits {dist} away");
        }
    }

    #[test]
    fn limit_points_isolated_set_is_empty() {
        assert!(limit_points(&[1.0, 2.0, 3.0], 0.1).is_empty());
    }

    #[test]
    fn limit_points_of_harmonic_sample_pack_near_zero() {
        let sample: Vec<f64> = (1..=200).map(|k| 1.0 / k as f64).collect();
        let reps = limit_points(&sample, 0.01);
        assert!(!reps.is_empty());
        // Exact frozen expectation: candidates are the terms 1/k that have
        // at least 5 neighbors within 0.01; they pack in (0, ~0.066].
        for &r in &reps {
            assert!((0.0..=0.07).contains(&r), "representative {r} too far out");
        }
        for w in reps.windows(2) {
            assert!(w[1] - w[0] >= 0.01, "representatives not separated");
        }
    }

    #[test]
    fn limit_points_of_dyadic_sample_cover_the_interval() {
        let seq = DenseSequenceSpec::dyadic(0.0, 1.0);
        // 1000 terms finish depth 9, so the whole interval (edges included)
        // is sampled densely enough for the neighbor-count threshold; a
        // mid-depth truncation would leave the right edge too thin to count
        // as an accumulation region at this delta.
        let sample = seq.terms(1000).unwrap();
        let reps = limit_points(&sample, 0.01);
        for &r in &reps {
            assert!((-0.01..=1.01).contains(&r));
        }
        // Every point of [0,1] is within 2 * delta of a representative.
        let mut t = 0.0;
        while t <= 1.0 {
            let dist = reps.iter().map(|r| (r - t).abs()).fold(f64::INFINITY, f64::min);
            assert!(dist <= 0.02, "coverage hole at {t}: nearest {dist}");
            t += 0.001;
        }
    }

    #[test]
    fn fingerprint_of_diagonal_harmonic_tower() {
        let tower = build_tower(
            &GraphSource::Empty,
            &DenseSequenceSpec::harmonic(),
            12,
            &SolveOptions::default(),
        )
        .unwrap();
        let fp = fingerprint(&tower, 2.0 * tower.tail_bound());
        assert_eq!(fp.compact_perturbation_of, Some(0.0));
        // The first few harmonic values are isolated with multiplicity one.
        for want in [1.0, 0.5, 1.0 / 3.0, 0.25] {
            let hit = fp
                .isolated_points
                .iter()
                .find(|(x, _)| (x - want).abs() <= 1e-9)
                .unwrap_or_else(|| panic!("{want} missing from isolated points"));
            assert_eq!(hit.1, 1);
        }
        for w in fp.essential_spectrum_estimate.windows(2) {
            assert!(w[1] - w[0] >= fp.resolution);
        }
    }

    #[test]
    fn star_and_empty_towers_have_equal_fingerprints() {
        let opts = SolveOptions::default();
        let seq = DenseSequenceSpec::harmonic();
        let a = build_tower(&GraphSource::Empty, &seq, 12, &opts).unwrap();
        let b = build_tower(&GraphSource::Star, &seq, 12, &opts).unwrap();
        let delta = 2.0 * a.tail_bound();
        let ca = certify_spectrum(&a, 120);
        let cb = certify_spectrum(&b, 120);
        let fa = fingerprint_from_certificate(&ca, delta, Some(&[0.0]));
        let fb = fingerprint_from_certificate(&cb, delta, Some(&[0.0]));
        let verdict = compare_fingerprints(&fa, &ca, &fb, &cb);
        assert!(verdict.equivalent, "mismatches: {:?}", verdict.mismatches);
        assert_eq!(verdict.verdict, "approximately unitarily equivalent");
    }

    #[test]
    fn different_limit_sets_are_distinguished() {
        let opts = SolveOptions::default();
        let harmonic = build_tower(&GraphSource::Empty, &DenseSequenceSpec::harmonic(), 10, &opts)
            .unwrap();
        let shifted = DenseSequenceSpec::interleaved(vec![ConvergentSeq {
            limit: 0.5,
            first: 1.0,
            ratio: 0.5,
        }]);
        let other = build_tower(&GraphSource::Empty, &shifted, 10, &opts).unwrap();
        let delta = 2.0 * harmonic.tail_bound();
        let ca = certify_spectrum(&harmonic, 100);
        // The geometric tail collides with its own limit in f64 past ~50
        // terms, so keep the sample inside float resolution.
        let cb = certify_spectrum(&other, 38);
        let fa = fingerprint_from_certificate(&ca, delta, None);
        let fb = fingerprint_from_certificate(&cb, delta, None);
        let verdict = compare_fingerprints(&fa, &ca, &fb, &cb);
        assert!(!verdict.equivalent);
    }
}
