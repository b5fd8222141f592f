//! Two enumerations of the same countable set {0} ∪ {1/k} produce towers
//! that differ at every finite level, yet their spectral fingerprints agree:
//! both describe diagonal operators with eigenvalue set {1/k} accumulating
//! only at 0, so the limits are approximately unitarily equivalent.

use siep::graph::GraphSource;
use siep::infinite::{
    build_tower, certify_spectrum, compare_fingerprints, fingerprint_from_certificate,
    DenseSequenceSpec,
};
use siep::siep::SolveOptions;

fn main() {
    let levels = 12;
    let tail = 20_000;
    let resolution = 1e-6;
    let opts = SolveOptions::default();

    // Ordering one starts at 1; ordering two starts at the limit point 0.
    let ta = build_tower(&GraphSource::Empty, &DenseSequenceSpec::harmonic(), levels, &opts)
        .unwrap();
    let tb = build_tower(
        &GraphSource::Empty,
        &DenseSequenceSpec::harmonic_with_zero(),
        levels,
        &opts,
    )
    .unwrap();

    let mut differing = 0;
    for n in 1..=levels {
        if ta.level(n) != tb.level(n) {
            differing += 1;
        }
    }
    println!("levels compared: {levels}, levels that differ: {differing}");

    let ca = certify_spectrum(&ta, tail);
    let cb = certify_spectrum(&tb, tail);
    let fa = fingerprint_from_certificate(&ca, resolution, Some(&[0.0]));
    let fb = fingerprint_from_certificate(&cb, resolution, Some(&[0.0]));

    for (name, fp) in [("first ordering", &fa), ("second ordering", &fb)] {
        let lo = fp.essential_spectrum_estimate.first().unwrap();
        let hi = fp.essential_spectrum_estimate.last().unwrap();
        println!(
            "{name}: essential estimate has {} points in [{lo:.2e}, {hi:.2e}], \
             {} isolated points",
            fp.essential_spectrum_estimate.len(),
            fp.isolated_points.len()
        );
    }

    let verdict = compare_fingerprints(&fa, &ca, &fb, &cb);
    for m in &verdict.mismatches {
        println!("mismatch: {m}");
    }
    println!("verdict: {}", verdict.verdict);
    assert!(verdict.equivalent);
}
