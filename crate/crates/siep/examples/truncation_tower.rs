//! Builds a nested family of star-graph matrices whose spectra walk the
//! harmonic sequence 1, 1/2, 1/3, ... Each level extends the previous one
//! within a geometrically shrinking operator-norm budget, so the family
//! converges to a bounded operator; the certificate bounds how far any
//! deeper level can move the spectrum.

use siep::graph::GraphSource;
use siep::infinite::{build_tower, certify_spectrum, fingerprint_from_certificate, DenseSequenceSpec};
use siep::siep::SolveOptions;

fn main() {
    let levels = 12;
    let opts = SolveOptions::default();
    let tower =
        build_tower(&GraphSource::Star, &DenseSequenceSpec::harmonic(), levels, &opts).unwrap();

    println!("level  appended     |delta|      budget");
    println!("{:>5}  {:<11}  seed", 1, tower.lambdas[0]);
    for t in 0..tower.step_norm_deltas.len() {
        println!(
            "{:>5}  {:<11.6}  {:<10.3e}  {:<10.3e}",
            t + 2,
            tower.lambdas[t + 1],
            tower.step_norm_deltas[t],
            tower.budgets[t]
        );
    }

    let cert = certify_spectrum(&tower, 10 * levels);
    println!("\ntail bound (spectral drift of any deeper level): {:e}", cert.tail_bound);
    println!("top-level spectrum:");
    for v in &cert.matrix_spectrum {
        println!("  {v:.12}");
    }

    // Every prescribed eigenvalue is pinned near the top level's spectrum.
    for &l in &tower.lambdas {
        let dist = cert
            .matrix_spectrum
            .iter()
            .fold(f64::INFINITY, |m, &s| m.min((s - l).abs()));
        assert!(dist <= cert.tail_bound, "{l} drifted {dist:e}");
    }

    let fp = fingerprint_from_certificate(
        &cert,
        2.0 * cert.tail_bound,
        tower.sequence.declared_limit_points.as_deref(),
    );
    println!("\nessential spectrum estimate: {:?}", fp.essential_spectrum_estimate);
    println!("isolated points (value, multiplicity):");
    for (v, m) in &fp.isolated_points {
        println!("  ({v:.6}, {m})");
    }
}
