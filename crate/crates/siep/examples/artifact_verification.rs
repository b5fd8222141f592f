//! Round-trips a reconstruction through disk and audits it from the files
//! alone: the verifier re-derives every claim (pattern, spectrum, budgets,
//! certificates) instead of trusting the stored records, so a single
//! corrupted matrix entry is caught.

use siep::graph::FiniteGraph;
use siep::io::{write_solution_dir, SOLUTION_MATRIX};
use siep::siep::{solve_finite, SolveOptions};
use siep::verify::verify_artifact;

fn main() {
    let graph = FiniteGraph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
    let targets = [-2.0, -0.5, 1.0, 3.0, 6.0];
    let opts = SolveOptions::default();
    let solution = solve_finite(&graph, &targets, &opts).unwrap();

    let dir = std::env::temp_dir().join("siep_artifact_demo");
    let _ = std::fs::remove_dir_all(&dir);
    write_solution_dir(&dir, &solution, 0, &opts).unwrap();
    println!("wrote {}", dir.join("solution.json").display());

    let report = verify_artifact(&dir).unwrap();
    println!("\nfresh artifact:\n{report}");
    assert!(report.passed());

    // Nudge the last stored entry (a diagonal one) by 1e-3 — small enough to
    // look plausible, far too large to survive the spectrum re-check.
    let path = dir.join(SOLUTION_MATRIX);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.last().unwrap();
    let mut parts: Vec<String> = last.split_whitespace().map(str::to_string).collect();
    let v: f64 = parts[2].parse().unwrap();
    parts[2] = format!("{}", v + 1e-3);
    *lines.last_mut().unwrap() = parts.join(" ");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();

    let report = verify_artifact(&dir).unwrap();
    println!("after corrupting one entry:\n{report}");
    assert!(!report.passed());
}
