//! Decides the commutant property for two 3x3 matrices on the path graph:
//! one with staggered couplings (holds) and one with equal couplings
//! (fails, with a witness), then cross-checks both verdicts by exact
//! rational elimination.

use siep::linalg::{commutator, SymMatrix};
use siep::oracle::wsp_exact;
use siep::wsp::{has_wsp, DEFAULT_WSP_TOL};

fn report(name: &str, a: &SymMatrix) {
    println!("--- {name} ---");
    for i in 0..a.order() {
        let row: Vec<String> = (0..a.order()).map(|j| format!("{:5.1}", a.get(i, j))).collect();
        println!("  [{}]", row.join(" "));
    }

    let cert = has_wsp(a, DEFAULT_WSP_TOL);
    println!("verdict: {}", if cert.holds { "holds" } else { "fails" });
    println!("kernel dimension: {}", cert.kernel_dimension);
    if let Some(s) = cert.smallest_kept_singular_value {
        println!("smallest kept singular value: {s:.3e}");
    }
    if let Some(x) = &cert.witness {
        println!("witness (zero diagonal, unit Frobenius):");
        for i in 0..x.order() {
            let row: Vec<String> =
                (0..x.order()).map(|j| format!("{:8.4}", x.get(i, j))).collect();
            println!("  [{}]", row.join(" "));
        }
        let residual = commutator(x, a).unwrap().max_abs();
        println!("witness commutator residual: {residual:e}");
    }

    let (dim, basis) = wsp_exact(a).unwrap();
    println!("exact kernel dimension: {dim}");
    for x in &basis {
        let entries: Vec<String> = x.upper_entries().iter().map(|r| r.to_string()).collect();
        println!("exact witness upper entries: [{}]", entries.join(", "));
    }
    assert_eq!(dim == 0, cert.holds, "floating and exact verdicts must agree");
    println!();
}

fn main() {
    // Arrow-shaped couplings: vertex 1 hangs off the diagonal untouched.
    let mut a = SymMatrix::zeros(3);
    a.set(0, 0, 4.0);
    a.set(1, 1, 3.0);
    a.set(2, 2, 2.0);
    a.set(0, 2, 1.0);

    // Path couplings of equal strength: the equal-strength ladder admits a
    // zero-diagonal commuting direction, so the property fails.
    let mut b = SymMatrix::zeros(3);
    b.set(0, 0, 4.0);
    b.set(1, 1, 3.0);
    b.set(2, 2, 2.0);
    b.set(0, 1, 1.0);
    b.set(1, 2, 1.0);

    report("staggered couplings", &a);
    report("equal couplings", &b);
}
