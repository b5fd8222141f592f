//! Spectra of symmetric matrices move no farther than the perturbation:
//! the Hausdorff distance between eigenvalue sets is bounded by the
//! operator norm of the difference. Samples random pairs across six orders
//! of perturbation magnitude and reports how tight the bound runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siep::linalg::{hausdorff_distance, operator_norm, sym_eigen, SymMatrix};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    println!("scale    order  spectral move  operator norm  ratio");
    for exp in -6..0 {
        let scale = 10f64.powi(exp);
        let mut worst_ratio = 0.0f64;
        let mut worst: Option<(usize, f64, f64)> = None;
        for _ in 0..200 {
            let n = rng.gen_range(2..=12);
            let mut s = SymMatrix::zeros(n);
            let mut t = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-5.0..5.0);
                    s.set(i, j, v);
                    t.set(i, j, v + rng.gen_range(-scale..scale));
                }
            }
            let moved = hausdorff_distance(
                sym_eigen(&s).spectrum.values(),
                sym_eigen(&t).spectrum.values(),
            )
            .unwrap();
            let norm = operator_norm(&s.sub(&t).unwrap());
            assert!(moved <= norm + 1e-9, "bound violated: {moved:e} > {norm:e}");
            let ratio = if norm == 0.0 { 0.0 } else { moved / norm };
            if ratio > worst_ratio {
                worst_ratio = ratio;
                worst = Some((n, moved, norm));
            }
        }
        let (n, moved, norm) = worst.unwrap();
        println!("1e{exp:<4}  {n:>5}  {moved:<13.3e}  {norm:<13.3e}  {worst_ratio:.4}");
    }
    println!("\nbound held on 1200 random pairs; ratio 1.0 means the bound is tight");
}
