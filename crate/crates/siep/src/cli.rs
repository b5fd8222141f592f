//! Command-line front end. Commands never mutate shared state and print
//! only from data they computed, so identical configurations produce
//! byte-identical output.
//!
//! Exit codes: 0 success (and: the certificate holds / all re-checks pass),
//! 1 negative verdict (certificate fails, re-check fails), 2 unusable input
//! or usage error, 3 solver failure (the message names the failing step).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, FromArgMatches, Subcommand, ValueEnum};

use crate::graph::GraphSource;
use crate::infinite::{
    build_tower, certify_spectrum, fingerprint_from_certificate, DenseSequenceSpec,
};
use crate::io::{
    load_graph_json, load_matrix, load_spectrum, write_coo_sym, write_solution_dir,
    write_tower_dir, TOWER_JSON,
};
use crate::linalg::{commutator, hausdorff_distance, sym_eigen};
use crate::oracle::{wsp_exact, OracleError};
use crate::siep::{solve_finite, SolveOptions};
use crate::verify::verify_artifact;
use crate::wsp::{has_wsp, DEFAULT_WSP_TOL};

/// Outcome of one command invocation: everything `main` needs to finish.
#[derive(Debug)]
pub struct CmdResult {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl CmdResult {
    fn ok(stdout: String) -> CmdResult {
        CmdResult { code: 0, stdout, stderr: String::new() }
    }

    fn fail(code: u8, stdout: String, stderr: String) -> CmdResult {
        CmdResult { code, stdout, stderr }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for a symmetric matrix with a prescribed graph and spectrum
    Solve(SolveArgs),
    /// Decide whether zero is the only commuting zero-diagonal perturbation
    WspCheck(WspCheckArgs),
    /// Build a truncation tower for a graph family and a dense sequence
    Tower(TowerArgs),
    /// Re-derive every certificate stored in an artifact directory
    Verify(VerifyArgs),
    /// List the built-in graph families and sequences
    Families,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("must be a positive finite number".into())
    }
}

fn finite_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn at_least_one(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{e}"))?;
    if v >= 1 {
        Ok(v)
    } else {
        Err("must be at least 1".into())
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err("must lie in [0, 1]".into())
    }
}

/// Tolerances shared by the solving commands. All must be positive; the
/// defaults match `SolveOptions::default`.
#[derive(Args, Debug)]
struct TolArgs {
    /// Spectrum check: Hausdorff distance <= this times max(1, spread)
    #[arg(long, default_value_t = 1e-8, value_parser = positive_f64)]
    spectrum_tol: f64,
    /// Relative singular-value threshold for commutant certificates
    #[arg(long, default_value_t = DEFAULT_WSP_TOL, value_parser = positive_f64)]
    wsp_tol: f64,
    /// Minimum magnitude for created edge entries
    #[arg(long, default_value_t = 1e-10, value_parser = positive_f64)]
    edge_floor: f64,
    /// Cap applied on top of the geometric per-step budgets 2^-(k-1)
    #[arg(long, value_parser = positive_f64)]
    budget_cap: Option<f64>,
    /// Comma-separated per-step budgets replacing the geometric schedule
    #[arg(long, value_delimiter = ',', value_parser = positive_f64)]
    budget_schedule: Option<Vec<f64>>,
}

impl TolArgs {
    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            spectrum_tol: self.spectrum_tol,
            wsp_tol: self.wsp_tol,
            edge_floor: self.edge_floor,
            budget_cap: self.budget_cap,
            budget_schedule: self.budget_schedule.clone(),
            ..SolveOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Graph file: JSON {"n": ..., "edges": [[i, j], ...]}
    graph: PathBuf,
    /// Spectrum file: one decimal eigenvalue per line
    spectrum: PathBuf,
    /// Output directory (solution.json + matrix.coo)
    #[arg(short, long)]
    out: PathBuf,
    /// Recorded in the artifact; SIEP_SEED is used when absent
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    tols: TolArgs,
}

#[derive(Args, Debug)]
struct WspCheckArgs {
    /// Matrix file in COO-SYM format
    matrix: PathBuf,
    /// Relative singular-value threshold
    #[arg(long, default_value_t = DEFAULT_WSP_TOL, value_parser = positive_f64)]
    tol: f64,
    /// Also decide by exact rational elimination (orders up to 8)
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SeqName {
    /// 1, 1/2, 1/3, ...
    Harmonic,
    /// 0, 1, 1/2, 1/3, ...
    HarmonicWithZero,
    /// lo, hi, then breadth-first dyadic midpoints of [lo, hi]
    Dyadic,
}

#[derive(Args, Debug)]
struct TowerArgs {
    /// Built-in family (path|star|complete|empty|random) or an LADJ file
    #[arg(long)]
    graph: String,
    /// Edge probability for the random family
    #[arg(long, value_parser = probability)]
    p: Option<f64>,
    /// Built-in sequence
    #[arg(long, value_enum, required_unless_present = "seq_file")]
    seq: Option<SeqName>,
    /// Explicit sequence file: one decimal per line
    #[arg(long, conflicts_with = "seq")]
    seq_file: Option<PathBuf>,
    /// Left endpoint for the dyadic sequence
    #[arg(long, default_value_t = 0.0, value_parser = finite_f64, allow_hyphen_values = true)]
    lo: f64,
    /// Right endpoint for the dyadic sequence
    #[arg(long, default_value_t = 1.0, value_parser = finite_f64, allow_hyphen_values = true)]
    hi: f64,
    /// Number of tower levels to build
    #[arg(long, value_parser = at_least_one)]
    levels: usize,
    /// Tail sample length for the certificate (default 10x levels)
    #[arg(long)]
    tail: Option<usize>,
    /// Clustering resolution for the fingerprint (default 2x tail bound)
    #[arg(long, value_parser = positive_f64)]
    resolution: Option<f64>,
    /// Output directory (tower.json + one COO file per level)
    #[arg(short, long)]
    out: PathBuf,
    /// Seed for the random graph family; SIEP_SEED is used when absent
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    tols: TolArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Artifact directory written by solve or tower
    artifact: PathBuf,
}

/// Parses and runs; never exits the process itself.
pub fn run<I, T>(args: I) -> CmdResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut command = clap::Command::new("siep")
        .about("Symmetric matrices with a prescribed graph and a prescribed spectrum")
        .version(env!("CARGO_PKG_VERSION"));
    command = Command::augment_subcommands(command).subcommand_required(true);
    let matches = match command.try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let rendered = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CmdResult::ok(rendered)
                }
                _ => CmdResult::fail(2, String::new(), rendered),
            };
        }
    };
    let parsed = match Command::from_arg_matches(&matches) {
        Ok(p) => p,
        Err(e) => return CmdResult::fail(2, String::new(), e.render().to_string()),
    };
    match parsed {
        Command::Solve(a) => cmd_solve(&a),
        Command::WspCheck(a) => cmd_wsp_check(&a),
        Command::Tower(a) => cmd_tower(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Families => CmdResult::ok(families_text()),
    }
}

/// `--seed` beats the SIEP_SEED environment variable beats 0.
fn resolve_seed(flag: Option<u64>, env_value: Option<&str>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match env_value {
        None => Ok(0),
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| format!("SIEP_SEED must be an unsigned integer, got `{text}`")),
    }
}

fn seed_from_env(flag: Option<u64>) -> Result<u64, String> {
    let env = std::env::var("SIEP_SEED").ok();
    resolve_seed(flag, env.as_deref())
}

fn cmd_solve(args: &SolveArgs) -> CmdResult {
    let seed = match seed_from_env(args.seed) {
        Ok(s) => s,
        Err(e) => return CmdResult::fail(2, String::new(), format!("error: {e}\n")),
    };
    let graph = match load_graph_json(&args.graph) {
        Ok(g) => g,
        Err(e) => return CmdResult::fail(2, String::new(), format!("error: {e}\n")),
    };
    let lambdas = match load_spectrum(&args.spectrum) {
        Ok(l) => l,
        Err(e) => return CmdResult::fail(2, String::new(), format!("error: {e}\n")),
    };
    if lambdas.len() != graph.vertex_count() {
        return CmdResult::fail(
            2,
            String::new(),
            format!(
                "error: graph has {} vertices but the spectrum file holds {} values\n",
                graph.vertex_count(),
                lambdas.len()
            ),
        );
    }
    let opts = args.tols.solve_options();
    let solution = match solve_finite(&graph, &lambdas, &opts) {
        Ok(s) => s,
        Err(e) => return CmdResult::fail(3, String::new(), format!("solver error: {e}\n")),
    };
    if let Err(e) = write_solution_dir(&args.out, &solution, seed, &opts) {
        return CmdResult::fail(2, String::new(), format!("error: {e}\n"));
    }

    let mut out = String::new();
    let _ = writeln!(out, "order {} solved on {} edges", graph.vertex_count(), graph.edge_count());
    let _ = writeln!(out, "step  delta         budget        wsp");
    for rec in &solution.per_step {
        let _ = writeln!(
            out,
            "{:<5} {:<13.6e} {:<13.6e} {}",
            rec.step_index,
            rec.achieved_norm_delta,
            rec.budget,
            if rec.wsp.holds { "ok" } else { "FAIL" }
        );
    }
    let achieved = sym_eigen(&solution.matrix).spectrum;
    let dist = hausdorff_distance(achieved.values(), solution.target_spectrum.values())
        .expect("nonempty");
    let _ = writeln!(out, "spectrum within {dist:.3e} of the target");
    let _ = writeln!(out, "wrote {}", args.out.join(crate::io::SOLUTION_JSON).display());
    CmdResult::ok(out)
}

fn cmd_wsp_check(args: &WspCheckArgs) -> CmdResult {
    let matrix = match load_matrix(&args.matrix) {
        Ok(m) => m,
        Err(e) => return CmdResult::fail(2, String::new(), format!("error: {e}\n")),
    };
    let cert = has_wsp(&matrix, args.tol);
    let mut out = String::new();
    let _ = writeln!(out, "order: {}", matrix.order());
    let _ = writeln!(out, "verdict: {}", if cert.holds { "holds" } else { "fails" });
    let _ = writeln!(out, "kernel dimension: {}", cert.kernel_dimension);
    if let Some(v) = cert.smallest_kept_singular_value {
        let _ = writeln!(out, "smallest kept singular value: {v:e}");
    }
    if let Some(v) = cert.largest_dropped_singular_value {
        let _ = writeln!(out, "largest dropped singular value: {v:e}");
    }
    if let Some(w) = &cert.witness {
        let _ = writeln!(out, "witness (zero diagonal, unit Frobenius norm, COO-SYM):");
        out.push_str(&write_coo_sym(w));
        let residual = commutator(w, &matrix)
            .map(|c| c.max_abs())
            .expect("orders match");
        let _ = writeln!(out, "witness commutator residual: {residual:e}");
    }

    if args.exact {
        match wsp_exact(&matrix) {
            Ok((dim, basis)) => {
                let _ = writeln!(out, "exact kernel dimension: {dim}");
                let _ = writeln!(
                    out,
                    "exact verdict: {}",
                    if dim == 0 { "holds" } else { "fails" }
                );
                if let Some(first) = basis.first() {
                    let _ = writeln!(out, "exact witness (strict upper entries as rationals):");
                    let n = first.order();
                    for i in 0..n {
                        for j in (i + 1)..n {
                            let v = first.get(i, j);
                            if !num_traits::Zero::is_zero(&v) {
                                let _ = writeln!(out, "{i} {j} {v}");
                            }
                        }
                    }
                }
                if (dim == 0) != cert.holds {
                    let _ = writeln!(out, "WARNING: floating and exact verdicts disagree");
                }
                let code = if dim == 0 { 0 } else { 1 };
                return CmdResult { code, stdout: out, stderr: String::new() };
            }
            Err(e @ OracleError::OrderTooLarge(..)) => {
                return CmdResult::fail(2, out, format!("error: {e}\n"));
            }
            Err(e) => return CmdResult::fail(2, out, format!("error: {e}\n")),
        }
    }

    let code = if cert.holds { 0 } else { 1 };
    CmdResult { code, stdout: out, stderr: String::new() }
}

fn resolve_graph(name: &str, p: Option<f64>, seed: u64) -> Result<GraphSource, String> {
    match name {
        "path" => Ok(GraphSource::Path),
        "star" => Ok(GraphSource::Star),
        "complete" => Ok(GraphSource::Complete),
        "empty" => Ok(GraphSource::Empty),
        "random" => {
            let p = p.ok_or("the random family needs --p")?;
            Ok(GraphSource::Random { p, seed })
        }
        other => {
            let path = Path::new(other);
            if path.is_file() {
                crate::io::load_graph_source(path).map_err(|e| e.to_string())
            } else {
                Err(format!(
                    "`{other}` is neither a built-in family (path|star|complete|empty|random) \
                     nor an LADJ file"
                ))
            }
        }
    }
}

fn resolve_sequence(args: &TowerArgs) -> Result<DenseSequenceSpec, String> {
    if let Some(file) = &args.seq_file {
        let values = load_spectrum(file).map_err(|e| e.to_string())?;
        return Ok(DenseSequenceSpec::explicit(values, None));
    }
    match args.seq.expect("clap enforces one of --seq/--seq-file") {
        SeqName::Harmonic => Ok(DenseSequenceSpec::harmonic()),
        SeqName::HarmonicWithZero => Ok(DenseSequenceSpec::harmonic_with_zero()),
        SeqName::Dyadic => {
            if args.lo < args.hi {
                Ok(DenseSequenceSpec::dyadic(args.lo, args.hi))
            } else {
                Err(format!("dyadic needs --lo < --hi, got {} and {}", args.lo, args.hi))
            }
        }
    }
}

fn cmd_tower(args: &TowerArgs) -> CmdResult {
    let seed = match seed_from_env(args.seed) {
        Ok(s) => s,
        Err(e) => return CmdResult::fail(2, String::new(), format!("error: {e}\n")),
    };
    let graph = match resolve_graph(&args.graph, args.p, seed) {
        Ok(g) => g,
        Err(e) => return CmdResult::fail(2, String::new(), format!("error: {e}\n")),
    };
    let sequence = match resolve_sequence(args) {
        Ok(s) => s,
        Err(e) => return CmdResult::fail(2, String::new(), format!("error: {e}\n")),
    };
    let opts = args.tols.solve_options();
    let tower = match build_tower(&graph, &sequence, args.levels, &opts) {
        Ok(t) => t,
        Err(e) => return CmdResult::fail(3, String::new(), format!("solver error: {e}\n")),
    };

    let tail_len = args.tail.unwrap_or(10 * args.levels);
    let resolution = args.resolution.unwrap_or(2.0 * tower.tail_bound());
    let cert = certify_spectrum(&tower, tail_len);
    let fp = fingerprint_from_certificate(
        &cert,
        resolution,
        tower.sequence.declared_limit_points.as_deref(),
    );
    if let Err(e) = write_tower_dir(&args.out, &tower, &cert, &fp, seed, &opts) {
        return CmdResult::fail(2, String::new(), format!("error: {e}\n"));
    }

    let mut out = String::new();
    let _ = writeln!(out, "level  delta         budget        status");
    let _ = writeln!(out, "1      -             -             seeded");
    let mut all_ok = true;
    for (t, (&delta, &budget)) in
        tower.step_norm_deltas.iter().zip(&tower.budgets).enumerate()
    {
        let ok = delta < budget;
        all_ok &= ok;
        let _ = writeln!(
            out,
            "{:<6} {:<13.6e} {:<13.6e} {}",
            t + 2,
            delta,
            budget,
            if ok { "ok" } else { "FAIL" }
        );
    }
    let _ = writeln!(out, "tail bound: {:e}", tower.tail_bound());
    let _ = writeln!(
        out,
        "fingerprint: {} essential point(s), {} isolated point(s) at resolution {resolution:e}",
        fp.essential_spectrum_estimate.len(),
        fp.isolated_points.len()
    );
    let _ = writeln!(out, "wrote {}", args.out.join(TOWER_JSON).display());
    if all_ok {
        CmdResult::ok(out)
    } else {
        // Unreachable through build_tower (budgets are enforced), but the
        // table tells the truth regardless.
        CmdResult::fail(3, out, "a level exceeded its budget\n".into())
    }
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    match verify_artifact(&args.artifact) {
        Ok(report) => {
            let code = if report.passed() { 0 } else { 1 };
            CmdResult { code, stdout: format!("{report}\n"), stderr: String::new() }
        }
        Err(e) => CmdResult::fail(2, String::new(), format!("error: {e}\n")),
    }
}

fn families_text() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph families (vertex k lists its earlier neighbors):");
    let _ = writeln!(out, "  path      k joins k-1: a one-sided path");
    let _ = writeln!(out, "  star      k joins 0: all spokes share the hub");
    let _ = writeln!(out, "  complete  k joins every earlier vertex");
    let _ = writeln!(out, "  empty     no edges; towers stay diagonal");
    let _ = writeln!(out, "  random    each earlier pair joins independently with probability --p");
    let _ = writeln!(out, "any LADJ file path is accepted wherever a family name is.");
    let _ = writeln!(out);
    let _ = writeln!(out, "sequences:");
    let _ = writeln!(out, "  harmonic            1, 1/2, 1/3, ... -> 0");
    let _ = writeln!(out, "  harmonic-with-zero  0, 1, 1/2, 1/3, ... (same set, zero first)");
    let _ = writeln!(out, "  dyadic              lo, hi, then midpoints, dense in [lo, hi]");
    let _ = writeln!(out, "a file of decimals given via --seq-file is used verbatim.");
    out
}
