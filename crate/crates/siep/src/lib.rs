//! Real symmetric matrices with a prescribed off-diagonal zero pattern and a
//! prescribed spectrum.
//!
//! The library builds such matrices one vertex at a time: append the next
//! eigenvalue on the diagonal, switch on the new row's edges at a small
//! amplitude, and correct the diagonal by a Newton continuation on the
//! power-sum map so the spectrum is restored exactly. Each accepted step is
//! certified: the new matrix satisfies a strong non-degeneracy condition (the
//! only symmetric matrix with zero diagonal commuting with it is zero), which
//! is what keeps the next step solvable.
//!
//! Because step `n -> n+1` can be kept within an operator-norm budget of
//! `2^-n`, the finite solutions form a Cauchy tower whose limit is a bounded
//! self-adjoint operator. [`infinite`] builds such towers, bounds how far the
//! truncated spectrum can drift (`tail_bound`), estimates the essential
//! spectrum from the accumulation structure of the eigenvalue sequence, and
//! compares two towers up to approximate unitary equivalence via their
//! spectral fingerprints.
//!
//! Every floating-point verdict can be cross-checked: [`oracle`] re-decides
//! the commutant condition in exact rational arithmetic and validates
//! computed spectra through characteristic-polynomial residuals.
//!
//! Start with the `examples/` directory; each file is a runnable walkthrough
//! of one capability. A thin `siep` binary exposes the same flows as
//! subcommands (`solve`, `wsp-check`, `tower`, `verify`, `families`).

pub mod cli;
pub mod graph;
pub mod infinite;
pub mod io;
pub mod linalg;
pub mod newton;
pub mod oracle;
pub mod siep;
pub mod verify;
pub mod wsp;

pub use graph::{FiniteGraph, GraphSource, LowerAdjacencyStream};
pub use infinite::{
    DenseSequenceSpec, EquivalenceVerdict, SpectralCertificate, SpectralFingerprint,
    TruncationTower,
};
pub use linalg::{EigenDecomposition, Matrix, Spectrum, SymMatrix};
pub use newton::{NewtonOptions, NewtonReport, PowerSumTarget};
pub use siep::{SiepSolution, SolveOptions, StepRecord};
pub use wsp::WspCertificate;
