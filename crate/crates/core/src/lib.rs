//! Least-squares projection approximations (LPA) of bounded linear operators.
//!
//! Given a truncated operator `T` and a subspace `Xₙ`, the LPA operator is
//! `Tₙ = T·P_{Xₙ}` and its pseudo-inverse `Tₙ†` approximates `T†`. This crate
//! measures the two quantities that decide whether that approximation
//! converges:
//!
//! * the **offset angle** `θₙ = arcsin gap(T†T(Xₙ), T*T(Xₙ))`, computed both
//!   from the projector gap and from the oblique projector
//!   `Qₙ = T†·P_{T(Xₙ)}·T` via `sin θₙ = √(1 − ‖I − Qₙ‖⁻²)`;
//! * **kernel approximability**, observed through the kernel core
//!   `N(T) ∩ Xₙ` and its gap to `N(T)`.
//!
//! Modules:
//!
//! * [`linalg`]: dense matrices, Jacobi SVD, pseudo-inverse, subspaces, gaps
//!   and canonical angles.
//! * [`gallery`]: operator families (Seidman, Du, best-LPA from a singular
//!   system, random finite-kernel operators) at finite truncation.
//! * [`analysis`]: LPA instances, diagnostics, identity and bound checks.
//! * [`experiment`]: scan configs, reports, CSV/JSON output.
//! * [`suites`]: seeded verification suites driven by the `verify` command.

pub mod analysis;
pub mod experiment;
pub mod gallery;
pub mod linalg;
pub mod suites;
pub mod tolerances;

pub use linalg::{DenseMatrix, DenseVector, RankTol, Subspace};
pub use tolerances::Tolerances;
