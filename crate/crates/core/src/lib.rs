//! Search for large integer solutions of `d = c x^3 + y^3 + z^3` (default
//! `c = 2`) by lattice reduction.
//!
//! Each trial picks a short window of the curve `Y^3 = 1 - c X^3`, builds a
//! scaled 3x3 lattice basis whose short vectors are integer triples `(x, y, z)`
//! with `(x/z, y/z)` close to the curve, LLL-reduces it, enumerates the integer
//! points of the feasible pyramid in reduced coordinates and verifies every
//! candidate with exact integer arithmetic.
//!
//! Pipeline modules, in order:
//!
//! - [`curve`]: curve evaluation, tangent data and the basis of a window.
//! - [`lattice`]: exact-rational LLL with the unimodular transform.
//! - [`pyramid`]: integer points of the feasible pyramid.
//! - [`verify`]: exact evaluation, canonical form, residue and target filters.
//! - [`driver`]: seeded, parallel, checkpointed trial loop.
//! - [`io`]: targets files, JSONL results and checkpoints.

pub mod cli;
pub mod curve;
pub mod driver;
pub mod error;
pub mod io;
pub mod lattice;
pub mod matrix;
pub mod pyramid;
pub mod real;
pub mod verify;

pub use curve::{build_basis, build_window, Basis, CurveParams, Region, SearchWindow, WindowSummary};
pub use driver::{run_trial, sample_window, search, DriverConfig, RunSummary, TrialSummary};
pub use error::{Error, Result};
pub use lattice::{lll_reduce, ReducedLattice, UnimodularTransform};
pub use matrix::{IMat3, QMat3};
pub use pyramid::{enumerate_candidates, CandidateVector, Pyramid};
pub use verify::{Solution, SolutionRecord, TargetSet};
