//! qmeet decides, exactly, whether two quadric hypersurfaces
//! `{x : f1(x) = 0}` and `{x : f2(x) = 0}` in R^n have a common point.
//!
//! Quadratics are stored as `f(x) = x'Ax + 2a'x + a0` (see [`quadform::Quadratic`]).
//! The decision rests on the value of the quartic program `inf f1^2 + f2^2`:
//! the surfaces are disjoint iff that infimum is positive, or zero but not
//! attained.  The pipeline in [`decision::decide`] bounds the value through
//! either a semidefinite relaxation for linearly independent Hessians
//! ([`sprocedure`]) or an exact lifted equality-constrained reduction for
//! dependent ones ([`duals`]), then settles attainability of a zero value via
//! separating-surface certificates ([`separation`]) and one-constraint
//! quadratic programs.  Every DISJOINT verdict carries a certificate that can
//! be re-validated from scratch with plain linear algebra (`qmeet certify`),
//! INTERSECT verdicts are backed by a verified common point or an exact
//! reduction, and a pair the solvers cannot pin down honestly returns
//! UNDECIDED rather than a guess.
//!
//! The `examples/` directory is the best starting point: each file is a
//! runnable walkthrough of one capability (`cargo run -p qmeet --example
//! decide_pair`, `--example dual_scan`, ...).  The `qmeet` binary wraps the
//! same library entry points behind `decide` / `batch` / `oracle` / `certify`
//! subcommands operating on JSON files.

pub mod canonical;
pub mod cli;
pub mod decision;
pub mod duals;
pub mod linalg;
pub mod oracle;
pub mod quadform;
pub mod separation;
pub mod sprocedure;

mod error;
pub(crate) mod serde_mat;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
