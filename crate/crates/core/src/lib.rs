//! Exact solvers for linear equations over regular integer sequences.
//!
//! A regular sequence is a strictly increasing positive integer sequence
//! satisfying a linear recurrence (or growing factorially) whose consecutive
//! ratios converge. The crate evaluates such sequences exactly, classifies
//! operators `f(n) = sum a_i r_{n+i}` by their zero sets, solves linear
//! equations in sequence elements, and decides a small first-order fragment
//! over the integers extended by a sequence predicate.

pub mod axioms;
pub mod certificate;
pub mod congruence;
pub mod equation;
pub mod error;
pub mod exec;
pub mod formula;
pub mod mann;
pub mod numstr;
pub mod operator;
pub mod poly;
pub mod sequence;
pub mod syndetic;

pub use certificate::{Certificate, ProofReason};
pub use congruence::{divisibility_set, profile, CongruenceProfile, PeriodicIndexSet};
pub use error::{Error, Result};
pub use exec::Exec;
pub use operator::{apply, classify, is_trivial, shift_combine, solve_inhomogeneous, Combined, Operator, OperatorClass};
pub use sequence::{char_poly, CharPoly, CutoffMode, KeplerLimit, RegularityReport, SequenceHandle, SequenceSpec};
