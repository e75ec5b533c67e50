//! Preference-based structured argumentation.
//!
//! Theories are made of labeled defeasible rules and leveled priority rules
//! over those labels. Queries ground the theory over a finite constant
//! domain, instantiate every minimal argument, filter attacks through the
//! priorities and evaluate acceptance under grounded or preferred semantics.
//!
//! The crate is `no_std` and only needs `alloc`; file access, JSON and the
//! network front-ends live in the `argora` crate.
#![no_std]

extern crate alloc;

pub mod abduction;
pub mod conflicts;
pub mod dsl;
pub mod explain;
pub mod grounder;
pub mod kernel;
pub mod solver;

pub use kernel::{
    Abducible, ArgumentRule, Diagnostic, IncompatibilityDecl, KernelError, Layer, Literal,
    PriorityRule, Term, Theory,
};
pub use solver::{Config, Semantics, Status, Verdict};
