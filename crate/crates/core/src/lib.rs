//! Programming-by-example toolkit: a string-transformation DSL, an
//! integer-list DSL, generators for compositional-generalization benchmarks,
//! and a step-by-step beam search that alternates between predicting
//! execution subgoals and synthesizing the subprogram that reaches them.

pub mod backends;
pub mod deepcoder;
pub mod domain;
pub mod error;
pub mod harness;
pub mod robustfill;
pub mod search;
pub mod split;
pub mod taskgen;

pub use domain::{Dc, Domain, Example, Rf, Spec};
pub use error::{ExecError, ParseError};
pub use split::{DomainKind, Side, Split, SplitKind};
