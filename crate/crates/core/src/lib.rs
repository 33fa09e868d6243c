//! Comparison-instrumented algorithms for studying *fragile complexity*: the
//! largest number of comparisons any single input element takes part in.
//!
//! Every algorithm routes its comparisons through a [`ledger::Session`], so
//! the per-element counts and the total work of a run can be read off the
//! [`ledger::Ledger`] afterwards. Adaptive adversaries plug in as
//! [`ledger::Oracle`]s and can be certified once a run has finished.

pub mod adversary;
pub mod error;
pub mod harness;
pub mod ledger;
pub mod minimum;
pub mod networks;
pub mod selection;
pub mod sorting;

pub use error::{Error, Result};
pub use ledger::{ElementId, Ledger, Oracle, Outcome, Session, ValueOracle};
