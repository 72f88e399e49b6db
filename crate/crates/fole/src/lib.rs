//! The classification form of the FOLE first-order logical environment.
//!
//! Layers, bottom up:
//! - [`kernel`]: signatures, schemas, type domains, universes, structures.
//! - [`formula`]: the formula algebra, sequents, constraints, translation.
//! - [`semantics`]: relations, flow operators, interpretation, classification.
//! - [`oracle`]: a deliberately naive evaluator and model enumerator for
//!   differential testing.
//! - [`satisfaction`]: satisfaction, conceptual intent, reducts, and the
//!   institution and logical-environment conditions.
//! - [`spec_calc`]: specifications, entailment, consequence, derivations, flow.
//! - [`logic`]: logics, soundness, natural logics, residuation, logic flow.
//! - [`frontend`]: the workspace DSL, CSV ingestion and the command line.

pub mod error;
pub mod formula;
pub mod frontend;
pub mod kernel;
pub mod logic;
pub mod oracle;
pub mod satisfaction;
pub mod semantics;
pub mod spec_calc;

pub use error::{Error, Result};
