//! Reference-based subject classification of articles and field-resolved
//! journal impact indicators.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`taxonomy`]: subject categories mapped onto 14 broad areas.
//! 2. [`corpus`]: record parsing, the citation graph, and a seeded
//!    synthetic corpus generator with planted fields.
//! 3. [`classifier`]: iterative plurality labeling seeded from
//!    single-category journals.
//! 4. [`indicators`]: IF-like measures per journal, area, and year, plus
//!    prestige, composition, representation, and rankings.
//!
//! [`report`] renders the computed tables as deterministic TSV files.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod indicators;
pub mod report;
pub mod taxonomy;

pub use error::{Error, Result};
