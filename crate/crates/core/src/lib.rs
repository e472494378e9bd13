//! Three-phase probabilistic chart parsing.
//!
//! Rules are proposed from part-of-speech trigrams (phase I), then from
//! any child position of completed constituents (phase II), and finally by
//! exhaustive bottom-up and top-down prediction ordered by span length
//! (phase III). Trees are scored with a context-sensitive rule model.

pub mod agenda;
pub mod chart;
pub mod engine;
pub mod eval;
pub mod grammar;
pub mod model;
pub mod oracle;
pub mod par;
pub mod treebank;
