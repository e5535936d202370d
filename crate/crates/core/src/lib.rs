//! Schwa-deletion prediction for Hindi and Punjabi.
//!
//! The pipeline decodes Devanagari or Gurmukhi into orthographic phone tokens
//! ([`script`]), reads pronunciation lexicons ([`lexicon`]), labels every
//! inherent schwa by aligning spelling against pronunciation ([`align`]),
//! turns each schwa's context into a sparse binary vector ([`features`]), and
//! trains classifiers ([`models`]) that are compared against categorical rules
//! ([`baseline`]) using per-schwa and word-level metrics ([`eval`]).

pub mod align;
pub mod baseline;
pub mod cli;
pub mod eval;
pub mod features;
pub mod lexicon;
pub mod models;
pub mod pipeline;
pub mod script;
pub mod synth;
