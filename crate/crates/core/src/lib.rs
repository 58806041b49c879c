//! Rule-based English story understanding.
//!
//! The pipeline: [`lexicon`] supplies dictionary analyses, [`parser`]
//! builds labeled sentence trees, [`semmap`] translates trees into typed
//! records of the [`semdb`] fact database, [`kb`] holds frame articles
//! describing word semantics, and [`qa`] answers questions over the
//! stored facts by pattern unification and frame lookup.
//!
//! The crate is `no_std` (alloc only); file handling, the command-line
//! interface and the REPL live in the companion `fabula` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod kb;
pub mod lexicon;
pub mod parser;
pub mod qa;
pub mod semdb;
pub mod semmap;

pub use lexicon::{LexEntry, Lexicon, VerbSense};
pub use parser::{ParseNode, Token};
pub use semdb::{Code, Kind, QueryPattern, Record, SemanticDb};
