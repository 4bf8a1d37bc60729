//! Constant-delay enumeration for context-free spanners.
//!
//! An extraction grammar is a context-free grammar over document characters
//! and variable operations (`⊢x`, `⊣x`). Each valid ref-word it derives
//! describes a document together with a span for every variable. Given a
//! document `d`, [`Spanner::preprocess`] builds a decorated grammar that
//! describes exactly the span mappings over `d`; [`Preprocessed::stream`]
//! then enumerates them with a delay that depends only on the number of
//! variables.
//!
//! ```
//! use cfspanner::{parse_grammar, Document, Spanner};
//!
//! let g = parse_grammar(
//!     "vars: x\nstart: S\nunambiguous: true\nS -> B {x 'a' x} B\nB -> 'a' B | 'b' B | eps\n",
//! )
//! .unwrap();
//! let spanner = Spanner::new(&g).unwrap();
//! let results: Vec<_> = spanner.enumerate(&Document::new("aba")).unwrap().collect();
//! assert_eq!(results.len(), 2);
//! ```

mod compiled;
mod error;
mod grammar;
mod opset;
mod span;

pub mod adjust;
pub mod decorate;
pub mod dsl;
pub mod enumerate;
pub mod oracle;
pub mod refword;
pub mod transforms;

mod pipeline;

pub use error::{Error, Result};
pub use grammar::{ExtractionGrammar, OpKind, Production, Symbol, VarOp, Variable};
pub use opset::{OpSet, MAX_VARIABLES};
pub use span::{Document, Span, SpanMapping};

pub use adjust::{adjust, AdjustedGrammar};
pub use decorate::{decorate, DecoratedGrammar};
pub use dsl::{parse_grammar, serialize_grammar};
pub use enumerate::{DelayStats, MappingStream};
pub use oracle::{naive_evaluate, OracleConfig};
pub use pipeline::{spanner_enumerate, Preprocessed, Spanner, StageSizes, StageTimings};
pub use refword::{RefSymbol, RefWord};
pub use transforms::{FunctionalGrammar, VarOpSetTable};
