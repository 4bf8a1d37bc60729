use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::adjust::adjust;
use crate::decorate::{decorate, DecoratedGrammar};
use crate::enumerate::{compute_jump, compute_stable, mark_skippable, ApplyTable, EnumerationTables, MappingStream};
use crate::error::Result;
use crate::grammar::ExtractionGrammar;
use crate::span::{Document, SpanMapping};
use crate::transforms::{empty_doc_mapping, functionalize, to_cnf, FunctionalGrammar};

/// Wall-clock time spent in each preprocessing stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub adjust: Duration,
    pub decorate: Duration,
    pub stable: Duration,
    pub skippable: Duration,
    /// Jump table plus the precomputed `apply_prod` results.
    pub jump: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.adjust + self.decorate + self.stable + self.skippable + self.jump
    }
}

/// Sizes of the intermediate grammars built for one document.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StageSizes {
    pub adjusted_nonterminals: usize,
    pub adjusted_rules: usize,
    pub decorated_nonterminals: usize,
    pub decorated_rules: usize,
    pub jump_entries: usize,
}

/// A grammar compiled once and evaluated on any number of documents.
#[derive(Clone, Debug)]
pub struct Spanner {
    source: ExtractionGrammar,
    functional: FunctionalGrammar,
    empty_doc: Option<SpanMapping>,
}

impl Spanner {
    /// Normalizes `g` to a functional grammar in Chomsky normal form.
    pub fn new(g: &ExtractionGrammar) -> Result<Spanner> {
        let functional = functionalize(&to_cnf(g))?;
        Ok(Spanner {
            source: g.clone(),
            empty_doc: empty_doc_mapping(g),
            functional,
        })
    }

    pub fn grammar(&self) -> &ExtractionGrammar {
        &self.source
    }

    pub fn functional(&self) -> &FunctionalGrammar {
        &self.functional
    }

    pub fn is_declared_unambiguous(&self) -> bool {
        self.source.is_declared_unambiguous()
    }

    /// Builds the enumeration tables for `d`.
    pub fn preprocess(&self, d: &Document) -> Result<Arc<Preprocessed>> {
        let mut timings = StageTimings::default();
        if d.is_empty() {
            return Ok(Arc::new(Preprocessed {
                tables: None,
                empty_doc: self.empty_doc.clone(),
                timings,
                sizes: StageSizes::default(),
                unambiguous: self.is_declared_unambiguous(),
            }));
        }
        let clock = Instant::now();
        let adjusted = adjust(&self.functional, d)?;
        timings.adjust = clock.elapsed();

        let clock = Instant::now();
        let decorated = decorate(&adjusted)?;
        timings.decorate = clock.elapsed();

        let clock = Instant::now();
        let stable = compute_stable(&decorated);
        timings.stable = clock.elapsed();

        let clock = Instant::now();
        let skippable = mark_skippable(&decorated, &stable);
        timings.skippable = clock.elapsed();

        let clock = Instant::now();
        let jump = compute_jump(&decorated, &stable, &skippable);
        let apply = ApplyTable::build(&decorated, &stable, &skippable);
        timings.jump = clock.elapsed();

        let sizes = StageSizes {
            adjusted_nonterminals: adjusted.nonterminals().len(),
            adjusted_rules: adjusted.rules().len(),
            decorated_nonterminals: decorated.nonterminals().len(),
            decorated_rules: decorated.rules().len(),
            jump_entries: jump.size(),
        };
        Ok(Arc::new(Preprocessed {
            tables: Some(Arc::new(EnumerationTables {
                decorated,
                stable,
                skippable,
                jump,
                apply,
            })),
            empty_doc: None,
            timings,
            sizes,
            unambiguous: self.is_declared_unambiguous(),
        }))
    }

    /// Preprocesses `d` and returns the stream of its mappings. Duplicate
    /// suppression is enabled unless the grammar is declared unambiguous.
    pub fn enumerate(&self, d: &Document) -> Result<MappingStream> {
        Ok(self.preprocess(d)?.stream())
    }
}

/// Per-document state produced by [`Spanner::preprocess`].
#[derive(Debug)]
pub struct Preprocessed {
    tables: Option<Arc<EnumerationTables>>,
    empty_doc: Option<SpanMapping>,
    timings: StageTimings,
    sizes: StageSizes,
    unambiguous: bool,
}

impl Preprocessed {
    /// A fresh stream over all mappings. Can be called repeatedly.
    pub fn stream(&self) -> MappingStream {
        let stream = match &self.tables {
            Some(tables) => MappingStream::new(Arc::clone(tables)),
            None => MappingStream::single(self.empty_doc.clone()),
        };
        stream.with_duplicate_check(!self.unambiguous)
    }

    pub fn timings(&self) -> StageTimings {
        self.timings
    }

    pub fn sizes(&self) -> StageSizes {
        self.sizes
    }

    /// The decorated grammar, absent for the empty document.
    pub fn decorated(&self) -> Option<&DecoratedGrammar> {
        self.tables.as_deref().map(|t| &t.decorated)
    }

    pub fn tables(&self) -> Option<&EnumerationTables> {
        self.tables.as_deref()
    }
}

/// One-shot evaluation of `g` on `d`.
pub fn spanner_enumerate(g: &ExtractionGrammar, d: &Document) -> Result<MappingStream> {
    Spanner::new(g)?.enumerate(d)
}
