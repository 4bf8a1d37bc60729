//! Documents, spans and span mappings.
//!
//! Positions are 1-based Unicode scalar positions. A span `[i, j⟩` covers the
//! characters at positions `i..j`; `[i, i⟩` is empty. For a document of
//! length `n`, valid span endpoints are `1..=n+1`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::grammar::{OpKind, VarOp, Variable};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Document {
    chars: Vec<char>,
}

impl Document {
    pub fn new(text: &str) -> Document {
        Document {
            chars: text.chars().collect(),
        }
    }

    pub fn from_chars(chars: Vec<char>) -> Document {
        Document { chars }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    /// Character at 1-based position `pos`.
    pub fn char_at(&self, pos: usize) -> char {
        self.chars[pos - 1]
    }

    /// Text covered by a span.
    pub fn slice(&self, span: Span) -> String {
        self.chars[span.start - 1..span.end - 1].iter().collect()
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.chars {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        assert!(start >= 1 && start <= end, "invalid span [{start},{end}>");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}⟩", self.start, self.end)
    }
}

/// A total assignment of spans to variables, stored as the sorted list of
/// `(position, operation)` pairs. Equality and hashing are therefore
/// canonical.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SpanMapping {
    pairs: Vec<(usize, VarOp)>,
}

impl SpanMapping {
    pub fn empty() -> SpanMapping {
        SpanMapping::default()
    }

    pub fn from_spans<I: IntoIterator<Item = (Variable, Span)>>(spans: I) -> SpanMapping {
        let mut pairs = Vec::new();
        for (var, span) in spans {
            pairs.push((span.start, VarOp::open(var.clone())));
            pairs.push((span.end, VarOp::close(var)));
        }
        pairs.sort();
        SpanMapping { pairs }
    }

    /// Builds a mapping from `(operation, position)` pairs. Every variable
    /// must be opened and closed exactly once, opening no later than closing.
    pub fn from_pairs<I: IntoIterator<Item = (VarOp, usize)>>(pairs: I) -> Result<SpanMapping> {
        let mut opens: BTreeMap<Variable, usize> = BTreeMap::new();
        let mut closes: BTreeMap<Variable, usize> = BTreeMap::new();
        for (op, pos) in pairs {
            if pos == 0 {
                return Err(Error::InvalidMapping(format!("position 0 for {op}")));
            }
            let target = match op.kind {
                OpKind::Open => &mut opens,
                OpKind::Close => &mut closes,
            };
            if target.insert(op.var.clone(), pos).is_some() {
                return Err(Error::InvalidMapping(format!("{op} occurs twice")));
            }
        }
        let mut spans = Vec::new();
        for (var, start) in opens {
            let Some(end) = closes.remove(&var) else {
                return Err(Error::InvalidMapping(format!("{var} is never closed")));
            };
            if start > end {
                return Err(Error::InvalidMapping(format!("{var} closes before it opens")));
            }
            spans.push((var, Span { start, end }));
        }
        if let Some(var) = closes.keys().next() {
            return Err(Error::InvalidMapping(format!("{var} is never opened")));
        }
        Ok(SpanMapping::from_spans(spans))
    }

    /// `(operation, position)` pairs sorted by position, then variable name,
    /// then opening before closing.
    pub fn pairs(&self) -> impl Iterator<Item = (&VarOp, usize)> {
        self.pairs.iter().map(|(pos, op)| (op, *pos))
    }

    pub fn get(&self, var: &Variable) -> Option<Span> {
        let start = self
            .pairs
            .iter()
            .find(|(_, op)| op.kind == OpKind::Open && &op.var == var)?
            .0;
        let end = self
            .pairs
            .iter()
            .find(|(_, op)| op.kind == OpKind::Close && &op.var == var)?
            .0;
        Some(Span { start, end })
    }

    pub fn spans(&self) -> BTreeMap<Variable, Span> {
        let mut starts = BTreeMap::new();
        let mut out = BTreeMap::new();
        for (pos, op) in &self.pairs {
            match op.kind {
                OpKind::Open => {
                    starts.insert(op.var.clone(), *pos);
                }
                OpKind::Close => {
                    let start = starts[&op.var];
                    out.insert(op.var.clone(), Span { start, end: *pos });
                }
            }
        }
        out
    }

    /// Number of variables assigned.
    pub fn len(&self) -> usize {
        self.pairs.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl fmt::Display for SpanMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (idx, (var, span)) in self.spans().iter().enumerate() {
            if idx > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{var}: {span}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for SpanMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
