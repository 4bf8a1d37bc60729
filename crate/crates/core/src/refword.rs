//! Ref-words: documents interleaved with variable operations.

use std::fmt;

use crate::error::{Error, Result};
use crate::grammar::{OpKind, VarOp, Variable};
use crate::span::SpanMapping;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RefSymbol {
    Char(char),
    Op(VarOp),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct RefWord(pub Vec<RefSymbol>);

impl RefWord {
    pub fn new(symbols: Vec<RefSymbol>) -> RefWord {
        RefWord(symbols)
    }

    pub fn symbols(&self) -> &[RefSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses a compact notation: whitespace-separated tokens, where `{x`
    /// opens `x`, `x}` closes it, and any other token is a run of document
    /// characters. For example `"{x aa x} b"`.
    pub fn parse(text: &str) -> Result<RefWord> {
        let mut out = Vec::new();
        for token in text.split_whitespace() {
            if let Some(name) = token.strip_prefix('{') {
                out.push(RefSymbol::Op(VarOp::open(Variable::new(name)?)));
            } else if let Some(name) = token.strip_suffix('}') {
                out.push(RefSymbol::Op(VarOp::close(Variable::new(name)?)));
            } else {
                out.extend(token.chars().map(RefSymbol::Char));
            }
        }
        Ok(RefWord(out))
    }
}

impl fmt::Display for RefWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, sym) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str(" ")?;
            }
            match sym {
                RefSymbol::Char(c) => write!(f, "{c}")?,
                RefSymbol::Op(op) => write!(f, "{op}")?,
            }
        }
        Ok(())
    }
}

/// The document underlying a ref-word: all operations erased.
pub fn clean(word: &RefWord) -> String {
    word.0
        .iter()
        .filter_map(|s| match s {
            RefSymbol::Char(c) => Some(*c),
            RefSymbol::Op(_) => None,
        })
        .collect()
}

/// True if every variable of `vars` is opened exactly once, closed exactly
/// once, opened before it is closed, and no other variable occurs.
pub fn is_valid(word: &RefWord, vars: &[Variable]) -> bool {
    let mut opened = vec![false; vars.len()];
    let mut closed = vec![false; vars.len()];
    for sym in &word.0 {
        let RefSymbol::Op(op) = sym else { continue };
        let Some(idx) = vars.iter().position(|v| v == &op.var) else {
            return false;
        };
        match op.kind {
            OpKind::Open => {
                if opened[idx] {
                    return false;
                }
                opened[idx] = true;
            }
            OpKind::Close => {
                if !opened[idx] || closed[idx] {
                    return false;
                }
                closed[idx] = true;
            }
        }
    }
    closed.iter().all(|&c| c)
}

/// The span mapping encoded by a valid ref-word: an operation is placed at
/// one plus the number of document characters before it.
pub fn ref_to_mapping(word: &RefWord, vars: &[Variable]) -> Result<SpanMapping> {
    if !is_valid(word, vars) {
        return Err(Error::InvalidRefWord);
    }
    let mut pos = 1;
    let mut pairs = Vec::new();
    for sym in &word.0 {
        match sym {
            RefSymbol::Char(_) => pos += 1,
            RefSymbol::Op(op) => pairs.push((op.clone(), pos)),
        }
    }
    SpanMapping::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::Span;

    fn vars(names: &[&str]) -> Vec<Variable> {
        names.iter().map(|n| Variable::new(n).unwrap()).collect()
    }

    #[test]
    fn clean_erases_operations() {
        let w = RefWord::parse("{x a x} {y b y} abb").unwrap();
        assert_eq!(clean(&w), "ababb");
        assert_eq!(clean(&RefWord::parse("{x x}").unwrap()), "");
    }

    #[test]
    fn validity() {
        let xy = vars(&["x", "y"]);
        assert!(is_valid(&RefWord::parse("{x a x} {y b y}").unwrap(), &xy));
        assert!(!is_valid(&RefWord::parse("x} a {x {y y}").unwrap(), &xy));
        assert!(!is_valid(&RefWord::parse("{x a x} {x x} {y y}").unwrap(), &xy));
        assert!(!is_valid(&RefWord::parse("{x a x}").unwrap(), &xy));
        assert!(!is_valid(&RefWord::parse("{x a x} {z z}").unwrap(), &vars(&["x"])));
        assert!(is_valid(&RefWord::parse("ab").unwrap(), &[]));
    }

    #[test]
    fn mapping_positions() {
        let xy = vars(&["x", "y"]);
        let w = RefWord::parse("{x a x} {y b y} abb").unwrap();
        let m = ref_to_mapping(&w, &xy).unwrap();
        assert_eq!(m.get(&xy[0]), Some(Span::new(1, 2)));
        assert_eq!(m.get(&xy[1]), Some(Span::new(2, 3)));
        let empty = ref_to_mapping(&RefWord::parse("ab {x x}").unwrap(), &xy[..1]).unwrap();
        assert_eq!(empty.get(&xy[0]), Some(Span::new(3, 3)));
        assert_eq!(
            ref_to_mapping(&RefWord::parse("x} {x").unwrap(), &xy[..1]),
            Err(Error::InvalidRefWord)
        );
    }
}
