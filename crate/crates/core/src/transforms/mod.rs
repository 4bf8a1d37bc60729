//! Grammar transformations: normal forms, functionality, spanner algebra.

mod algebra;
mod functional;
mod normal;

use std::collections::HashSet;

pub use algebra::{project, union};
pub use functional::{compute_varop_sets, functionalize, is_functional, FunctionalGrammar, VarOpSetTable};
pub use normal::{remove_useless, to_cnf};

use crate::grammar::{ExtractionGrammar, Symbol};
use crate::span::{Span, SpanMapping};

/// The single mapping of the spanner on the empty document, if any: every
/// variable mapped to `[1,1⟩`.
///
/// With variables, the grammar is first made functional, since only valid
/// operation-only ref-words count. The check is linear in the size of the
/// functional grammar.
pub fn empty_doc_mapping(g: &ExtractionGrammar) -> Option<SpanMapping> {
    let everything_empty = || SpanMapping::from_spans(g.vars().iter().map(|v| (v.clone(), Span::new(1, 1))));
    if g.var_count() == 0 {
        return g.nullable().contains(g.start()).then(everything_empty);
    }
    let f = functionalize(&to_cnf(g)).expect("to_cnf yields CNF");
    let fg = f.grammar();
    let mut ops_only: HashSet<&str> = HashSet::new();
    loop {
        let before = ops_only.len();
        for p in fg.productions() {
            if ops_only.contains(p.lhs.as_str()) {
                continue;
            }
            let derives = p.rhs.iter().all(|s| match s {
                Symbol::Op(_) => true,
                Symbol::NonTerminal(n) => ops_only.contains(n.as_str()),
                Symbol::Terminal(_) => false,
            });
            if derives {
                ops_only.insert(&p.lhs);
            }
        }
        if ops_only.len() == before {
            break;
        }
    }
    ops_only.contains(fg.start()).then(everything_empty)
}

/// True if every production has the shape `A -> s B` or `A -> s`, with `s` a
/// terminal or an operation.
pub fn is_regular_form(g: &ExtractionGrammar) -> bool {
    g.productions().iter().all(|p| {
        matches!(
            p.rhs.as_slice(),
            [Symbol::Terminal(_) | Symbol::Op(_)] | [Symbol::Terminal(_) | Symbol::Op(_), Symbol::NonTerminal(_)]
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_grammar;

    #[test]
    fn empty_document_mapping() {
        let anbn_capture = parse_grammar(
            "vars: x, y\nstart: S\nS -> B {x 'a' A 'b' y} B\nA -> 'a' A 'b' | x} {y\nB -> 'a' B | 'b' B | eps\n",
        )
        .unwrap();
        assert_eq!(empty_doc_mapping(&anbn_capture), None);
        let any = parse_grammar("vars: x, y\nstart: S\nS -> {x x} {y y} | {y y} {x x}\n").unwrap();
        let m = empty_doc_mapping(&any).unwrap();
        assert_eq!(m.len(), 2);
        let invalid = parse_grammar("vars: x\nstart: S\nS -> x} {x | 'a'\n").unwrap();
        assert_eq!(empty_doc_mapping(&invalid), None);
        let boolean = parse_grammar("vars:\nstart: S\nS -> 'a' S | eps\n").unwrap();
        assert_eq!(empty_doc_mapping(&boolean), Some(SpanMapping::empty()));
    }

    #[test]
    fn regular_form() {
        assert!(is_regular_form(
            &parse_grammar("vars: x\nstart: S\nS -> 'a' S | {x T\nT -> x}\n").unwrap()
        ));
        assert!(!is_regular_form(
            &parse_grammar("vars:\nstart: S\nS -> S 'a' | 'a'\n").unwrap()
        ));
        assert!(!is_regular_form(&parse_grammar("vars:\nstart: S\nS -> eps\n").unwrap()));
    }
}
