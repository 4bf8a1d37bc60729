use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grammar::{ExtractionGrammar, FreshNames, Production, Symbol, Variable};

/// A grammar for the union of two spanners over the same variables.
///
/// Non-terminals of `g2` that clash with names of `g1` are renamed, and a
/// fresh start symbol derives either original start. The result is not
/// declared unambiguous unless one operand is empty.
pub fn union(g1: &ExtractionGrammar, g2: &ExtractionGrammar) -> Result<ExtractionGrammar> {
    if g1.vars() != g2.vars() {
        return Err(Error::VariableMismatch {
            left: g1.vars().iter().map(|v| v.to_string()).collect(),
            right: g2.vars().iter().map(|v| v.to_string()).collect(),
        });
    }
    if g2.is_empty_language() {
        return Ok(g1.clone());
    }
    if g1.is_empty_language() {
        return Ok(g2.clone());
    }
    let left_names = g1.nonterminals();
    let mut fresh = FreshNames::new(left_names.iter().copied().chain(g2.nonterminals()));
    let mut rename: HashMap<&str, String> = HashMap::new();
    for name in g2.nonterminals() {
        let new = if left_names.contains(&name) {
            fresh.fresh(name)
        } else {
            name.to_string()
        };
        rename.insert(name, new);
    }
    let start = fresh.fresh("S");
    let mut productions = vec![
        Production::new(&start, vec![Symbol::nonterminal(g1.start())]),
        Production::new(&start, vec![Symbol::NonTerminal(rename[g2.start()].clone())]),
    ];
    productions.extend(g1.productions().iter().cloned());
    for p in g2.productions() {
        productions.push(Production {
            lhs: rename[p.lhs.as_str()].clone(),
            rhs: p
                .rhs
                .iter()
                .map(|s| match s {
                    Symbol::NonTerminal(n) => Symbol::NonTerminal(rename[n.as_str()].clone()),
                    other => other.clone(),
                })
                .collect(),
        });
    }
    Ok(ExtractionGrammar::from_parts(
        g1.vars().to_vec(),
        start,
        productions,
        false,
    ))
}

/// Erases the operations of every variable outside `keep`.
pub fn project(g: &ExtractionGrammar, keep: &[Variable]) -> Result<ExtractionGrammar> {
    for var in keep {
        if g.var_index(var).is_none() {
            return Err(Error::UnknownVariable(var.to_string()));
        }
    }
    let mut vars: Vec<Variable> = keep.to_vec();
    vars.sort();
    vars.dedup();
    let all_kept = vars.len() == g.var_count();
    let productions = g
        .productions()
        .iter()
        .map(|p| Production {
            lhs: p.lhs.clone(),
            rhs: p
                .rhs
                .iter()
                .filter(|s| match s {
                    Symbol::Op(op) => vars.binary_search(&op.var).is_ok(),
                    _ => true,
                })
                .cloned()
                .collect(),
        })
        .collect();
    Ok(ExtractionGrammar::from_parts(
        vars,
        g.start().to_string(),
        productions,
        all_kept && g.is_declared_unambiguous(),
    ))
}
