use std::collections::BTreeMap;

use anyhow::Result;
use serde::Serialize;

use cfspanner::transforms::{compute_varop_sets, functionalize, is_functional, is_regular_form, to_cnf};
use cfspanner::Error;

use crate::input::load_grammar;
use crate::CheckArgs;

#[derive(Serialize)]
struct Report {
    variables: Vec<String>,
    start: String,
    nonterminals: usize,
    productions: usize,
    declared_unambiguous: bool,
    empty_language: bool,
    cnf: bool,
    regular_form: bool,
    functional: bool,
    /// For a non-functional grammar, a non-terminal of the CNF form that
    /// derives an invalid ref-word or ref-words with differing operations.
    functional_witness: Option<String>,
    functional_form: FunctionalForm,
}

#[derive(Serialize)]
struct FunctionalForm {
    nonterminals: usize,
    productions: usize,
    /// Operations in every ref-word of each non-terminal.
    operations: BTreeMap<String, Vec<String>>,
}

pub fn run(args: &CheckArgs) -> Result<()> {
    let g = load_grammar(&args.grammar)?;
    let cnf = to_cnf(&g);
    let functional = is_functional(&g);
    // Without a conflicting non-terminal, the start symbol itself derives an
    // invalid ref-word.
    let witness = match compute_varop_sets(&cnf) {
        _ if functional => None,
        Err(Error::NotFunctional(nt)) => Some(nt),
        _ => Some(g.start().to_string()),
    };
    let f = functionalize(&cnf)?;
    let operations = f
        .varop_sets()
        .iter()
        .map(|(nt, _)| {
            let ops = f.varops_of(nt).unwrap_or_default();
            (nt.to_string(), ops.iter().map(|op| op.to_string()).collect())
        })
        .collect();
    let report = Report {
        variables: g.vars().iter().map(|v| v.name().to_string()).collect(),
        start: g.start().to_string(),
        nonterminals: g.nonterminals().len(),
        productions: g.productions().len(),
        declared_unambiguous: g.is_declared_unambiguous(),
        empty_language: g.is_empty_language(),
        cnf: g.is_cnf(),
        regular_form: is_regular_form(&g),
        functional,
        functional_witness: witness,
        functional_form: FunctionalForm {
            nonterminals: f.grammar().nonterminals().len(),
            productions: f.grammar().productions().len(),
            operations,
        },
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
