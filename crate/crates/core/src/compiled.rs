//! Integer-indexed view of a CNF extraction grammar used by the algorithms.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grammar::{ExtractionGrammar, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum Letter {
    Char(char),
    Op(u8),
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledCnf {
    pub k: usize,
    pub names: Vec<String>,
    pub start: u32,
    /// `A -> σ`
    pub char_rules: Vec<(u32, char)>,
    /// `A -> τ`, with `τ` as an operation bit.
    pub op_rules: Vec<(u32, u8)>,
    /// `A -> B C`
    pub binary: Vec<(u32, u32, u32)>,
}

impl CompiledCnf {
    pub fn compile(g: &ExtractionGrammar) -> Result<CompiledCnf> {
        let names: Vec<String> = g.nonterminals().into_iter().map(str::to_string).collect();
        let index: HashMap<&str, u32> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i as u32)).collect();
        let mut out = CompiledCnf {
            k: g.var_count(),
            start: index[g.start()],
            names: names.clone(),
            char_rules: Vec::new(),
            op_rules: Vec::new(),
            binary: Vec::new(),
        };
        for p in g.productions() {
            let lhs = index[p.lhs.as_str()];
            match p.rhs.as_slice() {
                [Symbol::Terminal(c)] => out.char_rules.push((lhs, *c)),
                [Symbol::Op(op)] => out.op_rules.push((lhs, g.op_bit(op).expect("validated op"))),
                [Symbol::NonTerminal(b), Symbol::NonTerminal(c)] => {
                    out.binary.push((lhs, index[b.as_str()], index[c.as_str()]))
                }
                _ => {
                    return Err(Error::NotCnf(format!(
                        "production for {} has an unsupported right-hand side",
                        p.lhs
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn nt_count(&self) -> usize {
        self.names.len()
    }
}
