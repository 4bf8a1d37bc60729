//! Extraction grammars: context-free grammars whose terminals include
//! variable operations.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::opset::{self, OpSet, MAX_VARIABLES};

/// A capture variable. Names match `[a-z][a-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: &str) -> Result<Variable> {
        if is_variable_name(name) {
            Ok(Variable(Arc::from(name)))
        } else {
            Err(Error::InvalidVariableName(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        && name != "eps"
}

pub(crate) fn is_nonterminal_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('A'..='Z')) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '%')
}

/// Opening precedes closing in the derived ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Open,
    Close,
}

/// A variable operation: `⊢x` (open) or `⊣x` (close).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarOp {
    pub var: Variable,
    pub kind: OpKind,
}

impl VarOp {
    pub fn open(var: Variable) -> VarOp {
        VarOp {
            var,
            kind: OpKind::Open,
        }
    }

    pub fn close(var: Variable) -> VarOp {
        VarOp {
            var,
            kind: OpKind::Close,
        }
    }
}

impl fmt::Display for VarOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OpKind::Open => write!(f, "⊢{}", self.var),
            OpKind::Close => write!(f, "⊣{}", self.var),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Terminal(char),
    Op(VarOp),
    NonTerminal(String),
}

impl Symbol {
    pub fn nonterminal(name: &str) -> Symbol {
        Symbol::NonTerminal(name.to_string())
    }

    pub fn as_nonterminal(&self) -> Option<&str> {
        match self {
            Symbol::NonTerminal(name) => Some(name),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Production {
    pub lhs: String,
    pub rhs: Vec<Symbol>,
}

impl Production {
    pub fn new(lhs: &str, rhs: Vec<Symbol>) -> Production {
        Production {
            lhs: lhs.to_string(),
            rhs,
        }
    }
}

/// A validated extraction grammar.
///
/// Variables are kept sorted by name. A grammar whose start symbol has no
/// productions describes the empty spanner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionGrammar {
    vars: Vec<Variable>,
    start: String,
    productions: Vec<Production>,
    unambiguous: bool,
}

impl ExtractionGrammar {
    pub fn new(
        vars: Vec<Variable>,
        start: &str,
        productions: Vec<Production>,
        unambiguous: bool,
    ) -> Result<ExtractionGrammar> {
        let mut sorted = vars;
        sorted.sort();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::DuplicateVariable(pair[0].to_string()));
            }
        }
        if sorted.len() > MAX_VARIABLES {
            return Err(Error::TooManyVariables {
                found: sorted.len(),
                max: MAX_VARIABLES,
            });
        }
        if !is_nonterminal_name(start) {
            return Err(Error::InvalidNonTerminalName(start.to_string()));
        }
        let declared: HashSet<&str> = productions
            .iter()
            .map(|p| p.lhs.as_str())
            .chain(std::iter::once(start))
            .collect();
        for p in &productions {
            if !is_nonterminal_name(&p.lhs) {
                return Err(Error::InvalidNonTerminalName(p.lhs.clone()));
            }
            for sym in &p.rhs {
                match sym {
                    Symbol::NonTerminal(name) => {
                        if !declared.contains(name.as_str()) {
                            return Err(Error::UndeclaredNonTerminal { name: name.clone() });
                        }
                    }
                    Symbol::Op(op) => {
                        if sorted.binary_search(&op.var).is_err() {
                            return Err(Error::UnknownVariable(op.var.to_string()));
                        }
                    }
                    Symbol::Terminal(_) => {}
                }
            }
        }
        Ok(ExtractionGrammar {
            vars: sorted,
            start: start.to_string(),
            productions,
            unambiguous,
        })
    }

    /// Assembles a grammar from parts already known to be consistent.
    pub(crate) fn from_parts(
        vars: Vec<Variable>,
        start: String,
        productions: Vec<Production>,
        unambiguous: bool,
    ) -> ExtractionGrammar {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]));
        ExtractionGrammar {
            vars,
            start,
            productions,
            unambiguous,
        }
    }

    /// The grammar with no productions, denoting the empty spanner.
    pub fn empty(vars: Vec<Variable>, start: &str) -> Result<ExtractionGrammar> {
        ExtractionGrammar::new(vars, start, Vec::new(), true)
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, var: &Variable) -> Option<usize> {
        self.vars.binary_search(var).ok()
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn into_productions(self) -> Vec<Production> {
        self.productions
    }

    /// Whether the grammar was declared unambiguous by its author or by a
    /// transformation known to preserve unambiguity.
    pub fn is_declared_unambiguous(&self) -> bool {
        self.unambiguous
    }

    pub fn with_unambiguous(mut self, unambiguous: bool) -> ExtractionGrammar {
        self.unambiguous = unambiguous;
        self
    }

    pub fn is_empty_language(&self) -> bool {
        self.productions.is_empty()
    }

    /// Non-terminals in order of first appearance, start first.
    pub fn nonterminals(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for name in std::iter::once(self.start.as_str()).chain(
            self.productions
                .iter()
                .flat_map(|p| std::iter::once(p.lhs.as_str()).chain(p.rhs.iter().filter_map(Symbol::as_nonterminal))),
        ) {
            if seen.insert(name) {
                out.push(name);
            }
        }
        out
    }

    pub fn terminals(&self) -> BTreeSet<char> {
        self.productions
            .iter()
            .flat_map(|p| p.rhs.iter())
            .filter_map(|s| match s {
                Symbol::Terminal(c) => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// Total size: productions plus the lengths of their right-hand sides.
    pub fn size(&self) -> usize {
        self.productions.iter().map(|p| 1 + p.rhs.len()).sum()
    }

    pub fn rules_for<'a>(&'a self, lhs: &'a str) -> impl Iterator<Item = &'a Production> + 'a {
        self.productions.iter().filter(move |p| p.lhs == lhs)
    }

    /// The set of all variable operations, as bits.
    pub fn all_ops(&self) -> OpSet {
        OpSet::full(self.vars.len())
    }

    /// Bit index of a variable operation.
    pub fn op_bit(&self, op: &VarOp) -> Option<u8> {
        let m = self.var_index(&op.var)?;
        Some(match op.kind {
            OpKind::Open => opset::open_bit(m),
            OpKind::Close => opset::close_bit(m),
        })
    }

    pub fn op_from_bit(&self, bit: u8) -> VarOp {
        op_from_bit(&self.vars, bit)
    }

    /// True if every production has exactly one terminal, one variable
    /// operation, or two non-terminals on its right-hand side.
    pub fn is_cnf(&self) -> bool {
        self.productions.iter().all(|p| {
            matches!(
                p.rhs.as_slice(),
                [Symbol::Terminal(_)] | [Symbol::Op(_)] | [Symbol::NonTerminal(_), Symbol::NonTerminal(_)]
            )
        })
    }

    /// Names of non-terminals that derive the empty word.
    pub fn nullable(&self) -> HashSet<String> {
        let mut nullable: HashSet<String> = HashSet::new();
        loop {
            let before = nullable.len();
            for p in &self.productions {
                if !nullable.contains(&p.lhs)
                    && p.rhs.iter().all(|s| match s {
                        Symbol::NonTerminal(n) => nullable.contains(n),
                        _ => false,
                    })
                {
                    nullable.insert(p.lhs.clone());
                }
            }
            if nullable.len() == before {
                return nullable;
            }
        }
    }
}

pub(crate) fn op_from_bit(vars: &[Variable], bit: u8) -> VarOp {
    let var = vars[opset::bit_var(bit)].clone();
    if opset::bit_is_open(bit) {
        VarOp::open(var)
    } else {
        VarOp::close(var)
    }
}

/// Generates fresh non-terminal names of the form `<base>%<n>`.
pub(crate) struct FreshNames {
    used: HashSet<String>,
    counters: HashMap<String, usize>,
}

impl FreshNames {
    pub fn new<'a>(used: impl IntoIterator<Item = &'a str>) -> FreshNames {
        FreshNames {
            used: used.into_iter().map(str::to_string).collect(),
            counters: HashMap::new(),
        }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let base = base.split('%').next().unwrap_or(base);
        let counter = self.counters.entry(base.to_string()).or_insert(0);
        loop {
            *counter += 1;
            let name = format!("{base}%{counter}");
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}
