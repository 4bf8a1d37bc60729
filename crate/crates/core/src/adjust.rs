//! Grammar adjusted to one document.
//!
//! Every non-terminal `A` of a functional CNF grammar is split into `A_{i,j}`,
//! deriving exactly the ref-words of `A` whose clean part is `d[i..=j]`, and
//! `A_ε`, deriving the operation-only ref-words of `A`. The language of the
//! start symbol `S_{1,n}` is the set of ref-words of the grammar over `d`.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::compiled::{CompiledCnf, Letter};
use crate::error::{Error, Result};
use crate::grammar::{op_from_bit, Variable};
use crate::opset::OpSet;
use crate::refword::{RefSymbol, RefWord};
use crate::span::Document;
use crate::transforms::FunctionalGrammar;

/// A non-terminal of the adjusted grammar: a base non-terminal with either
/// an inclusive 1-based range of document positions or no range (`ε`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IndexedNonTerminal {
    pub base: u32,
    pub range: Option<(u32, u32)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdjustedRule {
    /// `A_{i,i} -> d[i]`
    Char { lhs: u32, pos: u32 },
    /// `A_ε -> τ`
    Op { lhs: u32, bit: u8 },
    /// `A -> B C`
    Binary { lhs: u32, left: u32, right: u32 },
}

impl AdjustedRule {
    pub fn lhs(&self) -> u32 {
        match *self {
            AdjustedRule::Char { lhs, .. } | AdjustedRule::Op { lhs, .. } | AdjustedRule::Binary { lhs, .. } => lhs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdjustedGrammar {
    document: Document,
    vars: Vec<Variable>,
    base_names: Vec<String>,
    base_varops: Vec<OpSet>,
    nts: Vec<IndexedNonTerminal>,
    rules: Vec<AdjustedRule>,
    offsets: Vec<usize>,
    start: Option<u32>,
    instantiated: usize,
    schema_bound: usize,
}

impl AdjustedGrammar {
    pub fn document(&self) -> &Document {
        &self.document
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    /// Operation set of a base non-terminal.
    pub fn base_varops(&self, base: u32) -> OpSet {
        self.base_varops[base as usize]
    }

    pub fn nonterminals(&self) -> &[IndexedNonTerminal] {
        &self.nts
    }

    pub fn nonterminal(&self, id: u32) -> IndexedNonTerminal {
        self.nts[id as usize]
    }

    pub fn rules(&self) -> &[AdjustedRule] {
        &self.rules
    }

    pub fn rules_of(&self, id: u32) -> &[AdjustedRule] {
        &self.rules[self.offsets[id as usize]..self.offsets[id as usize + 1]]
    }

    /// `S_{1,n}`, or `None` when no ref-word of the grammar spans the
    /// document.
    pub fn start(&self) -> Option<u32> {
        self.start
    }

    pub fn is_empty_language(&self) -> bool {
        self.start.is_none()
    }

    /// Rules instantiated from the schemata before pruning.
    pub fn instantiated_rules(&self) -> usize {
        self.instantiated
    }

    /// Upper bound on schema instantiations for this grammar and document.
    pub fn schema_bound(&self) -> usize {
        self.schema_bound
    }

    pub fn name(&self, id: u32) -> String {
        let nt = self.nts[id as usize];
        let base = &self.base_names[nt.base as usize];
        match nt.range {
            Some((i, j)) => format!("{base}_{{{i},{j}}}"),
            None => format!("{base}_ε"),
        }
    }

    /// Human-readable listing, one rule per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(s) = self.start {
            let _ = writeln!(out, "start: {}", self.name(s));
        } else {
            out.push_str("start: none (empty language)\n");
        }
        for rule in &self.rules {
            let _ = match *rule {
                AdjustedRule::Char { lhs, pos } => {
                    writeln!(out, "{} -> {:?}", self.name(lhs), self.document.char_at(pos as usize))
                }
                AdjustedRule::Op { lhs, bit } => {
                    writeln!(out, "{} -> {}", self.name(lhs), op_from_bit(&self.vars, bit))
                }
                AdjustedRule::Binary { lhs, left, right } => {
                    writeln!(out, "{} -> {} {}", self.name(lhs), self.name(left), self.name(right))
                }
            };
        }
        out
    }
}

struct Builder {
    nts: Vec<IndexedNonTerminal>,
    ids: HashMap<(u32, u32, u32), u32>,
    rules: Vec<AdjustedRule>,
}

impl Builder {
    fn id(&mut self, base: u32, range: Option<(u32, u32)>) -> u32 {
        let key = match range {
            Some((i, j)) => (base, i, j),
            None => (base, 0, 0),
        };
        let next = self.nts.len() as u32;
        *self.ids.entry(key).or_insert_with(|| {
            self.nts.push(IndexedNonTerminal { base, range });
            next
        })
    }

    fn get(&self, base: u32, range: Option<(u32, u32)>) -> u32 {
        let key = match range {
            Some((i, j)) => (base, i, j),
            None => (base, 0, 0),
        };
        self.ids[&key]
    }
}

/// Bitset of base non-terminals per document cell.
struct Cells {
    n: usize,
    blocks: usize,
    bits: Vec<u64>,
}

impl Cells {
    fn offset(&self, i: usize, j: usize) -> usize {
        ((i - 1) * self.n + (j - 1)) * self.blocks
    }

    fn has(&self, i: usize, j: usize, base: u32) -> bool {
        self.bits[self.offset(i, j) + base as usize / 64] & (1 << (base % 64)) != 0
    }

    fn set(&mut self, i: usize, j: usize, base: u32) -> bool {
        let idx = self.offset(i, j) + base as usize / 64;
        let mask = 1 << (base % 64);
        let fresh = self.bits[idx] & mask == 0;
        self.bits[idx] |= mask;
        fresh
    }
}

/// Builds the grammar adjusted to a non-empty document `d`.
pub fn adjust(fg: &FunctionalGrammar, d: &Document) -> Result<AdjustedGrammar> {
    let n = d.len();
    if n == 0 {
        return Err(Error::EmptyDocument);
    }
    if n > u16::MAX as usize {
        return Err(Error::DocumentTooLong(n));
    }
    let g = fg.grammar();
    let c = CompiledCnf::compile(g)?;
    let base_varops: Vec<OpSet> = c
        .names
        .iter()
        .map(|name| fg.varop_sets().get(name).unwrap_or(OpSet::EMPTY))
        .collect();
    let binom3 = (n + 1) * n * n.saturating_sub(1) / 6;
    let schema_bound = c.char_rules.len() * n + c.op_rules.len() + c.binary.len() * (1 + n * (n + 1) + binom3);
    let mut out = AdjustedGrammar {
        document: d.clone(),
        vars: g.vars().to_vec(),
        base_names: c.names.clone(),
        base_varops,
        nts: Vec::new(),
        rules: Vec::new(),
        offsets: vec![0],
        start: None,
        instantiated: 0,
        schema_bound,
    };
    if g.is_empty_language() {
        return Ok(out);
    }

    let nb = c.nt_count();
    let mut b = Builder {
        nts: Vec::new(),
        ids: HashMap::new(),
        rules: Vec::new(),
    };

    // Operation-only level.
    let mut eps = vec![false; nb];
    for &(a, bit) in &c.op_rules {
        eps[a as usize] = true;
        let lhs = b.id(a, None);
        b.rules.push(AdjustedRule::Op { lhs, bit });
    }
    loop {
        let mut changed = false;
        for &(a, l, r) in &c.binary {
            if !eps[a as usize] && eps[l as usize] && eps[r as usize] {
                eps[a as usize] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for &(a, l, r) in &c.binary {
        if eps[l as usize] && eps[r as usize] {
            let lhs = b.id(a, None);
            let left = b.id(l, None);
            let right = b.id(r, None);
            b.rules.push(AdjustedRule::Binary { lhs, left, right });
        }
    }

    let mut cells = Cells {
        n,
        blocks: nb.div_ceil(64),
        bits: vec![0; n * n * nb.div_ceil(64)],
    };
    let chars = d.chars();
    for len in 1..=n {
        for i in 1..=n + 1 - len {
            let j = i + len - 1;
            let range = Some((i as u32, j as u32));
            if len == 1 {
                for &(a, ch) in &c.char_rules {
                    if ch == chars[i - 1] {
                        cells.set(i, j, a);
                        let lhs = b.id(a, range);
                        b.rules.push(AdjustedRule::Char { lhs, pos: i as u32 });
                    }
                }
            }
            for &(a, l, r) in &c.binary {
                for mid in i..j {
                    if cells.has(i, mid, l) && cells.has(mid + 1, j, r) {
                        cells.set(i, j, a);
                        let lhs = b.id(a, range);
                        let left = b.get(l, Some((i as u32, mid as u32)));
                        let right = b.get(r, Some((mid as u32 + 1, j as u32)));
                        b.rules.push(AdjustedRule::Binary { lhs, left, right });
                    }
                }
            }
            // Rules keeping the whole range in one child.
            loop {
                let mut changed = false;
                for &(a, l, r) in &c.binary {
                    if cells.has(i, j, a) {
                        continue;
                    }
                    if (cells.has(i, j, l) && eps[r as usize]) || (eps[l as usize] && cells.has(i, j, r)) {
                        cells.set(i, j, a);
                        b.id(a, range);
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            for &(a, l, r) in &c.binary {
                if cells.has(i, j, l) && eps[r as usize] {
                    let lhs = b.get(a, range);
                    let left = b.get(l, range);
                    let right = b.get(r, None);
                    b.rules.push(AdjustedRule::Binary { lhs, left, right });
                }
                if eps[l as usize] && cells.has(i, j, r) {
                    let lhs = b.get(a, range);
                    let left = b.get(l, None);
                    let right = b.get(r, range);
                    b.rules.push(AdjustedRule::Binary { lhs, left, right });
                }
            }
        }
    }
    out.instantiated = b.rules.len();
    debug_assert!(out.instantiated <= out.schema_bound);

    if !cells.has(1, n, c.start) {
        return Ok(out);
    }
    let start = b.get(c.start, Some((1, n as u32)));

    // Keep what is reachable from the start symbol.
    let mut by_lhs: Vec<Vec<usize>> = vec![Vec::new(); b.nts.len()];
    for (idx, rule) in b.rules.iter().enumerate() {
        by_lhs[rule.lhs() as usize].push(idx);
    }
    let mut remap = vec![u32::MAX; b.nts.len()];
    let mut order = vec![start];
    remap[start as usize] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(nt) = queue.pop_front() {
        for &idx in &by_lhs[nt as usize] {
            if let AdjustedRule::Binary { left, right, .. } = b.rules[idx] {
                for child in [left, right] {
                    if remap[child as usize] == u32::MAX {
                        remap[child as usize] = order.len() as u32;
                        order.push(child);
                        queue.push_back(child);
                    }
                }
            }
        }
    }
    out.nts = order.iter().map(|&id| b.nts[id as usize]).collect();
    for &old in &order {
        for &idx in &by_lhs[old as usize] {
            let rule = match b.rules[idx] {
                AdjustedRule::Char { lhs, pos } => AdjustedRule::Char {
                    lhs: remap[lhs as usize],
                    pos,
                },
                AdjustedRule::Op { lhs, bit } => AdjustedRule::Op {
                    lhs: remap[lhs as usize],
                    bit,
                },
                AdjustedRule::Binary { lhs, left, right } => AdjustedRule::Binary {
                    lhs: remap[lhs as usize],
                    left: remap[left as usize],
                    right: remap[right as usize],
                },
            };
            out.rules.push(rule);
        }
        out.offsets.push(out.rules.len());
    }
    out.start = Some(0);
    Ok(out)
}

/// Every ref-word derivable from the start symbol, as a finite set.
///
/// `bound` must be at least `|d| + 2k`, the length of every valid ref-word
/// over `d`.
pub fn language_of(ag: &AdjustedGrammar, bound: usize) -> Result<BTreeSet<RefWord>> {
    match ag.start {
        Some(start) => language_from(ag, start, bound),
        None => {
            check_bound(ag, bound)?;
            Ok(BTreeSet::new())
        }
    }
}

fn check_bound(ag: &AdjustedGrammar, bound: usize) -> Result<()> {
    let required = ag.document.len() + 2 * ag.vars.len();
    if bound < required {
        return Err(Error::BoundTooSmall { bound, required });
    }
    Ok(())
}

/// Every ref-word derivable from the non-terminal `id`.
pub fn language_from(ag: &AdjustedGrammar, id: u32, bound: usize) -> Result<BTreeSet<RefWord>> {
    check_bound(ag, bound)?;
    let mut words: Vec<BTreeSet<Vec<Letter>>> = vec![BTreeSet::new(); ag.nts.len()];
    loop {
        let mut changed = false;
        for rule in &ag.rules {
            let lhs = rule.lhs() as usize;
            let new: Vec<Vec<Letter>> = match *rule {
                AdjustedRule::Char { pos, .. } => vec![vec![Letter::Char(ag.document.char_at(pos as usize))]],
                AdjustedRule::Op { bit, .. } => vec![vec![Letter::Op(bit)]],
                AdjustedRule::Binary { left, right, .. } => {
                    let mut acc = Vec::new();
                    for l in &words[left as usize] {
                        for r in &words[right as usize] {
                            if l.len() + r.len() <= bound {
                                let mut w = l.clone();
                                w.extend_from_slice(r);
                                acc.push(w);
                            }
                        }
                    }
                    acc
                }
            };
            for w in new {
                changed |= words[lhs].insert(w);
            }
        }
        if !changed {
            break;
        }
    }
    Ok(words[id as usize]
        .iter()
        .map(|w| {
            RefWord(
                w.iter()
                    .map(|l| match l {
                        Letter::Char(c) => RefSymbol::Char(*c),
                        Letter::Op(b) => RefSymbol::Op(op_from_bit(&ag.vars, *b)),
                    })
                    .collect(),
            )
        })
        .collect())
}
