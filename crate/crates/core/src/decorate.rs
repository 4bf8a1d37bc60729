//! The decorated grammar: variable operations moved from the ref-word into
//! terminals `(X, i, Y)` and non-terminal superscripts `A^{X,Y}_{i,j}`.
//!
//! `X` holds the operations a subtree derives before its first character,
//! `Y` those after its last one. Every decorated word has one terminal per
//! document position, so the grammar is finite and acyclic.
//!
//! Unit rules are eliminated with push-down: when `A^{X,Y}` inherits a rule
//! `B^{X',Y'} -> L^{X',Z} R^{Z',Y'}` through a chain of unit rules, it gets
//! `A^{X,Y} -> L^{X,Z} R^{Z',Y}`. The operations `X \ X'` picked up along the
//! chain thus travel down to the leftmost leaf rather than being dropped, so
//! decorated words carry every operation. Non-terminals whose superscripts
//! extend a genuine one this way derive the same trees as the genuine one.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::adjust::{AdjustedGrammar, AdjustedRule};
use crate::error::{Error, Result};
use crate::grammar::{op_from_bit, Variable};
use crate::opset::{self, OpSet};
use crate::span::{Document, SpanMapping};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DecoratedNonTerminal {
    pub base: u32,
    pub i: u32,
    pub j: u32,
    pub pre: OpSet,
    pub post: OpSet,
}

/// `(pre, pos, post)`: operations right before and right after the
/// character at `pos`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedTerminal {
    pub pre: OpSet,
    pub pos: u32,
    pub post: OpSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DecoratedRule {
    Terminal { lhs: u32, terminal: DecoratedTerminal },
    Binary { lhs: u32, left: u32, right: u32 },
}

impl DecoratedRule {
    pub fn lhs(&self) -> u32 {
        match *self {
            DecoratedRule::Terminal { lhs, .. } | DecoratedRule::Binary { lhs, .. } => lhs,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecoratedGrammar {
    document: Document,
    vars: Vec<Variable>,
    base_names: Vec<String>,
    base_varops: Vec<OpSet>,
    nts: Vec<DecoratedNonTerminal>,
    rules: Vec<DecoratedRule>,
    offsets: Vec<usize>,
    starts: Vec<u32>,
}

impl DecoratedGrammar {
    pub fn document(&self) -> &Document {
        &self.document
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn nonterminals(&self) -> &[DecoratedNonTerminal] {
        &self.nts
    }

    pub fn nonterminal(&self, id: u32) -> DecoratedNonTerminal {
        self.nts[id as usize]
    }

    pub fn rules(&self) -> &[DecoratedRule] {
        &self.rules
    }

    /// Index range of the rules of `id` within [`rules`](Self::rules).
    pub fn rule_range(&self, id: u32) -> std::ops::Range<usize> {
        self.offsets[id as usize]..self.offsets[id as usize + 1]
    }

    pub fn rules_of(&self, id: u32) -> &[DecoratedRule] {
        &self.rules[self.rule_range(id)]
    }

    /// Right-hand sides of the fresh start symbol: every `S^{X,Y}_{1,n}`.
    pub fn starts(&self) -> &[u32] {
        &self.starts
    }

    /// Operation set of the base non-terminal of `id`.
    pub fn varops(&self, id: u32) -> OpSet {
        self.base_varops[self.nts[id as usize].base as usize]
    }

    /// True if the superscripts of `id` already contain every operation its
    /// subtree derives.
    pub fn is_stable(&self, id: u32) -> bool {
        let nt = self.nts[id as usize];
        self.varops(id).is_subset(nt.pre.union(nt.post))
    }

    pub fn base_name(&self, id: u32) -> &str {
        &self.base_names[self.nts[id as usize].base as usize]
    }

    /// Looks up `base^{pre,post}_{i,j}`.
    pub fn find(&self, base: &str, i: u32, j: u32, pre: OpSet, post: OpSet) -> Option<u32> {
        (0..self.nts.len() as u32).find(|&id| {
            let nt = self.nts[id as usize];
            (nt.i, nt.j, nt.pre, nt.post) == (i, j, pre, post) && self.base_name(id) == base
        })
    }

    pub fn format_ops(&self, set: OpSet) -> String {
        if set.is_empty() {
            return "∅".to_string();
        }
        set.iter().map(|b| op_from_bit(&self.vars, b).to_string()).collect()
    }

    pub fn name(&self, id: u32) -> String {
        let nt = self.nts[id as usize];
        format!(
            "{}^{{{},{}}}_{{{},{}}}",
            self.base_names[nt.base as usize],
            self.format_ops(nt.pre),
            self.format_ops(nt.post),
            nt.i,
            nt.j
        )
    }

    pub fn terminal_text(&self, t: DecoratedTerminal) -> String {
        format!("({},{},{})", self.format_ops(t.pre), t.pos, self.format_ops(t.post))
    }

    /// Human-readable listing, one rule per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &s in &self.starts {
            let _ = writeln!(out, "S -> {}", self.name(s));
        }
        for rule in &self.rules {
            let _ = match *rule {
                DecoratedRule::Terminal { lhs, terminal } => {
                    writeln!(out, "{} -> {}", self.name(lhs), self.terminal_text(terminal))
                }
                DecoratedRule::Binary { lhs, left, right } => {
                    writeln!(out, "{} -> {} {}", self.name(lhs), self.name(left), self.name(right))
                }
            };
        }
        out
    }

    /// All decorated words, one entry per parse tree, or `None` if there are
    /// more than `limit` of them.
    pub fn words(&self, limit: usize) -> Option<Vec<Vec<DecoratedTerminal>>> {
        let mut memo: HashMap<u32, Vec<Vec<DecoratedTerminal>>> = HashMap::new();
        let mut out = Vec::new();
        for &s in &self.starts {
            out.extend(self.words_from(s, limit, &mut memo)?);
            if out.len() > limit {
                return None;
            }
        }
        Some(out)
    }

    fn words_from(
        &self,
        id: u32,
        limit: usize,
        memo: &mut HashMap<u32, Vec<Vec<DecoratedTerminal>>>,
    ) -> Option<Vec<Vec<DecoratedTerminal>>> {
        if let Some(words) = memo.get(&id) {
            return Some(words.clone());
        }
        let mut out = Vec::new();
        for rule in self.rules_of(id) {
            match *rule {
                DecoratedRule::Terminal { terminal, .. } => out.push(vec![terminal]),
                DecoratedRule::Binary { left, right, .. } => {
                    let lw = self.words_from(left, limit, memo)?;
                    let rw = self.words_from(right, limit, memo)?;
                    for l in &lw {
                        for r in &rw {
                            let mut w = l.clone();
                            w.extend_from_slice(r);
                            out.push(w);
                            if out.len() > limit {
                                return None;
                            }
                        }
                    }
                }
            }
        }
        memo.insert(id, out.clone());
        Some(out)
    }
}

/// The mapping of a decorated word: operations in `pre` of position `i` and
/// in `post` of position `i - 1` are placed at `i`.
pub fn decorated_to_mapping(word: &[DecoratedTerminal], vars: &[Variable]) -> Result<SpanMapping> {
    let mut seen = OpSet::EMPTY;
    let mut pairs = Vec::new();
    for t in word {
        for (set, pos) in [(t.pre, t.pos as usize), (t.post, t.pos as usize + 1)] {
            if !seen.is_disjoint(set) {
                return Err(Error::InvalidDecoratedWord("an operation occurs twice".into()));
            }
            seen = seen.union(set);
            for bit in set.iter() {
                if opset::bit_var(bit) >= vars.len() {
                    return Err(Error::InvalidDecoratedWord("operation of an unknown variable".into()));
                }
                pairs.push((op_from_bit(vars, bit), pos));
            }
        }
    }
    if seen != OpSet::full(vars.len()) {
        return Err(Error::InvalidDecoratedWord("some operation is missing".into()));
    }
    SpanMapping::from_pairs(pairs).map_err(|e| Error::InvalidDecoratedWord(e.to_string()))
}

#[derive(Clone, Copy)]
enum GenRule {
    Leaf(u32),
    Split(u32, u32),
    Unit(u32),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    adj: u32,
    pre: OpSet,
    post: OpSet,
}

/// Step 1 output: the productive superscripted non-terminals with their
/// rules, unit rules included.
#[derive(Default)]
struct Genuine {
    keys: Vec<Key>,
    ids: HashMap<Key, u32>,
    rules: Vec<Vec<GenRule>>,
    by_adj: Vec<Vec<u32>>,
}

impl Genuine {
    fn add(&mut self, key: Key, rule: GenRule) {
        let id = match self.ids.get(&key) {
            Some(&id) => id,
            None => {
                let id = self.keys.len() as u32;
                self.keys.push(key);
                self.rules.push(Vec::new());
                self.ids.insert(key, id);
                self.by_adj[key.adj as usize].push(id);
                id
            }
        };
        self.rules[id as usize].push(rule);
    }

    /// Genuine non-terminals reachable by unit rules, `id` first.
    fn unit_closure(&self, id: u32) -> Vec<u32> {
        let mut closure = vec![id];
        let mut idx = 0;
        while idx < closure.len() {
            for rule in &self.rules[closure[idx] as usize] {
                if let GenRule::Unit(child) = *rule {
                    if !closure.contains(&child) {
                        closure.push(child);
                    }
                }
            }
            idx += 1;
        }
        closure
    }
}

fn pairwise_disjoint(parts: &[OpSet]) -> bool {
    let mut acc = OpSet::EMPTY;
    for &p in parts {
        if !acc.is_disjoint(p) {
            return false;
        }
        acc = acc.union(p);
    }
    true
}

/// Builds the decorated grammar of an adjusted grammar.
pub fn decorate(ag: &AdjustedGrammar) -> Result<DecoratedGrammar> {
    let mut out = DecoratedGrammar {
        document: ag.document().clone(),
        vars: ag.vars().to_vec(),
        base_names: ag.base_names().to_vec(),
        base_varops: (0..ag.base_names().len() as u32).map(|b| ag.base_varops(b)).collect(),
        nts: Vec::new(),
        rules: Vec::new(),
        offsets: vec![0],
        starts: Vec::new(),
    };
    let Some(adj_start) = ag.start() else {
        return Ok(out);
    };
    let varops = |adj: u32| ag.base_varops(ag.nonterminal(adj).base);

    // Step 1, bottom-up over ranges. Within one range a unit-like rule goes
    // from a smaller to a strictly larger operation set, so sorting by set
    // size processes children first.
    let mut order: Vec<u32> = (0..ag.nonterminals().len() as u32)
        .filter(|&id| ag.nonterminal(id).range.is_some())
        .collect();
    order.sort_by_key(|&id| {
        let (i, j) = ag.nonterminal(id).range.unwrap();
        (j - i, i, varops(id).len(), id)
    });
    let mut gen = Genuine {
        by_adj: vec![Vec::new(); ag.nonterminals().len()],
        ..Genuine::default()
    };
    for &a in &order {
        for rule in ag.rules_of(a) {
            match *rule {
                AdjustedRule::Char { pos, .. } => gen.add(
                    Key {
                        adj: a,
                        pre: OpSet::EMPTY,
                        post: OpSet::EMPTY,
                    },
                    GenRule::Leaf(pos),
                ),
                AdjustedRule::Op { .. } => {}
                AdjustedRule::Binary { left, right, .. } => {
                    match (ag.nonterminal(left).range, ag.nonterminal(right).range) {
                        (Some(_), Some(_)) => {
                            let ls = gen.by_adj[left as usize].clone();
                            let rs = gen.by_adj[right as usize].clone();
                            for &l in &ls {
                                let lk = gen.keys[l as usize];
                                for &r in &rs {
                                    let rk = gen.keys[r as usize];
                                    if pairwise_disjoint(&[lk.pre, lk.post, rk.pre, rk.post]) {
                                        let key = Key {
                                            adj: a,
                                            pre: lk.pre,
                                            post: rk.post,
                                        };
                                        gen.add(key, GenRule::Split(l, r));
                                    }
                                }
                            }
                        }
                        (Some(_), None) => {
                            let xc = varops(right);
                            for b in gen.by_adj[left as usize].clone() {
                                let bk = gen.keys[b as usize];
                                if bk.pre.is_disjoint(xc) && bk.post.is_disjoint(xc) {
                                    let key = Key {
                                        adj: a,
                                        pre: bk.pre,
                                        post: bk.post.union(xc),
                                    };
                                    gen.add(key, GenRule::Unit(b));
                                }
                            }
                        }
                        (None, Some(_)) => {
                            let xb = varops(left);
                            for c in gen.by_adj[right as usize].clone() {
                                let ck = gen.keys[c as usize];
                                if ck.pre.is_disjoint(xb) && ck.post.is_disjoint(xb) {
                                    let key = Key {
                                        adj: a,
                                        pre: ck.pre.union(xb),
                                        post: ck.post,
                                    };
                                    gen.add(key, GenRule::Unit(c));
                                }
                            }
                        }
                        (None, None) => {
                            return Err(Error::Internal("operation-only rule for a ranged non-terminal".into()))
                        }
                    }
                }
            }
        }
    }

    // Steps 2 and 3: starting from every S^{X,Y}_{1,n}, replace unit chains
    // by the rules they lead to, pushing superscripts down, and keep only
    // what is reachable. Operation-only non-terminals disappear here.
    let mut ids: HashMap<Key, u32> = HashMap::new();
    let mut keys: Vec<Key> = Vec::new();
    let intern = |key: Key, keys: &mut Vec<Key>, ids: &mut HashMap<Key, u32>| -> u32 {
        *ids.entry(key).or_insert_with(|| {
            keys.push(key);
            keys.len() as u32 - 1
        })
    };
    for &g in &gen.by_adj[adj_start as usize] {
        let id = intern(gen.keys[g as usize], &mut keys, &mut ids);
        out.starts.push(id);
    }
    let mut closures: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut next = 0;
    while next < keys.len() {
        let key = keys[next];
        let lhs = next as u32;
        next += 1;
        let x_a = varops(key.adj);
        let genuine_key = Key {
            adj: key.adj,
            pre: key.pre.intersection(x_a),
            post: key.post.intersection(x_a),
        };
        let Some(&g) = gen.ids.get(&genuine_key) else {
            return Err(Error::Internal(format!(
                "no genuine non-terminal behind a pushed-down copy of {}",
                ag.name(key.adj)
            )));
        };
        let closure = closures.entry(g).or_insert_with(|| gen.unit_closure(g)).clone();
        let mut seen: HashSet<DecoratedRule> = HashSet::new();
        for m in closure {
            for rule in &gen.rules[m as usize] {
                let rule = match *rule {
                    GenRule::Unit(_) => continue,
                    GenRule::Leaf(pos) => DecoratedRule::Terminal {
                        lhs,
                        terminal: DecoratedTerminal {
                            pre: key.pre,
                            pos,
                            post: key.post,
                        },
                    },
                    GenRule::Split(l, r) => {
                        let lk = gen.keys[l as usize];
                        let rk = gen.keys[r as usize];
                        let left = intern(
                            Key {
                                adj: lk.adj,
                                pre: key.pre,
                                post: lk.post,
                            },
                            &mut keys,
                            &mut ids,
                        );
                        let right = intern(
                            Key {
                                adj: rk.adj,
                                pre: rk.pre,
                                post: key.post,
                            },
                            &mut keys,
                            &mut ids,
                        );
                        DecoratedRule::Binary { lhs, left, right }
                    }
                };
                if seen.insert(rule) {
                    out.rules.push(rule);
                }
            }
        }
        out.offsets.push(out.rules.len());
    }
    out.nts = keys
        .iter()
        .map(|k| {
            let nt = ag.nonterminal(k.adj);
            let (i, j) = nt.range.expect("decorated non-terminals are ranged");
            DecoratedNonTerminal {
                base: nt.base,
                i,
                j,
                pre: k.pre,
                post: k.post,
            }
        })
        .collect();
    Ok(out)
}
