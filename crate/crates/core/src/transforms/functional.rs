use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::compiled::CompiledCnf;
use crate::error::{Error, Result};
use crate::grammar::{ExtractionGrammar, FreshNames, Production, Symbol, VarOp};
use crate::opset::OpSet;
use crate::transforms::normal::to_cnf;

/// The set of variable operations every ref-word of a non-terminal contains.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarOpSetTable {
    sets: BTreeMap<String, OpSet>,
}

impl VarOpSetTable {
    pub fn get(&self, nonterminal: &str) -> Option<OpSet> {
        self.sets.get(nonterminal).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, OpSet)> {
        self.sets.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// A CNF grammar in which every non-terminal derives only ref-words with
/// one fixed set of operations, and the start symbol derives only valid
/// ref-words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionalGrammar {
    grammar: ExtractionGrammar,
    varops: VarOpSetTable,
}

impl FunctionalGrammar {
    /// Checks that `g` is a functional CNF grammar and wraps it.
    pub fn verify(g: ExtractionGrammar) -> Result<FunctionalGrammar> {
        if !g.is_cnf() {
            return Err(Error::NotCnf(format!("start symbol {}", g.start())));
        }
        if !is_functional(&g) {
            return Err(Error::NotFunctional(g.start().to_string()));
        }
        let varops = compute_varop_sets(&g)?;
        Ok(FunctionalGrammar { grammar: g, varops })
    }

    pub fn grammar(&self) -> &ExtractionGrammar {
        &self.grammar
    }

    pub fn into_grammar(self) -> ExtractionGrammar {
        self.grammar
    }

    pub fn varop_sets(&self) -> &VarOpSetTable {
        &self.varops
    }

    /// Operations of a non-terminal as [`VarOp`]s.
    pub fn varops_of(&self, nonterminal: &str) -> Option<Vec<VarOp>> {
        let set = self.varops.get(nonterminal)?;
        Some(set.iter().map(|b| self.grammar.op_from_bit(b)).collect())
    }
}

fn compatible(left: OpSet, right: OpSet) -> bool {
    left.is_disjoint(right) && !left.closes_before_opens_in(right)
}

/// Splits every non-terminal `A` of a CNF grammar into one copy per set of
/// operations that `A` derives within some valid ref-word, keeping only
/// copies reachable from `(S, all operations)`.
///
/// A non-terminal with exactly one surviving copy keeps its name; the others
/// get fresh `A%n` names.
pub fn functionalize(g: &ExtractionGrammar) -> Result<FunctionalGrammar> {
    if !g.is_cnf() {
        return Err(Error::NotCnf(format!("start symbol {}", g.start())));
    }
    let empty = |g: &ExtractionGrammar| FunctionalGrammar {
        grammar: ExtractionGrammar::from_parts(
            g.vars().to_vec(),
            g.start().to_string(),
            Vec::new(),
            g.is_declared_unambiguous(),
        ),
        varops: VarOpSetTable::default(),
    };
    if g.is_empty_language() {
        return Ok(empty(g));
    }
    let c = CompiledCnf::compile(g)?;
    let n = c.nt_count();

    // Productive (non-terminal, operation set) pairs.
    let mut sets: Vec<Vec<OpSet>> = vec![Vec::new(); n];
    let mut known: HashSet<(u32, OpSet)> = HashSet::new();
    let mut add = |sets: &mut Vec<Vec<OpSet>>, a: u32, s: OpSet| {
        if known.insert((a, s)) {
            sets[a as usize].push(s);
            true
        } else {
            false
        }
    };
    for &(a, _) in &c.char_rules {
        add(&mut sets, a, OpSet::EMPTY);
    }
    for &(a, bit) in &c.op_rules {
        add(&mut sets, a, OpSet::singleton(bit));
    }
    loop {
        let mut changed = false;
        for &(a, b, cc) in &c.binary {
            let left = sets[b as usize].clone();
            let right = sets[cc as usize].clone();
            for &s2 in &left {
                for &s3 in &right {
                    if compatible(s2, s3) {
                        changed |= add(&mut sets, a, s2.union(s3));
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    for list in &mut sets {
        list.sort();
    }

    let start = (c.start, g.all_ops());
    if !sets[c.start as usize].contains(&start.1) {
        return Ok(empty(g));
    }

    // Rules between pairs, then reachability from the start pair.
    type Pair = (u32, OpSet);
    enum Body {
        Char(char),
        Op(u8),
        Pair(Pair, Pair),
    }
    let mut rules: Vec<(Pair, Body)> = Vec::new();
    let mut ci = 0;
    let mut oi = 0;
    let mut bi = 0;
    for p in g.productions() {
        match p.rhs.as_slice() {
            [Symbol::Terminal(_)] => {
                let (a, ch) = c.char_rules[ci];
                ci += 1;
                rules.push(((a, OpSet::EMPTY), Body::Char(ch)));
            }
            [Symbol::Op(_)] => {
                let (a, bit) = c.op_rules[oi];
                oi += 1;
                rules.push(((a, OpSet::singleton(bit)), Body::Op(bit)));
            }
            _ => {
                let (a, b, cc) = c.binary[bi];
                bi += 1;
                for &s2 in &sets[b as usize] {
                    for &s3 in &sets[cc as usize] {
                        if compatible(s2, s3) {
                            rules.push(((a, s2.union(s3)), Body::Pair((b, s2), (cc, s3))));
                        }
                    }
                }
            }
        }
    }
    let mut by_lhs: HashMap<Pair, Vec<usize>> = HashMap::new();
    for (idx, (lhs, _)) in rules.iter().enumerate() {
        by_lhs.entry(*lhs).or_default().push(idx);
    }
    let mut reachable: HashSet<Pair> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        for &idx in by_lhs.get(&pair).into_iter().flatten() {
            if let Body::Pair(l, r) = rules[idx].1 {
                for child in [l, r] {
                    if reachable.insert(child) {
                        queue.push_back(child);
                    }
                }
            }
        }
    }

    let mut copies: Vec<Vec<OpSet>> = vec![Vec::new(); n];
    for &(a, s) in &reachable {
        copies[a as usize].push(s);
    }
    let mut fresh = FreshNames::new(c.names.iter().map(String::as_str));
    let mut names: HashMap<Pair, String> = HashMap::new();
    for (a, list) in copies.iter_mut().enumerate() {
        list.sort();
        if list.len() == 1 {
            names.insert((a as u32, list[0]), c.names[a].clone());
        } else {
            for &s in list.iter() {
                names.insert((a as u32, s), fresh.fresh(&c.names[a]));
            }
        }
    }

    let vars = g.vars();
    let mut productions = Vec::new();
    for (lhs, body) in &rules {
        if !reachable.contains(lhs) {
            continue;
        }
        let rhs = match body {
            Body::Char(ch) => vec![Symbol::Terminal(*ch)],
            Body::Op(bit) => vec![Symbol::Op(crate::grammar::op_from_bit(vars, *bit))],
            Body::Pair(l, r) => vec![
                Symbol::NonTerminal(names[l].clone()),
                Symbol::NonTerminal(names[r].clone()),
            ],
        };
        productions.push(Production {
            lhs: names[lhs].clone(),
            rhs,
        });
    }
    let varops = VarOpSetTable {
        sets: reachable.iter().map(|p| (names[p].clone(), p.1)).collect(),
    };
    let grammar = ExtractionGrammar::from_parts(
        vars.to_vec(),
        names[&start].clone(),
        productions,
        g.is_declared_unambiguous(),
    );
    Ok(FunctionalGrammar { grammar, varops })
}

/// Recomputes the operation set of every non-terminal of a CNF grammar,
/// failing if two productions disagree.
pub fn compute_varop_sets(g: &ExtractionGrammar) -> Result<VarOpSetTable> {
    let c = CompiledCnf::compile(g)?;
    let mut table: Vec<Option<OpSet>> = vec![None; c.nt_count()];
    let assign = |table: &mut Vec<Option<OpSet>>, a: u32, s: OpSet| -> Result<bool> {
        match table[a as usize] {
            Some(existing) if existing == s => Ok(false),
            Some(_) => Err(Error::NotFunctional(c.names[a as usize].clone())),
            None => {
                table[a as usize] = Some(s);
                Ok(true)
            }
        }
    };
    for &(a, _) in &c.char_rules {
        assign(&mut table, a, OpSet::EMPTY)?;
    }
    for &(a, bit) in &c.op_rules {
        assign(&mut table, a, OpSet::singleton(bit))?;
    }
    loop {
        let mut changed = false;
        for &(a, b, cc) in &c.binary {
            if let (Some(s2), Some(s3)) = (table[b as usize], table[cc as usize]) {
                if !s2.is_disjoint(s3) {
                    return Err(Error::NotFunctional(c.names[a as usize].clone()));
                }
                changed |= assign(&mut table, a, s2.union(s3))?;
            }
        }
        if !changed {
            break;
        }
    }
    if let Some(&s) = table[c.start as usize].as_ref() {
        if s != g.all_ops() && !g.is_empty_language() {
            return Err(Error::NotFunctional(g.start().to_string()));
        }
    }
    Ok(VarOpSetTable {
        sets: table
            .iter()
            .enumerate()
            .filter_map(|(a, s)| s.map(|s| (c.names[a].clone(), s)))
            .collect(),
    })
}

/// Decides whether every ref-word of `g` is valid.
pub fn is_functional(g: &ExtractionGrammar) -> bool {
    if g.var_count() == 0 {
        return true;
    }
    if g.nullable().contains(g.start()) {
        return false;
    }
    let cnf = to_cnf(g);
    if cnf.is_empty_language() {
        return true;
    }
    let c = CompiledCnf::compile(&cnf).expect("to_cnf yields CNF");
    // Operation profiles of derivable words; `None` marks a word that is
    // already invalid.
    let mut profiles: Vec<Vec<Option<OpSet>>> = vec![Vec::new(); c.nt_count()];
    let mut known: HashSet<(u32, Option<OpSet>)> = HashSet::new();
    let mut add = |profiles: &mut Vec<Vec<Option<OpSet>>>, a: u32, p: Option<OpSet>| {
        if known.insert((a, p)) {
            profiles[a as usize].push(p);
            true
        } else {
            false
        }
    };
    for &(a, _) in &c.char_rules {
        add(&mut profiles, a, Some(OpSet::EMPTY));
    }
    for &(a, bit) in &c.op_rules {
        add(&mut profiles, a, Some(OpSet::singleton(bit)));
    }
    loop {
        let mut changed = false;
        for &(a, b, cc) in &c.binary {
            let left = profiles[b as usize].clone();
            let right = profiles[cc as usize].clone();
            for &p2 in &left {
                for &p3 in &right {
                    let combined = match (p2, p3) {
                        (Some(s2), Some(s3)) if compatible(s2, s3) => Some(s2.union(s3)),
                        _ => None,
                    };
                    changed |= add(&mut profiles, a, combined);
                }
            }
        }
        if !changed {
            break;
        }
    }
    profiles[c.start as usize].iter().all(|p| *p == Some(cnf.all_ops()))
}
