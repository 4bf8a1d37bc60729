//! Constant-delay enumeration over a decorated grammar.
//!
//! A non-terminal is stable when its superscripts already contain every
//! operation it derives: expanding it cannot change the mapping. The
//! enumerator keeps a sequence of non-stable non-terminals and repeatedly
//! expands the first one, skipping chains of rules that neither place an
//! operation nor split the remaining work (the jump function).

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use crate::decorate::{DecoratedGrammar, DecoratedRule};
use crate::error::{Error, Result};
use crate::grammar::op_from_bit;
use crate::opset::OpSet;
use crate::span::SpanMapping;

/// Stability of every decorated non-terminal.
#[derive(Clone, Debug)]
pub struct StableSet(Vec<bool>);

impl StableSet {
    pub fn contains(&self, id: u32) -> bool {
        self.0[id as usize]
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&s| s).count()
    }
}

pub fn compute_stable(dg: &DecoratedGrammar) -> StableSet {
    StableSet((0..dg.nonterminals().len() as u32).map(|id| dg.is_stable(id)).collect())
}

/// Per-rule skippability, indexed like [`DecoratedGrammar::rules`].
#[derive(Clone, Debug)]
pub struct SkippableFlags(Vec<bool>);

impl SkippableFlags {
    pub fn is_skippable(&self, rule: usize) -> bool {
        self.0[rule]
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&s| s).count()
    }
}

/// A rule `A -> B C` is skippable if `A` is non-stable, it places no
/// operation between `B` and `C`, and exactly one of `B`, `C` is stable.
pub fn mark_skippable(dg: &DecoratedGrammar, stable: &StableSet) -> SkippableFlags {
    SkippableFlags(
        dg.rules()
            .iter()
            .map(|rule| match *rule {
                DecoratedRule::Terminal { .. } => false,
                DecoratedRule::Binary { lhs, left, right } => {
                    !stable.contains(lhs)
                        && dg.nonterminal(left).post.is_empty()
                        && dg.nonterminal(right).pre.is_empty()
                        && stable.contains(left) != stable.contains(right)
                }
            })
            .collect(),
    )
}

/// For every non-stable non-terminal `A`, the sorted list of non-terminals
/// reachable from `A` through skippable rules (`A` included) that head at
/// least one non-skippable rule.
#[derive(Clone, Debug)]
pub struct JumpTable(Vec<Vec<u32>>);

impl JumpTable {
    pub fn get(&self, id: u32) -> &[u32] {
        &self.0[id as usize]
    }

    /// Total number of stored entries.
    pub fn size(&self) -> usize {
        self.0.iter().map(Vec::len).sum()
    }
}

fn merge_into(target: &mut Vec<u32>, other: &[u32]) {
    if other.is_empty() {
        return;
    }
    let mut merged = Vec::with_capacity(target.len() + other.len());
    let (mut a, mut b) = (0, 0);
    while a < target.len() && b < other.len() {
        match target[a].cmp(&other[b]) {
            std::cmp::Ordering::Less => {
                merged.push(target[a]);
                a += 1;
            }
            std::cmp::Ordering::Greater => {
                merged.push(other[b]);
                b += 1;
            }
            std::cmp::Ordering::Equal => {
                merged.push(target[a]);
                a += 1;
                b += 1;
            }
        }
    }
    merged.extend_from_slice(&target[a..]);
    merged.extend_from_slice(&other[b..]);
    *target = merged;
}

/// Computes the jump function: skippable rules are processed with their
/// heads ordered by range length, so children (strictly shorter ranges) are
/// complete before their parents read them.
pub fn compute_jump(dg: &DecoratedGrammar, stable: &StableSet, flags: &SkippableFlags) -> JumpTable {
    let count = dg.nonterminals().len();
    let mut remove = vec![true; count];
    for (idx, rule) in dg.rules().iter().enumerate() {
        if !flags.is_skippable(idx) {
            remove[rule.lhs() as usize] = false;
        }
    }
    let mut reachable: Vec<Vec<u32>> = (0..count as u32)
        .map(|id| if stable.contains(id) { Vec::new() } else { vec![id] })
        .collect();
    let mut heads: Vec<u32> = (0..count as u32)
        .filter(|&id| !stable.contains(id))
        .filter(|&id| dg.rule_range(id).any(|r| flags.is_skippable(r)))
        .collect();
    heads.sort_by_key(|&id| {
        let nt = dg.nonterminal(id);
        (nt.j - nt.i, id)
    });
    for a in heads {
        for idx in dg.rule_range(a) {
            if !flags.is_skippable(idx) {
                continue;
            }
            let DecoratedRule::Binary { left, right, .. } = dg.rules()[idx] else {
                continue;
            };
            let child = if stable.contains(left) { right } else { left };
            let extra = std::mem::take(&mut reachable[child as usize]);
            merge_into(&mut reachable[a as usize], &extra);
            reachable[child as usize] = extra;
        }
    }
    JumpTable(
        reachable
            .into_iter()
            .map(|set| set.into_iter().filter(|&b| !remove[b as usize]).collect())
            .collect(),
    )
}

/// One output of `apply_prod`: the non-stable children of a non-skippable
/// rule and the operations it places at `pos`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Application {
    beta: [u32; 2],
    beta_len: u8,
    pub ops: OpSet,
    pub pos: u32,
}

impl Application {
    pub fn beta(&self) -> &[u32] {
        &self.beta[..self.beta_len as usize]
    }

    /// The placed operations as `(bit, position)` pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (u8, u32)> + '_ {
        self.ops.iter().map(move |b| (b, self.pos))
    }
}

/// Precomputed `apply_prod` results, grouped by left-hand side.
#[derive(Clone, Debug)]
pub struct ApplyTable {
    entries: Vec<Application>,
    offsets: Vec<usize>,
}

impl ApplyTable {
    pub fn build(dg: &DecoratedGrammar, stable: &StableSet, flags: &SkippableFlags) -> ApplyTable {
        let mut entries = Vec::new();
        let mut offsets = vec![0];
        for id in 0..dg.nonterminals().len() as u32 {
            if !stable.contains(id) {
                for idx in dg.rule_range(id) {
                    if flags.is_skippable(idx) {
                        continue;
                    }
                    if let DecoratedRule::Binary { left, right, .. } = dg.rules()[idx] {
                        let l = dg.nonterminal(left);
                        let r = dg.nonterminal(right);
                        let mut beta = [0; 2];
                        let mut beta_len = 0;
                        for child in [left, right] {
                            if !stable.contains(child) {
                                beta[beta_len] = child;
                                beta_len += 1;
                            }
                        }
                        entries.push(Application {
                            beta,
                            beta_len: beta_len as u8,
                            ops: l.post.union(r.pre),
                            pos: l.j + 1,
                        });
                    }
                }
            }
            offsets.push(entries.len());
        }
        ApplyTable { entries, offsets }
    }

    pub fn get(&self, id: u32) -> &[Application] {
        &self.entries[self.offsets[id as usize]..self.offsets[id as usize + 1]]
    }
}

/// The pairs `(β, map)` for the non-skippable rules of a non-stable `id`.
pub fn apply_prod<'a>(
    dg: &DecoratedGrammar,
    table: &'a ApplyTable,
    stable: &StableSet,
    id: u32,
) -> Result<&'a [Application]> {
    let entries = table.get(id);
    if stable.contains(id) || entries.is_empty() {
        return Err(Error::Internal(format!(
            "apply_prod called on {}, which is stable or has only skippable rules",
            dg.name(id)
        )));
    }
    Ok(entries)
}

/// Everything the enumeration phase reads.
#[derive(Clone, Debug)]
pub struct EnumerationTables {
    pub decorated: DecoratedGrammar,
    pub stable: StableSet,
    pub skippable: SkippableFlags,
    pub jump: JumpTable,
    pub apply: ApplyTable,
}

impl EnumerationTables {
    pub fn build(decorated: DecoratedGrammar) -> EnumerationTables {
        let stable = compute_stable(&decorated);
        let skippable = mark_skippable(&decorated, &stable);
        let jump = compute_jump(&decorated, &stable, &skippable);
        let apply = ApplyTable::build(&decorated, &stable, &skippable);
        EnumerationTables {
            decorated,
            stable,
            skippable,
            jump,
            apply,
        }
    }
}

/// Steps between consecutive outputs of a stream (and between the last
/// output and exhaustion).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DelayStats {
    pub outputs: u64,
    pub duplicates: u64,
    pub total_steps: u64,
    pub max_depth: usize,
    pub histogram: BTreeMap<u64, u64>,
}

impl DelayStats {
    fn record(&mut self, delay: u64) {
        *self.histogram.entry(delay).or_insert(0) += 1;
    }

    pub fn max(&self) -> u64 {
        self.histogram.keys().next_back().copied().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        let count: u64 = self.histogram.values().sum();
        if count == 0 {
            return 0.0;
        }
        self.histogram.iter().map(|(d, c)| (d * c) as f64).sum::<f64>() / count as f64
    }

    pub fn percentile(&self, p: f64) -> u64 {
        let count: u64 = self.histogram.values().sum();
        if count == 0 {
            return 0;
        }
        let rank = ((p / 100.0) * count as f64).ceil().max(1.0) as u64;
        let mut seen = 0;
        for (&delay, &c) in &self.histogram {
            seen += c;
            if seen >= rank {
                return delay;
            }
        }
        self.max()
    }
}

struct Frame {
    alpha: Vec<u32>,
    map: Vec<(u8, u32)>,
    jump_pos: usize,
    entry_pos: usize,
}

enum Source {
    Single(Option<SpanMapping>),
    Tables {
        tables: Arc<EnumerationTables>,
        next_start: usize,
        stack: Vec<Frame>,
    },
}

/// Resumable stream of span mappings.
///
/// Work is counted in steps: one per start symbol taken, per `apply_prod`
/// result consumed, per recursive call and per finished call. The number of
/// steps between two outputs is bounded by a function of the number of
/// variables alone.
pub struct MappingStream {
    source: Source,
    steps: u64,
    last_output: u64,
    seen: Option<HashSet<SpanMapping>>,
    stats: DelayStats,
    finished: bool,
}

impl MappingStream {
    pub fn new(tables: Arc<EnumerationTables>) -> MappingStream {
        MappingStream::from_source(Source::Tables {
            tables,
            next_start: 0,
            stack: Vec::new(),
        })
    }

    /// A stream producing at most one mapping, used for the empty document.
    pub fn single(mapping: Option<SpanMapping>) -> MappingStream {
        MappingStream::from_source(Source::Single(mapping))
    }

    fn from_source(source: Source) -> MappingStream {
        MappingStream {
            source,
            steps: 0,
            last_output: 0,
            seen: None,
            stats: DelayStats::default(),
            finished: false,
        }
    }

    /// Suppresses repeated mappings using a hash set of everything emitted.
    /// Only needed for grammars that may be ambiguous.
    pub fn with_duplicate_check(mut self, enabled: bool) -> MappingStream {
        self.seen = enabled.then(HashSet::new);
        self
    }

    pub fn stats(&self) -> &DelayStats {
        &self.stats
    }

    fn raw_next(&mut self) -> Option<Vec<(u8, u32)>> {
        let Source::Tables {
            tables,
            next_start,
            stack,
        } = &mut self.source
        else {
            unreachable!()
        };
        let dg = &tables.decorated;
        loop {
            let Some(frame) = stack.last_mut() else {
                let &start = dg.starts().get(*next_start)?;
                *next_start += 1;
                self.steps += 1;
                let nt = dg.nonterminal(start);
                let n = dg.document().len() as u32;
                let mut map: Vec<(u8, u32)> = nt.pre.iter().map(|b| (b, 1)).collect();
                map.extend(nt.post.iter().map(|b| (b, n + 1)));
                if tables.stable.contains(start) {
                    return Some(map);
                }
                self.steps += 1;
                stack.push(Frame {
                    alpha: vec![start],
                    map,
                    jump_pos: 0,
                    entry_pos: 0,
                });
                self.stats.max_depth = self.stats.max_depth.max(stack.len());
                continue;
            };
            let jumps = tables.jump.get(frame.alpha[0]);
            let mut picked = None;
            while frame.jump_pos < jumps.len() {
                let entries = tables.apply.get(jumps[frame.jump_pos]);
                if frame.entry_pos < entries.len() {
                    picked = Some(entries[frame.entry_pos]);
                    frame.entry_pos += 1;
                    break;
                }
                frame.jump_pos += 1;
                frame.entry_pos = 0;
            }
            let Some(app) = picked else {
                stack.pop();
                self.steps += 1;
                continue;
            };
            self.steps += 2;
            let mut map = frame.map.clone();
            map.extend(app.pairs());
            let mut alpha = Vec::with_capacity(frame.alpha.len() + 1);
            alpha.extend_from_slice(app.beta());
            alpha.extend_from_slice(&frame.alpha[1..]);
            if alpha.is_empty() {
                return Some(map);
            }
            stack.push(Frame {
                alpha,
                map,
                jump_pos: 0,
                entry_pos: 0,
            });
            self.stats.max_depth = self.stats.max_depth.max(stack.len());
        }
    }

    fn to_mapping(&self, pairs: &[(u8, u32)]) -> SpanMapping {
        let Source::Tables { tables, .. } = &self.source else {
            unreachable!()
        };
        let vars = tables.decorated.vars();
        SpanMapping::from_pairs(pairs.iter().map(|&(b, pos)| (op_from_bit(vars, b), pos as usize)))
            .expect("decorated grammars only yield valid mappings")
    }

    fn finish(&mut self) {
        if !self.finished {
            self.finished = true;
            let delay = self.steps - self.last_output;
            self.stats.record(delay);
            self.stats.total_steps = self.steps;
        }
    }
}

impl Iterator for MappingStream {
    type Item = SpanMapping;

    fn next(&mut self) -> Option<SpanMapping> {
        if self.finished {
            return None;
        }
        loop {
            let mapping = match &mut self.source {
                Source::Single(m) => {
                    self.steps += 1;
                    m.take()
                }
                Source::Tables { .. } => self.raw_next().map(|pairs| self.to_mapping(&pairs)),
            };
            let Some(mapping) = mapping else {
                self.finish();
                return None;
            };
            if let Some(seen) = &mut self.seen {
                if !seen.insert(mapping.clone()) {
                    self.stats.duplicates += 1;
                    continue;
                }
            }
            let delay = self.steps - self.last_output;
            self.last_output = self.steps;
            self.stats.record(delay);
            self.stats.outputs += 1;
            self.stats.total_steps = self.steps;
            return Some(mapping);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjust::adjust;
    use crate::decorate::decorate;
    use crate::dsl::parse_grammar;
    use crate::span::Document;
    use crate::transforms::{functionalize, to_cnf};

    fn tables(text: &str, doc: &str) -> EnumerationTables {
        let g = parse_grammar(text).unwrap();
        let ag = adjust(&functionalize(&to_cnf(&g)).unwrap(), &Document::new(doc)).unwrap();
        EnumerationTables::build(decorate(&ag).unwrap())
    }

    fn ops(bits: &[u8]) -> OpSet {
        bits.iter().copied().collect()
    }

    // A chain of skippable rules down to the only place where x occurs.
    const CHAIN: &str = "vars: x\nstart: S\nS -> A B\nB -> A B | A F\nF -> G H\nA -> 'a'\nH -> 'a'\n\
        G -> Ga P\nGa -> 'a'\nP -> Ox Cx\nOx -> {x\nCx -> x}\n";

    #[test]
    fn jump_skips_the_chain() {
        let t = tables(CHAIN, "aaaa");
        let dg = &t.decorated;
        let e = OpSet::EMPTY;
        let s = dg.find("S", 1, 4, e, e).unwrap();
        let a = dg.find("A", 1, 1, e, e).unwrap();
        let b = dg.find("B", 2, 4, e, e).unwrap();
        let f = dg.find("F", 3, 4, e, e).unwrap();
        assert!(t.stable.contains(a));
        assert!(!t.stable.contains(s) && !t.stable.contains(b) && !t.stable.contains(f));
        let first = dg.rule_range(s).start;
        assert_eq!(
            dg.rules()[first],
            DecoratedRule::Binary {
                lhs: s,
                left: a,
                right: b
            }
        );
        assert!(t.skippable.is_skippable(first));
        assert_eq!(t.jump.get(s), &[f]);
        assert_eq!(t.jump.get(f), &[f]);

        let g = dg.find("G", 3, 3, e, ops(&[0, 1])).unwrap();
        assert!(t.stable.contains(g));
        let apps = apply_prod(dg, &t.apply, &t.stable, f).unwrap();
        assert_eq!(apps.len(), 1);
        assert!(apps[0].beta().is_empty());
        assert_eq!(apps[0].pairs().collect::<Vec<_>>(), [(0, 4), (1, 4)]);
        assert!(apply_prod(dg, &t.apply, &t.stable, s).is_err());
        assert!(apply_prod(dg, &t.apply, &t.stable, a).is_err());
    }

    // x = bits 0/1, y = 2/3, z = 4/5.
    const CROSSING: &str = "vars: x, y, z\nstart: S\nS -> A B\nA -> C D\nC -> G H\nG -> I J\n\
        I -> Oxy Ia\nOxy -> Ox Oy\nIa -> 'a'\nJ -> 'b'\nH -> Hc Cy\nHc -> 'c'\nD -> Dd Oz\nDd -> 'd'\n\
        B -> E F\nE -> 'e'\nF -> Cx F2\nF2 -> Ff Cz\nFf -> 'f'\n\
        Ox -> {x\nOy -> {y\nOz -> {z\nCx -> x}\nCy -> y}\nCz -> z}\n";

    #[test]
    fn apply_prod_places_split_operations() {
        let t = tables(CROSSING, "abcdef");
        let dg = &t.decorated;
        let e = OpSet::EMPTY;
        let s = dg.find("S", 1, 6, ops(&[0, 2]), ops(&[5])).unwrap();
        let a = dg.find("A", 1, 4, ops(&[0, 2]), ops(&[4])).unwrap();
        let b = dg.find("B", 5, 6, e, ops(&[5])).unwrap();
        let c = dg.find("C", 1, 3, ops(&[0, 2]), ops(&[3])).unwrap();
        assert_eq!(dg.starts(), &[s]);
        assert!(t.stable.contains(c));

        let pairs = |id| -> Vec<(u8, u32)> {
            let apps = apply_prod(dg, &t.apply, &t.stable, id).unwrap();
            assert_eq!(apps.len(), 1);
            apps[0].pairs().collect()
        };
        assert_eq!(pairs(s), [(4, 5)]);
        assert_eq!(pairs(a), [(3, 4)]);
        assert_eq!(pairs(b), [(1, 6)]);
        assert_eq!(apply_prod(dg, &t.apply, &t.stable, s).unwrap()[0].beta(), &[a, b]);

        let all: Vec<_> = MappingStream::new(Arc::new(t.clone())).collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].to_string(), "{x: [1,6⟩, y: [1,4⟩, z: [5,7⟩}");
    }

    #[test]
    fn heads_of_non_skippable_rules_jump_to_themselves() {
        let t = tables(
            "vars: x\nstart: S\nS -> L R\nL -> Ox Ca\nR -> Cx Ca\nOx -> {x\nCx -> x}\nCa -> 'a'\n",
            "aa",
        );
        let s = t.decorated.starts()[0];
        assert_eq!(t.jump.get(s), &[s]);
    }

    #[test]
    fn stable_start_is_emitted_directly() {
        let t = tables("vars: x\nstart: S\nS -> Ox Ca\nOx -> {x\nCa -> 'a' x}\n", "a");
        let s = t.decorated.starts()[0];
        assert!(t.stable.contains(s));
        let mut stream = MappingStream::new(Arc::new(t));
        assert_eq!(stream.next().unwrap().to_string(), "{x: [1,2⟩}");
        assert!(stream.next().is_none());
        assert_eq!(stream.stats().outputs, 1);
    }

    #[test]
    fn boolean_acceptance_gives_one_empty_mapping() {
        let t = tables("vars:\nstart: S\nS -> 'a' S | 'a'\n", "aaa");
        let all: Vec<_> = MappingStream::new(Arc::new(t)).collect();
        assert_eq!(all, [SpanMapping::empty()]);
        let rejected = tables("vars:\nstart: S\nS -> 'a' S | 'a'\n", "ab");
        assert_eq!(MappingStream::new(Arc::new(rejected)).count(), 0);
    }

    #[test]
    fn delay_statistics() {
        let mut stats = DelayStats::default();
        for d in [1, 2, 2, 3, 10] {
            stats.record(d);
        }
        assert_eq!(stats.max(), 10);
        assert_eq!(stats.percentile(50.0), 2);
        assert_eq!(stats.percentile(99.0), 10);
        assert!((stats.mean() - 3.6).abs() < 1e-9);
        assert_eq!(DelayStats::default().max(), 0);
    }

    #[test]
    fn duplicate_check_drops_repeats() {
        let text =
            "vars: x\nstart: S\nS -> T V | U V\nT -> Ca Ox\nU -> Ca Ox\nV -> Cx Ca\nCa -> 'a'\nOx -> {x\nCx -> x}\n";
        let g = parse_grammar(text).unwrap();
        let ag = adjust(&functionalize(&to_cnf(&g)).unwrap(), &Document::new("aa")).unwrap();
        let t = Arc::new(EnumerationTables::build(decorate(&ag).unwrap()));
        assert_eq!(MappingStream::new(t.clone()).count(), 2);
        let mut checked = MappingStream::new(t).with_duplicate_check(true);
        assert_eq!(checked.by_ref().count(), 1);
        assert_eq!(checked.stats().duplicates, 1);
    }
}
