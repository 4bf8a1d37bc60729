//! Reference semantics by brute force: enumerate every valid ref-word over a
//! document and keep those the grammar accepts.
//!
//! Exponential in the number of variables; guarded by a budget on the number
//! of gap assignments, `(|d| + 2)^(2k)`.

use std::collections::{BTreeSet, HashMap};

use crate::compiled::{CompiledCnf, Letter};
use crate::error::{Error, Result};
use crate::grammar::{op_from_bit, ExtractionGrammar, Variable};
use crate::refword::{RefSymbol, RefWord};
use crate::span::{Document, SpanMapping};
use crate::transforms::to_cnf;

/// Environment variable overriding the default oracle budget.
pub const BUDGET_ENV: &str = "CFSPANNER_ORACLE_BUDGET";

pub const DEFAULT_BUDGET: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub budget: u128,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { budget: DEFAULT_BUDGET }
    }
}

impl OracleConfig {
    /// The default configuration, with the budget taken from
    /// `CFSPANNER_ORACLE_BUDGET` when set to a number.
    pub fn from_env() -> OracleConfig {
        let budget = std::env::var(BUDGET_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_BUDGET);
        OracleConfig { budget }
    }

    fn check(&self, doc_len: usize, k: usize) -> Result<()> {
        let required = (doc_len as u128 + 2).checked_pow(2 * k as u32).unwrap_or(u128::MAX);
        if required > self.budget {
            return Err(Error::BudgetExceeded {
                required,
                budget: self.budget,
            });
        }
        Ok(())
    }
}

/// Depth-first generator of valid ref-words in a fixed order: at every
/// position, operations (by bit index) are tried before the next document
/// character.
pub(crate) struct RefWordGen {
    doc: Vec<char>,
    k: usize,
    word: Vec<Letter>,
    cursors: Vec<u8>,
    used: u32,
    next_char: usize,
    yielded: bool,
    done: bool,
}

impl RefWordGen {
    pub fn new(doc: &[char], k: usize) -> RefWordGen {
        RefWordGen {
            doc: doc.to_vec(),
            k,
            word: Vec::new(),
            cursors: Vec::new(),
            used: 0,
            next_char: 0,
            yielded: false,
            done: false,
        }
    }

    fn allowed(&self, choice: u8) -> bool {
        let ops = 2 * self.k as u8;
        if choice < ops {
            let used = |b: u8| self.used & (1 << b) != 0;
            if choice.is_multiple_of(2) {
                !used(choice)
            } else {
                used(choice - 1) && !used(choice)
            }
        } else {
            self.next_char < self.doc.len()
        }
    }

    fn undo(&mut self) {
        match self.word.pop() {
            Some(Letter::Char(_)) => self.next_char -= 1,
            Some(Letter::Op(b)) => self.used &= !(1 << b),
            None => self.done = true,
        }
    }

    pub fn next_word(&mut self) -> Option<&[Letter]> {
        if self.done {
            return None;
        }
        let total = self.doc.len() + 2 * self.k;
        let ops = 2 * self.k as u8;
        // A complete word was returned last time; step back from it.
        if self.yielded {
            self.yielded = false;
            self.undo();
            if self.done {
                return None;
            }
        }
        loop {
            let depth = self.word.len();
            if depth == total {
                self.yielded = true;
                return Some(&self.word);
            }
            if self.cursors.len() <= depth {
                self.cursors.push(0);
            }
            let mut choice = self.cursors[depth];
            while choice <= ops && !self.allowed(choice) {
                choice += 1;
            }
            if choice > ops {
                self.cursors.pop();
                if self.word.is_empty() {
                    self.done = true;
                    return None;
                }
                self.undo();
                continue;
            }
            self.cursors[depth] = choice + 1;
            if choice < ops {
                self.used |= 1 << choice;
                self.word.push(Letter::Op(choice));
            } else {
                self.word.push(Letter::Char(self.doc[self.next_char]));
                self.next_char += 1;
            }
        }
    }
}

/// Iterator over all valid ref-words whose underlying document is `d`.
pub struct ValidRefWords {
    inner: RefWordGen,
    vars: Vec<Variable>,
}

impl Iterator for ValidRefWords {
    type Item = RefWord;

    fn next(&mut self) -> Option<RefWord> {
        let vars = &self.vars;
        self.inner.next_word().map(|letters| {
            RefWord(
                letters
                    .iter()
                    .map(|l| match l {
                        Letter::Char(c) => RefSymbol::Char(*c),
                        Letter::Op(b) => RefSymbol::Op(op_from_bit(vars, *b)),
                    })
                    .collect(),
            )
        })
    }
}

/// Every valid ref-word over `vars` whose clean document is `d`, each once,
/// in a deterministic order.
pub fn valid_refwords(d: &Document, vars: &[Variable], cfg: &OracleConfig) -> Result<ValidRefWords> {
    cfg.check(d.len(), vars.len())?;
    let mut sorted = vars.to_vec();
    sorted.sort();
    Ok(ValidRefWords {
        inner: RefWordGen::new(d.chars(), sorted.len()),
        vars: sorted,
    })
}

/// CYK recognizer over a compiled CNF grammar.
pub(crate) struct Cyk {
    cnf: CompiledCnf,
    by_char: HashMap<char, Vec<u32>>,
    by_op: Vec<Vec<u32>>,
    /// Binary rules `A -> B C` grouped by `B`, as `(C, A)`.
    by_left: Vec<Vec<(u32, u32)>>,
    blocks: usize,
}

impl Cyk {
    pub fn new(cnf: CompiledCnf) -> Cyk {
        let mut by_char: HashMap<char, Vec<u32>> = HashMap::new();
        for &(a, c) in &cnf.char_rules {
            by_char.entry(c).or_default().push(a);
        }
        let mut by_op = vec![Vec::new(); 2 * cnf.k];
        for &(a, b) in &cnf.op_rules {
            by_op[b as usize].push(a);
        }
        let mut by_left = vec![Vec::new(); cnf.nt_count()];
        for &(a, b, c) in &cnf.binary {
            by_left[b as usize].push((c, a));
        }
        Cyk {
            blocks: cnf.nt_count().div_ceil(64).max(1),
            cnf,
            by_char,
            by_op,
            by_left,
        }
    }

    /// Adds to `target` every `A` with `A -> B C`, `B` in `left`, `C` in `right`.
    fn combine(&self, table: &mut [u64], target: usize, left: usize, right: usize) {
        for block in 0..self.blocks {
            let mut bits = table[left + block];
            while bits != 0 {
                let b = block * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                for &(c, a) in &self.by_left[b] {
                    if table[right + c as usize / 64] & (1 << (c % 64)) != 0 {
                        table[target + a as usize / 64] |= 1 << (a % 64);
                    }
                }
            }
        }
    }

    fn leaves(&self, letter: Letter) -> &[u32] {
        match letter {
            Letter::Char(c) => self.by_char.get(&c).map(Vec::as_slice).unwrap_or(&[]),
            Letter::Op(b) => self.by_op.get(b as usize).map(Vec::as_slice).unwrap_or(&[]),
        }
    }

    /// Bitsets of non-terminals deriving each infix; cell `(i, len)`.
    fn table(&self, word: &[Letter]) -> Vec<u64> {
        let n = word.len();
        let blocks = self.blocks;
        let cell = |i: usize, len: usize| ((len - 1) * n + i) * blocks;
        let mut table = vec![0u64; n * n * blocks];
        for (i, &letter) in word.iter().enumerate() {
            for &a in self.leaves(letter) {
                table[cell(i, 1) + a as usize / 64] |= 1 << (a % 64);
            }
        }
        for len in 2..=n {
            for i in 0..=n - len {
                let target = cell(i, len);
                for split in 1..len {
                    self.combine(&mut table, target, cell(i, split), cell(i + split, len - split));
                }
            }
        }
        table
    }

    pub fn derives(&self, nt: u32, word: &[Letter]) -> bool {
        if word.is_empty() {
            return false;
        }
        let n = word.len();
        let table = self.table(word);
        let base = ((n - 1) * n) * self.blocks;
        table[base + nt as usize / 64] & (1 << (nt % 64)) != 0
    }

    pub fn accepts(&self, word: &[Letter]) -> bool {
        self.derives(self.cnf.start, word)
    }

    /// Number of parse trees of `word` from the start symbol.
    pub fn count_trees(&self, word: &[Letter]) -> u128 {
        let n = word.len();
        if n == 0 {
            return 0;
        }
        let nts = self.cnf.nt_count();
        let cell = |i: usize, len: usize| ((len - 1) * n + i) * nts;
        let mut table = vec![0u128; n * n * nts];
        for (i, &letter) in word.iter().enumerate() {
            for &a in self.leaves(letter) {
                table[cell(i, 1) + a as usize] += 1;
            }
        }
        for len in 2..=n {
            for i in 0..=n - len {
                let target = cell(i, len);
                for split in 1..len {
                    let left = cell(i, split);
                    let right = cell(i + split, len - split);
                    for b in 0..nts {
                        let l = table[left + b];
                        if l == 0 {
                            continue;
                        }
                        for &(c, a) in &self.by_left[b] {
                            let product = l.saturating_mul(table[right + c as usize]);
                            table[target + a as usize] = table[target + a as usize].saturating_add(product);
                        }
                    }
                }
            }
        }
        table[cell(0, n) + self.cnf.start as usize]
    }
}

fn to_letters(g: &ExtractionGrammar, w: &RefWord) -> Option<Vec<Letter>> {
    w.symbols()
        .iter()
        .map(|s| match s {
            RefSymbol::Char(c) => Some(Letter::Char(*c)),
            RefSymbol::Op(op) => g.op_bit(op).map(Letter::Op),
        })
        .collect()
}

/// A CNF grammar prepared for repeated membership and tree-count queries.
pub struct CykParser {
    grammar: ExtractionGrammar,
    cyk: Cyk,
}

impl CykParser {
    pub fn new(g: &ExtractionGrammar) -> Result<CykParser> {
        if !g.is_cnf() {
            return Err(Error::NotCnf(format!("start symbol {}", g.start())));
        }
        Ok(CykParser {
            cyk: Cyk::new(CompiledCnf::compile(g)?),
            grammar: g.clone(),
        })
    }

    pub fn accepts(&self, w: &RefWord) -> bool {
        to_letters(&self.grammar, w).is_some_and(|letters| self.cyk.accepts(&letters))
    }

    pub fn count_trees(&self, w: &RefWord) -> u128 {
        match to_letters(&self.grammar, w) {
            Some(letters) if self.cyk.accepts(&letters) => self.cyk.count_trees(&letters),
            _ => 0,
        }
    }
}

/// Membership of a ref-word in the language of a CNF grammar.
pub fn cyk_accepts(g: &ExtractionGrammar, w: &RefWord) -> Result<bool> {
    Ok(CykParser::new(g)?.accepts(w))
}

/// Number of parse trees of `w` in a CNF grammar.
pub fn count_parse_trees(g: &ExtractionGrammar, w: &RefWord) -> Result<u128> {
    Ok(CykParser::new(g)?.count_trees(w))
}

pub(crate) fn letters_to_mapping(vars: &[Variable], letters: &[Letter]) -> Result<SpanMapping> {
    let mut pos = 1;
    let mut pairs = Vec::with_capacity(2 * vars.len());
    for l in letters {
        match l {
            Letter::Char(_) => pos += 1,
            Letter::Op(b) => pairs.push((op_from_bit(vars, *b), pos)),
        }
    }
    SpanMapping::from_pairs(pairs)
}

/// The spanner semantics by exhaustive search: the mappings of all valid
/// ref-words over `d` accepted by `g`.
pub fn naive_evaluate(g: &ExtractionGrammar, d: &Document, cfg: &OracleConfig) -> Result<BTreeSet<SpanMapping>> {
    cfg.check(d.len(), g.var_count())?;
    let mut out = BTreeSet::new();
    if d.is_empty() && g.var_count() == 0 {
        if g.nullable().contains(g.start()) {
            out.insert(SpanMapping::empty());
        }
        return Ok(out);
    }
    let cnf = to_cnf(g);
    if cnf.is_empty_language() {
        return Ok(out);
    }
    let compiled = CompiledCnf::compile(&cnf)?;
    let mut search = Search {
        cyk: Cyk::new(compiled),
        doc: d.chars(),
        k: g.var_count(),
        total: d.len() + 2 * g.var_count(),
        word: Vec::new(),
        table: Vec::new(),
        used: 0,
        next_char: 0,
    };
    search.table = vec![0; search.total * search.total * search.cyk.blocks];
    let mut accepted = Vec::new();
    search.run(&mut accepted);
    for word in accepted {
        out.insert(letters_to_mapping(g.vars(), &word)?);
    }
    Ok(out)
}

/// Depth-first walk over the valid ref-words of a document, in the order of
/// [`RefWordGen`], with one CYK column computed per pushed letter so words
/// sharing a prefix share work.
struct Search<'a> {
    cyk: Cyk,
    doc: &'a [char],
    k: usize,
    total: usize,
    word: Vec<Letter>,
    /// Cell `(i, j)` holds the non-terminals deriving `word[i..=j]`.
    table: Vec<u64>,
    used: u32,
    next_char: usize,
}

impl Search<'_> {
    fn cell(&self, i: usize, j: usize) -> usize {
        (j * self.total + i) * self.cyk.blocks
    }

    fn has(&self, cell: usize, nt: u32) -> bool {
        self.table[cell + nt as usize / 64] & (1 << (nt % 64)) != 0
    }

    fn fill_column(&mut self) {
        let j = self.word.len() - 1;
        let blocks = self.cyk.blocks;
        for i in 0..=j {
            let target = self.cell(i, j);
            self.table[target..target + blocks].fill(0);
        }
        let leaf = self.cell(j, j);
        for &a in self.cyk.leaves(self.word[j]) {
            self.table[leaf + a as usize / 64] |= 1 << (a % 64);
        }
        for i in (0..j).rev() {
            let target = self.cell(i, j);
            for m in i..j {
                let (left, right) = (self.cell(i, m), self.cell(m + 1, j));
                self.cyk.combine(&mut self.table, target, left, right);
            }
        }
    }

    fn run(&mut self, accepted: &mut Vec<Vec<Letter>>) {
        if self.word.len() == self.total {
            if self.total > 0 && self.has(self.cell(0, self.total - 1), self.cyk.cnf.start) {
                accepted.push(self.word.clone());
            }
            return;
        }
        for bit in 0..2 * self.k as u8 {
            let used = |b: u8| self.used & (1 << b) != 0;
            let allowed = if bit % 2 == 0 {
                !used(bit)
            } else {
                used(bit - 1) && !used(bit)
            };
            if allowed {
                self.used |= 1 << bit;
                self.word.push(Letter::Op(bit));
                self.fill_column();
                self.run(accepted);
                self.word.pop();
                self.used &= !(1 << bit);
            }
        }
        if self.next_char < self.doc.len() {
            self.word.push(Letter::Char(self.doc[self.next_char]));
            self.next_char += 1;
            self.fill_column();
            self.run(accepted);
            self.next_char -= 1;
            self.word.pop();
        }
    }
}
