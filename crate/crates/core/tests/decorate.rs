mod common;

use std::collections::BTreeSet;

use cfspanner::decorate::decorated_to_mapping;
use cfspanner::transforms::{functionalize, to_cnf};
use cfspanner::{adjust, decorate, naive_evaluate, Document, OracleConfig};
use common::{corpus, documents};

#[test]
fn decorated_words_give_exactly_the_oracle_mappings() {
    let cfg = OracleConfig::default();
    for (name, g) in corpus() {
        let fg = functionalize(&to_cnf(&g)).unwrap();
        let max_len = if g.var_count() >= 3 { 3 } else { 4 };
        for d in documents(max_len).into_iter().filter(|d| !d.is_empty()) {
            let dg = decorate(&adjust(&fg, &d).unwrap()).unwrap();
            let words = dg.words(1 << 20).expect("too many decorated words");
            let mut mappings = Vec::new();
            for w in &words {
                let positions: Vec<u32> = w.iter().map(|t| t.pos).collect();
                let expected: Vec<u32> = (1..=d.len() as u32).collect();
                assert_eq!(positions, expected, "{name} on {d:?}");
                let m = decorated_to_mapping(w, dg.vars()).unwrap_or_else(|e| panic!("{name} on {d:?}: {e}"));
                mappings.push(m);
            }
            let set: BTreeSet<_> = mappings.iter().cloned().collect();
            assert_eq!(set, naive_evaluate(&g, &d, &cfg).unwrap(), "{name} on {d:?}");
            if g.is_declared_unambiguous() {
                assert_eq!(set.len(), mappings.len(), "{name} on {d:?}: duplicate mapping");
            }
        }
    }
}

#[test]
fn every_nonterminal_has_a_rule_and_ranges_are_consistent() {
    for (name, g) in corpus() {
        let fg = functionalize(&to_cnf(&g)).unwrap();
        let d = Document::new("abab");
        let dg = decorate(&adjust(&fg, &d).unwrap()).unwrap();
        for id in 0..dg.nonterminals().len() as u32 {
            assert!(!dg.rules_of(id).is_empty(), "{name}: {}", dg.name(id));
            let nt = dg.nonterminal(id);
            assert!(
                1 <= nt.i && nt.i <= nt.j && nt.j as usize <= d.len(),
                "{name}: {}",
                dg.name(id)
            );
        }
        for &s in dg.starts() {
            let nt = dg.nonterminal(s);
            assert_eq!((nt.i, nt.j as usize), (1, d.len()), "{name}");
        }
    }
}
