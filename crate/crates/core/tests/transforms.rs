mod common;

use std::collections::{BTreeSet, HashMap, HashSet};

use cfspanner::oracle::CykParser;
use cfspanner::refword::{is_valid, RefSymbol};
use cfspanner::transforms::{
    compute_varop_sets, empty_doc_mapping, functionalize, is_functional, is_regular_form, project, remove_useless,
    to_cnf, union,
};
use cfspanner::{
    naive_evaluate, oracle, parse_grammar, Document, ExtractionGrammar, OpSet, OracleConfig, RefWord, SpanMapping,
    Symbol, Variable,
};
use common::{corpus, documents, grammar, mapping, var};

fn max_len(g: &ExtractionGrammar) -> usize {
    if g.var_count() >= 3 {
        4
    } else {
        5
    }
}

fn semantics(g: &ExtractionGrammar, docs: &[Document]) -> Vec<BTreeSet<SpanMapping>> {
    let cfg = OracleConfig::default();
    docs.iter().map(|d| naive_evaluate(g, d, &cfg).unwrap()).collect()
}

#[test]
fn cnf_and_functional_forms_preserve_semantics() {
    for (name, g) in corpus() {
        let docs: Vec<_> = documents(max_len(&g)).into_iter().filter(|d| !d.is_empty()).collect();
        let expected = semantics(&g, &docs);
        let cnf = to_cnf(&g);
        assert!(cnf.is_cnf(), "{name}");
        assert_eq!(semantics(&cnf, &docs), expected, "{name}: to_cnf");
        let f = functionalize(&cnf).unwrap();
        assert!(f.grammar().is_cnf(), "{name}");
        assert!(is_functional(f.grammar()), "{name}");
        assert_eq!(semantics(f.grammar(), &docs), expected, "{name}: functionalize");
    }
}

#[test]
fn cnf_is_idempotent() {
    for (name, g) in corpus() {
        let once = to_cnf(&g);
        assert_eq!(to_cnf(&once), once, "{name}");
    }
}

/// Words of length at most `max` derivable from each non-terminal of a CNF
/// grammar, by length.
fn short_words(g: &ExtractionGrammar, max: usize) -> HashMap<String, Vec<HashSet<Vec<Symbol>>>> {
    let mut words: HashMap<String, Vec<HashSet<Vec<Symbol>>>> = g
        .nonterminals()
        .into_iter()
        .map(|n| (n.to_string(), vec![HashSet::new(); max + 1]))
        .collect();
    for p in g.productions() {
        if let [s] = p.rhs.as_slice() {
            words.get_mut(&p.lhs).unwrap()[1].insert(vec![s.clone()]);
        }
    }
    for len in 2..=max {
        for p in g.productions() {
            let [Symbol::NonTerminal(b), Symbol::NonTerminal(c)] = p.rhs.as_slice() else {
                continue;
            };
            let mut new = HashSet::new();
            for split in 1..len {
                for u in &words[b][split] {
                    for v in &words[c][len - split] {
                        new.insert(u.iter().chain(v).cloned().collect::<Vec<_>>());
                    }
                }
            }
            words.get_mut(&p.lhs).unwrap()[len].extend(new);
        }
    }
    words
}

#[test]
fn functional_output_derives_only_valid_words() {
    // In normal form a word of length 7 takes 13 derivation steps.
    for (name, g) in corpus() {
        let f = functionalize(&to_cnf(&g)).unwrap();
        let fg = f.grammar();
        let words = short_words(fg, 7);
        for layer in &words[fg.start()] {
            for w in layer {
                let word = RefWord::new(
                    w.iter()
                        .map(|s| match s {
                            Symbol::Terminal(c) => RefSymbol::Char(*c),
                            Symbol::Op(op) => RefSymbol::Op(op.clone()),
                            Symbol::NonTerminal(_) => unreachable!(),
                        })
                        .collect(),
                );
                assert!(is_valid(&word, fg.vars()), "{name}: {word}");
            }
        }
    }
}

#[test]
fn varop_sets_satisfy_local_equations() {
    for (name, g) in corpus() {
        let f = functionalize(&to_cnf(&g)).unwrap();
        let fg = f.grammar();
        let table = compute_varop_sets(fg).unwrap();
        assert_eq!(&table, f.varop_sets(), "{name}");
        let set = |n: &str| table.get(n).unwrap();
        for p in fg.productions() {
            match p.rhs.as_slice() {
                [Symbol::Terminal(_)] => assert_eq!(set(&p.lhs), OpSet::EMPTY),
                [Symbol::Op(op)] => assert_eq!(set(&p.lhs), OpSet::singleton(fg.op_bit(op).unwrap())),
                [Symbol::NonTerminal(b), Symbol::NonTerminal(c)] => {
                    assert!(set(b).is_disjoint(set(c)), "{name}");
                    assert_eq!(set(&p.lhs), set(b).union(set(c)), "{name}");
                }
                _ => panic!("{name}: not in normal form"),
            }
        }
        if !fg.is_empty_language() {
            assert_eq!(set(fg.start()), OpSet::full(fg.var_count()), "{name}");
        }
    }
}

#[test]
fn split_middle_part_has_its_own_operations() {
    let f = functionalize(&to_cnf(&grammar("disj_eq_len_functional"))).unwrap();
    let ops: Vec<String> = f.varops_of("A1").unwrap().iter().map(|op| op.to_string()).collect();
    assert_eq!(ops, ["⊣x", "⊢y"]);
    assert_eq!(f.varop_sets().get("B"), Some(OpSet::EMPTY));
}

#[test]
fn disj_eq_len_matches_hand_split_version() {
    let original = grammar("disj_eq_len");
    let split = grammar("disj_eq_len_functional");
    let unambiguous = grammar("disj_eq_len_unambiguous");
    let docs = documents(5);
    let expected = semantics(&original, &docs);
    assert_eq!(semantics(&split, &docs), expected);
    assert_eq!(
        semantics(functionalize(&to_cnf(&original)).unwrap().grammar(), &docs),
        expected
    );
    assert_eq!(semantics(&unambiguous, &docs), expected);
}

#[test]
fn non_functional_grammar_is_detected() {
    let original = to_cnf(&grammar("disj_eq_len"));
    assert!(!is_functional(&original));
    assert!(compute_varop_sets(&original).is_err());
    let never_closes = parse_grammar("vars: x, y\nstart: S\nS -> {x 'a' x} {y 'a'\n").unwrap();
    assert!(functionalize(&to_cnf(&never_closes))
        .unwrap()
        .grammar()
        .is_empty_language());
}

#[test]
fn boolean_grammar_is_already_functional() {
    let g = to_cnf(&grammar("dyck"));
    let f = functionalize(&g).unwrap();
    assert_eq!(f.grammar().productions().len(), g.productions().len());
    assert!(f.varop_sets().iter().all(|(_, s)| s.is_empty()));
}

#[test]
fn useless_symbols() {
    let anbn_capture = grammar("anbn_capture");
    assert_eq!(remove_useless(&anbn_capture), anbn_capture);
    let text = std::fs::read_to_string(common::corpus_dir().join("anbn_capture.eg")).unwrap();
    let extra = parse_grammar(&format!("{text}Z -> 'a'\n")).unwrap();
    assert_eq!(remove_useless(&extra), anbn_capture);
    let stuck = parse_grammar("vars:\nstart: S\nS -> A\nA -> A\n").unwrap();
    assert!(remove_useless(&stuck).is_empty_language());
}

#[test]
fn union_is_set_union() {
    let by_vars = |k: usize| -> Vec<(String, ExtractionGrammar)> {
        corpus()
            .into_iter()
            .filter(|(_, g)| g.var_count() == k && g.vars().iter().all(|v| v.name() <= "y"))
            .collect()
    };
    let docs = documents(4);
    for k in 0..=2 {
        let group = by_vars(k);
        for (n1, g1) in &group {
            for (n2, g2) in group.iter().take(3) {
                let u = union(g1, g2).unwrap();
                assert!(!u.is_declared_unambiguous());
                let (s1, s2, su) = (semantics(g1, &docs), semantics(g2, &docs), semantics(&u, &docs));
                for ((a, b), c) in s1.iter().zip(&s2).zip(&su) {
                    let expected: BTreeSet<_> = a.union(b).cloned().collect();
                    assert_eq!(c, &expected, "{n1} ∪ {n2}");
                }
            }
        }
    }
}

#[test]
fn union_special_cases() {
    let anbn_capture = grammar("anbn_capture");
    let docs = documents(5);
    assert_eq!(
        semantics(&union(&anbn_capture, &anbn_capture).unwrap(), &docs),
        semantics(&anbn_capture, &docs)
    );
    let empty = ExtractionGrammar::empty(anbn_capture.vars().to_vec(), "S").unwrap();
    assert_eq!(
        semantics(&union(&anbn_capture, &empty).unwrap(), &docs),
        semantics(&anbn_capture, &docs)
    );

    let first = parse_grammar("vars: x\nstart: S\nS -> {x 'a' x} 'b'\n").unwrap();
    let second = parse_grammar("vars: x\nstart: S\nS -> 'a' {x 'b' x}\n").unwrap();
    let got = naive_evaluate(
        &union(&first, &second).unwrap(),
        &Document::new("ab"),
        &OracleConfig::default(),
    )
    .unwrap();
    assert_eq!(got, BTreeSet::from([mapping(&[("x", 1, 2)]), mapping(&[("x", 2, 3)])]));

    assert!(union(&anbn_capture, &grammar("any_span")).is_err());
}

fn restrict(m: &SpanMapping, keep: &[Variable]) -> SpanMapping {
    SpanMapping::from_spans(m.spans().into_iter().filter(|(v, _)| keep.contains(v)))
}

#[test]
fn projection_restricts_mappings() {
    let docs = documents(4);
    for (name, g) in corpus() {
        let vars = g.vars().to_vec();
        let mut choices: Vec<Vec<Variable>> = vec![vec![], vars.clone()];
        choices.extend(vars.iter().map(|v| vec![v.clone()]));
        let full = semantics(&g, &docs);
        for keep in choices {
            let p = project(&g, &keep).unwrap();
            assert_eq!(p.vars(), keep.as_slice());
            assert_eq!(
                p.is_declared_unambiguous(),
                g.is_declared_unambiguous() && keep.len() == vars.len()
            );
            for (got, all) in semantics(&p, &docs).iter().zip(&full) {
                let expected: BTreeSet<_> = all.iter().map(|m| restrict(m, &keep)).collect();
                assert_eq!(got, &expected, "{name} projected to {keep:?}");
            }
        }
    }
}

#[test]
fn projection_examples() {
    let p = project(&grammar("anbn_capture"), &[var("x")]).unwrap();
    let got = naive_evaluate(&p, &Document::new("ababb"), &OracleConfig::default()).unwrap();
    assert_eq!(got, BTreeSet::from([mapping(&[("x", 1, 2)]), mapping(&[("x", 3, 4)])]));
    assert!(project(&grammar("anbn_capture"), &[var("z")]).is_err());
}

#[test]
fn empty_document() {
    let both_empty = empty_doc_mapping(&grammar("disj_eq_len")).unwrap();
    assert_eq!(both_empty, mapping(&[("x", 1, 1), ("y", 1, 1)]));
    assert_eq!(empty_doc_mapping(&grammar("anbn_capture")), None);
    let eps = parse_grammar("vars:\nstart: S\nS -> eps\n").unwrap();
    assert_eq!(empty_doc_mapping(&eps), Some(SpanMapping::empty()));

    let cfg = OracleConfig::default();
    let empty = Document::new("");
    for (name, g) in corpus() {
        let expected = naive_evaluate(&g, &empty, &cfg).unwrap();
        let got: BTreeSet<_> = empty_doc_mapping(&g).into_iter().collect();
        assert_eq!(got, expected, "{name}");
    }
}

#[test]
fn regular_form() {
    assert!(is_regular_form(&grammar("regular_form")));
    assert!(is_regular_form(
        &parse_grammar("vars: x\nstart: S\nS -> {x S | 'a' S | x}\n").unwrap()
    ));
    assert!(!is_regular_form(&grammar("anbn_capture")));
    assert!(!is_regular_form(&grammar("anbn")));
}

#[test]
fn unambiguity_survives_normalization() {
    let cfg = OracleConfig::default();
    for (name, g) in corpus().into_iter().filter(|(_, g)| g.is_declared_unambiguous()) {
        let cnf = to_cnf(&g);
        let f = functionalize(&cnf).unwrap();
        let (cnf_parser, f_parser) = (CykParser::new(&cnf).unwrap(), CykParser::new(f.grammar()).unwrap());
        let len = 4;
        for d in documents(len).into_iter().filter(|d| !d.is_empty()) {
            let mut seen = HashSet::new();
            for w in oracle::valid_refwords(&d, g.vars(), &cfg).unwrap() {
                let trees = cnf_parser.count_trees(&w);
                assert!(trees <= 1, "{name}: {w} has {trees} trees");
                assert_eq!(f_parser.count_trees(&w), trees, "{name}: {w}");
                if trees == 1 {
                    let m = cfspanner::refword::ref_to_mapping(&w, g.vars()).unwrap();
                    assert!(seen.insert(m), "{name}: two ref-words for one mapping on {d:?}");
                }
            }
        }
    }
}
