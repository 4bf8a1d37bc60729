use std::collections::{HashMap, HashSet, VecDeque};

use crate::grammar::{ExtractionGrammar, FreshNames, Production, Symbol};

/// Drops non-productive and unreachable non-terminals together with every
/// production mentioning them. If the start symbol is non-productive the
/// result is the empty-language grammar.
pub fn remove_useless(g: &ExtractionGrammar) -> ExtractionGrammar {
    let mut productive: HashSet<&str> = HashSet::new();
    loop {
        let before = productive.len();
        for p in g.productions() {
            if !productive.contains(p.lhs.as_str())
                && p.rhs
                    .iter()
                    .filter_map(Symbol::as_nonterminal)
                    .all(|n| productive.contains(n))
            {
                productive.insert(&p.lhs);
            }
        }
        if productive.len() == before {
            break;
        }
    }
    if !productive.contains(g.start()) {
        return ExtractionGrammar::from_parts(
            g.vars().to_vec(),
            g.start().to_string(),
            Vec::new(),
            g.is_declared_unambiguous(),
        );
    }
    let kept: Vec<&Production> = g
        .productions()
        .iter()
        .filter(|p| {
            p.rhs
                .iter()
                .filter_map(Symbol::as_nonterminal)
                .all(|n| productive.contains(n))
        })
        .collect();

    let mut by_lhs: HashMap<&str, Vec<&Production>> = HashMap::new();
    for p in &kept {
        by_lhs.entry(&p.lhs).or_default().push(p);
    }
    let mut reachable: HashSet<&str> = HashSet::from([g.start()]);
    let mut queue = VecDeque::from([g.start()]);
    while let Some(a) = queue.pop_front() {
        for p in by_lhs.get(a).into_iter().flatten() {
            for n in p.rhs.iter().filter_map(Symbol::as_nonterminal) {
                if reachable.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    let productions = kept
        .into_iter()
        .filter(|p| reachable.contains(p.lhs.as_str()))
        .cloned()
        .collect();
    ExtractionGrammar::from_parts(
        g.vars().to_vec(),
        g.start().to_string(),
        productions,
        g.is_declared_unambiguous(),
    )
}

/// Converts to Chomsky normal form: every production becomes `A -> σ`,
/// `A -> τ` or `A -> B C`.
///
/// The empty word is dropped from the language; callers handle the empty
/// document separately. Unambiguity is preserved, so the declared flag
/// carries over.
pub fn to_cnf(g: &ExtractionGrammar) -> ExtractionGrammar {
    let g = remove_useless(g);
    if g.is_empty_language() {
        return g;
    }
    let mut fresh = FreshNames::new(g.nonterminals());

    // Epsilon elimination.
    let nullable = g.nullable();
    let mut no_eps: Vec<Production> = Vec::new();
    let mut seen: HashSet<Production> = HashSet::new();
    for p in g.productions() {
        let slots: Vec<usize> = p
            .rhs
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Symbol::NonTerminal(n) if nullable.contains(n)))
            .map(|(i, _)| i)
            .collect();
        for mask in 0u64..(1u64 << slots.len()) {
            let rhs: Vec<Symbol> = p
                .rhs
                .iter()
                .enumerate()
                .filter(|(i, _)| match slots.iter().position(|s| s == i) {
                    Some(bit) => mask & (1 << bit) == 0,
                    None => true,
                })
                .map(|(_, s)| s.clone())
                .collect();
            if rhs.is_empty() {
                continue;
            }
            let prod = Production {
                lhs: p.lhs.clone(),
                rhs,
            };
            if seen.insert(prod.clone()) {
                no_eps.push(prod);
            }
        }
    }

    // Unit elimination. A unit rule A -> B is replaced, in place, by A -> α
    // for every non-unit B' -> α with B' reachable from B by unit rules.
    let mut by_lhs: HashMap<&str, Vec<&Production>> = HashMap::new();
    for p in &no_eps {
        by_lhs.entry(&p.lhs).or_default().push(p);
    }
    let mut no_unit: Vec<Production> = Vec::new();
    let mut seen: HashSet<Production> = HashSet::new();
    for p in &no_eps {
        let [Symbol::NonTerminal(b)] = p.rhs.as_slice() else {
            if seen.insert(p.clone()) {
                no_unit.push(p.clone());
            }
            continue;
        };
        let mut closure = vec![b.as_str()];
        let mut idx = 0;
        while idx < closure.len() {
            for q in by_lhs.get(closure[idx]).into_iter().flatten() {
                match q.rhs.as_slice() {
                    [Symbol::NonTerminal(c)] => {
                        if !closure.contains(&c.as_str()) {
                            closure.push(c);
                        }
                    }
                    rhs => {
                        let prod = Production {
                            lhs: p.lhs.clone(),
                            rhs: rhs.to_vec(),
                        };
                        if seen.insert(prod.clone()) {
                            no_unit.push(prod);
                        }
                    }
                }
            }
            idx += 1;
        }
    }
    let g = remove_useless(&ExtractionGrammar::from_parts(
        g.vars().to_vec(),
        g.start().to_string(),
        no_unit,
        g.is_declared_unambiguous(),
    ));

    // Lift terminals and operations out of long bodies, then binarize.
    let mut lifted: HashMap<Symbol, String> = HashMap::new();
    let mut lifted_rules: Vec<Production> = Vec::new();
    let mut out: Vec<Production> = Vec::new();
    for p in g.productions() {
        if p.rhs.len() == 1 {
            out.push(p.clone());
            continue;
        }
        let body: Vec<Symbol> = p
            .rhs
            .iter()
            .map(|s| match s {
                Symbol::NonTerminal(_) => s.clone(),
                other => {
                    let name = lifted.entry(other.clone()).or_insert_with(|| {
                        let name = fresh.fresh("T");
                        lifted_rules.push(Production {
                            lhs: name.clone(),
                            rhs: vec![other.clone()],
                        });
                        name
                    });
                    Symbol::NonTerminal(name.clone())
                }
            })
            .collect();
        let mut lhs = p.lhs.clone();
        let mut rest = body.as_slice();
        while rest.len() > 2 {
            let next = fresh.fresh(&p.lhs);
            out.push(Production {
                lhs,
                rhs: vec![rest[0].clone(), Symbol::NonTerminal(next.clone())],
            });
            lhs = next;
            rest = &rest[1..];
        }
        out.push(Production {
            lhs,
            rhs: rest.to_vec(),
        });
    }
    out.extend(lifted_rules);
    ExtractionGrammar::from_parts(
        g.vars().to_vec(),
        g.start().to_string(),
        out,
        g.is_declared_unambiguous(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_grammar;

    const ANBN_CAPTURE: &str = "\
vars: x, y
start: S
S -> B {x 'a' A 'b' y} B
A -> 'a' A 'b' | x} {y
B -> 'a' B | 'b' B | eps
";

    #[test]
    fn cnf_shape_and_idempotence() {
        let g = parse_grammar(ANBN_CAPTURE).unwrap();
        let cnf = to_cnf(&g);
        assert!(cnf.is_cnf());
        assert_eq!(to_cnf(&cnf), cnf);
    }

    #[test]
    fn useless_removal() {
        let g = parse_grammar("vars:\nstart: S\nS -> 'a' | A\nA -> A 'b'\nC -> 'c'\n").unwrap();
        let r = remove_useless(&g);
        assert_eq!(r.productions().len(), 1);
        let e = parse_grammar("vars:\nstart: S\nS -> S 'a'\n").unwrap();
        assert!(remove_useless(&e).is_empty_language());
    }

    #[test]
    fn fresh_names_do_not_collide() {
        let g = parse_grammar("vars:\nstart: S\nS -> 'a' S 'b' T%1 | 'c'\nT%1 -> 'd'\n").unwrap();
        let cnf = to_cnf(&g);
        assert!(cnf.is_cnf());
        let t_rules: Vec<_> = cnf.rules_for("T%1").collect();
        assert_eq!(t_rules.len(), 1);
    }
}
