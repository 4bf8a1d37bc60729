#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use cfspanner::{parse_grammar, Document, ExtractionGrammar, Span, SpanMapping, Variable};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// All corpus grammars, sorted by file name.
pub fn corpus() -> Vec<(String, ExtractionGrammar)> {
    let mut paths: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "eg"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let g = parse_grammar(&std::fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, g)
        })
        .collect()
}

pub fn grammar(name: &str) -> ExtractionGrammar {
    let text = std::fs::read_to_string(corpus_dir().join(format!("{name}.eg"))).unwrap();
    parse_grammar(&text).unwrap()
}

/// Every document over {a, b} of length at most `max_len`, shortest first.
pub fn documents(max_len: usize) -> Vec<Document> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|w| [format!("{w}a"), format!("{w}b")]).collect();
        out.extend(layer.iter().cloned());
    }
    out.iter().map(|w| Document::new(w)).collect()
}

pub fn var(name: &str) -> Variable {
    Variable::new(name).unwrap()
}

pub fn mapping(spans: &[(&str, usize, usize)]) -> SpanMapping {
    SpanMapping::from_spans(spans.iter().map(|&(v, i, j)| (var(v), Span::new(i, j))))
}

/// All pairs of non-overlapping spans of equal length over a document of
/// length `n`, computed directly from positions.
pub fn disjoint_equal_length(n: usize) -> BTreeSet<SpanMapping> {
    let spans: Vec<(usize, usize)> = (1..=n + 1).flat_map(|i| (i..=n + 1).map(move |j| (i, j))).collect();
    let mut out = BTreeSet::new();
    for &(i, j) in &spans {
        for &(k, l) in &spans {
            if j - i == l - k && (j <= k || l <= i) {
                out.insert(mapping(&[("x", i, j), ("y", k, l)]));
            }
        }
    }
    out
}
