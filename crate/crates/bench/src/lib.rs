//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use cfspanner::{parse_grammar, Document, ExtractionGrammar};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

/// A grammar from the bundled corpus, by file stem.
pub fn corpus_grammar(name: &str) -> ExtractionGrammar {
    let path = corpus_dir().join(format!("{name}.eg"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_grammar(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A pseudo-random document over {a, b}, fixed for a given length.
pub fn document(n: usize) -> Document {
    let mut state = 0x9e37_79b9_u32 ^ n as u32;
    Document::from_chars(
        (0..n)
            .map(|_| {
                // xorshift32
                state ^= state << 13;
                state ^= state >> 17;
                state ^= state << 5;
                if state & 1 == 0 {
                    'a'
                } else {
                    'b'
                }
            })
            .collect(),
    )
}
