use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};

use cfspanner::{parse_grammar, Document, Error, ExtractionGrammar, SpanMapping};

/// The enumerated and naive results differ.
#[derive(Debug)]
pub struct Mismatch {
    pub only_enum: usize,
    pub only_naive: usize,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "enumeration and naive evaluation differ ({} only in enum, {} only in naive)",
            self.only_enum, self.only_naive
        )
    }
}

impl std::error::Error for Mismatch {}

/// Maps an error to the process exit code: 2 for grammar syntax errors,
/// 3 for resource limits, 4 for a compare mismatch and 1 for the rest.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Mismatch>().is_some() {
        return 4;
    }
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(
            Error::Syntax { .. }
            | Error::UndeclaredVariable { .. }
            | Error::UndeclaredNonTerminal { .. }
            | Error::DuplicateVariable(_)
            | Error::InvalidVariableName(_)
            | Error::InvalidNonTerminalName(_),
        ) => 2,
        Some(Error::TooManyVariables { .. } | Error::BudgetExceeded { .. } | Error::DocumentTooLong(_)) => 3,
        _ => 1,
    }
}

pub fn load_grammar(path: &Path) -> Result<ExtractionGrammar> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading grammar {}", path.display()))?;
    parse_grammar(&text).with_context(|| format!("parsing grammar {}", path.display()))
}

pub fn load_document(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading document {}", path.display()))?;
    let text = text
        .strip_suffix("\r\n")
        .or_else(|| text.strip_suffix('\n'))
        .unwrap_or(&text);
    Ok(Document::new(text))
}

/// One JSON object with the variable names as sorted keys and `[i, j]`
/// arrays as values.
pub fn mapping_json(m: &SpanMapping) -> String {
    let spans: BTreeMap<String, [usize; 2]> = m
        .spans()
        .into_iter()
        .map(|(var, span)| (var.name().to_string(), [span.start, span.end]))
        .collect();
    serde_json::to_string(&spans).expect("string keys serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let syntax = Error::Syntax {
            line: 1,
            column: 1,
            message: "x".into(),
        };
        assert_eq!(exit_code(&anyhow::Error::new(syntax).context("parsing")), 2);
        let budget = Error::BudgetExceeded { required: 2, budget: 1 };
        assert_eq!(exit_code(&budget.into()), 3);
        let mismatch = Mismatch {
            only_enum: 1,
            only_naive: 0,
        };
        assert_eq!(exit_code(&mismatch.into()), 4);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 1);
    }
}
