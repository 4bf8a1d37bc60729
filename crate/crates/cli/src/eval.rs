use std::collections::BTreeSet;
use std::io::{self, BufWriter, Write};

use anyhow::{Context, Result};

use cfspanner::adjust::adjust;
use cfspanner::{naive_evaluate, OracleConfig, SpanMapping, Spanner};

use crate::input::{load_document, load_grammar, mapping_json, Mismatch};
use crate::{EvalArgs, Mode, Stage};

pub fn run(args: &EvalArgs) -> Result<()> {
    let g = load_grammar(&args.grammar)?;
    let d = match (&args.doc, &args.text) {
        (Some(path), _) => load_document(path)?,
        (None, Some(text)) => cfspanner::Document::new(text),
        (None, None) => unreachable!("clap requires one input"),
    };
    let cfg = OracleConfig {
        budget: args.oracle_budget,
    };
    let limit = args.limit.unwrap_or(usize::MAX);
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());

    if args.mode == Mode::Naive {
        for m in naive_evaluate(&g, &d, &cfg)?.iter().take(limit) {
            writeln!(out, "{}", mapping_json(m))?;
        }
        return Ok(out.flush()?);
    }

    let spanner = Spanner::new(&g)?;
    let pre = spanner.preprocess(&d)?;
    if let Some(stage) = args.dump_stage {
        let text = match stage {
            Stage::Adjusted if !d.is_empty() => adjust(spanner.functional(), &d)?.to_text(),
            Stage::Decorated => pre.decorated().map(|dg| dg.to_text()).unwrap_or_default(),
            Stage::Adjusted => String::new(),
        };
        eprint!("{text}");
    }
    let check = args.check_duplicates || args.mode == Mode::Compare;
    let stream = pre
        .stream()
        .with_duplicate_check(check || !spanner.is_declared_unambiguous());

    if args.mode == Mode::Enum {
        for m in stream.take(limit) {
            writeln!(out, "{}", mapping_json(&m))?;
        }
        return Ok(out.flush()?);
    }

    // Compare: the oracle runs first so a budget error is reported before
    // anything is printed.
    let naive = naive_evaluate(&g, &d, &cfg).context("naive evaluation for compare mode")?;
    let enumerated: Vec<SpanMapping> = stream.collect();
    for m in enumerated.iter().take(limit) {
        writeln!(out, "{}", mapping_json(m))?;
    }
    out.flush()?;
    let got: BTreeSet<SpanMapping> = enumerated.into_iter().collect();
    if got == naive {
        return Ok(());
    }
    let only_enum: Vec<_> = got.difference(&naive).collect();
    let only_naive: Vec<_> = naive.difference(&got).collect();
    for m in &only_enum {
        eprintln!("only in enum:  {}", mapping_json(m));
    }
    for m in &only_naive {
        eprintln!("only in naive: {}", mapping_json(m));
    }
    Err(Mismatch {
        only_enum: only_enum.len(),
        only_naive: only_naive.len(),
    }
    .into())
}
