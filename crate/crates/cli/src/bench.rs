use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Result};
use serde::Serialize;

use cfspanner::{Document, Spanner, StageSizes, StageTimings};

use crate::input::{load_document, load_grammar};
use crate::BenchArgs;

#[derive(Serialize)]
struct Report {
    declared_unambiguous: bool,
    duplicate_check: bool,
    variables: usize,
    repeats: usize,
    runs: Vec<Run>,
    /// `[length, max step-delay]` per document, in input order.
    delay_series: Vec<[u64; 2]>,
    max_delay_constant: bool,
}

#[derive(Serialize)]
struct Run {
    length: usize,
    outputs: u64,
    duplicates: u64,
    preprocessing_ms: StageMillis,
    enumeration_ms: f64,
    sizes: Sizes,
    delay: Delay,
}

#[derive(Serialize)]
struct StageMillis {
    adjust: f64,
    decorate: f64,
    stable: f64,
    skippable: f64,
    jump: f64,
    total: f64,
}

#[derive(Serialize)]
struct Sizes {
    adjusted_nonterminals: usize,
    adjusted_rules: usize,
    decorated_nonterminals: usize,
    decorated_rules: usize,
    jump_entries: usize,
}

#[derive(Serialize)]
struct Delay {
    max: u64,
    mean: f64,
    p99: u64,
    max_depth: usize,
    /// Step count between outputs mapped to how often it occurred.
    histogram: BTreeMap<u64, u64>,
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn min_timings(a: StageTimings, b: StageTimings) -> StageTimings {
    StageTimings {
        adjust: a.adjust.min(b.adjust),
        decorate: a.decorate.min(b.decorate),
        stable: a.stable.min(b.stable),
        skippable: a.skippable.min(b.skippable),
        jump: a.jump.min(b.jump),
    }
}

fn measure(spanner: &Spanner, d: &Document, repeats: usize, check: bool) -> Result<Run> {
    let mut timings: Option<StageTimings> = None;
    let mut enumeration = Duration::MAX;
    let mut result = None;
    let mut sizes = StageSizes::default();
    for _ in 0..repeats {
        let pre = spanner.preprocess(d)?;
        timings = Some(timings.map_or(pre.timings(), |t| min_timings(t, pre.timings())));
        sizes = pre.sizes();
        let clock = Instant::now();
        let mut stream = pre.stream().with_duplicate_check(check);
        stream.by_ref().for_each(drop);
        enumeration = enumeration.min(clock.elapsed());
        let stats = stream.stats().clone();
        if let Some(prev) = &result {
            ensure!(prev == &stats, "enumeration is not deterministic across repeats");
        }
        result = Some(stats);
    }
    let (Some(t), Some(stats)) = (timings, result) else {
        bail!("--repeats must be at least 1");
    };
    Ok(Run {
        length: d.len(),
        outputs: stats.outputs,
        duplicates: stats.duplicates,
        preprocessing_ms: StageMillis {
            adjust: millis(t.adjust),
            decorate: millis(t.decorate),
            stable: millis(t.stable),
            skippable: millis(t.skippable),
            jump: millis(t.jump),
            total: millis(t.total()),
        },
        enumeration_ms: millis(enumeration),
        sizes: Sizes {
            adjusted_nonterminals: sizes.adjusted_nonterminals,
            adjusted_rules: sizes.adjusted_rules,
            decorated_nonterminals: sizes.decorated_nonterminals,
            decorated_rules: sizes.decorated_rules,
            jump_entries: sizes.jump_entries,
        },
        delay: Delay {
            max: stats.max(),
            mean: stats.mean(),
            p99: stats.percentile(99.0),
            max_depth: stats.max_depth,
            histogram: stats.histogram,
        },
    })
}

pub fn run(args: &BenchArgs) -> Result<()> {
    let g = load_grammar(&args.grammar)?;
    let mut docs = Vec::new();
    for path in &args.doc {
        docs.push(load_document(path)?);
    }
    docs.extend(args.text.iter().map(|t| Document::new(t)));
    ensure!(!docs.is_empty(), "give at least one --doc or --text");
    ensure!(args.repeats >= 1, "--repeats must be at least 1");

    let spanner = Spanner::new(&g)?;
    let check = !spanner.is_declared_unambiguous();
    if check {
        eprintln!("warning: grammar is not declared unambiguous; duplicates are suppressed and delays are not bounded");
    }
    let runs = docs
        .iter()
        .map(|d| measure(&spanner, d, args.repeats, check))
        .collect::<Result<Vec<_>>>()?;
    let delay_series: Vec<[u64; 2]> = runs.iter().map(|r| [r.length as u64, r.delay.max]).collect();
    let max_delay_constant = delay_series.windows(2).all(|w| w[0][1] == w[1][1]);
    let report = Report {
        declared_unambiguous: spanner.is_declared_unambiguous(),
        duplicate_check: check,
        variables: g.var_count(),
        repeats: args.repeats,
        runs,
        delay_series,
        max_delay_constant,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
