//! Text format for extraction grammars.
//!
//! ```text
//! # comment
//! vars: x, y
//! start: S
//! unambiguous: true
//! S -> B {x 'a' A 'b' y} B
//! A -> 'a' A 'b' | x} {y
//! B -> 'a' B | 'b' B | eps
//! ```
//!
//! Terminals are single characters in single quotes (escapes `\'`, `\\`,
//! `\n`, `\t`, `\r`, `\u{..}`). `{x` opens variable `x`, `x}` closes it.
//! Non-terminals start with an uppercase letter. `eps` is the empty body.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grammar::{
    is_nonterminal_name, is_variable_name, ExtractionGrammar, OpKind, Production, Symbol, VarOp, Variable,
};

#[derive(Debug)]
enum Item {
    Sym(Symbol),
    Eps,
    Bar,
}

struct Scanner {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Scanner {
    fn err<T>(&self, column: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            column: column + 1,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '%') {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn quoted(&mut self) -> Result<char> {
        let start = self.pos;
        self.pos += 1;
        let c = match self.peek() {
            None => return self.err(start, "unterminated terminal"),
            Some('\\') => {
                self.pos += 1;
                match self.peek() {
                    Some('\\') => '\\',
                    Some('\'') => '\'',
                    Some('n') => '\n',
                    Some('t') => '\t',
                    Some('r') => '\r',
                    Some('u') => {
                        self.pos += 1;
                        if self.peek() != Some('{') {
                            return self.err(self.pos, "expected '{' after \\u");
                        }
                        self.pos += 1;
                        let hex_start = self.pos;
                        while matches!(self.peek(), Some(c) if c.is_ascii_hexdigit()) {
                            self.pos += 1;
                        }
                        let hex: String = self.chars[hex_start..self.pos].iter().collect();
                        if self.peek() != Some('}') {
                            return self.err(self.pos, "expected '}' closing \\u escape");
                        }
                        match u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                            Some(c) => c,
                            None => return self.err(hex_start, format!("invalid code point {hex:?}")),
                        }
                    }
                    Some(other) => return self.err(self.pos, format!("unknown escape \\{other}")),
                    None => return self.err(self.pos, "unterminated terminal"),
                }
            }
            Some('\'') => return self.err(start, "empty terminal"),
            Some(c) => c,
        };
        self.pos += 1;
        if self.peek() != Some('\'') {
            return self.err(start, "terminal must be a single quoted character");
        }
        self.pos += 1;
        Ok(c)
    }
}

/// Strips a `#` comment, ignoring `#` inside quoted terminals.
fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    let mut escaped = false;
    for (idx, c) in line.char_indices() {
        if in_quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '\'' {
                in_quote = false;
            }
        } else if c == '\'' {
            in_quote = true;
        } else if c == '#' {
            return &line[..idx];
        }
    }
    line
}

struct Pending {
    production: Production,
    line: usize,
}

/// Parses the grammar text format.
pub fn parse_grammar(text: &str) -> Result<ExtractionGrammar> {
    let mut vars: Option<Vec<Variable>> = None;
    let mut start: Option<String> = None;
    let mut unambiguous = false;
    let mut pending: Vec<Pending> = Vec::new();
    let mut op_positions: Vec<(String, usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let syntax = |column: usize, message: &str| Error::Syntax {
            line: line_no,
            column,
            message: message.to_string(),
        };
        let indent = line.chars().take_while(|c| c.is_whitespace()).count();
        let trimmed = line.trim();

        if let Some((key, value)) = header(trimmed) {
            match key {
                "vars" => {
                    if vars.is_some() {
                        return Err(syntax(indent + 1, "vars declared twice"));
                    }
                    let mut list = Vec::new();
                    for name in value.split(',').map(str::trim) {
                        if name.is_empty() {
                            if value.trim().is_empty() {
                                break;
                            }
                            return Err(syntax(indent + 1, "empty variable name"));
                        }
                        if !is_variable_name(name) {
                            return Err(syntax(indent + 1, &format!("invalid variable name {name:?}")));
                        }
                        let var = Variable::new(name)?;
                        if list.contains(&var) {
                            return Err(Error::DuplicateVariable(name.to_string()));
                        }
                        list.push(var);
                    }
                    vars = Some(list);
                }
                "start" => {
                    if start.is_some() {
                        return Err(syntax(indent + 1, "start declared twice"));
                    }
                    let name = value.trim();
                    if !is_nonterminal_name(name) {
                        return Err(syntax(indent + 1, &format!("invalid start symbol {name:?}")));
                    }
                    start = Some(name.to_string());
                }
                "unambiguous" => {
                    unambiguous = match value.trim() {
                        "true" => true,
                        "false" => false,
                        _ => return Err(syntax(indent + 1, "expected true or false")),
                    };
                }
                _ => unreachable!(),
            }
            continue;
        }

        let Some(arrow) = line.find("->") else {
            return Err(syntax(indent + 1, "expected a header or a rule 'A -> ...'"));
        };
        let lhs = line[..arrow].trim();
        if !is_nonterminal_name(lhs) {
            return Err(syntax(indent + 1, &format!("invalid left-hand side {lhs:?}")));
        }
        let body_offset = line[..arrow].chars().count() + 2;
        let mut scanner = Scanner {
            chars: line.chars().collect(),
            pos: body_offset,
            line: line_no,
        };
        let mut items: Vec<(Item, usize)> = Vec::new();
        loop {
            scanner.skip_ws();
            let col = scanner.pos;
            let Some(c) = scanner.peek() else { break };
            let item = match c {
                '|' => {
                    scanner.pos += 1;
                    Item::Bar
                }
                '\'' => Item::Sym(Symbol::Terminal(scanner.quoted()?)),
                '{' => {
                    scanner.pos += 1;
                    let name = scanner.ident();
                    if !is_variable_name(&name) {
                        return scanner.err(col, format!("expected variable name after '{{', found {name:?}"));
                    }
                    op_positions.push((name.clone(), line_no, col + 1));
                    Item::Sym(Symbol::Op(VarOp {
                        var: Variable::new(&name)?,
                        kind: OpKind::Open,
                    }))
                }
                c if c.is_ascii_uppercase() => Item::Sym(Symbol::NonTerminal(scanner.ident())),
                c if c.is_ascii_lowercase() => {
                    let name = scanner.ident();
                    if scanner.peek() == Some('}') {
                        scanner.pos += 1;
                        if !is_variable_name(&name) {
                            return scanner.err(col, format!("invalid variable name {name:?}"));
                        }
                        op_positions.push((name.clone(), line_no, col + 1));
                        Item::Sym(Symbol::Op(VarOp {
                            var: Variable::new(&name)?,
                            kind: OpKind::Close,
                        }))
                    } else if name == "eps" {
                        Item::Eps
                    } else {
                        return scanner.err(
                            col,
                            format!("unexpected identifier {name:?} (terminals must be quoted)"),
                        );
                    }
                }
                other => return scanner.err(col, format!("unexpected character {other:?}")),
            };
            items.push((item, col));
        }

        let mut alternatives: Vec<Vec<(Item, usize)>> = vec![Vec::new()];
        for (item, col) in items {
            if let Item::Bar = item {
                alternatives.push(Vec::new());
            } else {
                alternatives.last_mut().unwrap().push((item, col));
            }
        }
        for alt in alternatives {
            let has_eps = alt.iter().any(|(i, _)| matches!(i, Item::Eps));
            if alt.is_empty() {
                return Err(syntax(body_offset + 1, "empty alternative (write eps)"));
            }
            if has_eps && alt.len() > 1 {
                let col = alt.iter().find(|(i, _)| matches!(i, Item::Eps)).unwrap().1;
                return Err(syntax(col + 1, "eps must stand alone in an alternative"));
            }
            let rhs = alt
                .into_iter()
                .filter_map(|(item, _)| match item {
                    Item::Sym(s) => Some(s),
                    _ => None,
                })
                .collect();
            pending.push(Pending {
                production: Production::new(lhs, rhs),
                line: line_no,
            });
        }
    }

    let vars = vars.unwrap_or_default();
    let Some(start) = start else {
        return Err(Error::Syntax {
            line: text.lines().count().max(1),
            column: 1,
            message: "missing 'start:' declaration".into(),
        });
    };
    for (name, line, column) in &op_positions {
        if !vars.iter().any(|v| v.name() == name) {
            return Err(Error::UndeclaredVariable {
                name: name.clone(),
                line: *line,
                column: *column,
            });
        }
    }
    let declared: std::collections::HashSet<&str> = pending
        .iter()
        .map(|p| p.production.lhs.as_str())
        .chain(std::iter::once(start.as_str()))
        .collect();
    for p in &pending {
        for sym in &p.production.rhs {
            if let Symbol::NonTerminal(name) = sym {
                if !declared.contains(name.as_str()) {
                    return Err(Error::Syntax {
                        line: p.line,
                        column: 1,
                        message: format!("undeclared non-terminal {name}"),
                    });
                }
            }
        }
    }
    ExtractionGrammar::new(
        vars,
        &start,
        pending.into_iter().map(|p| p.production).collect(),
        unambiguous,
    )
}

fn header(line: &str) -> Option<(&str, &str)> {
    for key in ["vars", "start", "unambiguous"] {
        if let Some(rest) = line.strip_prefix(key) {
            if let Some(value) = rest.trim_start().strip_prefix(':') {
                return Some((key, value));
            }
        }
    }
    None
}

fn write_terminal(out: &mut String, c: char) {
    out.push('\'');
    match c {
        '\'' => out.push_str("\\'"),
        '\\' => out.push_str("\\\\"),
        '\n' => out.push_str("\\n"),
        '\t' => out.push_str("\\t"),
        '\r' => out.push_str("\\r"),
        c if c.is_control() => {
            let _ = write!(out, "\\u{{{:x}}}", c as u32);
        }
        c => out.push(c),
    }
    out.push('\'');
}

fn write_body(out: &mut String, rhs: &[Symbol]) {
    if rhs.is_empty() {
        out.push_str("eps");
        return;
    }
    for (idx, sym) in rhs.iter().enumerate() {
        if idx > 0 {
            out.push(' ');
        }
        match sym {
            Symbol::Terminal(c) => write_terminal(out, *c),
            Symbol::Op(op) => match op.kind {
                OpKind::Open => {
                    let _ = write!(out, "{{{}", op.var);
                }
                OpKind::Close => {
                    let _ = write!(out, "{}}}", op.var);
                }
            },
            Symbol::NonTerminal(name) => out.push_str(name),
        }
    }
}

/// Serializes a grammar in the text format. Consecutive productions with the
/// same left-hand side share a line, so `parse(serialize(g))` reproduces the
/// production list exactly.
pub fn serialize_grammar(g: &ExtractionGrammar) -> String {
    let mut out = String::new();
    let names: Vec<&str> = g.vars().iter().map(Variable::name).collect();
    let _ = writeln!(out, "vars: {}", names.join(", "));
    let _ = writeln!(out, "start: {}", g.start());
    if g.is_declared_unambiguous() {
        out.push_str("unambiguous: true\n");
    }
    let prods = g.productions();
    let mut idx = 0;
    while idx < prods.len() {
        let lhs = &prods[idx].lhs;
        let _ = write!(out, "{lhs} -> ");
        write_body(&mut out, &prods[idx].rhs);
        idx += 1;
        while idx < prods.len() && &prods[idx].lhs == lhs {
            out.push_str(" | ");
            write_body(&mut out, &prods[idx].rhs);
            idx += 1;
        }
        out.push('\n');
    }
    out
}

/// Counts how often each right-hand side occurs per left-hand side; used to
/// compare grammars up to production order.
pub fn production_multiset(g: &ExtractionGrammar) -> HashMap<&Production, usize> {
    let mut counts = HashMap::new();
    for p in g.productions() {
        *counts.entry(p).or_insert(0) += 1;
    }
    counts
}
