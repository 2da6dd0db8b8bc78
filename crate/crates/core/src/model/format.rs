//! Text format for model files.
//!
//! ```text
//! states: 3
//! outputs: 1
//! subnetworks: 4
//! p: 0.27 0.03 0.63 0.07
//! [net 1]
//! x1' = !x2
//! x2' = !x1 & !x3
//! x3' = x2
//! [net 2]
//! L = delta8[5 5 4 4 5 5 4 4]
//! ...
//! [output]
//! y1 = (x2 & !x3) | ((x1 <-> x3) & !x2)
//! ```
//!
//! `#` starts a comment. A `[net k]` block holds either one rule per node or a
//! single `L = delta...` literal; `[output]` holds one rule per output or an
//! `H = delta...` literal.

use std::fmt::Write as _;

use super::expr::{parse_expr_at, BoolExpr};
use super::{assemble_network, structure_matrix, PbnModel};
use crate::error::{Error, Result};
use crate::stp::LogicalMatrix;

#[derive(Default)]
struct Block {
    header_line: usize,
    rules: Vec<(usize, usize, BoolExpr)>, // (target index, line, expr)
    literal: Option<(usize, usize, Vec<usize>)>, // (line, declared rows, 1-based indices)
}

enum Section {
    Header,
    Net(usize),
    Output,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_count(value: &str, line: usize, col: usize, key: &str) -> Result<usize> {
    value
        .trim()
        .parse()
        .map_err(|_| syntax(line, col, format!("'{key}' expects a non-negative integer")))
}

/// Parses `deltaN[i j k ...]` into (N, 1-based indices).
fn parse_delta(src: &str, line: usize, col: usize) -> Result<(usize, Vec<usize>)> {
    let s = src.trim();
    let rest = s
        .strip_prefix("delta")
        .ok_or_else(|| syntax(line, col, "expected deltaN[...] literal"))?;
    let open = rest
        .find('[')
        .ok_or_else(|| syntax(line, col, "expected '[' in delta literal"))?;
    let rows: usize = rest[..open]
        .trim()
        .parse()
        .map_err(|_| syntax(line, col, "expected row count after 'delta'"))?;
    let body = rest[open + 1..]
        .strip_suffix(']')
        .ok_or_else(|| syntax(line, col + s.len(), "expected ']' at end of delta literal"))?;
    let idx = body
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| syntax(line, col, format!("bad index '{t}' in delta literal")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, idx))
}

/// Parses `x3'` / `x3` / `y2` style targets; returns the 0-based index.
fn parse_target(lhs: &str, prefix: char, primed: bool) -> Option<usize> {
    let mut s = lhs.trim();
    if primed {
        s = s.strip_suffix('\'').unwrap_or(s).trim_end();
    }
    let digits = s.strip_prefix(prefix)?;
    let i: usize = digits.parse().ok()?;
    i.checked_sub(1)
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<PbnModel> {
    let mut n = None;
    let mut q = None;
    let mut m = None;
    let mut probs: Option<Vec<f64>> = None;
    let mut nets: Vec<(usize, Block)> = Vec::new();
    let mut output: Option<Block> = None;
    let mut section = Section::Header;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let col = indent + 1;

        if let Some(inner) = trimmed.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, col, "unterminated section header"))?
                .trim();
            if inner == "output" {
                if output.is_some() {
                    return Err(syntax(line, col, "duplicate [output] section"));
                }
                output = Some(Block {
                    header_line: line,
                    ..Block::default()
                });
                section = Section::Output;
            } else if let Some(k) = inner.strip_prefix("net") {
                let k: usize = k
                    .trim()
                    .parse()
                    .map_err(|_| syntax(line, col, "expected [net k] with a positive integer k"))?;
                if k == 0 {
                    return Err(syntax(line, col, "subnetworks are numbered from 1"));
                }
                if nets.iter().any(|(j, _)| *j == k) {
                    return Err(syntax(line, col, format!("duplicate [net {k}] section")));
                }
                nets.push((
                    k,
                    Block {
                        header_line: line,
                        ..Block::default()
                    },
                ));
                section = Section::Net(nets.len() - 1);
            } else {
                return Err(syntax(line, col, format!("unknown section [{inner}]")));
            }
            continue;
        }

        match section {
            Section::Header => {
                let (key, value) = trimmed
                    .split_once(':')
                    .ok_or_else(|| syntax(line, col, "expected 'key: value'"))?;
                let vcol = col + key.len() + 1;
                match key.trim() {
                    "states" => n = Some(parse_count(value, line, vcol, "states")?),
                    "outputs" => q = Some(parse_count(value, line, vcol, "outputs")?),
                    "subnetworks" => m = Some(parse_count(value, line, vcol, "subnetworks")?),
                    "p" => {
                        let ps = value
                            .split_whitespace()
                            .map(|t| {
                                t.parse::<f64>().map_err(|_| {
                                    syntax(line, vcol, format!("bad probability '{t}'"))
                                })
                            })
                            .collect::<Result<Vec<_>>>()?;
                        probs = Some(ps);
                    }
                    other => return Err(syntax(line, col, format!("unknown key '{other}'"))),
                }
            }
            Section::Net(_) | Section::Output => {
                let is_output = matches!(section, Section::Output);
                let block = match section {
                    Section::Net(i) => &mut nets[i].1,
                    _ => output.as_mut().expect("output section open"),
                };
                let (lhs, rhs) = trimmed
                    .split_once('=')
                    .filter(|(l, _)| !l.ends_with('<') && !l.ends_with('-'))
                    .ok_or_else(|| syntax(line, col, "expected 'target = expression'"))?;
                let rhs_col = col + lhs.len() + 1 + (rhs.len() - rhs.trim_start().len());
                let lhs_t = lhs.trim();
                let literal_name = if is_output { "H" } else { "L" };
                if lhs_t == literal_name {
                    if block.literal.is_some() {
                        return Err(syntax(
                            line,
                            col,
                            format!("duplicate {literal_name} literal"),
                        ));
                    }
                    let (rows, idx) = parse_delta(rhs, line, rhs_col)?;
                    block.literal = Some((line, rows, idx));
                    continue;
                }
                let target = if is_output {
                    parse_target(lhs_t, 'y', false)
                } else {
                    parse_target(lhs_t, 'x', true)
                }
                .ok_or_else(|| {
                    let want = if is_output { "yJ or H" } else { "xI' or L" };
                    syntax(line, col, format!("expected {want} on the left of '='"))
                })?;
                let expr = parse_expr_at(rhs.trim(), line, rhs_col)?;
                block.rules.push((target, line, expr));
            }
        }
    }

    let n = n.ok_or_else(|| Error::Validation("missing 'states:' header".into()))?;
    let m = m.ok_or_else(|| Error::Validation("missing 'subnetworks:' header".into()))?;
    let q = q.ok_or_else(|| Error::Validation("missing 'outputs:' header".into()))?;
    let probs = probs.ok_or_else(|| Error::Validation("missing 'p:' header".into()))?;
    if n == 0 || n > super::MAX_NODES {
        return Err(Error::Validation(format!(
            "states must be in 1..={}, got {n}",
            super::MAX_NODES
        )));
    }
    if q > super::MAX_NODES {
        return Err(Error::Validation(format!(
            "outputs must be at most {}",
            super::MAX_NODES
        )));
    }
    if probs.len() != m {
        return Err(Error::Validation(format!(
            "subnetworks: {m} but p lists {} values",
            probs.len()
        )));
    }
    if nets.len() != m {
        return Err(Error::Validation(format!(
            "subnetworks: {m} but {} [net k] sections were given",
            nets.len()
        )));
    }
    nets.sort_by_key(|(k, _)| *k);
    let mut networks = Vec::with_capacity(m);
    for (k, block) in &nets {
        if *k > m {
            return Err(Error::Validation(format!(
                "[net {k}] exceeds subnetworks: {m}"
            )));
        }
        networks.push(build_block(
            block,
            n,
            n,
            1usize << n,
            &format!("[net {k}]"),
        )?);
    }
    let output = match output {
        Some(block) => build_block(&block, n, q, 1usize << q, "[output]")?,
        None if q == 0 => LogicalMatrix::new(1, vec![0; 1usize << n])?,
        None => return Err(Error::Validation("missing [output] section".into())),
    };
    PbnModel::new(n, q, networks, output, probs)
}

fn build_block(
    block: &Block,
    n: usize,
    targets: usize,
    rows: usize,
    name: &str,
) -> Result<LogicalMatrix> {
    match (&block.literal, block.rules.is_empty()) {
        (Some(_), false) => Err(Error::Validation(format!(
            "{name} (line {}) mixes rules with a matrix literal",
            block.header_line
        ))),
        (Some((line, declared, idx)), true) => {
            if *declared != rows {
                return Err(Error::Validation(format!(
                    "line {line}: {name} literal has {declared} rows, expected {rows}"
                )));
            }
            if idx.len() != 1usize << n {
                return Err(Error::Validation(format!(
                    "line {line}: {name} literal has {} columns, expected {}",
                    idx.len(),
                    1usize << n
                )));
            }
            LogicalMatrix::from_delta(rows, idx)
                .map_err(|e| Error::Validation(format!("line {line}: {name} literal: {e}")))
        }
        (None, _) => {
            let mut slots: Vec<Option<&BoolExpr>> = vec![None; targets];
            for (t, line, expr) in &block.rules {
                if *t >= targets {
                    return Err(Error::Validation(format!(
                        "line {line}: {name} assigns target {} but only {targets} exist",
                        t + 1
                    )));
                }
                if slots[*t].is_some() {
                    return Err(Error::Validation(format!(
                        "line {line}: {name} assigns target {} twice",
                        t + 1
                    )));
                }
                if let Some(v) = expr.max_var() {
                    if v >= n {
                        return Err(Error::Validation(format!(
                            "line {line}: variable x{} out of range (states: {n})",
                            v + 1
                        )));
                    }
                }
                slots[*t] = Some(expr);
            }
            if let Some(missing) = slots.iter().position(Option::is_none) {
                return Err(Error::Validation(format!(
                    "{name} (line {}) has no rule for target {}",
                    block.header_line,
                    missing + 1
                )));
            }
            if targets == 0 {
                return LogicalMatrix::new(1, vec![0; 1usize << n]);
            }
            let per = slots
                .iter()
                .map(|e| structure_matrix(e.expect("checked above"), n))
                .collect::<Result<Vec<_>>>()?;
            assemble_network(&per)
        }
    }
}

/// Canonical rendering in matrix-literal form; [`parse_model`] reads it back
/// to an equal model.
pub fn render_model(model: &PbnModel) -> String {
    let mut s = String::new();
    writeln!(s, "states: {}", model.n()).unwrap();
    writeln!(s, "outputs: {}", model.q()).unwrap();
    writeln!(s, "subnetworks: {}", model.m()).unwrap();
    let ps: Vec<String> = model.probs().iter().map(|p| p.to_string()).collect();
    writeln!(s, "p: {}", ps.join(" ")).unwrap();
    for (v, l) in model.networks().iter().enumerate() {
        writeln!(s, "[net {}]", v + 1).unwrap();
        writeln!(s, "L = {l}").unwrap();
    }
    writeln!(s, "[output]").unwrap();
    writeln!(s, "H = {}", model.output()).unwrap();
    s
}
