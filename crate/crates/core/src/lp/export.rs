//! Plain-text form of an [`LpModel`].
//!
//! ```text
//! TIDX-LP v1 horizon 2
//! min: +3/2 y_1_1_0 +5/2 y_1_1_1
//! cap_1_0: +1 y_1_1_0 <= 1
//! assign_1: +1 y_1_1_0 +1 y_1_1_1 = 1
//! nonneg y_1_1_0
//! nonneg y_1_1_1
//! end
//! ```
//!
//! After the header come the objective (`min:` or `max:`), one line per
//! constraint (`label: terms op rhs`), one bound line per variable in
//! declaration order, and `end`. A term is a signed rational followed by a
//! variable name. A model with no variables, constraints or objective terms
//! is written as the header alone.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::model::{Bound, Cmp, Constraint, LpModel, Sense, VarKey};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub const HEADER: &str = "TIDX-LP v1";

fn write_terms(out: &mut String, model: &LpModel, terms: &[(usize, Rational)]) {
    for (k, c) in terms {
        let _ = write!(out, " {} {}", rational::fmt_signed(c), model.vars[*k].key);
    }
}

pub fn export_lp(model: &LpModel) -> String {
    let mut out = format!("{HEADER} horizon {}\n", model.horizon);
    if model.is_empty() {
        return out;
    }
    out.push_str(match model.sense {
        Sense::Min => "min:",
        Sense::Max => "max:",
    });
    write_terms(&mut out, model, &model.objective);
    out.push('\n');
    for c in &model.constraints {
        out.push_str(&c.label);
        out.push(':');
        write_terms(&mut out, model, &c.terms);
        let _ = writeln!(out, " {} {}", c.cmp.symbol(), rational::fmt(&c.rhs));
    }
    for v in &model.vars {
        let b = match v.bound {
            Bound::NonNeg => "nonneg",
            Bound::Free => "free",
        };
        let _ = writeln!(out, "{b} {}", v.key);
    }
    out.push_str("end\n");
    out
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_terms(
    line: usize,
    tokens: &[&str],
    index: &HashMap<&str, usize>,
) -> Result<Vec<(usize, Rational)>> {
    if !tokens.len().is_multiple_of(2) {
        return Err(err(line, "dangling coefficient"));
    }
    tokens
        .chunks(2)
        .map(|pair| {
            let coef = pair[0]
                .strip_prefix('+')
                .or_else(|| pair[0].starts_with('-').then_some(pair[0]))
                .and_then(rational::parse)
                .ok_or_else(|| err(line, format!("bad coefficient {:?}", pair[0])))?;
            let k = *index
                .get(pair[1])
                .ok_or_else(|| err(line, format!("undeclared variable {:?}", pair[1])))?;
            Ok((k, coef))
        })
        .collect()
}

fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Inverse of [`export_lp`]; `export_lp(&parse_lp(t)?) == t` for every `t`
/// produced by [`export_lp`].
pub fn parse_lp(text: &str) -> Result<LpModel> {
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.first().ok_or_else(|| err(1, "missing header"))?;
    let horizon = header
        .strip_prefix(HEADER)
        .and_then(|rest| rest.strip_prefix(" horizon "))
        .and_then(|t| t.parse::<u64>().ok())
        .ok_or_else(|| err(1, "expected `TIDX-LP v1 horizon <T>`"))?;
    if lines.len() == 1 {
        return Ok(LpModel::new(Sense::Min, horizon));
    }
    let end = lines.len() - 1;
    if lines[end] != "end" {
        return Err(err(lines.len(), "missing `end`"));
    }
    let first_bound = (2..end)
        .find(|&n| lines[n].starts_with("nonneg ") || lines[n].starts_with("free "))
        .unwrap_or(end);
    let mut model = LpModel::new(Sense::Min, horizon);
    for (n, line) in lines.iter().enumerate().take(end).skip(first_bound) {
        let (kind, name) = line.split_once(' ').expect("bound line has a space");
        let bound = if kind == "nonneg" { Bound::NonNeg } else { Bound::Free };
        if !is_label(name) {
            return Err(err(n + 1, format!("bad variable name {name:?}")));
        }
        model.add_var(VarKey::parse(name), bound);
    }
    let names: Vec<String> = model.vars.iter().map(|v| v.key.to_string()).collect();
    let mut index = HashMap::with_capacity(names.len());
    for (k, name) in names.iter().enumerate() {
        if index.insert(name.as_str(), k).is_some() {
            return Err(err(first_bound + k + 1, format!("duplicate variable {name:?}")));
        }
    }
    let obj: Vec<&str> = lines[1].split(' ').collect();
    model.sense = match obj[0] {
        "min:" => Sense::Min,
        "max:" => Sense::Max,
        _ => return Err(err(2, "expected `min:` or `max:`")),
    };
    model.objective = parse_terms(2, &obj[1..], &index)?;
    for (n, line) in lines.iter().enumerate().take(first_bound).skip(2) {
        let tokens: Vec<&str> = line.split(' ').collect();
        let label = tokens[0]
            .strip_suffix(':')
            .filter(|l| is_label(l))
            .ok_or_else(|| err(n + 1, "expected `label:`"))?;
        if tokens.len() < 3 {
            return Err(err(n + 1, "truncated constraint"));
        }
        let (body, tail) = tokens[1..].split_at(tokens.len() - 3);
        let cmp = match tail[0] {
            "<=" => Cmp::Le,
            "=" => Cmp::Eq,
            ">=" => Cmp::Ge,
            other => return Err(err(n + 1, format!("bad comparison {other:?}"))),
        };
        let rhs = rational::parse(tail[1]).ok_or_else(|| err(n + 1, "bad right-hand side"))?;
        model.constraints.push(Constraint {
            label: label.to_string(),
            terms: parse_terms(n + 1, body, &index)?,
            cmp,
            rhs,
        });
    }
    Ok(model)
}
