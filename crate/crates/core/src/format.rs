//! `.crn` text format, state files and `name=value` lists.
//!
//! ```text
//! # comment
//! species: X1, X2, Y
//! inputs: X1, X2
//! output: Y
//! context: S=1, T=2/3
//! X1 + X2 -> Y
//! 2 A <-> B
//! Y + K -> 0
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{is_valid_species_name, Crc, Crn, ModelError, Reaction, SpeciesId, State};
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: reaction has no reactants")]
    EmptyReactants { line: usize },
    #[error("line {line}: species `{name}` declared twice")]
    DuplicateSpecies { line: usize, name: String },
    #[error("no `output:` header")]
    MissingOutput,
    #[error("{0}")]
    Model(#[from] ModelError),
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        col,
        message: message.into(),
    }
}

/// Everything a `.crn` file can carry.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrnDocument {
    pub crn: Crn,
    pub inputs: Vec<String>,
    pub output: Option<String>,
    pub context: Vec<(String, Rational)>,
}

impl CrnDocument {
    pub fn into_crc(self) -> Result<Crc, FormatError> {
        let output = self.output.ok_or(FormatError::MissingOutput)?;
        let crn = self.crn;
        let inputs = self
            .inputs
            .iter()
            .map(|n| crn.require(n))
            .collect::<Result<Vec<_>, _>>()?;
        let output = crn.require(&output)?;
        let mut context = BTreeMap::new();
        for (n, v) in &self.context {
            context.insert(crn.require(n)?, v.clone());
        }
        Ok(Crc::new(crn, inputs, output, context)?)
    }
}

/// Strips a trailing `#` comment and returns the remaining text.
fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn header(line: &str) -> Option<(&str, &str, usize)> {
    let trimmed = line.trim_start();
    let offset = line.len() - trimmed.len();
    let (key, rest) = trimmed.split_once(':')?;
    let key = key.trim();
    match key {
        "species" | "inputs" | "output" | "context" => {
            Some((key, rest, offset + trimmed.find(':').unwrap() + 1))
        }
        _ => None,
    }
}

pub fn parse_document(text: &str) -> Result<CrnDocument, FormatError> {
    let mut doc = CrnDocument::default();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        if let Some((key, rest, col0)) = header(line) {
            let items = split_list(rest, col0);
            match key {
                "species" => {
                    for (name, col) in items {
                        check_name(&name, line_no, col)?;
                        doc.crn.declare(&name).map_err(|e| match e {
                            ModelError::DuplicateSpecies(name) => FormatError::DuplicateSpecies {
                                line: line_no,
                                name,
                            },
                            other => other.into(),
                        })?;
                    }
                }
                "inputs" => {
                    for (name, col) in items {
                        check_name(&name, line_no, col)?;
                        doc.crn.try_intern(&name)?;
                        doc.inputs.push(name);
                    }
                }
                "output" => {
                    if items.len() != 1 {
                        return Err(syntax(line_no, col0 + 1, "expected exactly one output species"));
                    }
                    let (name, col) = items.into_iter().next().unwrap();
                    check_name(&name, line_no, col)?;
                    doc.crn.try_intern(&name)?;
                    doc.output = Some(name);
                }
                "context" => {
                    for (item, col) in items {
                        let (name, value) = item
                            .split_once('=')
                            .ok_or_else(|| syntax(line_no, col, "expected `species=value`"))?;
                        let name = name.trim();
                        check_name(name, line_no, col)?;
                        let value = parse_rational(value)
                            .map_err(|e| syntax(line_no, col, e.to_string()))?;
                        if value < Rational::from_integer(0.into()) {
                            return Err(syntax(line_no, col, "negative context concentration"));
                        }
                        doc.crn.try_intern(name)?;
                        doc.context.push((name.to_string(), value));
                    }
                }
                _ => unreachable!(),
            }
            continue;
        }
        parse_reaction_line(&mut doc.crn, line, line_no)?;
    }
    Ok(doc)
}

/// Parses reactions (headers allowed) into a bare CRN.
pub fn parse_crn(text: &str) -> Result<Crn, FormatError> {
    Ok(parse_document(text)?.crn)
}

/// Parses a `.crn` file that must carry an `output:` header.
pub fn parse_crc(text: &str) -> Result<Crc, FormatError> {
    parse_document(text)?.into_crc()
}

fn check_name(name: &str, line: usize, col: usize) -> Result<(), FormatError> {
    if is_valid_species_name(name) {
        Ok(())
    } else {
        Err(syntax(line, col, format!("invalid species name `{name}`")))
    }
}

/// Comma-separated items with their 1-based column.
fn split_list(text: &str, col0: usize) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for piece in text.split(',') {
        let lead = piece.len() - piece.trim_start().len();
        let item = piece.trim();
        if !item.is_empty() {
            out.push((item.to_string(), col0 + start + lead + 1));
        }
        start += piece.len() + 1;
    }
    out
}

fn parse_reaction_line(crn: &mut Crn, line: &str, line_no: usize) -> Result<(), FormatError> {
    let (lhs, rhs, reversible, arrow_at) = if let Some(i) = line.find("<->") {
        (&line[..i], &line[i + 3..], true, i)
    } else if let Some(i) = line.find("->") {
        (&line[..i], &line[i + 2..], false, i)
    } else {
        let col = line.len() - line.trim_start().len() + 1;
        return Err(syntax(line_no, col, "expected `->` or a header"));
    };
    let rhs_col = arrow_at + if reversible { 3 } else { 2 };
    let reactants = parse_side(crn, lhs, line_no, 0)?;
    let products = parse_side(crn, rhs, line_no, rhs_col)?;
    if reactants.is_empty() || (reversible && products.is_empty()) {
        return Err(FormatError::EmptyReactants { line: line_no });
    }
    crn.add_reaction(Reaction::new(reactants.clone(), products.clone()))?;
    if reversible {
        crn.add_reaction(Reaction::new(products, reactants))?;
    }
    Ok(())
}

fn parse_side(
    crn: &mut Crn,
    text: &str,
    line_no: usize,
    offset: usize,
) -> Result<Vec<(SpeciesId, u32)>, FormatError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || trimmed == "0" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut start = 0;
    for piece in text.split('+') {
        let lead = piece.len() - piece.trim_start().len();
        let col = offset + start + lead + 1;
        start += piece.len() + 1;
        let term = piece.trim();
        if term.is_empty() {
            return Err(syntax(line_no, col, "empty term"));
        }
        let digits = term.bytes().take_while(|b| b.is_ascii_digit()).count();
        let (coeff, name) = if digits == 0 {
            (1u32, term)
        } else {
            let k: u32 = term[..digits]
                .parse()
                .map_err(|_| syntax(line_no, col, "stoichiometry out of range"))?;
            (k, term[digits..].trim_start())
        };
        if coeff == 0 {
            return Err(syntax(line_no, col, "zero stoichiometry"));
        }
        if name.is_empty() {
            return Err(syntax(line_no, col, "missing species name"));
        }
        check_name(name, line_no, col + digits)?;
        out.push((crn.try_intern(name)?, coeff));
    }
    Ok(out)
}

/// Species header followed by one line per reaction.
pub fn serialize_crn(crn: &Crn) -> String {
    let mut out = String::new();
    if crn.num_species() > 0 {
        let _ = writeln!(out, "species: {}", crn.species().join(", "));
    }
    for j in 0..crn.num_reactions() {
        let _ = writeln!(out, "{}", crn.reaction_string(j));
    }
    out
}

pub fn serialize_crc(crc: &Crc) -> String {
    let crn = &crc.crn;
    let mut out = String::new();
    if crn.num_species() > 0 {
        let _ = writeln!(out, "species: {}", crn.species().join(", "));
    }
    if !crc.inputs.is_empty() {
        let _ = writeln!(out, "inputs: {}", crc.input_names().join(", "));
    }
    let _ = writeln!(out, "output: {}", crc.output_name());
    if !crc.context.is_empty() {
        let items: Vec<String> = crc
            .context
            .iter()
            .map(|(s, v)| format!("{}={}", crn.name(*s), v))
            .collect();
        let _ = writeln!(out, "context: {}", items.join(", "));
    }
    for j in 0..crn.num_reactions() {
        let _ = writeln!(out, "{}", crn.reaction_string(j));
    }
    out
}

/// Parses `A=1, B=2/3` lists or state files with one `A = 1` per line.
pub fn parse_assignments(text: &str) -> Result<Vec<(String, Rational)>, FormatError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        for (item, col) in split_list(line, 0) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| syntax(ln + 1, col, "expected `species=value`"))?;
            let name = name.trim();
            check_name(name, ln + 1, col)?;
            let value = parse_rational(value).map_err(|e| syntax(ln + 1, col, e.to_string()))?;
            out.push((name.to_string(), value));
        }
    }
    Ok(out)
}

/// State over `crn` from assignments; unknown species are an error.
pub fn state_from_assignments(
    crn: &Crn,
    values: &[(String, Rational)],
) -> Result<State, FormatError> {
    let named: Vec<(&str, Rational)> = values.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
    Ok(State::from_named(crn, &named)?)
}

/// One `species = value` line per nonzero species.
pub fn serialize_state(crn: &Crn, s: &State) -> String {
    let mut out = String::new();
    for (i, v) in s.values().iter().enumerate() {
        if *v != Rational::from_integer(0.into()) {
            let _ = writeln!(out, "{} = {}", crn.name(i), v);
        }
    }
    out
}
