//! Compiles function specs into output-oblivious, feedforward CRCs.
//!
//! The network evaluates `min_S [g_S(x) + Σ_{K ⊄ S} P_K(x) g_K(x)]`:
//! inputs are copied so no two modules compete for them, each piece `g_S`
//! is computed into `Y_S`, predicate species `P_K` become positive exactly
//! when every input in `K` is, and an accumulator `H_S` collects `Y_S`
//! plus each `Y_K` whose predicate fires. The output is the min over the
//! accumulators.

mod bimolecular;
mod context;
mod network;

pub use bimolecular::decompose_bimolecular;
pub use context::{compile_with_context, realize_unit_context};
pub use network::{compile_spec, compile_spec_with, contract_renames, prune_dead};

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::model::{Crn, ModelError};
use crate::rational::Rational;
use crate::spec::{LinearFn, SpecError};

/// Largest input count the compiler accepts.
pub const MAX_COMPILE_INPUTS: usize = 8;
/// Above this many inputs the subset enumeration gets large; a warning is
/// logged and recorded in the report.
pub const WARN_COMPILE_INPUTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("spec failed validation: {0}")]
    ValidationFailed(String),
    #[error("{0} inputs exceed the compiler limit of {MAX_COMPILE_INPUTS}")]
    TooManyInputs(usize),
    #[error("negative coefficient {value} on input {input}")]
    NegativeCoefficient { input: usize, value: Rational },
    #[error("coefficient {0} does not fit the stoichiometry range")]
    CoefficientTooLarge(Rational),
    #[error("dimension mismatch: {expected} inputs named, {found} coefficients")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("min over an empty list of inputs")]
    EmptyMin,
    #[error("predicate over the empty set")]
    EmptyPredicate,
    #[error("copy into an empty list of species")]
    EmptyCopy,
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A reaction by species names: `(reactants, products)`.
pub type NamedReaction = (Vec<(String, u32)>, Vec<(String, u32)>);

fn crn_of(reactions: &[NamedReaction]) -> Result<Crn, CompileError> {
    let mut crn = Crn::new();
    for (r, p) in reactions {
        let r: Vec<(&str, u32)> = r.iter().map(|(s, k)| (s.as_str(), *k)).collect();
        let p: Vec<(&str, u32)> = p.iter().map(|(s, k)| (s.as_str(), *k)).collect();
        crn.add_named(&r, &p)?;
    }
    Ok(crn)
}

fn one(name: &str) -> (String, u32) {
    (name.to_string(), 1)
}

fn small(v: &num_bigint::BigInt, whole: &Rational) -> Result<u32, CompileError> {
    v.to_u32()
        .ok_or_else(|| CompileError::CoefficientTooLarge(whole.clone()))
}

pub(crate) fn linear_reactions(
    g: &LinearFn,
    inputs: &[String],
    out: &str,
) -> Result<Vec<NamedReaction>, CompileError> {
    if g.coeffs.len() != inputs.len() {
        return Err(CompileError::DimensionMismatch {
            expected: inputs.len(),
            found: g.coeffs.len(),
        });
    }
    let mut out_reactions = Vec::new();
    for (i, a) in g.coeffs.iter().enumerate() {
        if a.is_negative() {
            return Err(CompileError::NegativeCoefficient {
                input: i + 1,
                value: a.clone(),
            });
        }
        if a.is_zero() {
            continue;
        }
        // Lowest terms: p/q, fired as q X -> p out.
        let p = small(a.numer(), a)?;
        let q = small(a.denom(), a)?;
        debug_assert_eq!(a.numer().gcd(a.denom()), 1.into());
        out_reactions.push((vec![(inputs[i].clone(), q)], vec![(out.to_string(), p)]));
    }
    Ok(out_reactions)
}

/// `q_i X_i -> p_i out` for every coefficient `a_i = p_i/q_i > 0`.
pub fn compile_linear(g: &LinearFn, inputs: &[&str], out: &str) -> Result<Crn, CompileError> {
    let names: Vec<String> = inputs.iter().map(|s| s.to_string()).collect();
    crn_of(&linear_reactions(g, &names, out)?)
}

pub(crate) fn min_reaction(inputs: &[String], out: &str) -> Result<NamedReaction, CompileError> {
    if inputs.is_empty() {
        return Err(CompileError::EmptyMin);
    }
    Ok((inputs.iter().map(|s| one(s)).collect(), vec![one(out)]))
}

/// `Y1 + ... + Yk -> out`.
pub fn compile_min(inputs: &[&str], out: &str) -> Result<Crn, CompileError> {
    let names: Vec<String> = inputs.iter().map(|s| s.to_string()).collect();
    crn_of(&[min_reaction(&names, out)?])
}

/// `Σ_{i ∈ K} X_i -> P_K`; `members` are the species of `K`.
pub fn compile_predicate(members: &[&str], out: &str) -> Result<Crn, CompileError> {
    if members.is_empty() {
        return Err(CompileError::EmptyPredicate);
    }
    let names: Vec<String> = members.iter().map(|s| s.to_string()).collect();
    crn_of(&[min_reaction(&names, out)?])
}

pub(crate) fn gate_reaction(src: &str, gate: &str, out: &str) -> NamedReaction {
    (vec![one(src), one(gate)], vec![one(out), one(gate)])
}

/// `src + gate -> out + gate`.
pub fn compile_gate(src: &str, gate: &str, out: &str) -> Result<Crn, CompileError> {
    crn_of(&[gate_reaction(src, gate, out)])
}

pub(crate) fn copy_reaction(src: &str, outs: &[String]) -> Result<NamedReaction, CompileError> {
    if outs.is_empty() {
        return Err(CompileError::EmptyCopy);
    }
    Ok((vec![one(src)], outs.iter().map(|s| one(s)).collect()))
}

/// `src -> out_1 + ... + out_k`.
pub fn compile_copy(src: &str, outs: &[&str]) -> Result<Crn, CompileError> {
    let names: Vec<String> = outs.iter().map(|s| s.to_string()).collect();
    crn_of(&[copy_reaction(src, &names)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Copy,
    Predicate,
    Linear,
    Gate,
    Sum,
    Min,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Copy,
        Stage::Predicate,
        Stage::Linear,
        Stage::Gate,
        Stage::Sum,
        Stage::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Copy => "copy",
            Stage::Predicate => "predicate",
            Stage::Linear => "linear",
            Stage::Gate => "gate",
            Stage::Sum => "sum",
            Stage::Min => "min",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StageCount {
    pub species: usize,
    pub reactions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompileOptions {
    /// Compact construction plus removal of dead species and reactions.
    pub prune: bool,
    /// Merge `A -> B` renamings where that is `A`'s only use.
    pub contract: bool,
    /// Split every reaction into ones with at most two reactant and two
    /// product molecules.
    pub bimolecular: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileReport {
    pub inputs: usize,
    pub stages: BTreeMap<Stage, StageCount>,
    /// Logical role (`Y_{3}`, `P_{1,2}`, `H_{}`, `X1@P_{1}`) to species.
    pub roles: BTreeMap<String, String>,
    pub species: usize,
    pub reactions: usize,
    pub input_species: usize,
    pub canonicalized_coefficients: usize,
    pub warnings: Vec<String>,
}

impl CompileReport {
    pub fn to_json(&self) -> Value {
        let stages: serde_json::Map<String, Value> = self
            .stages
            .iter()
            .map(|(s, c)| {
                (
                    s.name().to_string(),
                    json!({"species": c.species, "reactions": c.reactions}),
                )
            })
            .collect();
        json!({
            "schema": 1,
            "inputs": self.inputs,
            "species": self.species,
            "reactions": self.reactions,
            "input_species": self.input_species,
            "stages": stages,
            "roles": self.roles,
            "canonicalized_coefficients": self.canonicalized_coefficients,
            "warnings": self.warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::serialize_crn;
    use crate::rational::{int, rat};

    fn lines(crn: &Crn) -> Vec<String> {
        (0..crn.num_reactions()).map(|j| crn.reaction_string(j)).collect()
    }

    #[test]
    fn linear_terms() {
        let g = LinearFn::new(vec![rat(1, 2), rat(3, 2)]);
        assert_eq!(lines(&compile_linear(&g, &["X1", "X2"], "Y").unwrap()), ["2 X1 -> Y", "2 X2 -> 3 Y"]);
        let g = LinearFn::new(vec![int(1)]);
        assert_eq!(lines(&compile_linear(&g, &["X1"], "Y").unwrap()), ["X1 -> Y"]);
        let g = LinearFn::new(vec![int(0), int(2)]);
        assert_eq!(lines(&compile_linear(&g, &["X1", "X2"], "Y").unwrap()), ["X2 -> 2 Y"]);
        let g = LinearFn::new(vec![int(-1)]);
        assert!(matches!(compile_linear(&g, &["X1"], "Y"), Err(CompileError::NegativeCoefficient { .. })));
    }

    #[test]
    fn min_predicate_gate_copy() {
        assert_eq!(lines(&compile_min(&["Y1", "Y2"], "Y").unwrap()), ["Y1 + Y2 -> Y"]);
        assert_eq!(lines(&compile_min(&["Y1"], "Y").unwrap()), ["Y1 -> Y"]);
        assert_eq!(lines(&compile_min(&["Y1", "Y2", "Y3"], "Y").unwrap()), ["Y1 + Y2 + Y3 -> Y"]);
        assert_eq!(compile_min(&[], "Y"), Err(CompileError::EmptyMin));
        assert_eq!(lines(&compile_predicate(&["X3"], "P4").unwrap()), ["X3 -> P4"]);
        assert_eq!(lines(&compile_predicate(&["X1", "X2"], "P3").unwrap()), ["X1 + X2 -> P3"]);
        assert_eq!(compile_predicate(&[], "P0"), Err(CompileError::EmptyPredicate));
        let g = compile_gate("Y_S4_c2", "P4", "H0").unwrap();
        assert_eq!(serialize_crn(&g).lines().last().unwrap(), "Y_S4_c2 + P4 -> P4 + H0");
        assert_eq!(lines(&compile_copy("X1", &["X1a", "X1b"]).unwrap()), ["X1 -> X1a + X1b"]);
        assert_eq!(lines(&compile_copy("X1", &["X1a"]).unwrap()), ["X1 -> X1a"]);
        let five = compile_copy("X1", &["A", "B", "C", "D", "E"]).unwrap();
        assert_eq!(five.reactions()[0].product_count(), 5);
        assert_eq!(compile_copy("X1", &[]), Err(CompileError::EmptyCopy));
    }
}
