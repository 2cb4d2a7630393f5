//! Wiring CRCs together: composition, fan-out, output-obliviousness and
//! removal of output-consuming reactions.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{Crc, ModelError, Reaction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error("downstream has no input #{index} (it has {inputs})")]
    BadBinding { index: usize, inputs: usize },
    #[error("downstream has no input named `{0}`")]
    UnknownInput(String),
    #[error("renamed species `{0}` collides with an upstream species")]
    NameCollision(String),
    #[error("output is consumed by: {}", .0.join("; "))]
    NotOutputOblivious(Vec<String>),
    #[error("fan-out needs at least one copy")]
    EmptyFanout,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Reactions listing the output as a reactant; empty means the CRC is
/// output-oblivious.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObliviousCheck {
    pub offenders: Vec<usize>,
}

impl ObliviousCheck {
    pub fn is_oblivious(&self) -> bool {
        self.offenders.is_empty()
    }
}

pub fn is_output_oblivious(crc: &Crc) -> ObliviousCheck {
    ObliviousCheck {
        offenders: crc.output_consumers(),
    }
}

fn offender_strings(crc: &Crc, offenders: &[usize]) -> Vec<String> {
    offenders.iter().map(|&j| crc.crn.reaction_string(j)).collect()
}

/// Upstream output feeds one downstream input.
#[derive(Debug, Clone)]
pub struct WiringPlan {
    pub upstream: Crc,
    pub downstream: Crc,
    /// Position in the downstream input list.
    pub binding: usize,
    /// Appended to every other downstream species; `None` tries `~2`,
    /// `~3`, ... until no name collides.
    pub suffix: Option<String>,
}

impl WiringPlan {
    pub fn new(upstream: Crc, downstream: Crc, binding: usize) -> Self {
        WiringPlan {
            upstream,
            downstream,
            binding,
            suffix: None,
        }
    }

    /// Binds the downstream input with the given name.
    pub fn by_name(upstream: Crc, downstream: Crc, input: &str) -> Result<Self, CompositionError> {
        let binding = downstream
            .input_names()
            .iter()
            .position(|n| *n == input)
            .ok_or_else(|| CompositionError::UnknownInput(input.to_string()))?;
        Ok(WiringPlan::new(upstream, downstream, binding))
    }
}

fn compose_with_suffix(plan: &WiringPlan, suffix: &str) -> Result<Crc, CompositionError> {
    let up = &plan.upstream;
    let down = &plan.downstream;
    let bound = down.inputs[plan.binding];
    let up_out = up.output_name().to_string();
    let names: Vec<String> = down
        .crn
        .species()
        .iter()
        .enumerate()
        .map(|(s, name)| if s == bound { up_out.clone() } else { format!("{name}{suffix}") })
        .collect();
    for (s, name) in names.iter().enumerate() {
        if s != bound && up.crn.id(name).is_some() {
            return Err(CompositionError::NameCollision(name.clone()));
        }
    }
    let mut next = names.into_iter();
    let renamed = down.crn.renamed(|_| next.next().expect("one name per species"))?;
    let mut crn = up.crn.clone();
    let map = crn.absorb(&renamed);
    let mut inputs = up.inputs.clone();
    inputs.extend(
        down.inputs
            .iter()
            .filter(|&&s| s != bound)
            .map(|&s| map[s]),
    );
    let mut context: BTreeMap<_, _> = up.context.clone();
    context.extend(down.context.iter().map(|(&s, v)| (map[s], v.clone())));
    Ok(Crc::new(crn, inputs, map[down.output], context)?)
}

/// Concatenates the two CRCs, identifying the bound downstream input with
/// the upstream output. The result's output is the downstream output.
pub fn compose(plan: &WiringPlan) -> Result<Crc, CompositionError> {
    if plan.binding >= plan.downstream.inputs.len() {
        return Err(CompositionError::BadBinding {
            index: plan.binding,
            inputs: plan.downstream.inputs.len(),
        });
    }
    match &plan.suffix {
        Some(s) => compose_with_suffix(plan, s),
        None => {
            let mut k = 2;
            loop {
                match compose_with_suffix(plan, &format!("~{k}")) {
                    Err(CompositionError::NameCollision(_)) => k += 1,
                    other => return other,
                }
            }
        }
    }
}

/// Adds `Y -> Yc1 + ... + Yck` and returns one view per copy, each with
/// that copy as its output.
pub fn fanout(crc: &Crc, k: usize) -> Result<Vec<Crc>, CompositionError> {
    let check = is_output_oblivious(crc);
    if !check.is_oblivious() {
        return Err(CompositionError::NotOutputOblivious(offender_strings(crc, &check.offenders)));
    }
    if k == 0 {
        return Err(CompositionError::EmptyFanout);
    }
    let mut crn = crc.crn.clone();
    let base = crc.output_name().to_string();
    let mut copies = Vec::with_capacity(k);
    for i in 1..=k {
        let mut name = format!("{base}c{i}");
        while crn.id(&name).is_some() {
            name.push('~');
        }
        copies.push(crn.declare(&name)?);
    }
    crn.add_reaction(Reaction::new([(crc.output, 1)], copies.iter().map(|&c| (c, 1))))?;
    copies
        .into_iter()
        .map(|c| Ok(Crc::new(crn.clone(), crc.inputs.clone(), c, crc.context.clone())?))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruned {
    pub crc: Crc,
    /// Text of each removed reaction, in listing order.
    pub removed: Vec<String>,
}

/// Drops every reaction consuming the output. Function preservation holds
/// only when the original CRC is composable; the caller must know that.
pub fn prune_output_consumers(crc: &Crc) -> Pruned {
    let offenders = crc.output_consumers();
    let removed = offender_strings(crc, &offenders);
    let mut out = crc.clone();
    out.crn.retain_reactions(|j, _| !offenders.contains(&j));
    Pruned { crc: out, removed }
}
