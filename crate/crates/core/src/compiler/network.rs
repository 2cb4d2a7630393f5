use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use super::bimolecular::decompose_tracked;
use super::{
    copy_reaction, gate_reaction, linear_reactions, min_reaction, CompileError, CompileOptions,
    CompileReport, NamedReaction, Stage, StageCount, MAX_COMPILE_INPUTS, WARN_COMPILE_INPUTS,
};
use crate::analysis::validate_spec;
use crate::model::{Crc, Crn, Reaction, SpeciesId};
use crate::semantics::species_closure;
use crate::spec::{is_subset, FunctionSpec, SpecError, Subset, SubsetDisplay};

pub const OUTPUT_NAME: &str = "Y";

pub(crate) fn input_name(i: usize) -> String {
    format!("X{}", i + 1)
}

fn sd(s: Subset) -> SubsetDisplay {
    SubsetDisplay(s)
}

#[derive(Clone, Copy)]
enum Part {
    /// Single-component piece written straight into `Y_S`.
    Direct,
    /// Unit-vector component: the input copy feeds the min itself.
    Unit(usize),
    /// Component computed into its own species first.
    Linear,
}

#[derive(Default)]
struct Builder {
    reactions: Vec<(NamedReaction, Stage)>,
    roles: BTreeMap<String, String>,
}

impl Builder {
    fn emit(&mut self, r: NamedReaction, stage: Stage) {
        self.reactions.push((r, stage));
    }

    fn role(&mut self, role: String, species: &str) {
        self.roles.insert(role, species.to_string());
    }
}

/// The gated-min network for `spec`. With `compact`, single-component
/// pieces skip the per-component species, unit components read the input
/// copy directly, `Y_S` is copied only when it has several consumers, and
/// `H_S` is `Y_S` itself when no gate feeds it.
fn build(spec: &FunctionSpec, inputs: &[String], compact: bool) -> Result<Builder, CompileError> {
    let n = spec.inputs();
    let sets: Vec<Subset> = spec.domains().keys().copied().collect();
    let preds: Vec<Subset> = sets
        .iter()
        .copied()
        .filter(|&k| k != 0 && sets.iter().any(|&s| !is_subset(k, s)))
        .collect();
    let gates_into = |s: Subset| -> Vec<Subset> { sets.iter().copied().filter(|&k| !is_subset(k, s)).collect() };

    let mut b = Builder::default();
    let mut parts: BTreeMap<Subset, Vec<Part>> = BTreeMap::new();
    let mut consumers: Vec<Vec<String>> = vec![Vec::new(); n];
    for &s in &sets {
        let comps = &spec.piece(s).expect("domain").components;
        let mut ps = Vec::with_capacity(comps.len());
        for (k, c) in comps.iter().enumerate() {
            let role = format!("g_{}[{k}]", sd(s));
            let part = match c.unit_index() {
                _ if compact && comps.len() == 1 => Part::Direct,
                Some(i) if compact => Part::Unit(i),
                _ => Part::Linear,
            };
            match part {
                Part::Unit(i) => consumers[i].push(role),
                Part::Direct | Part::Linear => {
                    for (i, a) in c.coeffs.iter().enumerate() {
                        if !a.is_zero() {
                            consumers[i].push(role.clone());
                        }
                    }
                }
            }
            ps.push(part);
        }
        parts.insert(s, ps);
    }
    for &k in &preds {
        for (i, list) in consumers.iter_mut().enumerate() {
            if k & (1 << i) != 0 {
                list.push(format!("P_{}", sd(k)));
            }
        }
    }

    // Input copies, one per consumer.
    let mut copy_of: HashMap<(usize, String), String> = HashMap::new();
    for (i, list) in consumers.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let names: Vec<String> = (1..=list.len()).map(|j| format!("{}_c{j}", inputs[i])).collect();
        b.emit(copy_reaction(&inputs[i], &names)?, Stage::Copy);
        for (role, name) in list.iter().zip(&names) {
            b.role(format!("{}@{role}", input_name(i)), name);
            copy_of.insert((i, role.clone()), name.clone());
        }
    }
    for (i, name) in inputs.iter().enumerate() {
        b.role(input_name(i), name);
    }

    for &k in &preds {
        let role = format!("P_{}", sd(k));
        let members: Vec<String> = (0..n)
            .filter(|i| k & (1 << i) != 0)
            .map(|i| copy_of[&(i, role.clone())].clone())
            .collect();
        let name = format!("P{k}");
        b.emit(min_reaction(&members, &name)?, Stage::Predicate);
        b.role(role, &name);
    }

    // Pieces into Y_S.
    for &s in &sets {
        let ys = format!("Y_S{s}");
        let comps = &spec.piece(s).expect("domain").components;
        let feeds = |role: &str| -> Vec<String> {
            (0..n)
                .map(|i| copy_of.get(&(i, role.to_string())).cloned().unwrap_or_default())
                .collect()
        };
        let mut mins = Vec::new();
        for (k, (c, part)) in comps.iter().zip(&parts[&s]).enumerate() {
            let role = format!("g_{}[{k}]", sd(s));
            match *part {
                Part::Direct => {
                    for r in linear_reactions(c, &feeds(&role), &ys)? {
                        b.emit(r, Stage::Linear);
                    }
                }
                Part::Unit(i) => mins.push(copy_of[&(i, role)].clone()),
                Part::Linear => {
                    let g = format!("G{s}_{k}");
                    for r in linear_reactions(c, &feeds(&role), &g)? {
                        b.emit(r, Stage::Linear);
                    }
                    b.role(role, &g);
                    mins.push(g);
                }
            }
        }
        if !mins.is_empty() {
            b.emit(min_reaction(&mins, &ys)?, Stage::Min);
        }
        b.role(format!("Y_{}", sd(s)), &ys);
    }

    // Copies of Y_S: one for its own accumulator, one per gate it feeds.
    let mut feed: HashMap<(Subset, Subset), String> = HashMap::new();
    for &s in &sets {
        let ys = format!("Y_S{s}");
        let mut targets = vec![s];
        targets.extend(sets.iter().copied().filter(|&t| !is_subset(s, t)));
        if !compact || targets.len() >= 2 {
            let names: Vec<String> = (1..=targets.len()).map(|j| format!("{ys}_c{j}")).collect();
            b.emit(copy_reaction(&ys, &names)?, Stage::Copy);
            for (t, name) in targets.iter().zip(names) {
                b.role(format!("Y_{}@H_{}", sd(s), sd(*t)), &name);
                feed.insert((s, *t), name);
            }
        } else {
            feed.insert((s, s), ys);
        }
    }

    let mut accumulators = Vec::new();
    for &s in &sets {
        let gates = gates_into(s);
        let own = feed[&(s, s)].clone();
        if compact && gates.is_empty() {
            b.role(format!("H_{}", sd(s)), &own);
            accumulators.push(own);
            continue;
        }
        let h = format!("H{s}");
        b.emit(copy_reaction(&own, std::slice::from_ref(&h))?, Stage::Sum);
        for k in gates {
            b.emit(gate_reaction(&feed[&(k, s)], &format!("P{k}"), &h), Stage::Gate);
        }
        b.role(format!("H_{}", sd(s)), &h);
        accumulators.push(h);
    }
    b.emit(min_reaction(&accumulators, OUTPUT_NAME)?, Stage::Min);
    b.role("Y".into(), OUTPUT_NAME);
    Ok(b)
}

/// A CRC with its per-reaction stages and role map, carried through the
/// post-processing passes.
pub(crate) struct Tracked {
    pub crc: Crc,
    pub stages: Vec<Stage>,
    pub roles: BTreeMap<String, String>,
}

impl Tracked {
    fn from_builder(b: Builder, inputs: &[String]) -> Result<Tracked, CompileError> {
        let mut crn = Crn::new();
        for name in inputs {
            crn.declare(name)?;
        }
        let mut stages = Vec::with_capacity(b.reactions.len());
        for ((r, p), stage) in &b.reactions {
            let r: Vec<(&str, u32)> = r.iter().map(|(s, k)| (s.as_str(), *k)).collect();
            let p: Vec<(&str, u32)> = p.iter().map(|(s, k)| (s.as_str(), *k)).collect();
            crn.add_named(&r, &p)?;
            stages.push(*stage);
        }
        let output = crn.try_intern(OUTPUT_NAME)?;
        let inputs = (0..inputs.len()).collect();
        let crc = Crc::new(crn, inputs, output, BTreeMap::new())?;
        Ok(Tracked {
            crc,
            stages,
            roles: b.roles,
        })
    }

    /// Keeps the reactions listed in `kept` (old indices, in order) and
    /// drops species no longer mentioned.
    fn restrict(&mut self, kept: &[usize]) {
        let keep: Vec<bool> = {
            let mut k = vec![false; self.crc.crn.num_reactions()];
            for &j in kept {
                k[j] = true;
            }
            k
        };
        self.crc.crn.retain_reactions(|j, _| keep[j]);
        self.stages = kept.iter().map(|&j| self.stages[j]).collect();
        self.compact_species();
    }

    fn compact_species(&mut self) {
        let crc = &mut self.crc;
        let protected: Vec<SpeciesId> = crc
            .inputs
            .iter()
            .copied()
            .chain([crc.output])
            .chain(crc.context.keys().copied())
            .collect();
        let map = crc.crn.drop_unused_species(|s| protected.contains(&s));
        let at = |s: SpeciesId| map[s].expect("protected species survive");
        crc.inputs = crc.inputs.iter().map(|&s| at(s)).collect();
        crc.output = at(crc.output);
        crc.context = std::mem::take(&mut crc.context)
            .into_iter()
            .map(|(s, v)| (at(s), v))
            .collect();
        let names: std::collections::HashSet<&str> = crc.crn.species().iter().map(String::as_str).collect();
        self.roles.retain(|_, v| names.contains(v.as_str()));
    }
}

fn protected_mask(crc: &Crc) -> Vec<bool> {
    let mut p = vec![false; crc.crn.num_species()];
    for &s in crc.inputs.iter().chain([&crc.output]).chain(crc.context.keys()) {
        p[s] = true;
    }
    p
}

/// Removes reactions that can never fire from any input, then reactions
/// that only feed species with no path to the output and whose reactants
/// nothing else uses, then unmentioned species.
fn prune_tracked(t: &mut Tracked) {
    let crn = &t.crc.crn;
    let mut present = vec![false; crn.num_species()];
    for &s in t.crc.inputs.iter().chain(t.crc.context.keys()) {
        present[s] = true;
    }
    let closure = species_closure(crn, &present);
    let mut alive: Vec<bool> = crn
        .reactions()
        .iter()
        .map(|r| r.reactants.keys().all(|&s| closure[s]))
        .collect();
    loop {
        let mut useful = vec![false; crn.num_species()];
        useful[t.crc.output] = true;
        loop {
            let mut changed = false;
            for (j, r) in crn.reactions().iter().enumerate() {
                if alive[j] && r.products.keys().any(|&p| useful[p]) {
                    for &s in r.reactants.keys() {
                        if !useful[s] {
                            useful[s] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut uses = vec![0usize; crn.num_species()];
        for (j, r) in crn.reactions().iter().enumerate() {
            if alive[j] {
                for &s in r.reactants.keys() {
                    uses[s] += 1;
                }
            }
        }
        let mut changed = false;
        for (j, r) in crn.reactions().iter().enumerate() {
            if alive[j]
                && !r.products.keys().any(|&p| useful[p])
                && r.reactants.keys().all(|&s| uses[s] == 1)
            {
                alive[j] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let kept: Vec<usize> = (0..alive.len()).filter(|&j| alive[j]).collect();
    t.restrict(&kept);
}

/// Repeatedly merges `A -> B` into a single species when that reaction is
/// the only one consuming `A`. Inputs, output and context keep their names.
fn contract_tracked(t: &mut Tracked) {
    loop {
        let crn = &t.crc.crn;
        let protected = protected_mask(&t.crc);
        let mut uses = vec![0usize; crn.num_species()];
        for r in crn.reactions() {
            for &s in r.reactants.keys() {
                uses[s] += 1;
            }
        }
        let candidate = crn.reactions().iter().enumerate().find_map(|(j, r)| {
            let (&a, &ka) = r.reactants.iter().next()?;
            let (&bb, &kb) = r.products.iter().next()?;
            let unary = r.reactants.len() == 1 && r.products.len() == 1 && ka == 1 && kb == 1;
            if !unary || a == bb || uses[a] != 1 || a == t.crc.output || (protected[a] && protected[bb]) {
                return None;
            }
            let (keep, drop) = if protected[a] { (a, bb) } else { (bb, a) };
            Some((j, keep, drop))
        });
        let Some((j, keep, drop)) = candidate else {
            return;
        };
        let sub = |s: SpeciesId| if s == drop { keep } else { s };
        let reactions: Vec<Reaction> = crn
            .reactions()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, r)| {
                Reaction::new(
                    r.reactants.iter().map(|(&s, &k)| (sub(s), k)),
                    r.products.iter().map(|(&s, &k)| (sub(s), k)),
                )
            })
            .collect();
        let keep_name = crn.name(keep).to_string();
        let drop_name = crn.name(drop).to_string();
        t.crc.crn.replace_reactions(reactions);
        t.stages.remove(j);
        for v in t.roles.values_mut() {
            if *v == drop_name {
                *v = keep_name.clone();
            }
        }
        t.compact_species();
    }
}

fn bimolecular_tracked(t: &mut Tracked) {
    let (crn, origin) = decompose_tracked(&t.crc.crn);
    t.stages = origin.iter().map(|&j| t.stages[j]).collect();
    // Species ids of the original network are preserved.
    t.crc.crn = crn;
}

/// Drops reactions that can never fire or cannot influence the output.
pub fn prune_dead(crc: &Crc) -> Crc {
    let mut t = Tracked {
        crc: crc.clone(),
        stages: vec![Stage::Copy; crc.crn.num_reactions()],
        roles: BTreeMap::new(),
    };
    prune_tracked(&mut t);
    t.crc
}

/// Merges single-use unary renamings `A -> B` into one species.
pub fn contract_renames(crc: &Crc) -> Crc {
    let mut t = Tracked {
        crc: crc.clone(),
        stages: vec![Stage::Copy; crc.crn.num_reactions()],
        roles: BTreeMap::new(),
    };
    contract_tracked(&mut t);
    t.crc
}

pub fn compile_spec(spec: &FunctionSpec) -> Result<(Crc, CompileReport), CompileError> {
    compile_spec_with(spec, CompileOptions::default())
}

pub fn compile_spec_with(
    spec: &FunctionSpec,
    options: CompileOptions,
) -> Result<(Crc, CompileReport), CompileError> {
    if spec.has_constants() {
        return Err(SpecError::ConstantWithoutContext.into());
    }
    let inputs: Vec<String> = (0..spec.inputs()).map(input_name).collect();
    compile_named(spec, &inputs, options)
}

/// Compiles a homogeneous spec with the given input species names.
pub(crate) fn compile_named(
    spec: &FunctionSpec,
    inputs: &[String],
    options: CompileOptions,
) -> Result<(Crc, CompileReport), CompileError> {
    let n = spec.inputs();
    if n > MAX_COMPILE_INPUTS {
        return Err(CompileError::TooManyInputs(n));
    }
    let mut warnings = Vec::new();
    if n > WARN_COMPILE_INPUTS {
        let w = format!("{n} inputs: the construction enumerates up to {} subsets", 1u64 << n);
        log::warn!("{w}");
        warnings.push(w);
    }
    let report = validate_spec(spec);
    if !report.is_valid() {
        return Err(CompileError::ValidationFailed(report.summary()));
    }
    let b = build(spec, inputs, options.prune)?;
    let mut t = Tracked::from_builder(b, inputs)?;
    if options.prune {
        prune_tracked(&mut t);
    }
    if options.contract {
        contract_tracked(&mut t);
    }
    if options.bimolecular {
        bimolecular_tracked(&mut t);
    }
    let report = make_report(&t, n, spec.canonicalized_coefficients(), warnings);
    Ok((t.crc, report))
}

pub(crate) fn make_report(t: &Tracked, inputs: usize, canonicalized: usize, warnings: Vec<String>) -> CompileReport {
    let crn = &t.crc.crn;
    let mut stages: BTreeMap<Stage, StageCount> = Stage::ALL.iter().map(|&s| (s, StageCount::default())).collect();
    let mut species_stage: Vec<Option<Stage>> = vec![None; crn.num_species()];
    for (j, r) in crn.reactions().iter().enumerate() {
        stages.get_mut(&t.stages[j]).expect("all stages").reactions += 1;
        for &p in r.products.keys() {
            species_stage[p].get_or_insert(t.stages[j]);
        }
    }
    for (j, r) in crn.reactions().iter().enumerate() {
        for &s in r.reactants.keys() {
            species_stage[s].get_or_insert(t.stages[j]);
        }
    }
    let mut sources = 0;
    for (s, st) in species_stage.iter().enumerate() {
        let source = t.crc.inputs.contains(&s) || t.crc.context.contains_key(&s);
        match st {
            _ if source => sources += 1,
            Some(st) => stages.get_mut(st).expect("all stages").species += 1,
            None => sources += 1,
        }
    }
    CompileReport {
        inputs,
        stages,
        roles: t.roles.clone(),
        species: crn.num_species(),
        reactions: crn.num_reactions(),
        input_species: sources,
        canonicalized_coefficients: canonicalized,
        warnings,
    }
}
