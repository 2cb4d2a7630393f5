//! CRNs, CRCs and states.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

pub type SpeciesId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid species name `{0}`")]
    InvalidName(String),
    #[error("species `{0}` declared twice")]
    DuplicateSpecies(String),
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("reaction has no reactants")]
    EmptyReactants,
    #[error("zero stoichiometry for `{0}`")]
    ZeroStoichiometry(String),
    #[error("output `{0}` is also an input")]
    OutputIsInput(String),
    #[error("context species `{0}` overlaps inputs or output")]
    ContextOverlap(String),
    #[error("input `{0}` listed twice")]
    DuplicateInput(String),
    #[error("negative concentration {value} for `{species}`")]
    NegativeConcentration { species: String, value: Rational },
    #[error("expected {expected} values, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Letters, digits, `_`, `'` and `~`; must not start with a digit.
pub fn is_valid_species_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '~')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reaction {
    pub reactants: BTreeMap<SpeciesId, u32>,
    pub products: BTreeMap<SpeciesId, u32>,
}

impl Reaction {
    pub fn new(
        reactants: impl IntoIterator<Item = (SpeciesId, u32)>,
        products: impl IntoIterator<Item = (SpeciesId, u32)>,
    ) -> Self {
        let mut r = BTreeMap::new();
        for (s, k) in reactants {
            *r.entry(s).or_insert(0) += k;
        }
        let mut p = BTreeMap::new();
        for (s, k) in products {
            *p.entry(s).or_insert(0) += k;
        }
        r.retain(|_, k| *k > 0);
        p.retain(|_, k| *k > 0);
        Reaction {
            reactants: r,
            products: p,
        }
    }

    pub fn reactant(&self, s: SpeciesId) -> u32 {
        self.reactants.get(&s).copied().unwrap_or(0)
    }

    pub fn product(&self, s: SpeciesId) -> u32 {
        self.products.get(&s).copied().unwrap_or(0)
    }

    /// Net production of `s`.
    pub fn net(&self, s: SpeciesId) -> i64 {
        i64::from(self.product(s)) - i64::from(self.reactant(s))
    }

    /// Species with nonzero net change, with that change.
    pub fn net_changes(&self) -> BTreeMap<SpeciesId, i64> {
        let mut out = BTreeMap::new();
        for s in self.reactants.keys().chain(self.products.keys()) {
            let d = self.net(*s);
            if d != 0 {
                out.insert(*s, d);
            }
        }
        out
    }

    pub fn net_consumed(&self) -> impl Iterator<Item = SpeciesId> + '_ {
        self.reactants.keys().copied().filter(|&s| self.net(s) < 0)
    }

    pub fn net_produced(&self) -> impl Iterator<Item = SpeciesId> + '_ {
        self.products.keys().copied().filter(|&s| self.net(s) > 0)
    }

    /// Reactant + product count, with multiplicity.
    pub fn reactant_count(&self) -> u32 {
        self.reactants.values().sum()
    }

    pub fn product_count(&self) -> u32 {
        self.products.values().sum()
    }

    fn remap(&self, map: &[SpeciesId]) -> Reaction {
        Reaction::new(
            self.reactants.iter().map(|(s, k)| (map[*s], *k)),
            self.products.iter().map(|(s, k)| (map[*s], *k)),
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct Crn {
    species: Vec<String>,
    index: HashMap<String, SpeciesId>,
    reactions: Vec<Reaction>,
}

impl PartialEq for Crn {
    fn eq(&self, other: &Self) -> bool {
        self.species == other.species && self.reactions == other.reactions
    }
}

impl Eq for Crn {}

impl Crn {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn num_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn name(&self, s: SpeciesId) -> &str {
        &self.species[s]
    }

    pub fn id(&self, name: &str) -> Option<SpeciesId> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<SpeciesId, ModelError> {
        self.id(name)
            .ok_or_else(|| ModelError::UnknownSpecies(name.to_string()))
    }

    /// Adds a new species; errors on a duplicate or malformed name.
    pub fn declare(&mut self, name: &str) -> Result<SpeciesId, ModelError> {
        if !is_valid_species_name(name) {
            return Err(ModelError::InvalidName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(ModelError::DuplicateSpecies(name.to_string()));
        }
        Ok(self.push_species(name))
    }

    /// Returns the id of `name`, adding it if absent.
    pub fn try_intern(&mut self, name: &str) -> Result<SpeciesId, ModelError> {
        if let Some(id) = self.id(name) {
            return Ok(id);
        }
        if !is_valid_species_name(name) {
            return Err(ModelError::InvalidName(name.to_string()));
        }
        Ok(self.push_species(name))
    }

    /// Like [`Crn::try_intern`] for generated names; panics on a malformed one.
    pub fn intern(&mut self, name: &str) -> SpeciesId {
        self.try_intern(name)
            .unwrap_or_else(|e| panic!("generated species name rejected: {e}"))
    }

    fn push_species(&mut self, name: &str) -> SpeciesId {
        let id = self.species.len();
        self.species.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn add_reaction(&mut self, reaction: Reaction) -> Result<usize, ModelError> {
        if reaction.reactants.is_empty() {
            return Err(ModelError::EmptyReactants);
        }
        for s in reaction.reactants.keys().chain(reaction.products.keys()) {
            if *s >= self.species.len() {
                return Err(ModelError::UnknownSpecies(format!("#{s}")));
            }
        }
        self.reactions.push(reaction);
        Ok(self.reactions.len() - 1)
    }

    /// Adds a reaction given by species names, interning new names.
    pub fn add_named(
        &mut self,
        reactants: &[(&str, u32)],
        products: &[(&str, u32)],
    ) -> Result<usize, ModelError> {
        for (name, k) in reactants.iter().chain(products) {
            if *k == 0 {
                return Err(ModelError::ZeroStoichiometry(name.to_string()));
            }
        }
        let mut r = Vec::with_capacity(reactants.len());
        for (name, k) in reactants {
            r.push((self.try_intern(name)?, *k));
        }
        let mut p = Vec::with_capacity(products.len());
        for (name, k) in products {
            p.push((self.try_intern(name)?, *k));
        }
        self.add_reaction(Reaction::new(r, p))
    }

    /// Builds a CRN from reaction text lines in the `.crn` reaction syntax.
    pub fn from_reactions(lines: &[&str]) -> Result<Crn, crate::format::FormatError> {
        crate::format::parse_crn(&lines.join("\n"))
    }

    pub fn stoich_matrix(&self) -> StoichMatrix {
        let mut m = vec![vec![0i64; self.reactions.len()]; self.species.len()];
        for (j, r) in self.reactions.iter().enumerate() {
            for (s, d) in r.net_changes() {
                m[s][j] = d;
            }
        }
        StoichMatrix { entries: m }
    }

    pub fn is_applicable(&self, j: usize, s: &State) -> bool {
        self.reactions[j]
            .reactants
            .keys()
            .all(|&sp| s.get(sp).is_positive())
    }

    /// Indices of reactions whose reactants are all present in `s`.
    pub fn applicable_reactions(&self, s: &State) -> Vec<usize> {
        (0..self.reactions.len())
            .filter(|&j| self.is_applicable(j, s))
            .collect()
    }

    /// `A + 2 B -> C` form of reaction `j`.
    pub fn reaction_string(&self, j: usize) -> String {
        let r = &self.reactions[j];
        format!("{} -> {}", self.side_string(&r.reactants), self.side_string(&r.products))
    }

    pub fn side_string(&self, side: &BTreeMap<SpeciesId, u32>) -> String {
        if side.is_empty() {
            return "0".to_string();
        }
        side.iter()
            .map(|(s, k)| {
                if *k == 1 {
                    self.species[*s].clone()
                } else {
                    format!("{k} {}", self.species[*s])
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Copy of this CRN with every species renamed by `f` (which must be
    /// injective on this CRN's species) and species order preserved.
    pub fn renamed(&self, mut f: impl FnMut(&str) -> String) -> Result<Crn, ModelError> {
        let mut out = Crn::new();
        for s in &self.species {
            out.declare(&f(s))?;
        }
        out.reactions = self.reactions.clone();
        Ok(out)
    }

    /// Appends `other`'s species (merging equal names) and reactions.
    /// Returns the id map from `other` into `self`.
    pub fn absorb(&mut self, other: &Crn) -> Vec<SpeciesId> {
        let map: Vec<SpeciesId> = other.species.iter().map(|s| self.intern(s)).collect();
        for r in &other.reactions {
            self.reactions.push(r.remap(&map));
        }
        map
    }

    /// Keeps reactions for which `keep` is true, preserving order.
    pub fn retain_reactions(&mut self, mut keep: impl FnMut(usize, &Reaction) -> bool) {
        let mut j = 0;
        self.reactions.retain(|r| {
            let k = keep(j, r);
            j += 1;
            k
        });
    }

    /// Drops species not mentioned by any reaction unless `protect` holds.
    /// Returns the old-id → new-id map.
    pub fn drop_unused_species(&mut self, protect: impl Fn(SpeciesId) -> bool) -> Vec<Option<SpeciesId>> {
        let mut used = vec![false; self.species.len()];
        for r in &self.reactions {
            for s in r.reactants.keys().chain(r.products.keys()) {
                used[*s] = true;
            }
        }
        let mut map = vec![None; self.species.len()];
        let mut species = Vec::new();
        for (i, name) in self.species.iter().enumerate() {
            if used[i] || protect(i) {
                map[i] = Some(species.len());
                species.push(name.clone());
            }
        }
        let dense: Vec<SpeciesId> = map.iter().map(|m| m.unwrap_or(usize::MAX)).collect();
        self.reactions = self.reactions.iter().map(|r| r.remap(&dense)).collect();
        self.index = species
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        self.species = species;
        map
    }

    pub fn replace_reactions(&mut self, reactions: Vec<Reaction>) {
        self.reactions = reactions;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoichMatrix {
    /// Rows are species, columns reactions.
    pub entries: Vec<Vec<i64>>,
}

impl StoichMatrix {
    pub fn get(&self, species: SpeciesId, reaction: usize) -> i64 {
        self.entries[species][reaction]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        self.entries.iter().map(|row| row[j]).collect()
    }

    pub fn to_rational(&self) -> Vec<Vec<Rational>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|&v| Rational::from_integer(v.into())).collect())
            .collect()
    }
}

/// Concentrations indexed by species id; all entries nonnegative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State(Vec<Rational>);

impl State {
    pub fn zeros(n: usize) -> Self {
        State(vec![Rational::zero(); n])
    }

    pub fn from_vec(values: Vec<Rational>) -> Result<Self, ModelError> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(ModelError::NegativeConcentration {
                species: format!("#{i}"),
                value: v.clone(),
            });
        }
        Ok(State(values))
    }

    /// State over `crn` with the given named concentrations, others zero.
    pub fn from_named(crn: &Crn, values: &[(&str, Rational)]) -> Result<Self, ModelError> {
        let mut s = State::zeros(crn.num_species());
        for (name, v) in values {
            let id = crn.require(name)?;
            if v.is_negative() {
                return Err(ModelError::NegativeConcentration {
                    species: name.to_string(),
                    value: v.clone(),
                });
            }
            s.0[id] += v;
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, s: SpeciesId) -> &Rational {
        &self.0[s]
    }

    pub fn set(&mut self, s: SpeciesId, v: Rational) {
        assert!(!v.is_negative(), "negative concentration");
        self.0[s] = v;
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.0
    }

    /// Species with positive concentration.
    pub fn support(&self) -> Vec<SpeciesId> {
        (0..self.0.len()).filter(|&i| self.0[i].is_positive()).collect()
    }

    pub fn present_mask(&self) -> Vec<bool> {
        self.0.iter().map(|v| v.is_positive()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| v.is_zero())
    }

    pub fn scaled(&self, gamma: &Rational) -> State {
        assert!(!gamma.is_negative());
        State(self.0.iter().map(|v| v * gamma).collect())
    }

    pub fn plus(&self, other: &State) -> State {
        assert_eq!(self.len(), other.len());
        State(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `name=value` pairs of the nonzero species, in species order.
    pub fn display<'a>(&'a self, crn: &'a Crn) -> StateDisplay<'a> {
        StateDisplay { state: self, crn }
    }
}

pub struct StateDisplay<'a> {
    state: &'a State,
    crn: &'a Crn,
}

impl fmt::Display for StateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, v) in self.state.0.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}={}", self.crn.name(i), v)?;
        }
        Ok(())
    }
}

/// A CRN with designated inputs, one output and optional initial context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crc {
    pub crn: Crn,
    pub inputs: Vec<SpeciesId>,
    pub output: SpeciesId,
    pub context: BTreeMap<SpeciesId, Rational>,
}

impl Crc {
    pub fn new(
        crn: Crn,
        inputs: Vec<SpeciesId>,
        output: SpeciesId,
        context: BTreeMap<SpeciesId, Rational>,
    ) -> Result<Self, ModelError> {
        let crc = Crc {
            crn,
            inputs,
            output,
            context,
        };
        crc.validate()?;
        Ok(crc)
    }

    /// Convenience constructor by species names; names must already exist.
    pub fn with_names(crn: Crn, inputs: &[&str], output: &str) -> Result<Self, ModelError> {
        let inputs = inputs
            .iter()
            .map(|n| crn.require(n))
            .collect::<Result<Vec<_>, _>>()?;
        let output = crn.require(output)?;
        Crc::new(crn, inputs, output, BTreeMap::new())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.crn.num_species();
        for &s in self.inputs.iter().chain([&self.output]).chain(self.context.keys()) {
            if s >= n {
                return Err(ModelError::UnknownSpecies(format!("#{s}")));
            }
        }
        for (k, &a) in self.inputs.iter().enumerate() {
            if self.inputs[..k].contains(&a) {
                return Err(ModelError::DuplicateInput(self.crn.name(a).to_string()));
            }
        }
        if self.inputs.contains(&self.output) {
            return Err(ModelError::OutputIsInput(self.crn.name(self.output).to_string()));
        }
        for (&s, v) in &self.context {
            if s == self.output || self.inputs.contains(&s) {
                return Err(ModelError::ContextOverlap(self.crn.name(s).to_string()));
            }
            if v.is_negative() {
                return Err(ModelError::NegativeConcentration {
                    species: self.crn.name(s).to_string(),
                    value: v.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn output_name(&self) -> &str {
        self.crn.name(self.output)
    }

    pub fn input_names(&self) -> Vec<&str> {
        self.inputs.iter().map(|&s| self.crn.name(s)).collect()
    }

    /// Initial state for input vector `x` (in input order) plus context.
    pub fn initial_state(&self, x: &[Rational]) -> Result<State, ModelError> {
        if x.len() != self.inputs.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.inputs.len(),
                found: x.len(),
            });
        }
        let mut s = State::zeros(self.crn.num_species());
        for (&id, v) in self.inputs.iter().zip(x) {
            if v.is_negative() {
                return Err(ModelError::NegativeConcentration {
                    species: self.crn.name(id).to_string(),
                    value: v.clone(),
                });
            }
            s.0[id] = v.clone();
        }
        for (&id, v) in &self.context {
            s.0[id] = v.clone();
        }
        Ok(s)
    }

    /// Reactions listing the output as a reactant.
    pub fn output_consumers(&self) -> Vec<usize> {
        (0..self.crn.num_reactions())
            .filter(|&j| self.crn.reactions()[j].reactants.contains_key(&self.output))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn crn(lines: &[&str]) -> Crn {
        Crn::from_reactions(lines).unwrap()
    }

    #[test]
    fn stoich_columns() {
        let c = crn(&["X1 + X2 -> Y"]);
        assert_eq!(c.stoich_matrix().column(0), vec![-1, -1, 1]);
        let c = crn(&["C + Y -> C + Z"]);
        assert_eq!(c.stoich_matrix().column(0), vec![0, -1, 1]);
        let c = crn(&["X -> Z + Y", "X + Z -> S + Z"]);
        let m = c.stoich_matrix();
        assert_eq!(c.species(), &["X", "Z", "Y", "S"]);
        assert_eq!(m.column(0), vec![-1, 1, 1, 0]);
        assert_eq!(m.column(1), vec![-1, 0, 0, 1]);
    }

    #[test]
    fn applicability() {
        let c = crn(&["X1 + X2 -> Y"]);
        let s = State::from_named(&c, &[("X1", int(2)), ("X2", int(3))]).unwrap();
        assert_eq!(c.applicable_reactions(&s), vec![0]);
        let s = State::from_named(&c, &[("X1", int(2))]).unwrap();
        assert!(c.applicable_reactions(&s).is_empty());
        let c = crn(&["X -> C", "C + Y -> C + Z"]);
        let s = State::from_named(&c, &[("X", int(1)), ("Y", int(1))]).unwrap();
        assert_eq!(c.applicable_reactions(&s), vec![0]);
    }

    #[test]
    fn empty_reactants_rejected() {
        let mut c = Crn::new();
        assert_eq!(
            c.add_named(&[], &[("Y", 1)]),
            Err(ModelError::EmptyReactants)
        );
    }

    #[test]
    fn names() {
        assert!(is_valid_species_name("X1'"));
        assert!(is_valid_species_name("Y~2"));
        assert!(is_valid_species_name("_a"));
        assert!(!is_valid_species_name("1X"));
        assert!(!is_valid_species_name("X-1"));
        assert!(!is_valid_species_name(""));
    }

    #[test]
    fn crc_invariants() {
        let c = crn(&["X1 + X2 -> Y"]);
        assert!(Crc::with_names(c.clone(), &["X1", "X2"], "Y").is_ok());
        assert!(matches!(
            Crc::with_names(c, &["X1", "Y"], "Y"),
            Err(ModelError::OutputIsInput(_))
        ));
    }

    #[test]
    fn drop_unused_keeps_protected() {
        let mut c = crn(&["A -> B"]);
        c.intern("Z");
        c.intern("W");
        let w = c.id("W").unwrap();
        let map = c.drop_unused_species(|s| s == w);
        assert_eq!(c.species(), &["A", "B", "W"]);
        assert_eq!(map[2], None);
        assert_eq!(map[3], Some(2));
    }
}
