use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use super::SemanticsError;
use crate::model::{Crn, State};
use crate::rational::Rational;

/// Per-reaction nonnegative flux for one straight-line segment.
pub type FluxVector = Vec<Rational>;

/// `s + M·u`, provided every positive-flux reaction is applicable at `s`
/// and the result is nonnegative.
pub fn apply_flux(crn: &Crn, s: &State, u: &[Rational]) -> Result<State, SemanticsError> {
    if u.len() != crn.num_reactions() {
        return Err(SemanticsError::DimensionMismatch {
            expected: crn.num_reactions(),
            found: u.len(),
        });
    }
    if s.len() != crn.num_species() {
        return Err(SemanticsError::DimensionMismatch {
            expected: crn.num_species(),
            found: s.len(),
        });
    }
    let mut next = s.values().to_vec();
    for (j, flux) in u.iter().enumerate() {
        if flux.is_negative() {
            return Err(SemanticsError::NegativeFlux {
                reaction: j,
                value: flux.clone(),
            });
        }
        if flux.is_zero() {
            continue;
        }
        let r = &crn.reactions()[j];
        if let Some((&missing, _)) = r.reactants.iter().find(|(sp, _)| !s.get(**sp).is_positive()) {
            return Err(SemanticsError::InapplicableReaction {
                reaction: j,
                text: crn.reaction_string(j),
                missing: crn.name(missing).to_string(),
            });
        }
        for (sp, d) in r.net_changes() {
            next[sp] += flux * Rational::from_integer(d.into());
        }
    }
    if let Some((i, v)) = next.iter().enumerate().find(|(_, v)| v.is_negative()) {
        return Err(SemanticsError::NegativeConcentration {
            species: crn.name(i).to_string(),
            value: v.clone(),
        });
    }
    Ok(State::from_vec(next).expect("checked nonnegative"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub start: State,
    pub flux: FluxVector,
}

/// A sequence of straight-line segments and the state they end in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub segments: Vec<Segment>,
    pub final_state: State,
}

impl Trace {
    pub fn new(start: State) -> Self {
        Trace {
            segments: Vec::new(),
            final_state: start,
        }
    }

    pub fn start(&self) -> &State {
        self.segments
            .first()
            .map(|s| &s.start)
            .unwrap_or(&self.final_state)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Applies `u` at the current final state and appends the segment.
    pub fn push(&mut self, crn: &Crn, u: FluxVector) -> Result<&State, SemanticsError> {
        let next = apply_flux(crn, &self.final_state, &u)?;
        let start = std::mem::replace(&mut self.final_state, next);
        self.segments.push(Segment { start, flux: u });
        Ok(&self.final_state)
    }

    /// States visited, starting state first.
    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.segments
            .iter()
            .map(|s| &s.start)
            .chain(std::iter::once(&self.final_state))
    }

    /// Re-checks every segment from scratch.
    pub fn replay(&self, crn: &Crn) -> Result<(), SemanticsError> {
        for (i, seg) in self.segments.iter().enumerate() {
            let end = apply_flux(crn, &seg.start, &seg.flux).map_err(|e| {
                SemanticsError::ReplayMismatch {
                    segment: i,
                    reason: e.to_string(),
                }
            })?;
            let expected = self
                .segments
                .get(i + 1)
                .map(|s| &s.start)
                .unwrap_or(&self.final_state);
            if &end != expected {
                return Err(SemanticsError::ReplayMismatch {
                    segment: i,
                    reason: "end state differs from next start".into(),
                });
            }
        }
        Ok(())
    }

    /// Sum of all segment fluxes.
    pub fn total_flux(&self, reactions: usize) -> FluxVector {
        let mut total = vec![Rational::zero(); reactions];
        for seg in &self.segments {
            for (t, u) in total.iter_mut().zip(&seg.flux) {
                if !u.is_zero() {
                    *t += u;
                }
            }
        }
        total
    }

    /// `seg i: flux r_j=p/q ...; state S=p/q ...`, one line per segment,
    /// listing positive fluxes and the nonzero species of the end state.
    pub fn dump(&self, crn: &Crn) -> String {
        let mut out = String::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let end = self
                .segments
                .get(i + 1)
                .map(|s| &s.start)
                .unwrap_or(&self.final_state);
            let _ = write!(out, "seg {i}: flux");
            for (j, u) in seg.flux.iter().enumerate() {
                if !u.is_zero() {
                    let _ = write!(out, " r_{j}={u}");
                }
            }
            let _ = write!(out, "; state");
            for (s, v) in end.values().iter().enumerate() {
                if !v.is_zero() {
                    let _ = write!(out, " {}={}", crn.name(s), v);
                }
            }
            out.push('\n');
        }
        out
    }
}
