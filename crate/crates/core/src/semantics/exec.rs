use num_traits::{One, Signed, Zero};

use super::closure::is_output_stable;
use super::flux::Trace;
use super::SemanticsError;
use crate::lp::{lp_solve, LinearProgram, LpOutcome, Relation};
use crate::model::{Crc, Crn, SpeciesId, State};
use crate::rational::{int, Rational};

/// Species order in which every reaction net-producing a species also
/// net-consumes an earlier one, if such an order exists.
///
/// Built greedily: a species can be placed once every one of its net
/// producers net-consumes something already placed. Placing a species
/// never makes another unplaceable, so the greedy order exists exactly when
/// some order does.
pub fn is_feedforward(crn: &Crn) -> Option<Vec<SpeciesId>> {
    let n = crn.num_species();
    let producers: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            (0..crn.num_reactions())
                .filter(|&j| crn.reactions()[j].net(s) > 0)
                .collect()
        })
        .collect();
    let consumed: Vec<Vec<SpeciesId>> = crn
        .reactions()
        .iter()
        .map(|r| r.net_consumed().collect())
        .collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let before = order.len();
        for s in 0..n {
            if placed[s] {
                continue;
            }
            let ok = producers[s]
                .iter()
                .all(|&j| consumed[j].iter().any(|&c| placed[c]));
            if ok {
                placed[s] = true;
                order.push(s);
            }
        }
        if order.len() == before {
            return None;
        }
    }
    Some(order)
}

/// Final state and the segments that led there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub final_state: State,
    pub trace: Trace,
}

impl Execution {
    pub fn output(&self, crc: &Crc) -> &Rational {
        self.final_state.get(crc.output)
    }
}

/// Deterministic fair execution of a feedforward CRC from state `x`.
///
/// Reactions are ranked by the latest position of their reactants in the
/// feedforward order (listing order breaks ties). Each pass fires every
/// applicable reaction, in rank order, with the largest flux its
/// net-consumed reactants allow; passes repeat until one fires nothing.
pub fn execute_topological(crc: &Crc, x: &State) -> Result<Execution, SemanticsError> {
    let order = is_feedforward(&crc.crn).ok_or(SemanticsError::NotFeedforward)?;
    let mut position = vec![0usize; crc.crn.num_species()];
    for (p, &s) in order.iter().enumerate() {
        position[s] = p;
    }
    let mut ranked: Vec<usize> = (0..crc.crn.num_reactions()).collect();
    ranked.sort_by_key(|&j| {
        crc.crn.reactions()[j]
            .reactants
            .keys()
            .map(|&s| position[s])
            .max()
            .unwrap_or(0)
    });
    execute_with_order(crc, x, &ranked)
}

/// Runs passes over the reactions in `order`, each fired to exhaustion of
/// its limiting net-consumed reactant, until a pass fires nothing. Reactions
/// not listed never fire. The result must be output stable.
pub fn execute_with_order(
    crc: &Crc,
    x: &State,
    order: &[usize],
) -> Result<Execution, SemanticsError> {
    let crn = &crc.crn;
    let mut consumers: Vec<Vec<(SpeciesId, Rational)>> = Vec::with_capacity(crn.num_reactions());
    for (j, r) in crn.reactions().iter().enumerate() {
        let c: Vec<(SpeciesId, Rational)> =
            r.net_consumed().map(|s| (s, int(-r.net(s)))).collect();
        if c.is_empty() {
            return Err(SemanticsError::NoNetConsumption {
                reaction: j,
                text: crn.reaction_string(j),
            });
        }
        consumers.push(c);
    }
    let limit = (crn.num_reactions() * crn.num_species()).max(1) + 1;
    let mut trace = Trace::new(x.clone());
    let mut passes = 0;
    loop {
        passes += 1;
        if passes > limit {
            return Err(SemanticsError::NonTerminating { passes: limit });
        }
        let mut fired = false;
        for &j in order {
            if !crn.is_applicable(j, &trace.final_state) {
                continue;
            }
            let state = &trace.final_state;
            let flux = consumers[j]
                .iter()
                .map(|(s, k)| state.get(*s) / k)
                .min()
                .expect("nonempty");
            if flux.is_zero() {
                continue;
            }
            debug_assert!(flux.is_positive());
            let mut u = vec![Rational::zero(); crn.num_reactions()];
            u[j] = flux;
            trace.push(crn, u)?;
            fired = true;
        }
        if !fired {
            break;
        }
    }
    // A pass without firing means nothing is applicable for listed reactions.
    if order.len() == crn.num_reactions() && !is_output_stable(crc, &trace.final_state) {
        return Err(SemanticsError::NotOutputStable);
    }
    Ok(Execution {
        final_state: trace.final_state.clone(),
        trace,
    })
}

/// Exact execution that does not need a feedforward order.
///
/// Each round first fires, with half their largest flux, applicable
/// reactions that produce an absent species until no more species can
/// appear this way, then applies one segment maximizing the total flux of
/// the applicable reactions. Rounds repeat until nothing is applicable.
/// Cyclic parts such as exact division gadgets settle in one round, where
/// the pass-based executor would only converge geometrically.
pub fn execute_joint(crc: &Crc, x: &State) -> Result<Execution, SemanticsError> {
    let crn = &crc.crn;
    let m = crn.stoich_matrix();
    let limit = (crn.num_reactions() * crn.num_species()).max(1) + 1;
    let mut trace = Trace::new(x.clone());
    let mut rounds = 0;
    loop {
        if crn.applicable_reactions(&trace.final_state).is_empty() {
            break;
        }
        rounds += 1;
        if rounds > limit {
            return Err(SemanticsError::NonTerminating { passes: limit });
        }
        loop {
            let state = &trace.final_state;
            let grow = crn.applicable_reactions(state).into_iter().find(|&j| {
                crn.reactions()[j]
                    .products
                    .keys()
                    .any(|&p| state.get(p).is_zero())
            });
            let Some(j) = grow else { break };
            let r = &crn.reactions()[j];
            let flux = r
                .net_consumed()
                .map(|s| state.get(s) / int(-r.net(s)))
                .min()
                .map(|f| f / int(2))
                .unwrap_or_else(Rational::one);
            let mut u = vec![Rational::zero(); crn.num_reactions()];
            u[j] = flux;
            trace.push(crn, u)?;
        }
        let applicable = crn.applicable_reactions(&trace.final_state);
        let mut lp = LinearProgram::new(vec![Rational::one(); applicable.len()]);
        for s in 0..crn.num_species() {
            let row: Vec<Rational> = applicable.iter().map(|&j| int(m.get(s, j))).collect();
            if row.iter().any(|v| v.is_negative()) {
                lp.add(row, Relation::Ge, -trace.final_state.get(s).clone());
            }
        }
        let u = match lp_solve(&lp)? {
            LpOutcome::Optimal { value, witness } if value.is_positive() => witness,
            LpOutcome::Optimal { .. } => break,
            _ => return Err(SemanticsError::NonTerminating { passes: rounds }),
        };
        let mut flux = vec![Rational::zero(); crn.num_reactions()];
        for (k, &j) in applicable.iter().enumerate() {
            flux[j] = u[k].clone();
        }
        trace.push(crn, flux)?;
    }
    if !is_output_stable(crc, &trace.final_state) {
        return Err(SemanticsError::NotOutputStable);
    }
    Ok(Execution {
        final_state: trace.final_state.clone(),
        trace,
    })
}
