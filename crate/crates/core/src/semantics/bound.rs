use num_traits::{One, Signed, Zero};

use super::closure::{closure_within, enabled_reactions, species_closure};
use super::flux::Trace;
use super::SemanticsError;
use crate::lp::{lp_solve, LinearProgram, LpOutcome, Relation};
use crate::model::{Crc, Crn, State};
use crate::rational::{int, Rational};

/// Supremum of the output over all states reachable from `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputBound {
    pub value: Rational,
    /// A replay-verified trace ending with the output at `value`.
    pub attained_witness: Option<Trace>,
    /// Set when no total flux reaching `value` can actually be scheduled.
    pub possibly_unattained: bool,
}

/// `x(Y) + max (M·u)(Y)` over `u >= 0` supported on the reactions enabled by
/// the closure of `x`, subject to `x + M·u >= 0`.
///
/// When the optimum is reachable the bound carries a trace attaining it:
/// small fluxes first make every needed species present, then one segment
/// delivers the rest of an optimal flux.
pub fn max_output_bound(crc: &Crc, x: &State) -> Result<OutputBound, SemanticsError> {
    let crn = &crc.crn;
    if x.len() != crn.num_species() {
        return Err(SemanticsError::DimensionMismatch {
            expected: crn.num_species(),
            found: x.len(),
        });
    }
    let closure = species_closure(crn, &x.present_mask());
    let allowed = enabled_reactions(crn, &closure);
    let base = x.get(crc.output).clone();

    let (opt, witness) = match solve_restricted(crc, x, &allowed, None)? {
        LpOutcome::Optimal { value, witness } => (value, witness),
        LpOutcome::Unbounded => return Err(SemanticsError::UnboundedOutput),
        // u = 0 is always feasible
        LpOutcome::Infeasible => unreachable!("zero flux is feasible"),
    };
    let value = &base + &opt;

    let full = expand(crn, &allowed, &witness);
    if self_enabling(crn, x, &full) {
        let trace = cascade(crc, x, &full, &value)?;
        return Ok(OutputBound {
            value,
            attained_witness: Some(trace),
            possibly_unattained: false,
        });
    }

    // Shrink the reaction set to those usable in an optimal flux whose
    // support can be switched on from x, until it stabilizes.
    let mut active = allowed;
    loop {
        let outcome = solve_restricted(crc, x, &active, None)?;
        match outcome.value() {
            Some(v) if *v == opt => {}
            _ => {
                return Ok(OutputBound {
                    value,
                    attained_witness: None,
                    possibly_unattained: true,
                })
            }
        }
        let (support, flux) = optimal_face_support(crc, x, &active, &opt)?;
        let support_mask: Vec<bool> = (0..crn.num_reactions())
            .map(|j| support.contains(&j))
            .collect();
        let reach = closure_within(crn, &x.present_mask(), |j| support_mask[j]);
        let next: Vec<usize> = support
            .iter()
            .copied()
            .filter(|&j| crn.reactions()[j].reactants.keys().all(|&s| reach[s]))
            .collect();
        if next.len() == support.len() {
            let trace = cascade(crc, x, &flux, &value)?;
            return Ok(OutputBound {
                value,
                attained_witness: Some(trace),
                possibly_unattained: false,
            });
        }
        active = next;
    }
}

/// Column `k` of the LP is reaction `active[k]`. With `extra` set, appends
/// variables `t_k` (one per listed column) with `t_k <= u_k`, `t_k <= 1`,
/// requires the output gain to reach the given optimum, and maximizes the
/// sum of the `t_k` instead.
fn solve_restricted(
    crc: &Crc,
    x: &State,
    active: &[usize],
    extra: Option<(&[usize], &Rational)>,
) -> Result<LpOutcome, SemanticsError> {
    let crn = &crc.crn;
    let n = active.len();
    let t_count = extra.map_or(0, |(cols, _)| cols.len());
    let width = n + t_count;
    let gain: Vec<Rational> = active
        .iter()
        .map(|&j| int(crn.reactions()[j].net(crc.output)))
        .collect();
    let mut objective = vec![Rational::zero(); width];
    match extra {
        None => objective[..n].clone_from_slice(&gain),
        Some(_) => {
            for v in objective.iter_mut().skip(n) {
                *v = Rational::one();
            }
        }
    }
    let mut lp = LinearProgram::new(objective);
    for s in 0..crn.num_species() {
        let row: Vec<i64> = active.iter().map(|&j| crn.reactions()[j].net(s)).collect();
        if row.iter().all(|&d| d >= 0) {
            continue;
        }
        let mut coeffs: Vec<Rational> = row.iter().map(|&d| int(-d)).collect();
        coeffs.resize(width, Rational::zero());
        lp.add(coeffs, Relation::Le, x.get(s).clone());
    }
    if let Some((cols, target)) = extra {
        let mut row = gain.clone();
        row.resize(width, Rational::zero());
        lp.add(row, Relation::Ge, target.clone());
        for (k, &col) in cols.iter().enumerate() {
            let mut row = vec![Rational::zero(); width];
            row[n + k] = Rational::one();
            row[col] = -Rational::one();
            lp.add(row, Relation::Le, Rational::zero());
            let mut cap = vec![Rational::zero(); width];
            cap[n + k] = Rational::one();
            lp.add(cap, Relation::Le, Rational::one());
        }
    }
    Ok(lp_solve(&lp)?)
}

/// Reactions (as crn indices) that are positive in some optimal flux over
/// `active`, with an optimal flux positive on exactly those reactions.
fn optimal_face_support(
    crc: &Crc,
    x: &State,
    active: &[usize],
    opt: &Rational,
) -> Result<(Vec<usize>, Vec<Rational>), SemanticsError> {
    let crn = &crc.crn;
    let mut unknown: Vec<usize> = (0..active.len()).collect();
    let mut found = vec![false; active.len()];
    let mut points: Vec<Vec<Rational>> = Vec::new();
    while !unknown.is_empty() {
        let outcome = solve_restricted(crc, x, active, Some((&unknown, opt)))?;
        let LpOutcome::Optimal { value, witness } = outcome else {
            break;
        };
        if !value.is_positive() {
            break;
        }
        let point = witness[..active.len()].to_vec();
        for (k, v) in point.iter().enumerate() {
            if v.is_positive() {
                found[k] = true;
            }
        }
        unknown.retain(|&k| !found[k]);
        points.push(point);
    }
    if points.is_empty() {
        // Only the zero flux is optimal on the face (opt must be 0).
        let LpOutcome::Optimal { witness, .. } = solve_restricted(crc, x, active, None)? else {
            unreachable!("feasible program");
        };
        for (k, v) in witness.iter().enumerate() {
            if v.is_positive() {
                found[k] = true;
            }
        }
        points.push(witness);
    }
    // The average of optimal points is optimal and positive on their union.
    let weight = Rational::new(1.into(), (points.len() as i64).into());
    let mut avg = vec![Rational::zero(); active.len()];
    for p in &points {
        for (a, v) in avg.iter_mut().zip(p) {
            if !v.is_zero() {
                *a += v * &weight;
            }
        }
    }
    let support: Vec<usize> = (0..active.len())
        .filter(|&k| avg[k].is_positive())
        .map(|k| active[k])
        .collect();
    Ok((support, expand(crn, active, &avg)))
}

fn expand(crn: &Crn, active: &[usize], flux: &[Rational]) -> Vec<Rational> {
    let mut full = vec![Rational::zero(); crn.num_reactions()];
    for (k, &j) in active.iter().enumerate() {
        full[j] = flux[k].clone();
    }
    full
}

/// True iff the reactions carrying flux can all be switched on from `x`
/// using only each other.
fn self_enabling(crn: &Crn, x: &State, flux: &[Rational]) -> bool {
    let reach = closure_within(crn, &x.present_mask(), |j| flux[j].is_positive());
    (0..crn.num_reactions())
        .filter(|&j| flux[j].is_positive())
        .all(|j| crn.reactions()[j].reactants.keys().all(|&s| reach[s]))
}

/// Builds the attaining trace for a self-enabling total flux `total`.
///
/// Reactions that make a new species present fire first, one per segment,
/// the j-th with flux eps/(2K)^(j+1), where eps is the smallest of the
/// initial positive concentrations and the positive entries of `total`, and
/// K the largest reactant stoichiometry among them. Each species made
/// present this way is consumed afterwards by strictly less than it
/// received, so it stays present. One final segment delivers the rest.
fn cascade(
    crc: &Crc,
    x: &State,
    total: &[Rational],
    value: &Rational,
) -> Result<Trace, SemanticsError> {
    let crn = &crc.crn;
    let support: Vec<usize> = (0..crn.num_reactions())
        .filter(|&j| total[j].is_positive())
        .collect();
    let mut trace = Trace::new(x.clone());
    if support.is_empty() {
        return check_witness(crc, trace, value);
    }
    let eps = x
        .values()
        .iter()
        .filter(|v| v.is_positive())
        .chain(support.iter().map(|&j| &total[j]))
        .min()
        .cloned()
        .expect("support is nonempty");
    let k = support
        .iter()
        .flat_map(|&j| crn.reactions()[j].reactants.values().copied())
        .max()
        .unwrap_or(1);
    let ratio = int(2 * i64::from(k));

    let mut present = x.present_mask();
    let mut used = vec![Rational::zero(); crn.num_reactions()];
    let mut denom = Rational::one();
    loop {
        let next = support.iter().copied().find(|&j| {
            let r = &crn.reactions()[j];
            r.reactants.keys().all(|&s| present[s]) && r.products.keys().any(|&s| !present[s])
        });
        let Some(j) = next else {
            break;
        };
        denom *= &ratio;
        let f = &eps / &denom;
        let mut u = vec![Rational::zero(); crn.num_reactions()];
        u[j] = f.clone();
        trace.push(crn, u)?;
        used[j] += f;
        for &p in crn.reactions()[j].products.keys() {
            present[p] = true;
        }
    }
    let rest: Vec<Rational> = total.iter().zip(&used).map(|(t, w)| t - w).collect();
    trace.push(crn, rest)?;
    check_witness(crc, trace, value)
}

fn check_witness(crc: &Crc, trace: Trace, value: &Rational) -> Result<Trace, SemanticsError> {
    trace
        .replay(&crc.crn)
        .map_err(|e| SemanticsError::WitnessRejected(e.to_string()))?;
    if trace.final_state.get(crc.output) != value {
        return Err(SemanticsError::WitnessRejected(format!(
            "trace ends at {} instead of {value}",
            trace.final_state.get(crc.output)
        )));
    }
    Ok(trace)
}
