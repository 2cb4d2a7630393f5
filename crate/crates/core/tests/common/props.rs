//! Random small CRNs and the semantic properties checked on them.

use crnc::rational::{int, rat};
use crnc::semantics::{
    apply_flux, max_output_bound, random_segment_walk, species_closure, SemanticsError, Trace,
};
use crnc::{Crc, Crn, Rational, Reaction, State};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

const NAMES: [&str; 5] = ["A", "B", "C", "D", "E"];

type Side = Vec<(usize, u32)>;

fn side(species: usize, nonempty: bool) -> impl Strategy<Value = Side> {
    prop::collection::vec((0..species, 1u32..=2), if nonempty { 1..=2 } else { 0..=2 })
}

/// A CRN over 2..=5 species with 1..=5 reactions; the last species is the
/// output.
pub fn small_crc() -> impl Strategy<Value = Crc> {
    (2usize..=5)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((side(n, true), side(n, false)), 1..=5)))
        .prop_map(|(n, reactions)| {
            let mut crn = Crn::new();
            for name in &NAMES[..n] {
                crn.declare(name).unwrap();
            }
            for (r, p) in reactions {
                crn.add_reaction(Reaction::new(r, p)).unwrap();
            }
            Crc::new(crn, vec![], n - 1, Default::default()).unwrap()
        })
}

fn value() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(int(0)), (1i64..=20, 1i64..=4).prop_map(|(p, q)| rat(p, q))]
}

pub fn state_for(n: usize) -> impl Strategy<Value = State> {
    prop::collection::vec(value(), n).prop_map(|v| State::from_vec(v).unwrap())
}

pub fn crc_and_state() -> impl Strategy<Value = (Crc, State)> {
    small_crc().prop_flat_map(|c| {
        let n = c.crn.num_species();
        (Just(c), state_for(n))
    })
}

pub fn crc_and_two_states() -> impl Strategy<Value = (Crc, State, State)> {
    small_crc().prop_flat_map(|c| {
        let n = c.crn.num_species();
        (Just(c), state_for(n), state_for(n))
    })
}

fn err(e: SemanticsError) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

/// Fires every applicable reaction at a common flux small enough to keep
/// the state nonnegative, `rounds` times.
fn cascade(crn: &Crn, x: &State, rounds: usize) -> Result<State, SemanticsError> {
    let mut s = x.clone();
    for _ in 0..rounds {
        let applicable = crn.applicable_reactions(&s);
        if applicable.is_empty() {
            break;
        }
        let mut rate = vec![Rational::zero(); crn.num_species()];
        let mut u = vec![Rational::zero(); crn.num_reactions()];
        for &j in &applicable {
            u[j] = int(1);
            for (sp, d) in crn.reactions()[j].net_changes() {
                rate[sp] += int(d);
            }
        }
        // Largest common flux keeping every species nonnegative, halved so
        // nothing present is exhausted.
        let mut scale: Option<Rational> = None;
        for (sp, r) in rate.iter().enumerate() {
            if r.is_negative() {
                let limit = s.get(sp) / -r;
                scale = Some(scale.map_or(limit.clone(), |m: Rational| m.min(limit)));
            }
        }
        let scale = scale.unwrap_or_else(|| int(1)) / int(2);
        let u: Vec<Rational> = u.into_iter().map(|v| v * &scale).collect();
        s = apply_flux(crn, &s, &u)?;
    }
    Ok(s)
}

/// Every species positive along random walks lies in the closure of the
/// start, and a cascade makes every closure species positive.
pub fn closure_is_exact(crc: &Crc, x: &State, seed: u64) -> Result<(), TestCaseError> {
    let closure = species_closure(&crc.crn, &x.present_mask());
    let walk = random_segment_walk(crc, x, 20, seed);
    for s in walk.states() {
        for sp in s.support() {
            prop_assert!(closure[sp], "{} positive outside the closure", crc.crn.name(sp));
        }
    }
    let end = cascade(&crc.crn, x, crc.crn.num_species() + 1).map_err(err)?;
    for (sp, &inside) in closure.iter().enumerate() {
        prop_assert_eq!(inside, end.get(sp).is_positive(), "species {}", crc.crn.name(sp));
    }
    Ok(())
}

/// Segmentwise convex combination of two walks from the same start
/// replays, ends at the combined end state, and stays under the output
/// bound.
pub fn convex_combination_replays(crc: &Crc, x: &State, seeds: (u64, u64), lambda: &Rational) -> Result<(), TestCaseError> {
    let a = random_segment_walk(crc, x, 12, seeds.0);
    let b = random_segment_walk(crc, x, 12, seeds.1);
    let m = crc.crn.num_reactions();
    let mu = int(1) - lambda;
    let zero = vec![Rational::zero(); m];
    let mut combined = Trace::new(x.clone());
    for k in 0..a.len().max(b.len()) {
        let ua = a.segments.get(k).map_or(&zero, |s| &s.flux);
        let ub = b.segments.get(k).map_or(&zero, |s| &s.flux);
        let u: Vec<Rational> = ua.iter().zip(ub).map(|(p, q)| lambda * p + &mu * q).collect();
        combined.push(&crc.crn, u).map_err(err)?;
    }
    combined.replay(&crc.crn).map_err(err)?;
    let expected = a.final_state.scaled(lambda).plus(&b.final_state.scaled(&mu));
    prop_assert_eq!(&combined.final_state, &expected);
    match max_output_bound(crc, x) {
        Ok(bound) => prop_assert!(expected.get(crc.output) <= &bound.value),
        Err(SemanticsError::UnboundedOutput) => {}
        Err(e) => return Err(err(e)),
    }
    Ok(())
}

/// The flux sequence of a walk from `x` also applies from `x + c` and ends
/// at `end + c`.
pub fn reachability_is_additive(crc: &Crc, x: &State, c: &State, seed: u64) -> Result<(), TestCaseError> {
    let walk = random_segment_walk(crc, x, 15, seed);
    let mut shifted = Trace::new(x.plus(c));
    for seg in &walk.segments {
        shifted.push(&crc.crn, seg.flux.clone()).map_err(err)?;
    }
    prop_assert_eq!(&shifted.final_state, &walk.final_state.plus(c));
    Ok(())
}
