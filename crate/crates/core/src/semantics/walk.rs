use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::flux::Trace;
use crate::model::{Crc, State};
use crate::rational::{int, rat, simple_dyadic_in, Rational};

/// Adversarial exploration: `steps` random straight-line segments from `x`.
///
/// Each step picks a random nonempty subset of the applicable reactions,
/// random fluxes `k/64`, and a scale `g` from the grid `k/16` of `(0, 1]`
/// applied to the largest scale keeping every concentration nonnegative.
/// `g = 1` lands exactly on the boundary and exhausts some species; for
/// `g < 1` the scale is rounded down to a short dyadic within a factor of
/// two, which keeps denominators small over long walks. Stops early once
/// nothing is applicable. Deterministic for a fixed seed.
pub fn random_segment_walk(crc: &Crc, x: &State, steps: usize, seed: u64) -> Trace {
    let crn = &crc.crn;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace::new(x.clone());
    let nets: Vec<Vec<(usize, i64)>> = crn
        .reactions()
        .iter()
        .map(|r| r.net_changes().into_iter().collect())
        .collect();
    for _ in 0..steps {
        let applicable = crn.applicable_reactions(&trace.final_state);
        if applicable.is_empty() {
            break;
        }
        let mut chosen: Vec<usize> = applicable
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        if chosen.is_empty() {
            chosen.push(*applicable.choose(&mut rng).expect("nonempty"));
        }
        let mut u = vec![Rational::zero(); crn.num_reactions()];
        for &j in &chosen {
            u[j] = rat(rng.gen_range(1..=64), 64);
        }
        let mut delta = vec![Rational::zero(); crn.num_species()];
        for &j in &chosen {
            for &(s, d) in &nets[j] {
                delta[s] += &u[j] * int(d);
            }
        }
        let state = &trace.final_state;
        let s_max = delta
            .iter()
            .enumerate()
            .filter(|(_, d)| d.is_negative())
            .map(|(s, d)| state.get(s) / -d)
            .min();
        let grid = rng.gen_range(1..=16i64);
        let scale = match s_max {
            // Nothing decreases: the walk may scale freely; stay at 1.
            None => rat(grid, 16),
            Some(m) if grid == 16 => m,
            Some(m) => {
                let hi = &m * rat(grid, 16);
                let lo = &hi / int(2);
                simple_dyadic_in(&lo, &hi)
            }
        };
        if scale.is_zero() {
            // Some chosen reaction drains a species that is already empty;
            // that cannot happen for applicable reactions, but stay safe.
            continue;
        }
        if !scale.is_one() {
            for v in u.iter_mut() {
                if !v.is_zero() {
                    *v *= &scale;
                }
            }
        }
        trace
            .push(crn, u)
            .expect("scaled flux keeps the state nonnegative");
    }
    trace
}
