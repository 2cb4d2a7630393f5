//! Random corpus of validated specs and small helpers shared by the
//! integration tests.
#![allow(dead_code)]

pub mod props;

use std::collections::BTreeMap;

use crnc::analysis::validate_spec;
use crnc::rational::{int, rat};
use crnc::spec::{FunctionSpec, LinearFn, MinOfLinear, Subset};
use crnc::Rational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coefficient(rng: &mut impl Rng) -> Rational {
    let pool = [(0, 1), (0, 1), (1, 1), (1, 1), (2, 1), (1, 2), (3, 2), (1, 3), (2, 3), (3, 1)];
    let (p, q) = *pool.choose(rng).unwrap();
    rat(p, q)
}

fn random_linear(rng: &mut impl Rng, n: usize) -> LinearFn {
    LinearFn::new((0..n).map(|_| coefficient(rng)).collect())
}

fn popcount_order(sets: &[Subset]) -> Vec<Subset> {
    let mut v = sets.to_vec();
    v.sort_by_key(|s| (s.count_ones(), *s));
    v
}

/// One candidate spec; may fail construction or validation.
fn candidate(rng: &mut impl Rng) -> Option<FunctionSpec> {
    let n = rng.gen_range(1..=3usize);
    let full: Subset = (1 << n) - 1;
    let inherit = rng.gen_bool(0.4);
    let mut listed = vec![];
    for s in 0..=full {
        let keep = if inherit {
            s == full || rng.gen_bool(0.3)
        } else {
            s == 0 || rng.gen_bool(0.4)
        };
        if keep {
            listed.push(s);
        }
    }
    let constructive = rng.gen_bool(0.75);
    let mut domains: BTreeMap<Subset, MinOfLinear> = BTreeMap::new();
    for s in popcount_order(&listed) {
        let k = rng.gen_range(1..=3);
        let comps = (0..k)
            .map(|_| {
                let mut b = random_linear(rng, n);
                if constructive {
                    // Dominate one component of every listed subset below.
                    for (&c, g) in domains.iter() {
                        if c & s == c && c != s {
                            let a = g.components.choose(rng).unwrap();
                            for (bi, ai) in b.coeffs.iter_mut().zip(&a.coeffs) {
                                if ai > bi {
                                    *bi = ai.clone();
                                }
                            }
                        }
                    }
                }
                b
            })
            .collect();
        domains.insert(s, MinOfLinear::new(comps));
    }
    let spec = FunctionSpec::new(n, inherit, domains).ok()?;
    validate_spec(&spec).is_valid().then_some(spec)
}

/// `count` validated specs with at most three inputs and three components
/// per domain. Deterministic in `seed`.
pub fn corpus(count: usize, seed: u64) -> Vec<FunctionSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if let Some(spec) = candidate(&mut rng) {
            out.push(spec);
        }
    }
    out
}

/// Evaluates by scanning the filled domain table for the largest domain
/// inside the support.
pub fn oracle_eval(spec: &FunctionSpec, x: &[Rational]) -> Rational {
    let u: Subset = x
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .fold(0, |m, (i, _)| m | (1 << i));
    let inside: Vec<Subset> = spec.domains().keys().copied().filter(|&s| s & u == s).collect();
    let maximal: Vec<Subset> = inside
        .iter()
        .copied()
        .filter(|&s| !inside.iter().any(|&t| t != s && t & s == s))
        .collect();
    assert_eq!(maximal.len(), 1, "support {u:b} has no unique domain");
    spec.domains()[&maximal[0]]
        .components
        .iter()
        .map(|g| {
            g.coeffs.iter().zip(x).fold(g.constant.clone(), |acc, (a, v)| acc + a * v)
        })
        .min()
        .unwrap()
}

/// Positive rationals `p/q` with `p <= 60`, `q <= 7`.
pub fn positive(rng: &mut impl Rng) -> Rational {
    rat(rng.gen_range(1..=60), rng.gen_range(1..=7))
}

/// `count` inputs for `n` variables; the first `2^n` cover every support
/// pattern once, the rest have random supports.
pub fn inputs_covering(n: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let patterns = 1usize << n;
    (0..count.max(patterns))
        .map(|k| {
            let support = if k < patterns { k } else { rng.gen_range(0..patterns) };
            (0..n)
                .map(|i| if support & (1 << i) != 0 { positive(&mut rng) } else { int(0) })
                .collect()
        })
        .collect()
}

pub fn support_of(x: &[Rational]) -> usize {
    x.iter().enumerate().filter(|(_, v)| !v.is_zero()).fold(0, |m, (i, _)| m | (1 << i))
}
