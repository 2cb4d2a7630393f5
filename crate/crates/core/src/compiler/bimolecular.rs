use std::collections::BTreeMap;

use crate::model::{Crn, Reaction, SpeciesId};

struct Fresh {
    next: usize,
}

impl Fresh {
    fn take(&mut self, crn: &mut Crn) -> SpeciesId {
        loop {
            self.next += 1;
            let name = format!("W{}", self.next);
            if crn.id(&name).is_none() {
                return crn.intern(&name);
            }
        }
    }
}

/// Emits reactions that turn `k` molecules of `s` into one unit of a
/// single species, returning that species.
///
/// Powers of two pair up (`X + X -> W`, `W + W -> W'`). An odd factor
/// `q ≥ 3` uses species `A_1 = X, A_2, .., A_{q-1}` counting units with
/// `A_i + A_j -> A_{i+j}` below `q`, `-> T` at `q` and `-> T + A_{i+j-q}`
/// above it; every terminal state has all units converted into `T`. This
/// part is not feedforward.
fn aggregate(s: SpeciesId, k: u32, crn: &mut Crn, fresh: &mut Fresh, out: &mut Vec<Reaction>) -> SpeciesId {
    let mut unit = s;
    let mut k = k;
    let odd = k >> k.trailing_zeros();
    if odd > 1 {
        let q = odd as usize;
        let mut a = vec![unit; q];
        for slot in a.iter_mut().skip(2) {
            *slot = fresh.take(crn);
        }
        let t = fresh.take(crn);
        for i in 1..q {
            for j in i..q {
                let products: Vec<(SpeciesId, u32)> = match i + j {
                    m if m < q => vec![(a[m], 1)],
                    m if m == q => vec![(t, 1)],
                    m => vec![(t, 1), (a[m - q], 1)],
                };
                out.push(Reaction::new([(a[i], 1), (a[j], 1)], products));
            }
        }
        unit = t;
        k /= odd;
    }
    while k > 1 {
        let w = fresh.take(crn);
        out.push(Reaction::new([(unit, 2)], [(w, 1)]));
        unit = w;
        k /= 2;
    }
    unit
}

fn expand(side: &BTreeMap<SpeciesId, u32>) -> Vec<SpeciesId> {
    side.iter()
        .flat_map(|(&s, &k)| std::iter::repeat(s).take(k as usize))
        .collect()
}

/// Splits `r` into reactions with at most two reactant and two product
/// molecules, appending them to `out`.
fn split(r: &Reaction, crn: &mut Crn, fresh: &mut Fresh, out: &mut Vec<Reaction>) {
    if r.reactant_count() <= 2 && r.product_count() <= 2 {
        out.push(r.clone());
        return;
    }
    // Repeated reactants collapse to one unit each; catalysts join last.
    let mut units = Vec::new();
    let mut catalysts = Vec::new();
    for (&s, &k) in &r.reactants {
        let list = if r.net(s) >= 0 { &mut catalysts } else { &mut units };
        match k {
            1 => list.push(s),
            // Exactly `2 X` on the left: already two molecules.
            2 if r.reactant_count() == 2 => list.extend([s, s]),
            _ => list.push(aggregate(s, k, crn, fresh, out)),
        }
    }
    units.extend(catalysts);
    let products = expand(&r.products);

    // Join the units pairwise along a chain; the last join feeds the
    // product side.
    let mut left = vec![units[0]];
    if units.len() >= 2 {
        left.push(units[1]);
    }
    for &u in units.iter().skip(2) {
        let w = fresh.take(crn);
        out.push(Reaction::new(left.iter().map(|&s| (s, 1)), [(w, 1)]));
        left = vec![w, u];
    }
    if products.len() <= 2 {
        out.push(Reaction::new(left.iter().map(|&s| (s, 1)), products.iter().map(|&s| (s, 1))));
        return;
    }
    // Peel products off one at a time: left -> W + p_k, W -> W' + p_{k-1}, ...
    let mut rest = products.len();
    let mut w = fresh.take(crn);
    out.push(Reaction::new(
        left.iter().map(|&s| (s, 1)),
        [(w, 1), (products[rest - 1], 1)],
    ));
    rest -= 1;
    while rest > 2 {
        let next = fresh.take(crn);
        out.push(Reaction::new([(w, 1)], [(next, 1), (products[rest - 1], 1)]));
        w = next;
        rest -= 1;
    }
    out.push(Reaction::new([(w, 1)], [(products[0], 1), (products[1], 1)]));
}

/// Decomposition that also reports, for each new reaction, the index of
/// the original reaction it came from. Original species keep their ids.
pub(crate) fn decompose_tracked(crn: &Crn) -> (Crn, Vec<usize>) {
    let mut out = crn.clone();
    let mut fresh = Fresh { next: 0 };
    let mut reactions = Vec::new();
    let mut origin = Vec::new();
    for (j, r) in crn.reactions().iter().enumerate() {
        let before = reactions.len();
        split(r, &mut out, &mut fresh, &mut reactions);
        origin.extend(std::iter::repeat(j).take(reactions.len() - before));
    }
    out.replace_reactions(reactions);
    (out, origin)
}

/// Rewrites every reaction into reactions with at most two reactant and at
/// most two product molecules, using fresh species `W1, W2, ...`.
///
/// Distinct reactants are joined along a chain and products are peeled
/// off by splitter reactions. A reactant with stoichiometry `k` is first
/// aggregated into one species worth `k` molecules; when `k` has an odd
/// factor of at least three, the aggregation is cyclic, so the result is
/// no longer feedforward.
pub fn decompose_bimolecular(crn: &Crn) -> Crn {
    decompose_tracked(crn).0
}
