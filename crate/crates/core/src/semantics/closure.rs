use crate::model::{Crc, Crn, SpeciesId, State};

/// Least superset of `present` closed under firing reactions whose
/// reactants all lie in the set. Returned as a membership mask.
pub fn species_closure(crn: &Crn, present: &[bool]) -> Vec<bool> {
    closure_within(crn, present, |_| true)
}

/// Closure using only the reactions accepted by `allowed`.
pub(crate) fn closure_within(
    crn: &Crn,
    present: &[bool],
    allowed: impl Fn(usize) -> bool,
) -> Vec<bool> {
    let mut set = present.to_vec();
    let mut fired = vec![false; crn.num_reactions()];
    loop {
        let mut changed = false;
        for (j, r) in crn.reactions().iter().enumerate() {
            if fired[j] || !allowed(j) || !r.reactants.keys().all(|&s| set[s]) {
                continue;
            }
            fired[j] = true;
            for &p in r.products.keys() {
                if !set[p] {
                    set[p] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return set;
        }
    }
}

/// Reactions whose reactants all lie in `closure`.
pub fn enabled_reactions(crn: &Crn, closure: &[bool]) -> Vec<usize> {
    (0..crn.num_reactions())
        .filter(|&j| crn.reactions()[j].reactants.keys().all(|&s| closure[s]))
        .collect()
}

/// True iff no reaction changing the output's net amount can ever become
/// applicable from `s`.
///
/// This is exact for every CRN: each species in the closure is present in
/// some reachable state where all of them are present at once, so any
/// enabled output-changing reaction can fire there with small flux.
pub fn is_output_stable(crc: &Crc, s: &State) -> bool {
    let closure = species_closure(&crc.crn, &s.present_mask());
    !crc.crn.reactions().iter().any(|r| {
        r.net(crc.output) != 0 && r.reactants.keys().all(|&sp| closure[sp])
    })
}

/// Species that can never become present from the CRC's possible initial
/// states (all inputs and context present).
pub fn unreachable_species(crc: &Crc) -> Vec<SpeciesId> {
    let mut present = vec![false; crc.crn.num_species()];
    for &s in crc.inputs.iter().chain(crc.context.keys()) {
        present[s] = true;
    }
    let closure = species_closure(&crc.crn, &present);
    (0..closure.len()).filter(|&s| !closure[s]).collect()
}
