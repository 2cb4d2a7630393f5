//! Segment-reachability semantics over exact rational states.

mod bound;
mod closure;
mod exec;
mod flux;
mod walk;

pub use bound::{max_output_bound, OutputBound};
pub use closure::{enabled_reactions, is_output_stable, species_closure, unreachable_species};
pub use exec::{execute_joint, execute_topological, execute_with_order, is_feedforward, Execution};
pub use flux::{apply_flux, FluxVector, Segment, Trace};
pub use walk::random_segment_walk;

use thiserror::Error;

use crate::lp::LpError;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("reaction {reaction} ({text}) is not applicable: `{missing}` is absent")]
    InapplicableReaction {
        reaction: usize,
        text: String,
        missing: String,
    },
    #[error("flux would drive `{species}` to {value}")]
    NegativeConcentration { species: String, value: Rational },
    #[error("negative flux {value} on reaction {reaction}")]
    NegativeFlux { reaction: usize, value: Rational },
    #[error("expected {expected} entries, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("output is unbounded over the reachable states")]
    UnboundedOutput,
    #[error("network is not feedforward")]
    NotFeedforward,
    #[error("reaction {reaction} ({text}) net-consumes no species")]
    NoNetConsumption { reaction: usize, text: String },
    #[error("execution did not settle within {passes} passes")]
    NonTerminating { passes: usize },
    #[error("executor stopped in a state that is not output stable")]
    NotOutputStable,
    #[error("segment {segment} does not replay: {reason}")]
    ReplayMismatch { segment: usize, reason: String },
    #[error("attaining trace failed verification: {0}")]
    WitnessRejected(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}
