//! Rate-independent chemical reaction networks: exact segment semantics,
//! a compiler for superadditive piecewise-linear functions, composition,
//! spec analysis and a mass-action simulator.

pub mod analysis;
pub mod compiler;
pub mod composition;
pub mod error;
pub mod format;
pub mod linalg;
pub mod lp;
pub mod massaction;
pub mod model;
pub mod rational;
pub mod semantics;
pub mod spec;

pub use error::Error;
pub use format::{parse_crc, parse_crn, serialize_crc, serialize_crn};
pub use lp::{lp_solve, LinearProgram, LpOutcome, Relation};
pub use model::{Crc, Crn, Reaction, SpeciesId, State, StoichMatrix};
pub use rational::{parse_rational, rat, Rational};
