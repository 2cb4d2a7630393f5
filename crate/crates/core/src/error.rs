//! Umbrella error for callers that drive several modules.

use thiserror::Error;

use crate::compiler::CompileError;
use crate::composition::CompositionError;
use crate::format::FormatError;
use crate::lp::LpError;
use crate::massaction::MassActionError;
use crate::model::ModelError;
use crate::rational::RationalError;
use crate::semantics::SemanticsError;
use crate::spec::SpecError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Composition(#[from] CompositionError),
    #[error(transparent)]
    MassAction(#[from] MassActionError),
}

impl Error {
    /// True for failures caused by the caller's input rather than by a
    /// broken internal invariant.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Lp(_) => false,
            Error::Semantics(e) => !matches!(
                e,
                SemanticsError::Lp(_)
                    | SemanticsError::ReplayMismatch { .. }
                    | SemanticsError::WitnessRejected(_)
            ),
            _ => true,
        }
    }
}
