use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};

use super::network::{compile_named, input_name};
use super::{CompileError, CompileOptions, CompileReport};
use crate::model::{Crc, Reaction};
use crate::rational::Rational;
use crate::spec::FunctionSpec;

pub const GAMMA_NAME: &str = "S_gamma";

/// Compiles a spec whose components may carry constant terms.
///
/// Constants become coefficients on an extra input `γ`; the extension is
/// validated and compiled like any spec, and `γ` becomes a context species
/// `S_gamma` with initial concentration 1.
pub fn compile_with_context(
    spec: &FunctionSpec,
    options: CompileOptions,
) -> Result<(Crc, CompileReport), CompileError> {
    let n = spec.inputs();
    let ext = spec.linear_extension()?;
    let mut names: Vec<String> = (0..n).map(input_name).collect();
    names.push(GAMMA_NAME.to_string());
    let (crc, report) = compile_named(&ext, &names, options)?;
    let gamma = crc.crn.require(GAMMA_NAME)?;
    let inputs: Vec<_> = crc.inputs.iter().copied().filter(|&s| s != gamma).collect();
    let context = BTreeMap::from([(gamma, Rational::one())]);
    let crc = Crc::new(crc.crn, inputs, crc.output, context)?;
    Ok((crc, report))
}

/// Replaces every context value other than 1 by a fresh species `S'` at
/// concentration 1 and a leading reaction `b S' -> a S` for value `a/b`.
/// Zero-valued context entries are dropped.
pub fn realize_unit_context(crc: &Crc) -> Result<Crc, CompileError> {
    let mut crn = crc.crn.clone();
    let mut preamble = Vec::new();
    let mut context = BTreeMap::new();
    for (&s, v) in &crc.context {
        if v.is_zero() {
            continue;
        }
        if v.is_one() {
            context.insert(s, v.clone());
            continue;
        }
        let a = v.numer().to_u32().ok_or_else(|| CompileError::CoefficientTooLarge(v.clone()))?;
        let b = v.denom().to_u32().ok_or_else(|| CompileError::CoefficientTooLarge(v.clone()))?;
        let mut name = format!("{}'", crn.name(s));
        while crn.id(&name).is_some() {
            name.push('\'');
        }
        let source = crn.declare(&name)?;
        preamble.push(Reaction::new([(source, b)], [(s, a)]));
        context.insert(source, Rational::one());
    }
    preamble.extend(crn.reactions().iter().cloned());
    crn.replace_reactions(preamble);
    Ok(Crc::new(crn, crc.inputs.clone(), crc.output, context)?)
}
