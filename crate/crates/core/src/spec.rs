//! Function specifications: one min-of-linear piece per listed set of
//! present inputs.
//!
//! A spec lists sets `S ⊆ {1..n}` with a piece `g_S`. An input whose set of
//! positive coordinates is `U` is evaluated with the piece of the largest
//! listed set contained in `U`; that set must be unique. When every subset
//! is listed this is the plain "one piece per support pattern" form, and
//! `inherit_default` fills unlisted subsets with the full-set piece
//! restricted to the subset.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::rational::{dot, format_rational, parse_rational, Rational};

/// Bitmask over inputs: input `i` (1-based) is bit `i - 1`.
pub type Subset = u32;

pub const MAX_SPEC_INPUTS: usize = 16;

pub fn is_subset(a: Subset, b: Subset) -> bool {
    a & !b == 0
}

pub fn full_set(n: usize) -> Subset {
    if n == 0 {
        0
    } else {
        (1u32 << n) - 1
    }
}

/// Bitmask of the strictly positive coordinates.
pub fn support(x: &[Rational]) -> Subset {
    x.iter()
        .enumerate()
        .filter(|(_, v)| v.is_positive())
        .fold(0, |m, (i, _)| m | (1 << i))
}

/// `{}` or `{1,3}`.
pub struct SubsetDisplay(pub Subset);

impl fmt::Display for SubsetDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for i in 0..32 {
            if self.0 & (1 << i) != 0 {
                if !first {
                    write!(f, ",")?;
                }
                first = false;
                write!(f, "{}", i + 1)?;
            }
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("malformed spec: {0}")]
    Malformed(String),
    #[error("{0} inputs exceed the supported maximum of {MAX_SPEC_INPUTS}")]
    TooManyInputs(usize),
    #[error("input index {index} outside 1..={n}")]
    IndexOutOfRange { index: i64, n: usize },
    #[error("domain {0} listed twice")]
    DuplicateDomain(String),
    #[error("domain {domain}: component has {found} coefficients, expected {expected}")]
    ComponentLength {
        domain: String,
        expected: usize,
        found: usize,
    },
    #[error("inherit_default requires the full-set domain")]
    MissingFullDomain,
    #[error("no listed domain is contained in support {0}")]
    Uncovered(String),
    #[error("support {support} has several maximal listed domains ({first} and {second})")]
    Ambiguous {
        support: String,
        first: String,
        second: String,
    },
    #[error("expected {expected} inputs, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("negative input coordinate {0}")]
    NegativeInput(String),
    #[error("constant terms are only allowed when compiling with initial context")]
    ConstantWithoutContext,
}

/// `coeffs · x + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearFn {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl LinearFn {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        LinearFn {
            coeffs,
            constant: Rational::zero(),
        }
    }

    pub fn zero(n: usize) -> Self {
        LinearFn::new(vec![Rational::zero(); n])
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x) + &self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Index of the single coefficient when `self` is a unit vector.
    pub fn unit_index(&self) -> Option<usize> {
        if !self.constant.is_zero() {
            return None;
        }
        let mut found = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if found.is_some() || *c != Rational::from_integer(1.into()) {
                return None;
            }
            found = Some(i);
        }
        found
    }
}

/// Minimum of finitely many linear functions; never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinOfLinear {
    pub components: Vec<LinearFn>,
}

impl MinOfLinear {
    pub fn new(components: Vec<LinearFn>) -> Self {
        assert!(!components.is_empty(), "min of nothing");
        MinOfLinear { components }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.components
            .iter()
            .map(|c| c.eval(x))
            .min()
            .expect("nonempty")
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().any(|c| c.is_zero())
    }
}

/// A validated-shape spec. Construction fills inherited domains, turns
/// empty pieces into the zero function and, when every subset ends up
/// listed, zeroes coefficients outside each piece's own subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpec {
    n: usize,
    inherit_default: bool,
    domains: BTreeMap<Subset, MinOfLinear>,
    /// Sets listed in the source, before inheritance.
    listed: BTreeSet<Subset>,
    /// Largest listed set contained in each support.
    class: Vec<Subset>,
    canonicalized: usize,
}

impl FunctionSpec {
    pub fn new(
        n: usize,
        inherit_default: bool,
        domains: BTreeMap<Subset, MinOfLinear>,
    ) -> Result<Self, SpecError> {
        if n > MAX_SPEC_INPUTS {
            return Err(SpecError::TooManyInputs(n));
        }
        let full = full_set(n);
        let listed: BTreeSet<Subset> = domains.keys().copied().collect();
        for (&s, g) in &domains {
            if !is_subset(s, full) {
                return Err(SpecError::Malformed(format!(
                    "domain {} mentions inputs beyond {n}",
                    SubsetDisplay(s)
                )));
            }
            for c in &g.components {
                if c.coeffs.len() != n {
                    return Err(SpecError::ComponentLength {
                        domain: SubsetDisplay(s).to_string(),
                        expected: n,
                        found: c.coeffs.len(),
                    });
                }
            }
        }
        let mut domains = domains;
        if inherit_default {
            let top = domains.get(&full).cloned().ok_or(SpecError::MissingFullDomain)?;
            for s in 0..=full {
                domains.entry(s).or_insert_with(|| restrict(&top, s));
            }
        }
        let complete = domains.len() == (full as usize) + 1;
        let mut canonicalized = 0;
        if complete {
            for (&s, g) in domains.iter_mut() {
                for c in g.components.iter_mut() {
                    for (i, a) in c.coeffs.iter_mut().enumerate() {
                        if s & (1 << i) == 0 && !a.is_zero() {
                            *a = Rational::zero();
                            canonicalized += 1;
                        }
                    }
                }
            }
        }
        let class = class_table(n, &domains)?;
        Ok(FunctionSpec {
            n,
            inherit_default,
            domains,
            listed,
            class,
            canonicalized,
        })
    }

    pub fn inputs(&self) -> usize {
        self.n
    }

    pub fn inherit_default(&self) -> bool {
        self.inherit_default
    }

    /// Effective domains (after inheritance), keyed by subset.
    pub fn domains(&self) -> &BTreeMap<Subset, MinOfLinear> {
        &self.domains
    }

    pub fn listed(&self) -> &BTreeSet<Subset> {
        &self.listed
    }

    pub fn piece(&self, s: Subset) -> Option<&MinOfLinear> {
        self.domains.get(&s)
    }

    /// Number of coefficients zeroed outside their piece's own subset.
    pub fn canonicalized_coefficients(&self) -> usize {
        self.canonicalized
    }

    /// True when every subset of the inputs has its own piece.
    pub fn is_complete(&self) -> bool {
        self.domains.len() == (full_set(self.n) as usize) + 1
    }

    /// The listed set whose piece is used on inputs with support `u`.
    pub fn class_of(&self, u: Subset) -> Subset {
        self.class[u as usize]
    }

    pub fn has_constants(&self) -> bool {
        self.domains
            .values()
            .flat_map(|g| &g.components)
            .any(|c| !c.constant.is_zero())
    }

    pub fn check_input(&self, x: &[Rational]) -> Result<(), SpecError> {
        if x.len() != self.n {
            return Err(SpecError::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        if let Some(v) = x.iter().find(|v| v.is_negative()) {
            return Err(SpecError::NegativeInput(v.to_string()));
        }
        Ok(())
    }

    /// Constants become coefficients of a new last input `γ`, evaluated
    /// at `γ = 1`. Listed sets are unchanged, so `γ` never selects a piece.
    pub fn linear_extension(&self) -> Result<FunctionSpec, SpecError> {
        let domains = self
            .domains
            .iter()
            .map(|(&s, g)| {
                let comps = g
                    .components
                    .iter()
                    .map(|c| {
                        let mut coeffs = c.coeffs.clone();
                        coeffs.push(c.constant.clone());
                        LinearFn::new(coeffs)
                    })
                    .collect();
                (s, MinOfLinear::new(comps))
            })
            .collect();
        FunctionSpec::new(self.n + 1, false, domains)
    }

    pub fn to_json(&self) -> Value {
        let domains: Vec<Value> = self
            .domains
            .iter()
            .map(|(&s, g)| {
                let present: Vec<usize> = (0..self.n).filter(|i| s & (1 << i) != 0).map(|i| i + 1).collect();
                let rows: Vec<Value> = g
                    .components
                    .iter()
                    .map(|c| {
                        let mut row: Vec<String> = c.coeffs.iter().map(format_rational).collect();
                        if !c.constant.is_zero() {
                            row.push(format_rational(&c.constant));
                        }
                        json!(row)
                    })
                    .collect();
                json!({"present": present, "min_of": rows})
            })
            .collect();
        json!({"inputs": self.n, "inherit_default": false, "domains": domains})
    }
}

fn restrict(g: &MinOfLinear, s: Subset) -> MinOfLinear {
    let comps = g
        .components
        .iter()
        .map(|c| LinearFn {
            coeffs: c
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, a)| if s & (1 << i) != 0 { a.clone() } else { Rational::zero() })
                .collect(),
            constant: c.constant.clone(),
        })
        .collect();
    MinOfLinear::new(comps)
}

fn class_table(n: usize, domains: &BTreeMap<Subset, MinOfLinear>) -> Result<Vec<Subset>, SpecError> {
    let full = full_set(n);
    let mut table = Vec::with_capacity(full as usize + 1);
    for u in 0..=full {
        let inside: Vec<Subset> = domains.keys().copied().filter(|&s| is_subset(s, u)).collect();
        let maximal: Vec<Subset> = inside
            .iter()
            .copied()
            .filter(|&s| !inside.iter().any(|&t| t != s && is_subset(s, t)))
            .collect();
        match maximal.as_slice() {
            [] => return Err(SpecError::Uncovered(SubsetDisplay(u).to_string())),
            [one] => table.push(*one),
            [a, b, ..] => {
                return Err(SpecError::Ambiguous {
                    support: SubsetDisplay(u).to_string(),
                    first: SubsetDisplay(*a).to_string(),
                    second: SubsetDisplay(*b).to_string(),
                })
            }
        }
    }
    Ok(table)
}

/// Maximum of linear functions; a deliberately non-superadditive
/// evaluator used to exercise the sampled superadditivity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxLikeSpec {
    pub n: usize,
    pub pieces: Vec<LinearFn>,
}

impl MaxLikeSpec {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.pieces
            .iter()
            .map(|c| c.eval(x))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecFile {
    Function(FunctionSpec),
    MaxLike(MaxLikeSpec),
}

fn parse_number(v: &Value) -> Result<Rational, SpecError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| SpecError::Malformed(e.to_string())),
        Value::Number(n) => parse_rational(&n.to_string()).map_err(|e| SpecError::Malformed(e.to_string())),
        other => Err(SpecError::Malformed(format!("expected a rational, found {other}"))),
    }
}

/// Rows of length `n` are homogeneous; length `n + 1` carries a constant.
fn parse_row(v: &Value, n: usize, domain: &str) -> Result<LinearFn, SpecError> {
    let items = v
        .as_array()
        .ok_or_else(|| SpecError::Malformed("component must be an array".into()))?;
    let mut coeffs = items.iter().map(parse_number).collect::<Result<Vec<_>, _>>()?;
    let constant = if coeffs.len() == n + 1 {
        coeffs.pop().expect("nonempty")
    } else if coeffs.len() == n {
        Rational::zero()
    } else {
        return Err(SpecError::ComponentLength {
            domain: domain.to_string(),
            expected: n,
            found: coeffs.len(),
        });
    };
    Ok(LinearFn { coeffs, constant })
}

pub fn parse_spec_json(text: &str) -> Result<SpecFile, SpecError> {
    let v: Value = serde_json::from_str(text).map_err(|e| SpecError::Malformed(e.to_string()))?;
    let n = v
        .get("inputs")
        .and_then(Value::as_u64)
        .ok_or_else(|| SpecError::Malformed("missing integer `inputs`".into()))? as usize;
    if n > MAX_SPEC_INPUTS {
        return Err(SpecError::TooManyInputs(n));
    }
    if let Some(rows) = v.get("max_of") {
        let rows = rows
            .as_array()
            .ok_or_else(|| SpecError::Malformed("`max_of` must be an array".into()))?;
        let pieces = rows
            .iter()
            .map(|r| parse_row(r, n, "max_of"))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(SpecFile::MaxLike(MaxLikeSpec { n, pieces }));
    }
    let inherit = v.get("inherit_default").and_then(Value::as_bool).unwrap_or(false);
    let list = v
        .get("domains")
        .and_then(Value::as_array)
        .ok_or_else(|| SpecError::Malformed("missing `domains` array".into()))?;
    let mut domains = BTreeMap::new();
    for d in list {
        let present = d
            .get("present")
            .and_then(Value::as_array)
            .ok_or_else(|| SpecError::Malformed("domain without `present`".into()))?;
        let mut s: Subset = 0;
        for p in present {
            let i = p
                .as_i64()
                .ok_or_else(|| SpecError::Malformed("`present` entries must be integers".into()))?;
            if i < 1 || i as usize > n {
                return Err(SpecError::IndexOutOfRange { index: i, n });
            }
            s |= 1 << (i - 1);
        }
        let name = SubsetDisplay(s).to_string();
        let rows = d
            .get("min_of")
            .and_then(Value::as_array)
            .ok_or_else(|| SpecError::Malformed(format!("domain {name} without `min_of`")))?;
        let mut comps = rows
            .iter()
            .map(|r| parse_row(r, n, &name))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(c) = d.get("constant") {
            let mut f = LinearFn::zero(n);
            f.constant = parse_number(c)?;
            comps.push(f);
        }
        if comps.is_empty() {
            comps.push(LinearFn::zero(n));
        }
        if domains.insert(s, MinOfLinear::new(comps)).is_some() {
            return Err(SpecError::DuplicateDomain(name));
        }
    }
    Ok(SpecFile::Function(FunctionSpec::new(n, inherit, domains)?))
}

/// Parses a spec file that must describe a min-of-linear function.
pub fn parse_function_spec(text: &str) -> Result<FunctionSpec, SpecError> {
    match parse_spec_json(text)? {
        SpecFile::Function(f) => Ok(f),
        SpecFile::MaxLike(_) => Err(SpecError::Malformed(
            "`max_of` specs can be sampled but not compiled".into(),
        )),
    }
}
