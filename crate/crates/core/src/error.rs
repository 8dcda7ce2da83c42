//! Error type shared by every module of the crate.
//!
//! Variants carry the offending atom index and the violating magnitude
//! where that information exists, since a conditional statement can fail
//! at one atom while holding at all others.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A probability space needs at least one atom.
    EmptySpace,
    /// A probability mass was zero or negative.
    NonPositiveProbability { atom: usize, value: f64 },
    /// Input masses deviate from sum 1 beyond the input tolerance.
    MassNotOne { sum: f64 },
    /// A value was NaN or infinite.
    NonFiniteValue { atom: usize },
    /// Operands carry vectors of different dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// Operands belong to different probability spaces.
    SpaceMismatch,
    /// A partition references a part with no atoms, or a combination was
    /// given fewer points than parts.
    MissingPart { part: usize, available: usize },
    /// A sample fell outside a function's declared domain.
    DomainViolation { atom: usize },
    /// An operation on families of points received an empty family.
    EmptyFamily,
    /// Barycentric coordinates failed: fit residual or weight negativity
    /// beyond tolerance at the given atom.
    NotInSimplex { atom: usize, violation: f64 },
    /// The vertex family is affinely dependent at the given atom, detected
    /// while solving for coordinates.
    DegenerateVertices { atom: usize },
    /// A simplex constructor or subdivision found dependent vertices.
    AffinelyDependent { atom: usize },
    /// A subdivision or grid request exceeds the configured cell budget.
    BudgetExceeded { needed: usize, budget: usize },
    /// Cell intersection is defined for siblings of one subdivision only.
    NotSiblings,
    /// A face or vertex index was outside 1..=N.
    IndexOutOfRange { index: usize, limit: usize },
    /// A function value left the base simplex beyond tolerance.
    ImageEscapedSimplex { atom: usize, violation: f64 },
    /// A labeling violates properness: the labeled coordinate is not
    /// strictly positive at the given atom and vertex.
    ImproperLabeling { atom: usize, vertex: usize },
    /// No completely labeled cell exists at the given atom. For a proper
    /// labeling of one full subdivision the parity argument makes this
    /// unreachable; seeing it means the labeling or the caller is broken.
    NoCompletelyLabeledCell { atom: usize },
    /// A cell vertex has no entry in the labeled vertex set.
    UnlabeledVertex { cell: usize, vertex: usize },
    /// A convex body description is malformed.
    InvalidBody { reason: &'static str },
    /// The body has no computable radius bound.
    UnboundedBody,
    /// A function value left the convex body beyond tolerance.
    ImageEscapedBody { atom: usize, violation: f64 },
    /// The IVT target is not between the endpoint values at the given atom.
    TargetOutOfRange { atom: usize },
    /// Bisection requires a sign change over the interval.
    NoSignChange { atom: usize },
    /// Solver configuration violates its invariants.
    InvalidConfig { reason: &'static str },
    /// A user-supplied evaluator failed; the message is passed through.
    EvalFailed { message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptySpace => write!(f, "probability space has no atoms"),
            Error::NonPositiveProbability { atom, value } => {
                write!(f, "probability of atom {atom} is {value}, must be > 0")
            }
            Error::MassNotOne { sum } => {
                write!(f, "probabilities sum to {sum}, deviation exceeds 1e-9")
            }
            Error::NonFiniteValue { atom } => {
                write!(f, "non-finite value at atom {atom}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SpaceMismatch => write!(f, "operands live on different probability spaces"),
            Error::MissingPart { part, available } => {
                write!(f, "part {part} not covered ({available} available)")
            }
            Error::DomainViolation { atom } => {
                write!(f, "sample outside the declared domain at atom {atom}")
            }
            Error::EmptyFamily => write!(f, "operation needs a nonempty family of points"),
            Error::NotInSimplex { atom, violation } => {
                write!(f, "point not in simplex at atom {atom} (violation {violation:.3e})")
            }
            Error::DegenerateVertices { atom } => {
                write!(f, "vertices affinely dependent at atom {atom}")
            }
            Error::AffinelyDependent { atom } => {
                write!(f, "vertex family affinely dependent at atom {atom}")
            }
            Error::BudgetExceeded { needed, budget } => {
                write!(f, "cell budget exceeded: need {needed}, budget {budget}")
            }
            Error::NotSiblings => write!(f, "cells are not siblings of one subdivision"),
            Error::IndexOutOfRange { index, limit } => {
                write!(f, "index {index} out of range 1..={limit}")
            }
            Error::ImageEscapedSimplex { atom, violation } => {
                write!(
                    f,
                    "function value escaped the base simplex at atom {atom} (violation {violation:.3e})"
                )
            }
            Error::ImproperLabeling { atom, vertex } => {
                write!(f, "improper labeling at atom {atom}, vertex {vertex}")
            }
            Error::NoCompletelyLabeledCell { atom } => {
                write!(f, "no completely labeled cell at atom {atom}")
            }
            Error::UnlabeledVertex { cell, vertex } => {
                write!(f, "vertex {vertex} of cell {cell} is missing from the labeled set")
            }
            Error::InvalidBody { reason } => write!(f, "invalid convex body: {reason}"),
            Error::UnboundedBody => write!(f, "convex body has no radius bound"),
            Error::ImageEscapedBody { atom, violation } => {
                write!(
                    f,
                    "function value escaped the convex body at atom {atom} (violation {violation:.3e})"
                )
            }
            Error::TargetOutOfRange { atom } => {
                write!(f, "target not between the endpoint values at atom {atom}")
            }
            Error::NoSignChange { atom } => {
                write!(f, "no sign change over the interval at atom {atom}")
            }
            Error::InvalidConfig { reason } => write!(f, "invalid solver config: {reason}"),
            Error::EvalFailed { message } => write!(f, "evaluation failed: {message}"),
        }
    }
}

impl core::error::Error for Error {}
