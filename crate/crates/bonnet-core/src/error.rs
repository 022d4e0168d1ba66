//! Crate-wide error type for the bundle, Euler, Thom, and model layers.
//!
//! The leaf modules keep their own focused error enums; everything above
//! [`crate::bundles`] funnels into [`Error`] so callers deal with one type.

use crate::exprlang::{EvalError, ParseError};
use crate::forms::FormError;
use crate::pfaffian::PfaffianError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Pfaffian(#[from] PfaffianError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("bundle `{name}`: {reason}")]
    BadBundle { name: String, reason: String },
    #[error("transition {from} -> {to}: {reason}")]
    BadTransition {
        from: usize,
        to: usize,
        reason: String,
    },
    #[error("charts `{left}` and `{right}` do not share coordinate names")]
    CoordinateMismatch { left: String, right: String },
    #[error("operation needs rank {want}, bundle has rank {got}")]
    RankMismatch { want: usize, got: usize },
    #[error("expected a matrix of curvature 2-forms, got entry degree {0}")]
    NotCurvature(usize),
    #[error(
        "perturbation disagrees across transition {from} -> {to}: residual {residual:.3e}"
    )]
    InconsistentPerturbation {
        from: usize,
        to: usize,
        residual: f64,
    },
    #[error("unknown model `{0}`; run `list-models` for the catalog")]
    UnknownModel(String),
    #[error("{path}:{line}: {reason}")]
    ModelFile {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("model `{model}` fails the `{check}` invariant: {detail}")]
    ModelInvariant {
        model: String,
        check: String,
        detail: String,
    },
    #[error("could not configure the worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
