use crate::model::ModelError;
use crate::polynomial::PolyError;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("compartment {0} is not an output")]
    NotAnOutput(usize),
    #[error("compartment {0} is not an input")]
    NotAnInput(usize),
    #[error("variable {0} is not among the Jacobian parameters")]
    UncoveredVariable(String),
    #[error("model is not strongly connected")]
    NotStronglyConnected,
    #[error("coefficient {0} is the zero polynomial and cannot be a divisor")]
    ZeroDivisorCoefficient(usize),
    #[error("invalid quotient indices ({0}, {1})")]
    QuotientIndex(usize, usize),
    #[error("model graph is not a directed cycle")]
    NotACycle,
    #[error("model graph is not a catenary")]
    NotCatenary,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("e1*({0}, {1}) is undefined: output directly precedes input")]
    UndefinedForAdjacentPair(usize, usize),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("model is not identifiable; its singular locus is the whole parameter space")]
    NotIdentifiable,
    #[error("too large for symbolic computation: {0}")]
    TooLarge(String),
    #[error("hyperplane {0} has no variable with a unit coefficient")]
    UnsolvableConstraint(String),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Model(ModelError::MalformedSpec(_)) => "MalformedSpec",
            Error::Model(ModelError::InvalidModel(_)) => "InvalidModel",
            Error::Poly(PolyError::NegativeIndexBelowConvention(_)) => "NegativeIndexBelowConvention",
            Error::Poly(PolyError::MissingAssignment(_)) => "MissingAssignment",
            Error::Poly(PolyError::Parse(_)) => "ParseError",
            Error::NotAnOutput(_) => "NotAnOutput",
            Error::NotAnInput(_) => "NotAnInput",
            Error::UncoveredVariable(_) => "UncoveredVariable",
            Error::NotStronglyConnected => "NotStronglyConnected",
            Error::ZeroDivisorCoefficient(_) => "ZeroDivisorCoefficient",
            Error::QuotientIndex(..) => "QuotientIndex",
            Error::NotACycle => "NotACycle",
            Error::NotCatenary => "NotCatenary",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::UndefinedForAdjacentPair(..) => "UndefinedForAdjacentPair",
            Error::NotApplicable(_) => "NotApplicable",
            Error::NotIdentifiable => "NotIdentifiable",
            Error::TooLarge(_) => "TooLarge",
            Error::UnsolvableConstraint(_) => "UnsolvableConstraint",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
