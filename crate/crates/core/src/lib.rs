//! Structural identifiability of linear compartmental models.
//!
//! Two independent routes decide generic local identifiability: the generic
//! rank of the Jacobian of the input-output coefficient map, and combinatorial
//! classifiers with closed-form coefficients for cycles and catenaries.

pub mod catenary;
pub mod error;
pub mod cycle;
pub mod forests;
pub mod gcd;
pub mod ident;
pub mod ioeq;
pub mod matrix;
pub mod model;
pub mod modp;
pub mod polynomial;
pub mod singular;
pub mod sweep;

pub use ident::{JacobianAnalysis, RankConfig};
pub use ioeq::{CoeffLabel, CoefficientMap, IoEquation};
pub use matrix::SymbolicMatrix;
pub use model::{CompartmentalModel, ModelError, ParameterId, Shape, ShapeInfo};
pub use polynomial::{Monomial, PolyError, Polynomial, Var};
pub use error::{Error, Result};
