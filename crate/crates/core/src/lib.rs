//! Pinning-control synthesis for probabilistic Boolean networks.
//!
//! The pipeline reads a network, cuts its feedback loops by pinning the heads
//! of a feedback arc set, pins a minimal extra set to force a prescribed
//! steady state, and checks the result against an exhaustive oracle.

pub mod expr;
pub mod model;
pub mod parse;
pub mod pinsynth;
pub mod pipeline;
pub mod random;
pub mod steadypin;
pub mod stp;
pub mod verify;
pub mod wiring;

pub use expr::BoolExpr;
pub use model::{Limits, ModelError, NodeSpec, PbnModel, PbnNode};
pub use parse::{parse, serialize, ParseError, SourceSpan};
pub use stp::{LogicalMatrix, Matrix, Rational, StochasticMatrix};
