//! Chordal Loewner evolution driven by Lip-1/2 functions: driving functions,
//! forward and reverse flows, curve tracing, closed-form cone and regularity
//! bounds, and a harness that checks the bounds against computed flows.

// Negated comparisons are how NaN inputs are rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod driving;
pub mod error;
pub mod flow;
pub mod ode;
pub mod plot;
pub mod verify;

pub use driving::{make_driver, Driver, DrivingFunction, Family};
pub use error::{Error, Result};
pub use flow::{DerivativeMode, SolverOptions};
