//! Exact arithmetic over ℚ(φ). Every time and size in the crate is a
//! [`GoldenNumber`]; rationals embed with a zero φ-coefficient.

mod golden;
mod rational;

pub use golden::{g, gn_arith, gn_sign, phi_pow, ArithOp, GoldenNumber};
pub use rational::Rational;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid numeric literal `{0}`")]
    Literal(String),
}

/// Default number of decimal places for rendered reports.
pub const DEFAULT_DIGITS: u32 = 12;
