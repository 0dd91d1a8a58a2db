//! Proof-mining workbench: finite types, combinator terms, real codes,
//! formula translations, majorization and numerical checks of resolvent
//! theory on concrete operators in ℝ^d.

pub mod algorithms;
pub mod delta;
pub mod formula;
pub mod majorize;
pub mod model;
pub mod oplab;
pub mod parse;
pub mod real;
pub mod semantics;
pub mod term;
pub mod types;

pub use real::{RatCode, RealCode};
pub use term::{Constant, Term, Var};
pub use types::FinType;
