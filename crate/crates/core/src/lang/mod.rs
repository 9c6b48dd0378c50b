//! The core imperative language: syntax tree, parser, printer, validator,
//! instruction indexing and reference semantics.

mod ast;
mod index;
mod parse;
mod print;
mod step;
mod validate;

pub use ast::*;
pub use index::{hole_addresses, index, visit_holes, visit_holes_mut, HoleAddr, Index, Instr, SiteLoc};
pub use parse::{parse, parse_expr, SyntaxError};
pub use print::print;
pub use step::{run_to_halt, step, Config, Pc, StepError};
pub use validate::{validate, ValidationError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LangError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid program: {0}")]
    Invalid(#[from] ValidationError),
}
