//! Template-based compiler fuzzing for a small goto language.

pub mod lang;
pub(crate) mod exec;
pub mod template;
pub mod gen;
pub mod backends;
pub mod difftest;
pub mod extract;
pub mod randprog;
pub mod bundled;
