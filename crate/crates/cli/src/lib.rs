//! Expression parsing and dispatch behind the `hkquad` command.

pub mod expr;
pub mod run;
