//! A small line-oriented language for circuits.
//!
//! ```text
//! # frustrated pair generation
//! paths s1 i1 s2 i2
//! param PHI = pi
//!
//! nl s1 i1
//! phase i1 PHI
//! align s1 s2
//! align i1 i2
//! nl s2 i2
//! sweep PHI from 0 to 2*pi steps 64
//! ```
//!
//! Statements: `paths`, `param NAME = EXPR`, `init |KET> + ...`, `nl S I`,
//! `nl1p P S I [G]`, `phase P EXPR`, `hwp P`, `unitary P [Q] MATRIX`,
//! `align A B`, `bs A B [symmetric]`, `object I W T GAMMA`, `measure P...`,
//! `trace_keep P...`, and `sweep NAME [LIST]` or
//! `sweep NAME from A to B steps N` (the end point is excluded). A matrix is
//! a row-major literal of `(re, im)` pairs, `X`, `H`, or `householder [...]`.
//! `measure` and `trace_keep` look at the state where they appear.

mod ast;
mod diag;
mod expr;
mod lexer;
mod lower;
mod parser;

pub use ast::{ComplexExpr, Document, Grid, Item, MatrixSpec, Statement, StmtKind};
pub use diag::{Diagnostic, DiagnosticKind};
pub use expr::{BinOp, Expr};
pub use lower::{range_grid, Lowered};
pub use parser::{parse, parse_expr, parse_unchecked};

/// Parses and prints `text` in canonical form.
pub fn format_source(text: &str) -> Result<String, Vec<Diagnostic>> {
    Ok(parse_unchecked(text)?.to_source())
}

/// Parses `NAME=EXPR`, the form taken by command-line overrides.
pub fn parse_override(text: &str) -> Result<(String, Expr), Diagnostic> {
    let Some((name, expr)) = text.split_once('=') else {
        return Err(Diagnostic::new(DiagnosticKind::Syntax, 0, 1, "override must look like NAME=EXPR").with_token(text.to_string()));
    };
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(Diagnostic::new(DiagnosticKind::Syntax, 0, 1, "invalid parameter name").with_token(name.to_string()));
    }
    Ok((name.to_string(), parse_expr(expr)?))
}
