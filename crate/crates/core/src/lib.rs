//! Trace-tree accelerator for event-driven serverless functions.
//!
//! Guest programs are written in a small JavaScript subset. The instrumenter
//! compiles them so that running them in the interpreter grows a trace tree;
//! once the tree has stabilised, the executor runs requests directly from it
//! and falls back to the interpreter on untraced paths.

pub mod ast;
pub mod bench;
pub mod desugar;
pub mod exec;
pub mod instrument;
pub mod interp;
pub mod invoker;
pub mod ops;
pub mod parse;
pub mod trace;
pub mod upstream;
pub mod zipper;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] parse::ParseError),
    #[error(transparent)]
    Compile(#[from] instrument::CompileError),
}
