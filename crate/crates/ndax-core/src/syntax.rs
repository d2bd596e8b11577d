//! Surface language for theories, programs, and refinement mappings:
//! tokenizer, parser, printers, and the lowering session that turns parsed
//! documents into ground artifacts.

pub mod ast;
pub mod lexer;
mod lower;
pub mod parser;
pub mod pretty;

pub use ast::ProgramKind;
pub use lower::{LoadedProgram, Session};
pub use parser::{parse_mapping, parse_programs, parse_theory};
