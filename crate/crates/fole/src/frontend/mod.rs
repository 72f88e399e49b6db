//! The surface language: lexing, parsing, elaboration into checked kernel
//! objects, canonical printing, CSV ingestion and the command line.

pub mod cli;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod table;
pub mod workspace;

pub use cli::{run_command, CommandOutput};
pub use printer::{print_spec, print_structure, print_workspace};
pub use table::{load_entity_table, relation_json};
pub use workspace::{load_workspace, parse_workspace, Workspace, DEFAULT_SCHEMA};
