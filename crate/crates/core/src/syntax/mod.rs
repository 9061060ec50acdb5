//! Parsers for every text format the tool reads, plus the source pretty printer.

mod cursor;
pub mod data_file;
pub mod descriptor;
pub mod flat_text;
pub mod lexer;
pub mod model;
pub mod printer;
pub mod solution;

pub use data_file::parse_data;
pub use descriptor::parse_descriptor;
pub use flat_text::parse_flat;
pub use lexer::count_tokens;
pub use model::{model_name, parse_model};
pub use printer::{print_expr, print_model};
pub use solution::{parse_solution, render_solution};
