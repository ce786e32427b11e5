//! Model files, reports and the subcommands behind the `induce` binary.

pub mod commands;
pub mod model;
pub mod report;

pub use model::{LatticeSpec, ModelFile};
pub use report::{Check, Format, Quantity, Report, Status};
