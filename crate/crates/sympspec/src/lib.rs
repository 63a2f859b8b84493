//! File formats and the command-line front end for `sympspec-core`.

pub mod cli;
pub mod io;

pub use cli::run;
