//! Run configurations, file formats, reference oracles and the experiment
//! driver behind the `nlhj` command.

pub mod config;
pub mod expr;
pub mod io;
pub mod oracle;
pub mod run;
