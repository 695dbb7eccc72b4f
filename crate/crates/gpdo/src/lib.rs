//! Companion crate for `gpdo-core`: file formats, run configuration, the
//! abelian FFT oracle and the experiment drivers behind the `gpdo` binary.

pub mod commands;
pub mod config;
pub mod io;
pub mod oracle;
pub mod registry;
