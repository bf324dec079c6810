//! Bottom-up function testing engine for MiniLang programs.
//!
//! The pipeline fuzzes individual functions through synthesized drivers,
//! replays crashing inputs symbolically to extract crash constraints, and
//! stitches those constraints backward along the call graph to separate
//! feasible vulnerabilities from artifacts of isolated testing.

pub mod frontend;
pub mod sym;

pub use frontend::parse_program;
