//! Context-process generators, trace files and process-class diagnostics.
//!
//! The diagnostics are finite-horizon statistics. Curves and window maxima
//! are evidence about the limiting behaviour of a process, not certificates
//! of class membership.

mod diagnostics;
mod generators;
mod trace_io;

pub use diagnostics::{
    dedup_times, distinct_cell_curve, empirical_submeasure, geometric_grid, infrequent_mass,
    Thresholds,
};
pub use generators::{generate, ProcessGenerator, ProcessSpec};
pub use trace_io::{read_trace, read_trace_file, write_trace, write_trace_file};
