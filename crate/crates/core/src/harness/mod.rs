//! Experiment driver: analytic targets, error metrics, ε-sweeps and file I/O.

pub mod io;
pub mod metrics;
pub mod sweep;
pub mod target;

pub use metrics::{relative_max_error, relative_max_error_values, stream_error, stream_error_values};
pub use sweep::{geometric_grid, parse_epsilons, run_sweep, EvalPoints, Method, MethodOutcome, Status, SweepReport, SweepRow, SweepSettings};
pub use target::{builtin_target, TargetField, TargetKind};
