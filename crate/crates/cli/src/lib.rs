//! Scene and report files, and the `compute`, `sweep` and `verify` commands.

pub mod compute;
pub mod error;
pub mod golden;
pub mod report;
pub mod scene_file;
pub mod sweep;

pub use compute::compute;
pub use error::{CliError, Result};
pub use report::{ClosedFormComparison, ReportFile};
pub use scene_file::{resolve_tolerances, SceneFile, SceneOptions, Sweep, SweepParameter};
pub use sweep::{run_sweep, write_sweep};
