//! Experiment plumbing: scan rows, the results file format, scaling fits,
//! threshold calibration, plots and the identity suite.

mod calibrate;
mod csvio;
mod family;
mod fit;
mod row;
mod svg;
pub mod verify;

pub use calibrate::{calibrate_delta, calibration_config, smallest_conforming_n, Calibration, DEFAULT_SAFETY};
pub use csvio::{format_real, read_rows, rows_to_string, write_rows, COLUMNS, SCHEMA};
pub use family::FamilyKind;
pub use fit::{fit_rows, fit_scaling, ErrorColumn, FitResult};
pub use row::{apply_delta, run_row, run_schedule, RowMetrics, RowStatus, RunConfig, ScanRow};
pub use svg::render_svg;
pub use verify::{run_identity_suite, Check, VerifyOptions, VerifyReport};
