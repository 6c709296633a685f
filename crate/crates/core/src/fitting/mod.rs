//! Least-squares extraction of line shifts and Ramsey fringe centres.

mod fringe;
mod line;
mod lm;
mod scan;

pub use fringe::{fit_ramsey_fringes, fit_ramsey_fringes_with, FringeOptions, MIN_FRINGE_PERIODS};
pub use line::{fit_line, MIN_LINE_POINTS};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};
pub use scan::{FitModel, FitParameter, FitResult, ScanPoint, ScanResult};
