//! Exact finite-field harmonic analysis for the paraboloid extension
//! problem over `F_p`: Fourier transforms under the three natural
//! measures, Gauss and twisted Kloosterman sums, additive energy of
//! paraboloid subsets, and numerical audits of the inequality chain that
//! turns energy bounds into `L^2 → L^r` extension estimates.

pub mod char_sums;
pub mod energy;
pub mod error;
pub mod families;
pub mod field;
pub mod fourier;
pub mod geometry;
pub mod grid;
pub mod report;
pub mod restriction;
pub mod suites;

pub use error::{Error, Result};
pub use field::{FieldCtx, Scalar};
pub use grid::{Grid, Limits};
pub use report::{emit_report, Num, ReportRow};
pub use suites::{exit_code, run_scan, run_verify, RunConfig, SuiteRegistry};
