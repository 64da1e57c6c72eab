//! The outer global-local iteration: global step, relaxation, local step,
//! reference solver and error indicator.

mod indicator;
mod iterate;
mod pce_field;
mod reference;
mod relaxation;
mod solution;
mod system;

pub use indicator::{error_indicator, IndicatorError};
pub use iterate::{iterate, HistoryRow, IterateError, PatchStat, RunResult};
pub use pce_field::PceField;
pub use reference::{
    coupled_residuals, coupled_residuals_at, solve_reference, CoupledSystem, Reference,
    ResidualReport,
};
pub use relaxation::Relaxation;
pub use solution::SolutionDoc;
pub use system::{GlobalCoupling, GlobalSystem};
