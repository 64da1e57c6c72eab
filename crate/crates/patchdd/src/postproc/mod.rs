//! Statistics, sensitivity indices and multiscale field assembly.

mod moments;
mod multiscale;

pub use moments::{moments, moments_of, sensitivity_numerator, sensitivity_numerator_of};
pub use multiscale::{merge_multiscale, node_patch_classification, Multiscale, NodeClass};
