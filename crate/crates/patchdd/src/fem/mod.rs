//! P1 finite element assembly on structured triangle meshes.

mod assembly;
mod coefficient;
mod coupling;
mod csr;
mod dirichlet;
mod quadrature;

pub use assembly::{
    assemble_load, assemble_reaction, assemble_reaction_jacobian, assemble_stiffness,
    assemble_stiffness_unchecked, gram_matrices, mass_on_elements,
};
pub use coefficient::{CoefficientField, LoadSpec};
pub use coupling::{assemble_coupling, InterfaceCoupling};
pub use csr::{CsrPattern, SparseOperator};
pub use dirichlet::DofMap;
pub use quadrature::TRI_DEGREE4;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("diffusion coefficient is not strictly positive on element {element} (value {value:e})")]
    NonPositiveDiffusion { element: usize, value: f64 },
    #[error("reaction coefficient is negative on element {element} (value {value:e})")]
    NegativeReaction { element: usize, value: f64 },
    #[error("field length {got} does not match expected {want}")]
    SizeMismatch { got: usize, want: usize },
}
