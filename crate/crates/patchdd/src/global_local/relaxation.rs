//! Fixed and Aitken Delta-Squared relaxation of the global iterate.

use super::pce_field::PceField;
use crate::config::RelaxationSpec;
use crate::fem::SparseOperator;
use crate::real::{real, Real};

/// Relaxation strategy with its running state.
#[derive(Debug, Clone)]
pub enum Relaxation<T> {
    Fixed { rho: T },
    Aitken { rho_inf: T, rho_sup: T },
}

impl<T: Real> Relaxation<T> {
    pub fn from_spec(spec: &RelaxationSpec) -> Self {
        match spec {
            RelaxationSpec::Fixed { rho } => Relaxation::Fixed { rho: real(*rho) },
            RelaxationSpec::Aitken { rho_inf, rho_sup } => {
                Relaxation::Aitken { rho_inf: real(*rho_inf), rho_sup: real(*rho_sup) }
            }
        }
    }

    /// Relaxation parameter for iteration `k` (1-based). For Aitken,
    /// `δ^k = Û^k - U^{k-1}` and `δ^{k-1}` is the stored previous difference;
    /// the raw value `-ρ_{k-1} ⟨δ^k - δ^{k-1}, δ^{k-1}⟩ / ‖δ^k - δ^{k-1}‖²`
    /// (inner products in `ℓ²_μ ⊗ H¹`) is clamped to `[ρ_inf, ρ_sup]`.
    pub fn rho(
        &self,
        k: usize,
        rho_prev: T,
        delta_k: &PceField<T>,
        delta_prev: Option<&PceField<T>>,
        h1: &SparseOperator<T>,
    ) -> T {
        match self {
            Relaxation::Fixed { rho } => *rho,
            Relaxation::Aitken { rho_inf, rho_sup } => {
                if k <= 2 {
                    return T::one();
                }
                let prev = delta_prev.expect("Aitken needs the previous difference for k >= 3");
                let diff = PceField::sub(delta_k, prev);
                let denom = diff.gram_norm_sq(h1);
                let raw = if denom == T::zero() {
                    rho_prev
                } else {
                    let num = PceField::gram_inner(&diff, prev, h1);
                    -rho_prev * num / denom
                };
                raw.max(*rho_inf).min(*rho_sup)
            }
        }
    }
}
