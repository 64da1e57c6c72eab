//! Interface coupling matrices between multiplier, patch and global spaces.
//!
//! The multiplier space is the trace of the fine patch space on `Γ_q`, so
//! both couplings are exact 1D P1 mass matrices on the closed interface
//! polyline: `B_Γ` against fine traces and `B̃_Γ = P_qᵀ B_Γ` against coarse
//! traces.

use crate::linalg::DenseCholesky;
use crate::mesh::PatchInterface;
use crate::real::{real, Real};
use ndarray::Array2;

/// Coupling operators for one patch interface.
#[derive(Debug, Clone)]
pub struct InterfaceCoupling<T> {
    /// 1D P1 mass matrix on the fine interface ring (`n_fine × n_fine`);
    /// columns are multiplier dofs, rows are fine interface nodes.
    pub mass: Array2<T>,
    /// `P_qᵀ B_Γ` (`n_coarse × n_fine`): multiplier dofs to coarse interface
    /// nodes.
    pub coarse_map: Array2<T>,
    /// Cholesky factor of `mass`, used to recover multipliers.
    chol: DenseCholesky<T>,
}

impl<T: Real> InterfaceCoupling<T> {
    /// `B_Γ λ` as values on the fine interface nodes (arc-length order).
    pub fn apply_fine(&self, lambda: &[T]) -> Vec<T> {
        let n = self.mass.nrows();
        assert_eq!(lambda.len(), n);
        let mut out = vec![T::zero(); n];
        for i in 0..n {
            let mut s = T::zero();
            for j in 0..n {
                s = s + self.mass[[i, j]] * lambda[j];
            }
            out[i] = s;
        }
        out
    }

    /// `B̃_Γ λ` as values on the coarse interface nodes (arc-length order).
    pub fn apply_coarse(&self, lambda: &[T]) -> Vec<T> {
        let (nc, nf) = (self.coarse_map.nrows(), self.coarse_map.ncols());
        assert_eq!(lambda.len(), nf);
        let mut out = vec![T::zero(); nc];
        for i in 0..nc {
            let mut s = T::zero();
            for j in 0..nf {
                s = s + self.coarse_map[[i, j]] * lambda[j];
            }
            out[i] = s;
        }
        out
    }

    /// Solve `B_Γ λ = r` for the multiplier from interface-restricted
    /// residual values.
    pub fn recover_multiplier(&self, r: &[T]) -> Vec<T> {
        self.chol.solve(r)
    }
}

/// Assemble the interface mass matrix and its coarse projection for patch `q`.
pub fn assemble_coupling<T: Real>(iface: &PatchInterface<T>) -> InterfaceCoupling<T> {
    let n = iface.fine_nodes.len();
    let h = iface.segment_len;
    let sixth = real::<T>(1.0 / 6.0);
    let mut mass = Array2::<T>::zeros((n, n));
    // closed polyline of n equal segments: element mass (h/6)[[2,1],[1,2]]
    for s in 0..n {
        let a = s;
        let b = (s + 1) % n;
        mass[[a, a]] = mass[[a, a]] + h * sixth * real::<T>(2.0);
        mass[[b, b]] = mass[[b, b]] + h * sixth * real::<T>(2.0);
        mass[[a, b]] = mass[[a, b]] + h * sixth;
        mass[[b, a]] = mass[[b, a]] + h * sixth;
    }
    let coarse_map = iface.prolong.t().dot(&mass);
    let chol = DenseCholesky::factorize(mass.view()).expect("interface mass matrix is SPD");
    InterfaceCoupling { mass, coarse_map, chol }
}
