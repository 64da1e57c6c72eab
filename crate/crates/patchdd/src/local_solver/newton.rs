//! Deterministic patch solve: Newton iteration with strong Dirichlet data on
//! the interface, multiplier recovered from the interface residual.

use super::patch_problem::PatchProblem;
use super::LocalSolverError;
use crate::fem::{assemble_reaction, assemble_reaction_jacobian, CoefficientField};
use crate::linalg::SkylineMatrix;
use crate::real::{real, Real};

/// Solution of one deterministic patch problem.
#[derive(Debug, Clone)]
pub struct LocalSample<T> {
    /// Full patch nodal vector; equals the prescribed Dirichlet values on the
    /// interface exactly.
    pub w: Vec<T>,
    /// Multiplier on the fine interface dofs (arc-length order).
    pub lambda: Vec<T>,
    pub newton_iters: usize,
    pub final_residual: T,
}

const MAX_NEWTON: usize = 50;
const MAX_HALVINGS: usize = 10;

impl<T: Real> PatchProblem<T> {
    /// Residual of the full system `A w + N(w) - l` over all patch nodes.
    pub fn residual(
        &self,
        a: &crate::fem::SparseOperator<T>,
        c_r: T,
        w: &[T],
    ) -> Result<Vec<T>, LocalSolverError> {
        let mut r = a.apply(w);
        if c_r != T::zero() {
            let n = assemble_reaction(&self.mesh, &self.r_chi, w)?;
            for (ri, ni) in r.iter_mut().zip(&n) {
                *ri = *ri + c_r * *ni;
            }
        }
        for (ri, li) in r.iter_mut().zip(&self.load) {
            *ri = *ri - *li;
        }
        Ok(r)
    }

    /// Solve the patch problem for one sample with Dirichlet data on the fine
    /// interface nodes. `init` warm-starts Newton from a previous solution
    /// (only its interior values are used); otherwise the first step is the
    /// linear solve with the reaction dropped.
    pub fn solve_deterministic(
        &self,
        xi_k: T,
        xi_r: T,
        dirichlet: &[T],
        tol: T,
        init: Option<&[T]>,
    ) -> Result<LocalSample<T>, LocalSolverError> {
        assert_eq!(dirichlet.len(), self.iface.fine_nodes.len(), "Dirichlet data size");
        let a = self.operator(xi_k);
        let c_r = self.reaction_scale(xi_r);
        let n_nodes = self.mesh.n_nodes();
        let mut w = vec![T::zero(); n_nodes];
        for (k, &node) in self.iface.fine_nodes.iter().enumerate() {
            w[node] = dirichlet[k];
        }
        let mut iters = 0usize;
        let mut sky = SkylineMatrix::zeros(self.skyline.clone());
        match init {
            Some(prev) => {
                assert_eq!(prev.len(), n_nodes);
                for &node in self.interior.reduced_indices() {
                    w[node] = prev[node];
                }
            }
            None => {
                // first step: linear solve with the reaction term dropped
                let aw = a.apply(&w);
                let rhs: Vec<T> = self
                    .interior
                    .reduced_indices()
                    .iter()
                    .map(|&node| self.load[node] - aw[node])
                    .collect();
                let a_int = self.interior.reduce_matrix(&a);
                a_int.fill_skyline(&mut sky);
                let chol = sky.factorize()?;
                let z = chol.solve(&rhs);
                for (k, &node) in self.interior.reduced_indices().iter().enumerate() {
                    w[node] = z[k];
                }
                iters = 1;
            }
        }
        let norm = |v: &[T]| -> T { v.iter().map(|x| *x * *x).sum::<T>().sqrt() };
        let mut r_full = self.residual(&a, c_r, &w)?;
        let mut rn = norm(&self.interior.reduce_vec(&r_full));
        while rn > tol {
            if iters >= MAX_NEWTON {
                return Err(LocalSolverError::NewtonDiverged {
                    iterations: iters,
                    residual: rn.to_f64_lossy(),
                });
            }
            let mut jac = a.clone();
            if c_r != T::zero() {
                let jn = assemble_reaction_jacobian(&self.mesh, &self.r_chi, &w)?;
                jac.add_scaled(&jn, c_r);
            }
            let j_int = self.interior.reduce_matrix(&jac);
            j_int.fill_skyline(&mut sky);
            let chol = sky.factorize()?;
            let delta = chol.solve(&self.interior.reduce_vec(&r_full));
            // full step, halved on residual increase
            let mut scale = T::one();
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let mut w_try = w.clone();
                for (k, &node) in self.interior.reduced_indices().iter().enumerate() {
                    w_try[node] = w_try[node] - scale * delta[k];
                }
                let r_try = self.residual(&a, c_r, &w_try)?;
                let rn_try = norm(&self.interior.reduce_vec(&r_try));
                if rn_try < rn || scale <= real::<T>(2e-4) {
                    w = w_try;
                    r_full = r_try;
                    rn = rn_try;
                    accepted = true;
                    break;
                }
                scale = scale * real::<T>(0.5);
            }
            iters += 1;
            if !accepted {
                return Err(LocalSolverError::NewtonDiverged {
                    iterations: iters,
                    residual: rn.to_f64_lossy(),
                });
            }
        }
        // multiplier from the interface-restricted residual (the equation
        // rows that strong imposition left unsatisfied)
        let r_iface: Vec<T> =
            self.iface.fine_nodes.iter().map(|&node| r_full[node]).collect();
        let lambda = self.coupling.recover_multiplier(&r_iface);
        Ok(LocalSample { w, lambda, newton_iters: iters, final_residual: rn })
    }

    /// Direct linear solve `A w = l` with the given Dirichlet data (reaction
    /// ignored); oracle for the linear-case tests.
    pub fn solve_linear(
        &self,
        xi_k: T,
        dirichlet: &[T],
    ) -> Result<Vec<T>, LocalSolverError> {
        let a = self.operator(xi_k);
        let n_nodes = self.mesh.n_nodes();
        let mut w = vec![T::zero(); n_nodes];
        for (k, &node) in self.iface.fine_nodes.iter().enumerate() {
            w[node] = dirichlet[k];
        }
        let aw = a.apply(&w);
        let rhs: Vec<T> = self
            .interior
            .reduced_indices()
            .iter()
            .map(|&node| self.load[node] - aw[node])
            .collect();
        let a_int = self.interior.reduce_matrix(&a);
        let mut sky = SkylineMatrix::zeros(self.skyline.clone());
        a_int.fill_skyline(&mut sky);
        let chol = sky.factorize()?;
        let z = chol.solve(&rhs);
        for (k, &node) in self.interior.reduced_indices().iter().enumerate() {
            w[node] = z[k];
        }
        Ok(w)
    }

    /// Evaluate the coefficient field `K(x) = 1 + γ ξ χ(x)` for diagnostics.
    pub fn diffusion_field(&self, xi_k: T) -> CoefficientField<T> {
        let mut f = CoefficientField::constant(&self.mesh, T::one());
        f.axpy(self.gamma * xi_k, &self.r_chi);
        f
    }
}
