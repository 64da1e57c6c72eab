//! Adaptive sparse approximation of the stochastic patch solution.

use super::patch_problem::PatchProblem;
use super::LocalSolverError;
use crate::real::Real;
use crate::sparse_poly::{
    adaptive_fit_multi, AdaptiveParams, MultiIndexSet, PceApprox, SampleLog, TargetSpec,
};
use ndarray::Array2;
use std::collections::HashMap;
use std::sync::Mutex;

/// Global-iterate boundary data for one patch: the PCE of `U^k` restricted to
/// the coarse interface nodes (rows aligned with the index set).
#[derive(Debug, Clone)]
pub struct BoundaryData<T> {
    pub set: MultiIndexSet,
    /// `#A × n_coarse_interface`.
    pub iface_coeffs: Array2<T>,
}

impl<T: Real> BoundaryData<T> {
    /// Coarse interface values of `U^k(ξ)`.
    pub fn evaluate(&self, xi: &[T]) -> Vec<T> {
        let row = crate::sparse_poly::design_matrix_of(
            &[xi.to_vec()],
            self.set.indices(),
            self.set.m(),
        );
        let nc = self.iface_coeffs.ncols();
        let mut out = vec![T::zero(); nc];
        for k in 0..self.set.len() {
            let b = row[[0, k]];
            if b != T::zero() {
                for c in 0..nc {
                    out[c] = out[c] + b * self.iface_coeffs[[k, c]];
                }
            }
        }
        out
    }
}

/// Warm-start cache: full patch solutions keyed by sample index. Samples are
/// regenerated identically across outer iterations (fixed per-patch seed), so
/// index `l` always refers to the same `ξ^l`.
pub type WarmCache<T> = HashMap<usize, Vec<T>>;

/// Result of one stochastic patch solve.
pub struct LocalStochastic<T> {
    pub w: PceApprox<T>,
    pub lambda: PceApprox<T>,
    pub log: SampleLog<T>,
    pub converged: bool,
    /// Newton iteration counts per sample index.
    pub newton_iters: Vec<usize>,
    /// Warm-start cache for the next outer iteration.
    pub warm: WarmCache<T>,
}

/// Fit `(w_q, λ_q)` for one patch by adaptive sparse least squares over a
/// shared sample pool: the per-sample oracle evaluates the global iterate on
/// the coarse interface, prolongates to the fine interface and runs the
/// deterministic Newton solve. The sampling loop stagnates only when both
/// error estimates settle; working sets grow independently.
pub fn solve_local_stochastic<T: Real>(
    pp: &PatchProblem<T>,
    boundary: &BoundaryData<T>,
    params: &AdaptiveParams<T>,
    newton_tol: T,
    warm: Option<&WarmCache<T>>,
    xi_override: Option<&[T]>,
) -> Result<LocalStochastic<T>, LocalSolverError> {
    let m = boundary.set.m();
    let stats: Mutex<HashMap<usize, usize>> = Mutex::new(HashMap::new());
    let failures: Mutex<Vec<LocalSolverError>> = Mutex::new(Vec::new());
    let n_nodes = pp.n_nodes();
    let n_mult = pp.n_multipliers();
    let oracle = |l: usize, xi: &[T]| -> Vec<Vec<T>> {
        let xi = xi_override.unwrap_or(xi);
        let coarse = boundary.evaluate(xi);
        let dirichlet = pp.iface.prolongate(&coarse);
        let init = warm.and_then(|w| w.get(&l)).map(|v| v.as_slice());
        match pp.solve_deterministic(xi[pp.var_k], xi[pp.var_r], &dirichlet, newton_tol, init) {
            Ok(sample) => {
                stats.lock().unwrap().insert(l, sample.newton_iters);
                vec![sample.w, sample.lambda]
            }
            Err(e) => {
                failures.lock().unwrap().push(e);
                vec![vec![T::zero(); n_nodes], vec![T::zero(); n_mult]]
            }
        }
    };
    let outcome = adaptive_fit_multi(
        m,
        &[TargetSpec::new(format!("w_{}", pp.q + 1)), TargetSpec::new(format!("lambda_{}", pp.q + 1))],
        &oracle,
        params,
    )?;
    let failures = failures.into_inner().unwrap();
    if let Some(e) = failures.into_iter().next() {
        return Err(e);
    }
    let mut approx = outcome.approximations;
    let lambda = approx.pop().expect("two targets");
    let w = approx.pop().expect("two targets");
    let stats = stats.into_inner().unwrap();
    let n_samples = outcome.log.points.len();
    let newton_iters: Vec<usize> =
        (0..n_samples).map(|l| stats.get(&l).copied().unwrap_or(0)).collect();
    // the log's outputs hold [w, λ] per sample; the w part feeds the next
    // iteration's warm starts
    let warm_next: WarmCache<T> = outcome
        .log
        .outputs
        .iter()
        .enumerate()
        .map(|(l, row)| (l, row[..n_nodes].to_vec()))
        .collect();
    Ok(LocalStochastic {
        w,
        lambda,
        log: outcome.log,
        converged: outcome.converged,
        newton_iters,
        warm: warm_next,
    })
}
