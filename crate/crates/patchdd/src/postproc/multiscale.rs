//! The multiscale solution `u = (U, w_1, …, w_Q)` and its statistics.

use super::moments::{moments, moments_of, sensitivity_numerator, sensitivity_numerator_of};
use crate::global_local::PceField;
use crate::mesh::ElementRegion;
use crate::problem::Problem;
use crate::real::{real, Real};
use crate::sparse_poly::PceApprox;

/// Location of a composite node relative to the patch layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Inside (or on the boundary of) patch `q`.
    Patch(usize),
    /// Outside every patch.
    Far,
}

/// Classify a point against the patch boxes.
pub fn node_patch_classification<T: Real>(
    problem: &Problem<T>,
    p: [T; 2],
) -> NodeClass {
    for (q, b) in problem.layout.patch_boxes.iter().enumerate() {
        if b.contains(p, real::<T>(1e-12)) {
            return NodeClass::Patch(q);
        }
    }
    NodeClass::Far
}

/// Statistics of the multiscale field: the exterior part carries the global
/// solution's chaos expansion, each patch carries its local solution's.
pub struct Multiscale<T> {
    /// Global node ids referenced by at least one exterior element.
    pub exterior_nodes: Vec<usize>,
    /// Mean and variance on the full global mesh (meaningful on
    /// `exterior_nodes`; patch interiors carry the fictitious extension).
    pub mean_global: Vec<T>,
    pub var_global: Vec<T>,
    /// Per-patch mean and variance on the fine meshes.
    pub mean_patch: Vec<Vec<T>>,
    pub var_patch: Vec<Vec<T>>,
    /// Per-variable sensitivity numerators.
    pub sens_num_global: Vec<Vec<T>>,
    pub sens_num_patch: Vec<Vec<Vec<T>>>,
    /// Max of the total variance over the composite node set.
    pub var_max: T,
}

impl<T: Real> Multiscale<T> {
    /// Normalized sensitivity index on the exterior nodes for variable `i`.
    pub fn sens_global(&self, i: usize) -> Vec<T> {
        self.sens_num_global[i].iter().map(|v| *v / self.var_max).collect()
    }

    /// Normalized sensitivity index on patch `q` for variable `i`.
    pub fn sens_patch(&self, q: usize, i: usize) -> Vec<T> {
        self.sens_num_patch[q][i].iter().map(|v| *v / self.var_max).collect()
    }
}

/// Assemble the multiscale statistics from a converged state.
///
/// Patch values come from the local solutions, exterior values from the
/// global solution; the sensitivity denominator is the variance maximum over
/// the composite (exterior plus patches) node set.
pub fn merge_multiscale<T: Real>(
    problem: &Problem<T>,
    u: &PceField<T>,
    w: &[PceApprox<T>],
) -> Multiscale<T> {
    assert_eq!(w.len(), problem.patches.len(), "missing patch solutions");
    let mesh = &problem.global_mesh;
    let mut on_exterior = vec![false; mesh.n_nodes()];
    for e in 0..mesh.n_triangles() {
        if problem.regions[e] == ElementRegion::Exterior {
            for &n in &mesh.triangles[e] {
                on_exterior[n] = true;
            }
        }
    }
    let exterior_nodes: Vec<usize> =
        (0..mesh.n_nodes()).filter(|&n| on_exterior[n]).collect();
    let (mean_global, var_global) = moments_of(u);
    let mut mean_patch = Vec::new();
    let mut var_patch = Vec::new();
    for wq in w {
        let (m, v) = moments(wq);
        mean_patch.push(m);
        var_patch.push(v);
    }
    let m = problem.m;
    let sens_num_global: Vec<Vec<T>> =
        (0..m).map(|i| sensitivity_numerator_of(u, i)).collect();
    let sens_num_patch: Vec<Vec<Vec<T>>> = w
        .iter()
        .map(|wq| (0..m).map(|i| sensitivity_numerator(wq, i)).collect())
        .collect();
    let mut var_max = T::zero();
    for &n in &exterior_nodes {
        var_max = var_max.max(var_global[n]);
    }
    for vq in &var_patch {
        for v in vq {
            var_max = var_max.max(*v);
        }
    }
    Multiscale {
        exterior_nodes,
        mean_global,
        var_global,
        mean_patch,
        var_patch,
        sens_num_global,
        sens_num_patch,
        var_max,
    }
}
