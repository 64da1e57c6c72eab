//! The deterministic global operator and the per-coefficient global step.

use super::pce_field::PceField;
use crate::config::FictitiousRule;
use crate::fem::{
    assemble_load, assemble_stiffness, assemble_stiffness_unchecked, gram_matrices,
    mass_on_elements, CoefficientField, DofMap, SparseOperator,
};
use crate::linalg::{SkylineCholesky, SkylineMatrix};
use crate::mesh::{ElementRegion, InterfaceMap, PatchLayout, StructuredTriMesh};
use crate::real::{real, Real};
use crate::sparse_poly::{MultiIndexSet, PceApprox};
use ndarray::Array2;
use rayon::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Interface coupling data needed on the global side of one patch.
pub struct GlobalCoupling<T> {
    /// Global node ids of the coarse interface ring (arc-length order).
    pub coarse_nodes: Vec<usize>,
    /// `B̃_Γ = P_qᵀ B_Γ` (`n_coarse × n_mult`).
    pub coarse_map: Array2<T>,
}

impl<T: Real> GlobalCoupling<T> {
    /// Scatter `B̃_Γ λ` into a full-mesh vector.
    pub fn scatter_into(&self, lambda: &[T], out: &mut [T], sign: T) {
        let (nc, nf) = (self.coarse_map.nrows(), self.coarse_map.ncols());
        assert_eq!(lambda.len(), nf);
        for c in 0..nc {
            let mut s = T::zero();
            for j in 0..nf {
                s = s + self.coarse_map[[c, j]] * lambda[j];
            }
            out[self.coarse_nodes[c]] = out[self.coarse_nodes[c]] + sign * s;
        }
    }
}

/// Deterministic operators of the fictitious global problem, factorized once.
pub struct GlobalSystem<T> {
    /// Stiffness of the fictitious coefficient over the whole domain.
    pub c_full: SparseOperator<T>,
    /// Same coefficient restricted to the fictitious patch elements.
    pub c_patch: SparseOperator<T>,
    /// Unit-coefficient stiffness over the exterior elements.
    pub a_ext: SparseOperator<T>,
    /// Load assembled over exterior elements only.
    pub l_ext: Vec<T>,
    /// Full-domain load (diagnostics).
    pub l_full: Vec<T>,
    pub dof: DofMap,
    chol: SkylineCholesky<T>,
    factorize_count: AtomicUsize,
    /// L2 mass on exterior elements (error indicator).
    pub mass_ext: SparseOperator<T>,
    /// Full-domain L2 and H1 Gram matrices (norms, relaxation).
    pub mass: SparseOperator<T>,
    pub h1: SparseOperator<T>,
    pub couplings: Vec<GlobalCoupling<T>>,
    pub n_nodes: usize,
}

impl<T: Real> GlobalSystem<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mesh: &StructuredTriMesh<T>,
        layout: &PatchLayout<T>,
        regions: &[ElementRegion],
        iface_map: &InterfaceMap<T>,
        rule: &FictitiousRule,
        fixed_xi: Option<&[T]>,
        source: T,
    ) -> Self {
        let n_el = mesh.n_triangles();
        // fictitious coefficient: one outside the inclusion boxes, the rule's
        // value inside them
        let mut k_tilde = vec![T::one(); n_el];
        for (q, inc) in layout.inclusion_boxes.iter().enumerate() {
            let gamma = layout.weights[q];
            let value = match rule {
                FictitiousRule::Mean => T::one() + gamma * real::<T>(0.5),
                FictitiousRule::Unit => T::one(),
                FictitiousRule::Fixed => {
                    T::one() + gamma * fixed_xi.expect("fixed_xi required")[2 * q]
                }
            };
            for e in 0..n_el {
                if inc.contains(mesh.tri_centroid(e), T::zero()) {
                    k_tilde[e] = value;
                }
            }
        }
        let k_tilde = CoefficientField::from_values(k_tilde);
        let c_full = assemble_stiffness(mesh, &k_tilde).expect("fictitious coefficient positive");
        // element-split pieces on the same mesh pattern
        let mut patch_coeff = vec![T::zero(); n_el];
        let mut ext_coeff = vec![T::zero(); n_el];
        for e in 0..n_el {
            match regions[e] {
                ElementRegion::Patch(_) => patch_coeff[e] = k_tilde.value(e),
                ElementRegion::Exterior => ext_coeff[e] = T::one(),
            }
        }
        let c_patch =
            assemble_stiffness_unchecked(mesh, &CoefficientField::from_values(patch_coeff));
        let a_ext = assemble_stiffness_unchecked(mesh, &CoefficientField::from_values(ext_coeff));
        let l_full = assemble_load(mesh, source);
        let l_ext = {
            let mut l = vec![T::zero(); mesh.n_nodes()];
            let third = real::<T>(1.0 / 3.0);
            let half = real::<T>(0.5);
            for e in 0..n_el {
                if regions[e] == ElementRegion::Exterior {
                    let contrib = source * half * mesh.tri_double_area(e) * third;
                    for &n in &mesh.triangles[e] {
                        l[n] = l[n] + contrib;
                    }
                }
            }
            l
        };
        let dof = DofMap::non_dirichlet(mesh);
        let reduced = dof.reduce_matrix(&c_full);
        let mut sky = SkylineMatrix::zeros(reduced.skyline_pattern());
        reduced.fill_skyline(&mut sky);
        let chol = sky.factorize().expect("global fictitious operator is SPD");
        let mass_ext = mass_on_elements(mesh, |e| regions[e] == ElementRegion::Exterior);
        let (mass, h1) = gram_matrices(mesh);
        let couplings = iface_map
            .patches
            .iter()
            .map(|p| {
                let coupling = crate::fem::assemble_coupling(p);
                GlobalCoupling {
                    coarse_nodes: p.coarse_nodes.clone(),
                    coarse_map: coupling.coarse_map,
                }
            })
            .collect();
        Self {
            c_full,
            c_patch,
            a_ext,
            l_ext,
            l_full,
            dof,
            chol,
            factorize_count: AtomicUsize::new(1),
            mass_ext,
            mass,
            h1,
            couplings,
            n_nodes: mesh.n_nodes(),
        }
    }

    /// How many times the global operator has been factorized.
    pub fn factorize_count(&self) -> usize {
        self.factorize_count.load(Ordering::Relaxed)
    }

    /// One deterministic solve `C_Ω̃ u = rhs` with Dirichlet elimination.
    pub fn solve(&self, rhs_full: &[T]) -> Vec<T> {
        let rhs = self.dof.reduce_vec(rhs_full);
        let sol = self.chol.solve(&rhs);
        self.dof.expand_vec(&sol)
    }

    /// The global step: for every coefficient of the union index set of the
    /// previous iterate and the multipliers, solve
    /// `C_Ω̃ Û_α = C_Λ̃ U_α - Σ_q B̃_Γ,q λ_q,α + l_ext [α = 0]`
    /// with the factorization reused across all coefficients.
    pub fn global_step(&self, u_prev: &PceField<T>, lambdas: &[PceApprox<T>]) -> PceField<T> {
        let m = u_prev.m();
        let mut union = MultiIndexSet::zero(m);
        for alpha in u_prev.set.iter() {
            if !union.contains(alpha) {
                union.push(alpha.clone()).unwrap();
            }
        }
        for lq in lambdas {
            for alpha in lq.set.iter() {
                if !union.contains(alpha) {
                    union.push(alpha.clone()).unwrap();
                }
            }
        }
        // deterministic order
        let union = {
            let mut all: Vec<_> = union.iter().cloned().collect();
            all.sort();
            MultiIndexSet::from_indices(m, all).unwrap()
        };
        let coeffs: Vec<Vec<T>> = union
            .indices()
            .par_iter()
            .map(|alpha| {
                let mut rhs = vec![T::zero(); self.n_nodes];
                if let Some(u_alpha) = u_prev.coeff(alpha) {
                    self.c_patch.matvec(u_alpha, &mut rhs);
                }
                for (q, lq) in lambdas.iter().enumerate() {
                    if let Some(k) = lq.set.position(alpha) {
                        let lam: Vec<T> = lq.coefficients.row(k).to_vec();
                        self.couplings[q].scatter_into(&lam, &mut rhs, -T::one());
                    }
                }
                if alpha.is_zero() {
                    for (r, l) in rhs.iter_mut().zip(&self.l_ext) {
                        *r = *r + *l;
                    }
                }
                self.solve(&rhs)
            })
            .collect();
        // drop exactly zero columns
        let mut kept = Vec::new();
        let mut kept_coeffs = Vec::new();
        for (alpha, c) in union.iter().zip(coeffs) {
            if c.iter().any(|v| *v != T::zero()) {
                kept.push(alpha.clone());
                kept_coeffs.push(c);
            }
        }
        PceField {
            set: MultiIndexSet::from_indices(m, kept).unwrap(),
            coeffs: kept_coeffs,
            n_nodes: self.n_nodes,
        }
    }
}
