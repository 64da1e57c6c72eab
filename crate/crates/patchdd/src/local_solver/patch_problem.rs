//! Per-patch assembly bundle.
//!
//! The benchmark coefficients are affine in the sample: the patch stiffness
//! is the unit-coefficient operator plus `γ ξ` times the indicator-supported
//! operator, and the reaction coefficient is `γ ξ` times the indicator. Both
//! pieces are assembled once; per-sample operators are cheap combinations on
//! the shared pattern.

use crate::fem::{
    assemble_coupling, assemble_load, assemble_stiffness, assemble_stiffness_unchecked,
    CoefficientField, DofMap, InterfaceCoupling, SparseOperator,
};
use crate::linalg::SkylinePattern;
use crate::mesh::{NodeTag, PatchInterface, Rect, StructuredTriMesh};
use crate::real::Real;
use std::sync::Arc;

/// Assembly bundle for one patch: meshes, affine operator pieces, interface
/// coupling and the interior dof map. Immutable once built.
pub struct PatchProblem<T> {
    pub q: usize,
    pub mesh: StructuredTriMesh<T>,
    pub iface: PatchInterface<T>,
    pub coupling: InterfaceCoupling<T>,
    /// Uncertainty weight `γ_q`.
    pub gamma: T,
    /// Zero-based positions of this patch's diffusion and reaction variables.
    pub var_k: usize,
    pub var_r: usize,
    /// Stiffness with unit coefficient.
    pub a_base: SparseOperator<T>,
    /// Stiffness with the inclusion indicator as coefficient.
    pub a_chi: SparseOperator<T>,
    /// Reaction indicator field (`χ_q` per element).
    pub r_chi: CoefficientField<T>,
    /// Load vector of the constant source.
    pub load: Vec<T>,
    /// Free (non-interface) dofs.
    pub interior: DofMap,
    /// Skyline profile of the interior-reduced operator.
    pub skyline: Arc<SkylinePattern>,
}

impl<T: Real> PatchProblem<T> {
    pub fn new(
        q: usize,
        mesh: StructuredTriMesh<T>,
        iface: PatchInterface<T>,
        inclusion: &Rect<T>,
        gamma: T,
        f: T,
    ) -> Self {
        let unit = CoefficientField::constant(&mesh, T::one());
        let a_base = assemble_stiffness(&mesh, &unit).expect("unit coefficient");
        let chi = CoefficientField::indicator(&mesh, inclusion);
        // share a_base's pattern so per-sample combinations are value sums
        let a_chi = {
            let mut shared = SparseOperator::zeros(a_base.pattern().clone());
            shared.add_scaled(&assemble_stiffness_unchecked(&mesh, &chi), T::one());
            shared
        };
        let r_chi = chi;
        let load = assemble_load(&mesh, f);
        let coupling = assemble_coupling(&iface);
        let interior =
            DofMap::from_predicate(mesh.n_nodes(), |n| mesh.node_tags[n] != NodeTag::Interface);
        let reduced = interior.reduce_matrix(&a_base);
        let skyline = reduced.skyline_pattern();
        Self {
            q,
            mesh,
            iface,
            coupling,
            gamma,
            var_k: 2 * q,
            var_r: 2 * q + 1,
            a_base,
            a_chi,
            r_chi,
            load,
            interior,
            skyline,
        }
    }

    /// Patch stiffness for one sample: `A(ξ) = A_1 + γ ξ_K A_χ`.
    pub fn operator(&self, xi_k: T) -> SparseOperator<T> {
        let mut a = self.a_base.clone();
        a.add_scaled(&self.a_chi, self.gamma * xi_k);
        a
    }

    /// Reaction scale for one sample: `R(x, ξ) = γ ξ_R χ(x)`.
    pub fn reaction_scale(&self, xi_r: T) -> T {
        self.gamma * xi_r
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    pub fn n_multipliers(&self) -> usize {
        self.iface.fine_nodes.len()
    }
}
