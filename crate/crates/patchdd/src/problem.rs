//! Assembled problem: meshes, patches, and the global system, built from a
//! run configuration.

use crate::config::{FictitiousRule, RunConfig};
use crate::global_local::GlobalSystem;
use crate::local_solver::PatchProblem;
use crate::mesh::{
    build_interface_map, build_rect_mesh, partition_global, ElementRegion, MeshError, NodeTag,
    PatchLayout, Rect, StructuredTriMesh,
};
use crate::real::{real, Real};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

/// Everything assembled and factorized for one configuration.
pub struct Problem<T> {
    pub config: RunConfig,
    /// Number of random variables (two per patch).
    pub m: usize,
    pub global_mesh: StructuredTriMesh<T>,
    pub layout: PatchLayout<T>,
    pub regions: Vec<ElementRegion>,
    pub patches: Vec<PatchProblem<T>>,
    pub system: GlobalSystem<T>,
    /// Frozen sample for deterministic runs.
    pub fixed_xi: Option<Vec<T>>,
}

fn rect_of<T: Real>(b: &[f64; 4]) -> Rect<T> {
    Rect::new(real(b[0]), real(b[1]), real(b[2]), real(b[3]))
}

impl<T: Real> Problem<T> {
    pub fn build(config: &RunConfig) -> Result<Self, BuildError> {
        config.validate()?;
        let d = &config.domain;
        let domain = Rect::new(real(d.x0), real(d.x1), real(d.y0), real(d.y1));
        let global_mesh = build_rect_mesh(domain, real(config.coarse_size), NodeTag::Dirichlet)?;
        let weights = config.weights.weights(config.patches.len());
        let layout = PatchLayout {
            patch_boxes: config.patches.iter().map(|p| rect_of(&p.patch)).collect(),
            inclusion_boxes: config.patches.iter().map(|p| rect_of(&p.inclusion)).collect(),
            weights: weights.iter().map(|&g| real(g)).collect(),
        };
        layout.validate(&domain)?;
        let regions = partition_global(&global_mesh, &layout)?;
        let patch_meshes: Vec<StructuredTriMesh<T>> = layout
            .patch_boxes
            .iter()
            .map(|b| build_rect_mesh(*b, real(config.fine_size), NodeTag::Interface))
            .collect::<Result<_, _>>()?;
        let iface_map = build_interface_map(&global_mesh, &patch_meshes, &layout)?;
        let fixed_xi: Option<Vec<T>> =
            config.fixed_xi.as_ref().map(|v| v.iter().map(|&x| real(x)).collect());
        let patches: Vec<PatchProblem<T>> = patch_meshes
            .into_iter()
            .zip(iface_map.patches.iter())
            .enumerate()
            .map(|(q, (mesh, iface))| {
                PatchProblem::new(
                    q,
                    mesh,
                    iface.clone(),
                    &layout.inclusion_boxes[q],
                    layout.weights[q],
                    real(config.source),
                )
            })
            .collect();
        let system = GlobalSystem::new(
            &global_mesh,
            &layout,
            &regions,
            &iface_map,
            &config.fictitious,
            fixed_xi.as_deref(),
            real(config.source),
        );
        Ok(Self {
            config: config.clone(),
            m: 2 * layout.n_patches(),
            global_mesh,
            layout,
            regions,
            patches,
            system,
            fixed_xi,
        })
    }

    /// The fictitious diffusion value on the inclusion box of patch `q`.
    pub fn fictitious_value(&self, q: usize) -> T {
        let gamma = self.layout.weights[q];
        match self.config.fictitious {
            FictitiousRule::Mean => T::one() + gamma * real::<T>(0.5),
            FictitiousRule::Unit => T::one(),
            FictitiousRule::Fixed => {
                let xi = self.fixed_xi.as_ref().expect("validated");
                T::one() + gamma * xi[2 * q]
            }
        }
    }
}
