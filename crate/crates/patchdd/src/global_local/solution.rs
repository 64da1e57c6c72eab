//! Solution documents: the on-disk JSON for runs and references.

use super::pce_field::PceField;
use crate::config::RunConfig;
use crate::real::Real;
use crate::sparse_poly::PceApprox;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

/// Serialized solution: the global field and per-patch fields/multipliers as
/// chaos-expansion documents, with the originating configuration embedded so
/// meshes can be rebuilt for comparisons.
#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub schema: String,
    /// "run" or "reference".
    pub kind: String,
    pub config_sha256: String,
    pub config: RunConfig,
    pub converged: bool,
    #[serde(default)]
    pub n_samples: Option<usize>,
    pub u: serde_json::Value,
    pub w: Vec<serde_json::Value>,
    pub lambda: Vec<serde_json::Value>,
}

impl SolutionDoc {
    pub fn new<T: Real>(
        kind: &str,
        config: &RunConfig,
        u: &PceField<T>,
        w: &[PceApprox<T>],
        lambda: &[PceApprox<T>],
        converged: bool,
        n_samples: Option<usize>,
    ) -> Self {
        Self {
            schema: "patchdd-solution-v1".to_string(),
            kind: kind.to_string(),
            config_sha256: config.hash(),
            config: config.clone(),
            converged,
            n_samples,
            u: field_to_json(u),
            w: w.iter().map(|p| p.to_json()).collect(),
            lambda: lambda.iter().map(|p| p.to_json()).collect(),
        }
    }

    pub fn u_field<T: Real>(&self) -> Result<PceField<T>, serde_json::Error> {
        let approx: PceApprox<T> = PceApprox::from_json(&self.u)?;
        Ok(PceField::from_approx(&approx))
    }

    pub fn patch_fields<T: Real>(
        &self,
    ) -> Result<(Vec<PceApprox<T>>, Vec<PceApprox<T>>), serde_json::Error> {
        let w = self.w.iter().map(PceApprox::from_json).collect::<Result<_, _>>()?;
        let lambda =
            self.lambda.iter().map(PceApprox::from_json).collect::<Result<_, _>>()?;
        Ok((w, lambda))
    }
}

fn field_to_json<T: Real>(field: &PceField<T>) -> serde_json::Value {
    // reuse the chaos-approximation schema
    let k = field.set.len();
    let mut coefficients = Array2::<T>::zeros((k, field.n_nodes));
    for (r, c) in field.coeffs.iter().enumerate() {
        for (j, v) in c.iter().enumerate() {
            coefficients[[r, j]] = *v;
        }
    }
    let approx = PceApprox {
        m: field.m(),
        set: field.set.clone(),
        coefficients,
        loo: Array1::zeros(field.n_nodes),
        loo_norm: T::zero(),
        seed: 0,
        n_samples: 0,
    };
    approx.to_json()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::tests_support::small_config;
    use crate::sparse_poly::{MultiIndex, MultiIndexSet};

    #[test]
    fn round_trip() {
        let cfg = small_config();
        let mut set = MultiIndexSet::zero(4);
        set.push(MultiIndex::unit(4, 1)).unwrap();
        let field = PceField::<f64> {
            set,
            coeffs: vec![vec![1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3]],
            n_nodes: 3,
        };
        let w = vec![PceApprox::<f64>::deterministic(4, &[5.0, 6.0])];
        let lam = vec![PceApprox::<f64>::deterministic(4, &[7.0])];
        let doc = SolutionDoc::new("run", &cfg, &field, &w, &lam, true, Some(12));
        let text = serde_json::to_string(&doc).unwrap();
        let back: SolutionDoc = serde_json::from_str(&text).unwrap();
        let u2: PceField<f64> = back.u_field().unwrap();
        assert_eq!(u2.set.len(), 2);
        assert_eq!(u2.coeffs[1], vec![0.1, 0.2, 0.3]);
        let (w2, l2) = back.patch_fields::<f64>().unwrap();
        assert_eq!(w2[0].coefficients[[0, 1]], 6.0);
        assert_eq!(l2[0].coefficients[[0, 0]], 7.0);
        assert_eq!(back.config_sha256, cfg.hash());
    }
}
