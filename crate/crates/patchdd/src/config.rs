//! Run configuration: JSON schema, validation, canonical hashing.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    /// `[x0, x1, y0, y1]` of the patch box `Λ_q`.
    pub patch: [f64; 4],
    /// `[x0, x1, y0, y1]` of the inclusion box `Λ*_q` supporting the
    /// uncertain coefficients.
    pub inclusion: [f64; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightMode {
    /// All weights one.
    Isotropic,
    /// `γ_q = 1 - 0.1 (q + 1)`, `q` one-based.
    Anisotropic,
    /// Explicit per-patch weights.
    Explicit { values: Vec<f64> },
}

impl WeightMode {
    pub fn weights(&self, n_patches: usize) -> Vec<f64> {
        match self {
            WeightMode::Isotropic => vec![1.0; n_patches],
            WeightMode::Anisotropic => {
                (1..=n_patches).map(|q| 1.0 - 0.1 * (q as f64 + 1.0)).collect()
            }
            WeightMode::Explicit { values } => values.clone(),
        }
    }
}

/// Choice of the deterministic diffusion coefficient on the fictitious
/// patches.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum FictitiousRule {
    /// Mean of the random coefficient: `1 + γ_q/2` on the inclusion box.
    Mean,
    /// Unit coefficient everywhere.
    Unit,
    /// Coefficient of the frozen sample (requires `fixed_xi`); matches the
    /// true patch operator in the deterministic linear setting.
    Fixed,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RelaxationSpec {
    Fixed { rho: f64 },
    Aitken { rho_inf: f64, rho_sup: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub sampling: u64,
    /// Per-patch seed offsets; defaults to `q + 1` mixed into the sampling
    /// seed.
    #[serde(default)]
    pub patch_offsets: Option<Vec<u64>>,
    /// Seed for fresh validation samples (consistency checks).
    #[serde(default = "default_validation_seed")]
    pub validation: u64,
}

fn default_validation_seed() -> u64 {
    7_777_777
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub patches: Vec<PatchSpec>,
    pub weights: WeightMode,
    /// Coarse element size `H`.
    pub coarse_size: f64,
    /// Fine element size `h`; must divide `H`.
    pub fine_size: f64,
    /// Constant volumetric source.
    pub source: f64,
    pub fictitious: FictitiousRule,
    pub relaxation: RelaxationSpec,
    pub eps_cv: f64,
    #[serde(default = "default_eps_stagn")]
    pub eps_stagn: f64,
    #[serde(default = "default_eps_overfit")]
    pub eps_overfit: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_p_add")]
    pub p_add: f64,
    #[serde(default = "default_n0")]
    pub n0: usize,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    pub k_max: usize,
    pub seeds: SeedSpec,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Optional path to a reference solution JSON for the error indicator.
    #[serde(default)]
    pub reference: Option<String>,
    #[serde(default = "default_max_samples")]
    pub max_samples: usize,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    /// Early stop when the relative increment falls below this value.
    #[serde(default = "default_early_stop")]
    pub early_stop: Option<f64>,
    /// Freeze the random vector: every sample is replaced by this point,
    /// making the problem deterministic.
    #[serde(default)]
    pub fixed_xi: Option<Vec<f64>>,
}

fn default_eps_stagn() -> f64 {
    0.1
}
fn default_eps_overfit() -> f64 {
    0.1
}
fn default_theta() -> f64 {
    0.5
}
fn default_p_add() -> f64 {
    0.1
}
fn default_n0() -> usize {
    1
}
fn default_newton_tol() -> f64 {
    1e-12
}
fn default_max_samples() -> usize {
    5000
}
fn default_max_rounds() -> usize {
    200
}
fn default_early_stop() -> Option<f64> {
    Some(1e-12)
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| err("<root>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.domain.x1 > self.domain.x0) || !(self.domain.y1 > self.domain.y0) {
            return Err(err("domain", "degenerate box"));
        }
        if self.patches.is_empty() {
            return Err(err("patches", "at least one patch is required"));
        }
        if self.coarse_size <= 0.0 {
            return Err(err("coarse_size", "must be positive"));
        }
        if self.fine_size <= 0.0 {
            return Err(err("fine_size", "must be positive"));
        }
        let ratio = self.coarse_size / self.fine_size;
        if (ratio - ratio.round()).abs() > 1e-12 * ratio || ratio < 1.0 {
            return Err(err("fine_size", "must divide coarse_size (nested meshes)"));
        }
        if !(self.theta >= 0.0 && self.theta <= 1.0) {
            return Err(err("theta", "must lie in [0, 1]"));
        }
        for (name, v) in [
            ("eps_cv", self.eps_cv),
            ("eps_stagn", self.eps_stagn),
            ("eps_overfit", self.eps_overfit),
            ("p_add", self.p_add),
            ("newton_tol", self.newton_tol),
        ] {
            if !(v > 0.0) {
                return Err(err(name, "must be positive"));
            }
        }
        if self.n0 < 1 {
            return Err(err("n0", "must be at least 1"));
        }
        if self.k_max < 1 {
            return Err(err("k_max", "must be at least 1"));
        }
        match &self.relaxation {
            RelaxationSpec::Fixed { rho } => {
                if !(*rho > 0.0) {
                    return Err(err("relaxation.rho", "must be positive"));
                }
            }
            RelaxationSpec::Aitken { rho_inf, rho_sup } => {
                if !(*rho_inf > 0.0 && rho_inf <= rho_sup) {
                    return Err(err("relaxation.rho_inf", "requires 0 < rho_inf <= rho_sup"));
                }
            }
        }
        if let WeightMode::Explicit { values } = &self.weights {
            if values.len() != self.patches.len() {
                return Err(err("weights.values", "length must match patch count"));
            }
            if values.iter().any(|g| !(*g > 0.0 && *g <= 1.0)) {
                return Err(err("weights.values", "weights must lie in (0, 1]"));
            }
        }
        if let Some(offsets) = &self.seeds.patch_offsets {
            if offsets.len() != self.patches.len() {
                return Err(err("seeds.patch_offsets", "length must match patch count"));
            }
        }
        if let Some(xi) = &self.fixed_xi {
            if xi.len() != 2 * self.patches.len() {
                return Err(err("fixed_xi", "length must be 2 * patch count"));
            }
        }
        if matches!(self.fictitious, FictitiousRule::Fixed) && self.fixed_xi.is_none() {
            return Err(err("fictitious", "rule `fixed` requires `fixed_xi`"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON, recorded in output files.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Seed of patch `q`'s sample stream, stable across outer iterations.
    pub fn patch_seed(&self, q: usize) -> u64 {
        let offset =
            self.seeds.patch_offsets.as_ref().map(|o| o[q]).unwrap_or(q as u64 + 1);
        self.seeds.sampling.wrapping_add(offset.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    /// Seed of the reference solver's sample stream.
    pub fn reference_seed(&self) -> u64 {
        self.seeds.sampling.wrapping_add(0xC2B2_AE3D_27D4_EB4F)
    }

    /// The benchmark geometry: a vertical column of unit square patches.
    pub fn benchmark_patches(q_count: usize) -> Vec<PatchSpec> {
        (1..=q_count)
            .map(|q| {
                let yc = 2.0 * q as f64 - 1.0;
                PatchSpec {
                    patch: [0.5, 1.5, yc - 0.5, yc + 0.5],
                    inclusion: [0.75, 1.25, yc - 0.25, yc + 0.25],
                }
            })
            .collect()
    }
}

/// Ready-made configurations: the benchmark and a compact variant for fast
/// checks.
pub mod presets {
    use super::*;

    /// The diffusion-reaction benchmark: domain `(0,2)×(0,16)`, eight unit
    /// square patches along the vertical axis, `H = 0.1`, `h = 0.05`, unit
    /// source, mean-field fictitious coefficient, Aitken relaxation.
    pub fn benchmark(weights: WeightMode, eps_cv: f64, sampling_seed: u64) -> RunConfig {
        RunConfig {
            domain: DomainSpec { x0: 0.0, x1: 2.0, y0: 0.0, y1: 16.0 },
            patches: RunConfig::benchmark_patches(8),
            weights,
            coarse_size: 0.1,
            fine_size: 0.05,
            source: 1.0,
            fictitious: FictitiousRule::Mean,
            relaxation: RelaxationSpec::Aitken { rho_inf: 1e-8, rho_sup: 1.5 },
            eps_cv,
            eps_stagn: 0.1,
            eps_overfit: 0.1,
            theta: 0.5,
            p_add: 0.1,
            n0: 1,
            newton_tol: 1e-12,
            k_max: 20,
            seeds: SeedSpec { sampling: sampling_seed, patch_offsets: None, validation: 7_777_777 },
            output_dir: None,
            reference: None,
            max_samples: 5000,
            max_rounds: 200,
            early_stop: Some(1e-12),
            fixed_xi: None,
        }
    }

    /// A reduced geometry (domain `(0,2)×(0,4)`, `q_count` patches) that runs
    /// in seconds; same structure as the benchmark.
    pub fn compact(q_count: usize, eps_cv: f64, sampling_seed: u64) -> RunConfig {
        assert!(q_count >= 1 && q_count <= 2);
        let mut cfg = benchmark(WeightMode::Isotropic, eps_cv, sampling_seed);
        cfg.domain = DomainSpec { x0: 0.0, x1: 2.0, y0: 0.0, y1: 4.0 };
        cfg.patches = RunConfig::benchmark_patches(q_count);
        cfg
    }
}

/// Helpers shared by unit and integration tests.
pub mod tests_support {
    use super::*;

    /// Two patches on the reduced domain, cheap tolerances.
    pub fn small_config() -> RunConfig {
        let mut cfg = presets::compact(2, 1e-3, 99);
        cfg.k_max = 6;
        cfg
    }
}
