//! Polynomial chaos approximations: evaluation and serialization.

use super::legendre::design_matrix_of;
use super::multi_index::{MultiIndex, MultiIndexSet};
use crate::real::{real, Real};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

/// A vector-valued polynomial chaos approximation: coefficients per
/// multi-index and per output, with the leave-one-out error of the fit.
#[derive(Debug, Clone)]
pub struct PceApprox<T> {
    pub m: usize,
    pub set: MultiIndexSet,
    /// `#A × n_outputs`, rows aligned with `set`.
    pub coefficients: Array2<T>,
    /// Corrected leave-one-out error per output.
    pub loo: Array1<T>,
    /// `‖ε‖₂` over outputs.
    pub loo_norm: T,
    pub seed: u64,
    pub n_samples: usize,
}

impl<T: Real> PceApprox<T> {
    /// A parameter-independent approximation (index set `{0}`).
    pub fn deterministic(m: usize, values: &[T]) -> Self {
        let n = values.len();
        let mut coefficients = Array2::<T>::zeros((1, n));
        for (i, v) in values.iter().enumerate() {
            coefficients[[0, i]] = *v;
        }
        Self {
            m,
            set: MultiIndexSet::zero(m),
            coefficients,
            loo: Array1::zeros(n),
            loo_norm: T::zero(),
            seed: 0,
            n_samples: 1,
        }
    }

    pub fn n_outputs(&self) -> usize {
        self.coefficients.ncols()
    }

    /// Basis values `ψ_α(ξ)` aligned with the set.
    pub fn basis_values(&self, xi: &[T]) -> Vec<T> {
        let row = design_matrix_of(&[xi.to_vec()], self.set.indices(), self.m);
        (0..self.set.len()).map(|c| row[[0, c]]).collect()
    }

    pub fn evaluate(&self, xi: &[T]) -> Vec<T> {
        let basis = self.basis_values(xi);
        let n = self.n_outputs();
        let mut out = vec![T::zero(); n];
        for (k, b) in basis.iter().enumerate() {
            for i in 0..n {
                out[i] = out[i] + *b * self.coefficients[[k, i]];
            }
        }
        out
    }

    /// Evaluate only the selected output components.
    pub fn evaluate_outputs(&self, xi: &[T], outputs: &[usize]) -> Vec<T> {
        let basis = self.basis_values(xi);
        outputs
            .iter()
            .map(|&i| {
                basis
                    .iter()
                    .enumerate()
                    .map(|(k, b)| *b * self.coefficients[[k, i]])
                    .sum()
            })
            .collect()
    }

    /// Coefficient of the zero index: the mean field.
    pub fn mean(&self) -> Vec<T> {
        match self.set.position(&MultiIndex::zero(self.m)) {
            Some(k) => self.coefficients.row(k).to_vec(),
            None => vec![T::zero(); self.n_outputs()],
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = PceJson {
            m: self.m,
            indices: self.set.iter().map(|mi| mi.degrees().to_vec()).collect(),
            coefficients: self
                .coefficients
                .rows()
                .into_iter()
                .map(|r| r.iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
            loo_errors: self.loo.iter().map(|v| v.to_f64_lossy()).collect(),
            seed: self.seed,
            n_samples: self.n_samples,
        };
        serde_json::to_value(doc).expect("PCE document serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, serde_json::Error> {
        let doc: PceJson = serde_json::from_value(v.clone())?;
        let set = MultiIndexSet::from_indices(
            doc.m,
            doc.indices.iter().map(|d| MultiIndex::new(d)),
        )
        .expect("valid index set in PCE document");
        let k = set.len();
        let n = doc.coefficients.first().map_or(0, |r| r.len());
        let mut coefficients = Array2::<T>::zeros((k, n));
        for (r, row) in doc.coefficients.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                coefficients[[r, c]] = real(*v);
            }
        }
        let loo = Array1::from_iter(doc.loo_errors.iter().map(|v| real::<T>(*v)));
        let loo_norm = loo.iter().map(|v| *v * *v).sum::<T>().sqrt();
        Ok(Self { m: doc.m, set, coefficients, loo, loo_norm, seed: doc.seed, n_samples: doc.n_samples })
    }
}

#[derive(Serialize, Deserialize)]
struct PceJson {
    m: usize,
    indices: Vec<Vec<u8>>,
    coefficients: Vec<Vec<f64>>,
    loo_errors: Vec<f64>,
    seed: u64,
    #[serde(default)]
    n_samples: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut set = MultiIndexSet::zero(2);
        set.push(MultiIndex::new(&[1, 0])).unwrap();
        let mut coefficients = Array2::<f64>::zeros((2, 3));
        coefficients[[0, 0]] = 1.5;
        coefficients[[1, 2]] = -0.25;
        let pce = PceApprox {
            m: 2,
            set,
            coefficients,
            loo: Array1::from(vec![0.0, 1e-8, 0.0]),
            loo_norm: 1e-8,
            seed: 99,
            n_samples: 17,
        };
        let json = pce.to_json();
        let back: PceApprox<f64> = PceApprox::from_json(&json).unwrap();
        assert_eq!(back.m, 2);
        assert_eq!(back.set.len(), 2);
        assert_eq!(back.coefficients, pce.coefficients);
        assert_eq!(back.seed, 99);
        assert_eq!(back.n_samples, 17);
    }

    #[test]
    fn evaluation_matches_manual_sum() {
        let mut set = MultiIndexSet::zero(1);
        set.push(MultiIndex::new(&[1])).unwrap();
        let mut coefficients = Array2::<f64>::zeros((2, 1));
        coefficients[[0, 0]] = 2.0;
        coefficients[[1, 0]] = 1.0;
        let pce = PceApprox {
            m: 1,
            set,
            coefficients,
            loo: Array1::zeros(1),
            loo_norm: 0.0,
            seed: 0,
            n_samples: 5,
        };
        let xi = [0.75f64];
        let val = pce.evaluate(&xi)[0];
        let expect = 2.0 + 3f64.sqrt() * (2.0 * 0.75 - 1.0);
        assert!((val - expect).abs() < 1e-14);
        assert_eq!(pce.mean(), vec![2.0]);
    }
}
