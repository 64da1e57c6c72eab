//! Least-squares fitting and the fast leave-one-out estimator.

use super::SparsePolyError;
use crate::linalg::{PivotedQr, QrError};
use crate::real::{real, Real};
use ndarray::{Array1, Array2, ArrayView2};

/// A least-squares fit of multiple outputs on a fixed basis.
#[derive(Debug, Clone)]
pub struct LsFit<T> {
    /// Coefficients, one row per basis term, one column per output.
    pub coefficients: Array2<T>,
    qr: PivotedQr<T>,
}

impl<T: Real> LsFit<T> {
    pub fn qr(&self) -> &PivotedQr<T> {
        &self.qr
    }
}

fn map_qr_err(e: QrError) -> SparsePolyError {
    SparsePolyError::Unstable(e.to_string())
}

/// Solve `min ‖Ψ V - Y‖` via a rank-revealing orthogonal factorization of
/// the design matrix. Requires at least as many samples as basis terms and a
/// numerically full-rank design; otherwise the caller must add samples.
pub fn ls_fit<T: Real>(
    psi: ArrayView2<T>,
    y: ArrayView2<T>,
    rank_tol: T,
) -> Result<LsFit<T>, SparsePolyError> {
    assert_eq!(psi.nrows(), y.nrows(), "samples and evaluations disagree");
    let qr = PivotedQr::factorize(psi, rank_tol).map_err(map_qr_err)?;
    let w = psi.t().dot(&y);
    let coefficients = qr.solve_normal(&w);
    Ok(LsFit { coefficients, qr })
}

/// Leave-one-out cross-validation errors of a fit.
#[derive(Debug, Clone)]
pub struct LooErrors<T> {
    /// Corrected relative mean-square errors `ε_i = e_i · T(A, N)` per
    /// output.
    pub per_output: Array1<T>,
    /// Uncorrected relative mean-square errors `e_i`.
    pub per_output_raw: Array1<T>,
    /// Correction factor `T(A, N)`.
    pub correction: T,
    /// Aggregated indicator `(Σ_i ε_i)^{1/2}`: the ℓ²-norm of the per-output
    /// relative RMS errors. This is the scalar the adaptive criteria compare
    /// against their thresholds; it is infinite when any output is
    /// degenerate.
    pub norm: T,
}

/// Predicted residuals `Δ_l = r_l / (1 - h_l)`: the residual each sample
/// would have under the fit that omits it.
pub fn predicted_residuals<T: Real>(
    fit: &LsFit<T>,
    psi: ArrayView2<T>,
    y: ArrayView2<T>,
) -> Result<Array2<T>, SparsePolyError> {
    let h = fit.qr.hat_diagonal(psi);
    let sat = T::one() - real::<T>(1e-12);
    let r = psi.dot(&fit.coefficients) - &y;
    let n = psi.nrows();
    let mut delta = r;
    for l in 0..n {
        if h[l] >= sat {
            return Err(SparsePolyError::Unstable(format!(
                "leverage saturation at sample {l} (h = {})",
                h[l]
            )));
        }
        let scale = T::one() / (T::one() - h[l]);
        for v in delta.row_mut(l).iter_mut() {
            *v = *v * scale;
        }
    }
    Ok(delta)
}

/// Fast leave-one-out errors: predicted residuals through the hat-matrix
/// leverages, normalized by the empirical second moment per output, with the
/// trace-based overfitting correction.
pub fn loo_errors<T: Real>(
    fit: &LsFit<T>,
    psi: ArrayView2<T>,
    y: ArrayView2<T>,
) -> Result<LooErrors<T>, SparsePolyError> {
    let n = psi.nrows();
    let k = psi.ncols();
    if n <= k {
        return Err(SparsePolyError::Unstable(format!(
            "cannot cross-validate with {n} samples and {k} basis terms"
        )));
    }
    let delta = predicted_residuals(fit, psi, y)?;
    let n_out = y.ncols();
    let inv_n = T::one() / real::<T>(n as f64);
    let correction = {
        let ratio = T::one() - real::<T>(k as f64) * inv_n;
        (T::one() + fit.qr.trace_gram_inverse()) / ratio
    };
    let mut per_output_raw = Array1::<T>::zeros(n_out);
    let mut per_output = Array1::<T>::zeros(n_out);
    let mut norm_sq = T::zero();
    for i in 0..n_out {
        let mut e = T::zero();
        let mut m2 = T::zero();
        let mut all_zero = true;
        for l in 0..n {
            let d = delta[[l, i]];
            e = e + d * d;
            let yv = y[[l, i]];
            m2 = m2 + yv * yv;
            if d != T::zero() {
                all_zero = false;
            }
        }
        e = e * inv_n;
        m2 = m2 * inv_n;
        let (raw, corrected) = if m2 == T::zero() {
            if all_zero {
                (T::zero(), T::zero())
            } else {
                (T::infinity(), T::infinity())
            }
        } else {
            let raw = e / m2;
            (raw, raw * correction)
        };
        per_output_raw[i] = raw;
        per_output[i] = corrected;
        norm_sq = norm_sq + corrected;
    }
    Ok(LooErrors { per_output, per_output_raw, correction, norm: norm_sq.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse_poly::legendre::design_matrix;
    use crate::sparse_poly::multi_index::MultiIndexSet;
    use ndarray::Array2;
    use rand::distr::Open01;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn samples(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..m).map(|_| rng.sample(Open01)).collect()).collect()
    }

    #[test]
    fn interpolates_a_basis_element() {
        let set = MultiIndexSet::total_degree(2, 2);
        let xs = samples(24, 2, 3);
        let psi = design_matrix(&xs, &set);
        // u = ψ_α for the third basis element
        let target = 3usize;
        let mut y = Array2::<f64>::zeros((24, 1));
        for l in 0..24 {
            y[[l, 0]] = psi[[l, target]];
        }
        let fit = ls_fit(psi.view(), y.view(), 1e-12).unwrap();
        for kk in 0..set.len() {
            let want = if kk == target { 1.0 } else { 0.0 };
            assert!((fit.coefficients[[kk, 0]] - want).abs() < 1e-10);
        }
        let loo = loo_errors(&fit, psi.view(), y.view()).unwrap();
        assert!(loo.per_output[0] < 1e-20);
    }

    #[test]
    fn zero_data_gives_zero_fit_and_zero_error() {
        let set = MultiIndexSet::total_degree(2, 1);
        let xs = samples(10, 2, 4);
        let psi = design_matrix(&xs, &set);
        let y = Array2::<f64>::zeros((10, 3));
        let fit = ls_fit(psi.view(), y.view(), 1e-12).unwrap();
        assert!(fit.coefficients.iter().all(|v| *v == 0.0));
        let loo = loo_errors(&fit, psi.view(), y.view()).unwrap();
        assert_eq!(loo.norm, 0.0);
    }

    #[test]
    fn recovers_random_quadratic_exactly() {
        let set = MultiIndexSet::total_degree(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let coefs: Vec<f64> = (0..set.len()).map(|_| rng.sample::<f64, _>(Open01) - 0.5).collect();
        let xs = samples(20, 2, 5);
        let psi = design_matrix(&xs, &set);
        let mut y = Array2::<f64>::zeros((20, 1));
        for l in 0..20 {
            y[[l, 0]] = (0..set.len()).map(|c| coefs[c] * psi[[l, c]]).sum();
        }
        let fit = ls_fit(psi.view(), y.view(), 1e-12).unwrap();
        for c in 0..set.len() {
            assert!((fit.coefficients[[c, 0]] - coefs[c]).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_regressor_leverage_is_one_over_n() {
        let set = MultiIndexSet::zero(2);
        let xs = samples(15, 2, 6);
        let psi = design_matrix(&xs, &set);
        let mut y = Array2::<f64>::zeros((15, 1));
        for l in 0..15 {
            y[[l, 0]] = 1.0 + 0.1 * xs[l][0];
        }
        let fit = ls_fit(psi.view(), y.view(), 1e-12).unwrap();
        let h = fit.qr().hat_diagonal(psi.view());
        for l in 0..15 {
            assert!((h[l] - 1.0 / 15.0).abs() < 1e-13);
        }
    }

    #[test]
    fn fast_loo_matches_explicit_refits() {
        // The predicted residuals equal true leave-one-out residuals from N
        // separate refits, to 1e-10.
        let m = 3;
        let set = MultiIndexSet::total_degree(m, 2);
        let n = 30;
        let xs = samples(n, m, 7);
        let psi = design_matrix(&xs, &set);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut y = Array2::<f64>::zeros((n, 2));
        for l in 0..n {
            let x = &xs[l];
            y[[l, 0]] = (3.0 * x[0]).sin() + x[1] * x[2] + 0.05 * rng.sample::<f64, _>(Open01);
            y[[l, 1]] = (x[0] - 0.5).powi(3) + 0.05 * rng.sample::<f64, _>(Open01);
        }
        let fit = ls_fit(psi.view(), y.view(), 1e-12).unwrap();
        let delta = predicted_residuals(&fit, psi.view(), y.view()).unwrap();
        for leave in 0..n {
            // refit without sample `leave`
            let keep: Vec<usize> = (0..n).filter(|&l| l != leave).collect();
            let mut psi_r = Array2::<f64>::zeros((n - 1, set.len()));
            let mut y_r = Array2::<f64>::zeros((n - 1, 2));
            for (r, &l) in keep.iter().enumerate() {
                psi_r.row_mut(r).assign(&psi.row(l));
                y_r.row_mut(r).assign(&y.row(l));
            }
            let refit = ls_fit(psi_r.view(), y_r.view(), 1e-12).unwrap();
            for i in 0..2 {
                let pred: f64 = (0..set.len())
                    .map(|c| refit.coefficients[[c, i]] * psi[[leave, c]])
                    .sum();
                let true_residual = pred - y[[leave, i]];
                let rel = (delta[[leave, i]] - true_residual).abs()
                    / true_residual.abs().max(1e-30);
                assert!(rel < 1e-9, "sample {leave} output {i}: rel {rel}");
            }
        }
    }
}
