//! Orthonormal Legendre tensor basis on `(0,1)^m` with uniform measure.

use super::multi_index::{MultiIndex, MultiIndexSet};
use crate::real::{real, Real};
use ndarray::Array2;

/// Univariate shifted Legendre polynomials, orthonormal on `(0,1)`:
/// `ψ_0 = 1`, `ψ_1 = √3 (2t-1)`, `ψ_2 = √5 (6t²-6t+1)`, and the three-term
/// recurrence beyond. Fills `out[k] = ψ_k(t)` for `k ≤ out.len()-1`.
pub fn eval_univariate<T: Real>(t: T, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    let x = real::<T>(2.0) * t - T::one();
    // standard Legendre by recurrence, scaled by sqrt(2k+1)
    let mut prev = T::one(); // L_0
    out[0] = T::one();
    if out.len() == 1 {
        return;
    }
    let mut cur = x; // L_1
    out[1] = real::<T>(3.0f64.sqrt()) * cur;
    for k in 1..out.len() - 1 {
        let kf = real::<T>(k as f64);
        let next = ((real::<T>(2.0) * kf + T::one()) * x * cur - kf * prev)
            / (kf + T::one());
        prev = cur;
        cur = next;
        out[k + 1] = real::<T>(((2 * (k + 1) + 1) as f64).sqrt()) * cur;
    }
}

/// `ψ_α(ξ)`: product of univariate orthonormal polynomials.
pub fn eval_basis<T: Real>(alpha: &MultiIndex, xi: &[T]) -> T {
    debug_assert_eq!(alpha.dim(), xi.len());
    let mut acc = T::one();
    let mut scratch = [T::zero(); 32];
    for i in alpha.support() {
        let d = alpha.deg(i);
        if d < 32 {
            eval_univariate(xi[i], &mut scratch[..=d]);
            acc = acc * scratch[d];
        } else {
            let mut buf = vec![T::zero(); d + 1];
            eval_univariate(xi[i], &mut buf);
            acc = acc * buf[d];
        }
    }
    acc
}

/// Design matrix `Ψ_{l,α} = ψ_α(ξ^l)`, evaluating per-dimension recurrence
/// tables once per sample.
pub fn design_matrix<T: Real>(samples: &[Vec<T>], set: &MultiIndexSet) -> Array2<T> {
    design_matrix_of(samples, set.indices(), set.m())
}

/// Design matrix over an explicit index list.
pub fn design_matrix_of<T: Real>(
    samples: &[Vec<T>],
    indices: &[MultiIndex],
    m: usize,
) -> Array2<T> {
    let n = samples.len();
    let k = indices.len();
    let mut max_deg = vec![0usize; m];
    for mi in indices {
        for i in 0..m {
            max_deg[i] = max_deg[i].max(mi.deg(i));
        }
    }
    let mut tables: Vec<Vec<T>> = max_deg.iter().map(|&d| vec![T::zero(); d + 1]).collect();
    let mut psi = Array2::<T>::zeros((n, k));
    for (l, xi) in samples.iter().enumerate() {
        debug_assert_eq!(xi.len(), m);
        for i in 0..m {
            eval_univariate(xi[i], &mut tables[i]);
        }
        for (c, mi) in indices.iter().enumerate() {
            let mut acc = T::one();
            for i in mi.support() {
                acc = acc * tables[i][mi.deg(i)];
            }
            psi[[l, c]] = acc;
        }
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::distr::Open01;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn low_degree_closed_forms() {
        let ts = [0.0, 0.12, 0.5, 0.77, 1.0];
        for &t in &ts {
            let mut out = [0.0f64; 4];
            eval_univariate(t, &mut out);
            assert!((out[0] - 1.0).abs() < 1e-15);
            assert!((out[1] - 3f64.sqrt() * (2.0 * t - 1.0)).abs() < 1e-14);
            assert!((out[2] - 5f64.sqrt() * (6.0 * t * t - 6.0 * t + 1.0)).abs() < 1e-13);
        }
        // odd polynomial vanishes at the midpoint
        let alpha = MultiIndex::new(&[1]);
        assert_eq!(eval_basis(&alpha, &[0.5f64]), 0.0);
        // zero index is identically one
        let zero = MultiIndex::zero(3);
        assert_eq!(eval_basis(&zero, &[0.3f64, 0.9, 0.1]), 1.0);
    }

    #[test]
    fn monte_carlo_orthonormality() {
        // E[ψ_α ψ_β] ≈ δ_αβ within 5e-3 for all α, β of degree ≤ 4 in m = 3
        let m = 3;
        let set = MultiIndexSet::total_degree(m, 4);
        let k = set.len();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000usize;
        let mut acc = vec![0.0f64; k * k];
        let mut tables = vec![[0.0f64; 5]; m];
        let mut vals = vec![0.0f64; k];
        for _ in 0..n {
            let xi: Vec<f64> = (0..m).map(|_| rng.sample(Open01)).collect();
            for i in 0..m {
                eval_univariate(xi[i], &mut tables[i]);
            }
            for (c, mi) in set.iter().enumerate() {
                let mut p = 1.0;
                for i in mi.support() {
                    p *= tables[i][mi.deg(i)];
                }
                vals[c] = p;
            }
            for a in 0..k {
                for b in a..k {
                    acc[a * k + b] += vals[a] * vals[b];
                }
            }
        }
        for a in 0..k {
            for b in a..k {
                let mean = acc[a * k + b] / n as f64;
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (mean - expect).abs() < 5e-3,
                    "E[psi_{:?} psi_{:?}] = {mean}",
                    set.get(a),
                    set.get(b)
                );
            }
        }
    }

    #[test]
    fn design_matrix_matches_pointwise_eval() {
        let set = MultiIndexSet::total_degree(2, 3);
        let samples = vec![vec![0.21f64, 0.88], vec![0.5, 0.01], vec![0.99, 0.35]];
        let psi = design_matrix(&samples, &set);
        for (l, xi) in samples.iter().enumerate() {
            for (c, mi) in set.iter().enumerate() {
                assert!((psi[[l, c]] - eval_basis(mi, xi)).abs() < 1e-14);
            }
        }
    }
}
