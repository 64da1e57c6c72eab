//! Moments and variance decompositions from orthonormal chaos expansions.

use crate::global_local::PceField;
use crate::real::Real;
use crate::sparse_poly::{MultiIndexSet, PceApprox};

fn moments_impl<'a, T: Real>(
    set: &MultiIndexSet,
    rows: impl Iterator<Item = &'a [T]>,
    n: usize,
) -> (Vec<T>, Vec<T>)
where
    T: 'a,
{
    let mut mean = vec![T::zero(); n];
    let mut var = vec![T::zero(); n];
    for (alpha, row) in set.iter().zip(rows) {
        if alpha.is_zero() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m = *v;
            }
        } else {
            for (s, v) in var.iter_mut().zip(row) {
                *s = *s + *v * *v;
            }
        }
    }
    (mean, var)
}

/// Nodal mean and variance of an approximation: the mean is the zero-index
/// coefficient, the variance the sum of squares of the others.
pub fn moments<T: Real>(pce: &PceApprox<T>) -> (Vec<T>, Vec<T>) {
    let n = pce.n_outputs();
    let rows = (0..pce.set.len()).map(|k| {
        pce.coefficients.row(k).to_slice().expect("contiguous coefficient row")
    });
    moments_impl(&pce.set, rows, n)
}

/// Moments of a nodal chaos field.
pub fn moments_of<T: Real>(field: &PceField<T>) -> (Vec<T>, Vec<T>) {
    moments_impl(&field.set, field.coeffs.iter().map(|c| c.as_slice()), field.n_nodes)
}

fn numerator_impl<'a, T: Real>(
    set: &MultiIndexSet,
    rows: impl Iterator<Item = &'a [T]>,
    n: usize,
    var_index: usize,
) -> Vec<T>
where
    T: 'a,
{
    let mut num = vec![T::zero(); n];
    for (alpha, row) in set.iter().zip(rows) {
        let only_i =
            alpha.deg(var_index) > 0 && alpha.support().all(|j| j == var_index);
        if only_i {
            for (s, v) in num.iter_mut().zip(row) {
                *s = *s + *v * *v;
            }
        }
    }
    num
}

/// First-order sensitivity numerator `V(E(u | ξ_i))(x)`: the squared
/// coefficients supported on variable `i` alone.
pub fn sensitivity_numerator<T: Real>(pce: &PceApprox<T>, var_index: usize) -> Vec<T> {
    let rows = (0..pce.set.len()).map(|k| {
        pce.coefficients.row(k).to_slice().expect("contiguous coefficient row")
    });
    numerator_impl(&pce.set, rows, pce.n_outputs(), var_index)
}

pub fn sensitivity_numerator_of<T: Real>(field: &PceField<T>, var_index: usize) -> Vec<T> {
    numerator_impl(
        &field.set,
        field.coeffs.iter().map(|c| c.as_slice()),
        field.n_nodes,
        var_index,
    )
}
