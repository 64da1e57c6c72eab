//! Relative error indicator between global iterates and a reference.

use super::pce_field::PceField;
use crate::fem::SparseOperator;
use crate::real::Real;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("reference field is zero; the relative indicator is undefined")]
    ZeroReference,
}

/// `‖U - U_ref‖ / ‖U_ref‖` in `L²_μ(Ξ; L²(Ω\Λ))`, computed exactly from
/// orthonormality: the squared norm is the sum over the union index set of
/// `d_αᵀ M_ext d_α` with the mass matrix restricted to exterior elements.
pub fn error_indicator<T: Real>(
    u: &PceField<T>,
    u_ref: &PceField<T>,
    mass_ext: &SparseOperator<T>,
) -> Result<T, IndicatorError> {
    let den = u_ref.gram_norm_sq(mass_ext);
    if den <= T::zero() {
        return Err(IndicatorError::ZeroReference);
    }
    let diff = PceField::sub(u, u_ref);
    let num = diff.gram_norm_sq(mass_ext);
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mass_on_elements;
    use crate::mesh::{build_rect_mesh, NodeTag, Rect};
    use crate::sparse_poly::{MultiIndex, MultiIndexSet};
    use rand::distr::Open01;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_fields_have_zero_error_and_zero_start_is_one() {
        let mesh = build_rect_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 0.25, NodeTag::Dirichlet).unwrap();
        let mass = mass_on_elements(&mesh, |_| true);
        let n = mesh.n_nodes();
        let mut set = MultiIndexSet::zero(2);
        set.push(MultiIndex::unit(2, 0)).unwrap();
        let u_ref = PceField {
            set,
            coeffs: vec![
                (0..n).map(|i| 0.3 + i as f64 * 0.01).collect(),
                (0..n).map(|i| 0.05 * (i as f64).sin()).collect(),
            ],
            n_nodes: n,
        };
        assert!(error_indicator(&u_ref, &u_ref, &mass).unwrap() < 1e-15);
        let zero = PceField::zero(2, n);
        let e = error_indicator(&zero, &u_ref, &mass).unwrap();
        assert!((e - 1.0).abs() < 1e-14);
        assert!(matches!(
            error_indicator(&u_ref, &zero, &mass),
            Err(IndicatorError::ZeroReference)
        ));
    }

    #[test]
    fn matches_monte_carlo_estimate() {
        // hand-built two-term PCE pair: spectral norm vs 1e5-sample MC
        let mesh = build_rect_mesh(Rect::new(0.0, 1.0, 0.0, 1.0), 0.25, NodeTag::Dirichlet).unwrap();
        let mass = mass_on_elements(&mesh, |_| true);
        let n = mesh.n_nodes();
        let mut set = MultiIndexSet::zero(2);
        set.push(MultiIndex::unit(2, 0)).unwrap();
        let u = PceField {
            set: set.clone(),
            coeffs: vec![vec![0.7; n], vec![0.2; n]],
            n_nodes: n,
        };
        let mut set2 = MultiIndexSet::zero(2);
        set2.push(MultiIndex::unit(2, 1)).unwrap();
        let u_ref = PceField {
            set: set2,
            coeffs: vec![vec![0.5; n], vec![-0.1; n]],
            n_nodes: n,
        };
        let exact = error_indicator(&u, &u_ref, &mass).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mc_n = 100_000usize;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for _ in 0..mc_n {
            let xi = [rng.sample::<f64, _>(Open01), rng.sample::<f64, _>(Open01)];
            let a = u.evaluate(&xi);
            let b = u_ref.evaluate(&xi);
            let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            num += mass.bilinear(&d, &d);
            den += mass.bilinear(&b, &b);
        }
        let mc = (num / den).sqrt();
        assert!(
            (mc - exact).abs() / exact < 0.01,
            "MC {mc} vs exact {exact}"
        );
    }
}
