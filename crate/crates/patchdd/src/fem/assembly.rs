//! Assembly of stiffness, mass, load and the cubic reaction term.

use super::coefficient::CoefficientField;
use super::csr::{CsrPattern, SparseOperator};
use super::quadrature::TRI_DEGREE4;
use super::FemError;
use crate::mesh::StructuredTriMesh;
use crate::real::{real, Real};

/// P1 gradients `(b_i, c_i)` and the double area of a triangle.
#[inline]
fn gradients<T: Real>(p: &[[T; 2]; 3]) -> ([T; 3], [T; 3], T) {
    let d = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let b = [
        (p[1][1] - p[2][1]) / d,
        (p[2][1] - p[0][1]) / d,
        (p[0][1] - p[1][1]) / d,
    ];
    let c = [
        (p[2][0] - p[1][0]) / d,
        (p[0][0] - p[2][0]) / d,
        (p[1][0] - p[0][0]) / d,
    ];
    (b, c, d)
}

/// Diffusion stiffness: entry `(i, j) = Σ_T K_T ∫_T ∇φ_i · ∇φ_j`.
///
/// Rejects nonpositive coefficients, which would break coercivity.
pub fn assemble_stiffness<T: Real>(
    mesh: &StructuredTriMesh<T>,
    coeff: &CoefficientField<T>,
) -> Result<SparseOperator<T>, FemError> {
    if coeff.len() != mesh.n_triangles() {
        return Err(FemError::SizeMismatch { got: coeff.len(), want: mesh.n_triangles() });
    }
    let pattern = CsrPattern::from_triangles(mesh.n_nodes(), &mesh.triangles);
    let mut a = SparseOperator::zeros(pattern);
    let half = real::<T>(0.5);
    for e in 0..mesh.n_triangles() {
        let k = coeff.value(e);
        if k <= T::zero() {
            return Err(FemError::NonPositiveDiffusion { element: e, value: k.to_f64_lossy() });
        }
        let pts = mesh.tri_coords(e);
        let (b, c, d) = gradients(&pts);
        let area = half * d;
        let t = mesh.triangles[e];
        for i in 0..3 {
            for j in 0..3 {
                a.add(t[i], t[j], k * area * (b[i] * b[j] + c[i] * c[j]));
            }
        }
    }
    Ok(a)
}

/// Stiffness with a zero-allowed coefficient (used for affine decompositions
/// where the indicator part alone is legitimately zero on most elements).
pub fn assemble_stiffness_unchecked<T: Real>(
    mesh: &StructuredTriMesh<T>,
    coeff: &CoefficientField<T>,
) -> SparseOperator<T> {
    let pattern = CsrPattern::from_triangles(mesh.n_nodes(), &mesh.triangles);
    let mut a = SparseOperator::zeros(pattern);
    let half = real::<T>(0.5);
    for e in 0..mesh.n_triangles() {
        let k = coeff.value(e);
        let pts = mesh.tri_coords(e);
        let (b, c, d) = gradients(&pts);
        let area = half * d;
        let t = mesh.triangles[e];
        for i in 0..3 {
            for j in 0..3 {
                a.add(t[i], t[j], k * area * (b[i] * b[j] + c[i] * c[j]));
            }
        }
    }
    a
}

/// Load vector of a constant source: entry `i = f Σ_{T∋i} |T|/3`.
pub fn assemble_load<T: Real>(mesh: &StructuredTriMesh<T>, f: T) -> Vec<T> {
    let third = real::<T>(1.0 / 3.0);
    let half = real::<T>(0.5);
    let mut l = vec![T::zero(); mesh.n_nodes()];
    for e in 0..mesh.n_triangles() {
        let area = half * mesh.tri_double_area(e);
        let contrib = f * area * third;
        for &n in &mesh.triangles[e] {
            l[n] = l[n] + contrib;
        }
    }
    l
}

/// L2 and H1 Gram matrices; the H1 matrix is mass plus unit-coefficient
/// stiffness.
pub fn gram_matrices<T: Real>(
    mesh: &StructuredTriMesh<T>,
) -> (SparseOperator<T>, SparseOperator<T>) {
    let pattern = CsrPattern::from_triangles(mesh.n_nodes(), &mesh.triangles);
    let mut mass = SparseOperator::zeros(pattern);
    let half = real::<T>(0.5);
    let twelfth = real::<T>(1.0 / 12.0);
    for e in 0..mesh.n_triangles() {
        let area = half * mesh.tri_double_area(e);
        let t = mesh.triangles[e];
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { real::<T>(2.0) } else { T::one() };
                mass.add(t[i], t[j], area * twelfth * w);
            }
        }
    }
    let unit = CoefficientField::constant(mesh, T::one());
    let stiff = assemble_stiffness(mesh, &unit).expect("unit coefficient is positive");
    let mut h1 = mass.clone();
    h1.add_scaled(&stiff, T::one());
    (mass, h1)
}

/// Mass matrix restricted to a subset of elements (for norms over a region).
pub fn mass_on_elements<T: Real>(
    mesh: &StructuredTriMesh<T>,
    keep: impl Fn(usize) -> bool,
) -> SparseOperator<T> {
    let pattern = CsrPattern::from_triangles(mesh.n_nodes(), &mesh.triangles);
    let mut mass = SparseOperator::zeros(pattern);
    let half = real::<T>(0.5);
    let twelfth = real::<T>(1.0 / 12.0);
    for e in 0..mesh.n_triangles() {
        if !keep(e) {
            continue;
        }
        let area = half * mesh.tri_double_area(e);
        let t = mesh.triangles[e];
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { real::<T>(2.0) } else { T::one() };
                mass.add(t[i], t[j], area * twelfth * w);
            }
        }
    }
    mass
}

fn check_reaction<T: Real>(
    mesh: &StructuredTriMesh<T>,
    rfield: &CoefficientField<T>,
    w: &[T],
) -> Result<(), FemError> {
    if rfield.len() != mesh.n_triangles() {
        return Err(FemError::SizeMismatch { got: rfield.len(), want: mesh.n_triangles() });
    }
    if w.len() != mesh.n_nodes() {
        return Err(FemError::SizeMismatch { got: w.len(), want: mesh.n_nodes() });
    }
    for e in 0..mesh.n_triangles() {
        let r = rfield.value(e);
        if r < T::zero() {
            return Err(FemError::NegativeReaction { element: e, value: r.to_f64_lossy() });
        }
    }
    Ok(())
}

/// Cubic reaction vector `N(w)_i = ∫ R w_h³ φ_i`, exact quadrature for P1 `w`.
pub fn assemble_reaction<T: Real>(
    mesh: &StructuredTriMesh<T>,
    rfield: &CoefficientField<T>,
    w: &[T],
) -> Result<Vec<T>, FemError> {
    check_reaction(mesh, rfield, w)?;
    let half = real::<T>(0.5);
    let mut n = vec![T::zero(); mesh.n_nodes()];
    for e in 0..mesh.n_triangles() {
        let r = rfield.value(e);
        if r == T::zero() {
            continue;
        }
        let area = half * mesh.tri_double_area(e);
        let t = mesh.triangles[e];
        let wv = [w[t[0]], w[t[1]], w[t[2]]];
        for (l, wq) in TRI_DEGREE4 {
            let lam = [real::<T>(l[0]), real::<T>(l[1]), real::<T>(l[2])];
            let wg = lam[0] * wv[0] + lam[1] * wv[1] + lam[2] * wv[2];
            let f = r * area * real::<T>(wq) * wg * wg * wg;
            for i in 0..3 {
                n[t[i]] = n[t[i]] + f * lam[i];
            }
        }
    }
    Ok(n)
}

/// Jacobian of the cubic reaction: entry `(i, j) = 3 ∫ R w_h² φ_i φ_j`.
pub fn assemble_reaction_jacobian<T: Real>(
    mesh: &StructuredTriMesh<T>,
    rfield: &CoefficientField<T>,
    w: &[T],
) -> Result<SparseOperator<T>, FemError> {
    check_reaction(mesh, rfield, w)?;
    let pattern = CsrPattern::from_triangles(mesh.n_nodes(), &mesh.triangles);
    let mut jac = SparseOperator::zeros(pattern);
    let half = real::<T>(0.5);
    let three = real::<T>(3.0);
    for e in 0..mesh.n_triangles() {
        let r = rfield.value(e);
        if r == T::zero() {
            continue;
        }
        let area = half * mesh.tri_double_area(e);
        let t = mesh.triangles[e];
        let wv = [w[t[0]], w[t[1]], w[t[2]]];
        for (l, wq) in TRI_DEGREE4 {
            let lam = [real::<T>(l[0]), real::<T>(l[1]), real::<T>(l[2])];
            let wg = lam[0] * wv[0] + lam[1] * wv[1] + lam[2] * wv[2];
            let f = three * r * area * real::<T>(wq) * wg * wg;
            for i in 0..3 {
                for j in 0..3 {
                    jac.add(t[i], t[j], f * lam[i] * lam[j]);
                }
            }
        }
    }
    Ok(jac)
}
