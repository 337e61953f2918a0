use nalgebra::DMatrix;

use super::cylinder::CylinderMeasure;
use super::inner::ball_kernel;
use crate::error::Result;
use crate::hier::Hierarchomorphism;
use crate::hilbert::{check_lambda, numerical_rank_scaled};
use crate::tree::{length_to_f64, Cut, TreeFamily};

/// The action of `g` on charges: the ball `B` is carried to `g(B)` and its
/// mass multiplied by `λ^{−n}`, `n` the pseudoderivative on `B`. With this
/// sign `Ψ[T(g)μ] = U(g)Ψ[μ]`.
pub fn transform_measure(family: &TreeFamily, g: &Hierarchomorphism, lambda: f64, m: &CylinderMeasure) -> Result<CylinderMeasure> {
    check_lambda(lambda)?;
    let c = Cut::common_refinement(m.cut(), g.domain());
    let fine = m.restate(family, &c);
    let g = g.extend_core(family, &c)?;
    let mut pairs: Vec<_> = fine
        .iter()
        .map(|(v, x)| (g.branch_map()[v].clone(), x * lambda.powf(-length_to_f64(&g.branch_shift(family, v)))))
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let values = pairs.iter().map(|p| p.1).collect();
    CylinderMeasure::new(g.range().clone(), values)
}

/// `⟨T(g)δ_i, T(g)δ_j⟩ − ⟨δ_i, δ_j⟩` over the ball indicators of the
/// depth-`depth` cut, with limit inner products.
pub fn boundary_deviation_matrix(family: &TreeFamily, g: &Hierarchomorphism, lambda: f64, depth: usize) -> Result<DMatrix<f64>> {
    Ok(deviation_with_scale(family, g, lambda, depth)?.0)
}

/// The deviation matrix and the largest entry of the two Gram matrices it
/// is the difference of.
fn deviation_with_scale(family: &TreeFamily, g: &Hierarchomorphism, lambda: f64, depth: usize) -> Result<(DMatrix<f64>, f64)> {
    let c = Cut::depth_cut(family, depth);
    let fine = Cut::common_refinement(&c, g.domain());
    let ge = g.extend_core(family, &fine)?;
    let image = ge.range().clone();
    // Column i holds the values of T(g)δ_i on the image cut.
    let mut v = DMatrix::zeros(image.len(), c.len());
    for i in 0..c.len() {
        let mut values = vec![0.0; c.len()];
        values[i] = 1.0;
        let delta = CylinderMeasure::new(c.clone(), values)?;
        let t = transform_measure(family, &ge, lambda, &delta)?;
        for (r, x) in t.values().iter().enumerate() {
            v[(r, i)] = *x;
        }
    }
    let k_image = ball_kernel(family, lambda, &image)?;
    let k = ball_kernel(family, lambda, &c)?;
    let moved = v.transpose() * k_image * &v;
    let scale = moved.amax().max(k.amax());
    let mut m = moved - k;
    // Symmetrize away rounding so the eigenvalue path applies.
    m = (&m + m.transpose()) * 0.5;
    Ok((m, scale))
}

/// Rank of [`boundary_deviation_matrix`], counting eigenvalues above `tol`
/// times the size of the Gram matrices, so that a map preserving the inner
/// products up to rounding has rank zero.
pub fn boundary_deviation_rank(family: &TreeFamily, g: &Hierarchomorphism, lambda: f64, depth: usize, tol: f64) -> Result<usize> {
    let (m, scale) = deviation_with_scale(family, g, lambda, depth)?;
    Ok(numerical_rank_scaled(&m, tol, scale))
}
