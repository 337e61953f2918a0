use std::collections::{BTreeSet, HashSet};

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::gram::{DistanceTable, GramContext};
use crate::error::{Error, Result};
use crate::hier::Hierarchomorphism;
use crate::tree::{TreeFamily, VertexAddress};

/// Checks that `vertices` span a connected subtree: exactly one vertex has
/// its parent outside the set.
pub fn check_subtree(vertices: &[VertexAddress]) -> Result<()> {
    let set: HashSet<&VertexAddress> = vertices.iter().collect();
    if set.is_empty() {
        return Err(Error::NotSubtree("empty vertex set".into()));
    }
    if set.len() != vertices.len() {
        return Err(Error::NotSubtree("repeated vertex".into()));
    }
    let tops = vertices.iter().filter(|v| v.parent().is_none_or(|p| !set.contains(&p))).count();
    if tops != 1 {
        return Err(Error::NotSubtree(format!("{tops} components")));
    }
    Ok(())
}

/// The vertex of `subtree` closest to `c`.
pub fn nearest_vertex(family: &TreeFamily, subtree: &[VertexAddress], c: &VertexAddress) -> VertexAddress {
    subtree.iter().min_by_key(|s| family.distance(s, c)).expect("nonempty subtree").clone()
}

fn subtree_solve(ctx: &GramContext, subtree: &[VertexAddress], rhs_full: &DMatrix<f64>) -> Result<(Vec<usize>, DMatrix<f64>)> {
    check_subtree(subtree)?;
    let idx = subtree.iter().map(|v| ctx.require(v)).collect::<Result<Vec<usize>>>()?;
    let block = ctx.gram_e().select_rows(&idx).select_columns(&idx);
    let chol = Cholesky::new(block).ok_or(Error::SingularBlock)?;
    Ok((idx.clone(), chol.solve(&rhs_full.select_rows(&idx))))
}

/// Orthogonal projection of `x` onto the span of `e_s`, `s` in `subtree`.
pub fn project_onto_subtree(ctx: &GramContext, subtree: &[VertexAddress], x: &DVector<f64>) -> Result<DVector<f64>> {
    let gx = DMatrix::from_column_slice(ctx.len(), 1, (ctx.gram_e() * x).as_slice());
    let (idx, alpha) = subtree_solve(ctx, subtree, &gx)?;
    let mut out = DVector::zeros(ctx.len());
    for (k, &i) in idx.iter().enumerate() {
        out[i] = alpha[(k, 0)];
    }
    Ok(out)
}

/// Matrix of the projection from the span of `s1` to the span of `s2`, in
/// `e` coefficients: column `j` is the projection of `e_{s1[j]}`.
pub fn cross_projection(ctx: &GramContext, s1: &[VertexAddress], s2: &[VertexAddress]) -> Result<DMatrix<f64>> {
    check_subtree(s1)?;
    let idx1 = s1.iter().map(|v| ctx.require(v)).collect::<Result<Vec<usize>>>()?;
    let cols = ctx.gram_e().select_columns(&idx1);
    Ok(subtree_solve(ctx, s2, &cols)?.1)
}

/// Matrix of `e_a ↦ e_{g(a)}` from the basis of `source` to that of `target`.
pub fn transport_matrix(source: &GramContext, target: &GramContext, g: &Hierarchomorphism) -> Result<DMatrix<f64>> {
    if source.len() != target.len() {
        return Err(Error::NotClosed(VertexAddress::root()));
    }
    let mut m = DMatrix::zeros(target.len(), source.len());
    let mut hit = vec![false; target.len()];
    for (j, a) in source.vertices().iter().enumerate() {
        let ga = g.apply_vertex(a)?;
        let i = target.index_of(&ga).ok_or_else(|| Error::NotClosed(a.clone()))?;
        if std::mem::replace(&mut hit[i], true) {
            return Err(Error::NotClosed(a.clone()));
        }
        m[(i, j)] = 1.0;
    }
    Ok(m)
}

/// The permutation matrix of `g` on a vertex set it maps onto itself.
pub fn u_matrix(ctx: &GramContext, g: &Hierarchomorphism) -> Result<DMatrix<f64>> {
    transport_matrix(ctx, ctx, g)
}

/// A vertex set `V` and its image `g(V)`: the interior of the domain cut
/// together with every vertex at most `depth` levels below a domain cut
/// element. Both lists are sorted.
pub fn adapted_vertex_sets(
    family: &TreeFamily,
    g: &Hierarchomorphism,
    depth: usize,
) -> Result<(Vec<VertexAddress>, Vec<VertexAddress>)> {
    let mut source: BTreeSet<VertexAddress> = g.domain().interior();
    for u in g.domain().boundary() {
        let mut level = vec![u.clone()];
        for _ in 0..=depth {
            source.extend(level.iter().cloned());
            level = level.iter().flat_map(|v| family.children(v)).collect();
        }
    }
    let target = source.iter().map(|a| g.apply_vertex(a)).collect::<Result<BTreeSet<_>>>()?;
    Ok((source.into_iter().collect(), target.into_iter().collect()))
}

/// Gram contexts on an adapted pair `V`, `g(V)`.
pub fn adapted_contexts(
    family: &TreeFamily,
    lambda: f64,
    g: &Hierarchomorphism,
    depth: usize,
) -> Result<(GramContext, GramContext)> {
    let (s, t) = adapted_vertex_sets(family, g, depth)?;
    Ok((GramContext::build(family, lambda, &s)?, GramContext::build(family, lambda, &t)?))
}

/// `λ^{ρ(ga,gb)} − λ^{ρ(a,b)}` over the vertices of `ctx`.
pub fn deviation_form(ctx: &GramContext, g: &Hierarchomorphism) -> Result<DMatrix<f64>> {
    let images = ctx.vertices().iter().map(|a| g.apply_vertex(a)).collect::<Result<Vec<_>>>()?;
    let table = DistanceTable::new(ctx.family(), &images);
    let n = ctx.len();
    let lambda = ctx.lambda();
    let mut q = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let m = images[i].meet(&images[j]).depth();
            let v = lambda.powf(table.rho(i, j, m)) - ctx.gram_e()[(i, j)];
            q[(i, j)] = v;
            q[(j, i)] = v;
        }
    }
    Ok(q)
}

/// Number of singular values above `rel_tol` times the largest one.
/// Symmetric input is handled through its eigenvalues.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let values = singular_values(m);
    let top = values.iter().copied().fold(0.0, f64::max);
    rank_above(&values, rel_tol * top)
}

/// Number of singular values above `rel_tol * scale`. Use when `m` is a
/// difference of matrices of size `scale`, so that pure rounding noise in
/// `m` counts as zero.
pub fn numerical_rank_scaled(m: &DMatrix<f64>, rel_tol: f64, scale: f64) -> usize {
    rank_above(&singular_values(m), rel_tol * scale)
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    if m.is_square() && m == &m.transpose() {
        SymmetricEigen::new(m.clone()).eigenvalues.iter().map(|x| x.abs()).collect()
    } else {
        m.clone().svd(false, false).singular_values.iter().copied().collect()
    }
}

fn rank_above(values: &[f64], threshold: f64) -> usize {
    values.iter().filter(|&&s| s > threshold && s > 0.0).count()
}

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Cut;
    use std::collections::BTreeMap;

    fn a(s: &str) -> VertexAddress {
        s.parse().unwrap()
    }

    fn swap() -> Hierarchomorphism {
        let f = TreeFamily::bruhat_tits(2).unwrap();
        let c = Cut::depth_cut(&f, 1);
        Hierarchomorphism::from_parts(
            c.clone(),
            c,
            [("0", "1"), ("1", "0"), ("2", "2")].iter().map(|(x, y)| (a(x), a(y))).collect(),
            BTreeMap::new(),
            Some(BTreeMap::from([(a(""), a(""))])),
        )
    }

    #[test]
    fn subtree_check() {
        assert!(check_subtree(&[a(""), a("0"), a("01")]).is_ok());
        assert!(check_subtree(&[a("0"), a("1")]).is_err());
        assert!(check_subtree(&[]).is_err());
    }

    #[test]
    fn projection_fixes_subtree_vectors_and_shrinks_norm() {
        let f = TreeFamily::bruhat_tits(2).unwrap();
        let ctx = GramContext::build(&f, 0.6, &f.vertices_to_depth(3)).unwrap();
        let s = [a("1"), a("10"), a("11"), a("101")];
        let e = ctx.e_vector(&a("10")).unwrap();
        let p = project_onto_subtree(&ctx, &s, &e).unwrap();
        assert!((p - &e).amax() < 1e-12);
        let x = DVector::from_fn(ctx.len(), |i, _| ((i * 7) % 5) as f64 - 2.0);
        let p = project_onto_subtree(&ctx, &s, &x).unwrap();
        assert!(ctx.norm_sq(&p) <= ctx.norm_sq(&x) + 1e-12);
    }

    #[test]
    fn swap_permutation_matrix() {
        let f = TreeFamily::bruhat_tits(2).unwrap();
        let ctx = GramContext::build(&f, 0.5, &f.vertices_to_depth(3)).unwrap();
        let g = swap();
        let u = u_matrix(&ctx, &g).unwrap();
        for (j, v) in ctx.vertices().iter().enumerate() {
            let i = ctx.index_of(&g.apply_vertex(v).unwrap()).unwrap();
            assert_eq!(u[(i, j)], 1.0);
            assert_eq!(u.column(j).sum(), 1.0);
        }
        let ui = u_matrix(&ctx, &g.inverse()).unwrap();
        assert_eq!(ui, u.transpose());
        assert_eq!(u_matrix(&ctx, &Hierarchomorphism::identity()).unwrap(), DMatrix::identity(ctx.len(), ctx.len()));
        assert!(deviation_form(&ctx, &g).unwrap().amax() == 0.0);
    }

    #[test]
    fn rank_counts() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0]);
        assert_eq!(numerical_rank(&m, 1e-8), 2);
        assert_eq!(numerical_rank(&DMatrix::zeros(4, 4), 1e-8), 0);
        let sym = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(numerical_rank(&sym, 1e-8), 1);
    }
}
