use std::collections::HashMap;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{length_to_f64, Kind, Length, TreeFamily, VertexAddress};

/// Lengths `ρ(ξ, a[..k])` of every prefix of `a`, exact up to the final
/// rounding.
pub(crate) fn prefix_lengths(family: &TreeFamily, a: &VertexAddress) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.depth() + 1);
    let mut kind = Kind::Root;
    let mut total = Length::from_integer(0);
    out.push(0.0);
    for &l in a.letters() {
        total += family.edge_length(kind, l);
        kind = family.child_kind(kind, l);
        out.push(length_to_f64(&total));
    }
    out
}

/// Pairwise tree distances on a fixed vertex list, in floating point.
pub(crate) struct DistanceTable {
    prefixes: Vec<Vec<f64>>,
}

impl DistanceTable {
    pub(crate) fn new(family: &TreeFamily, vertices: &[VertexAddress]) -> Self {
        DistanceTable { prefixes: vertices.iter().map(|a| prefix_lengths(family, a)).collect() }
    }

    pub(crate) fn depth(&self, i: usize) -> f64 {
        *self.prefixes[i].last().expect("nonempty")
    }

    /// `ρ(a_i, a_j)` given the depth of their meet.
    pub(crate) fn rho(&self, i: usize, j: usize, meet_depth: usize) -> f64 {
        self.depth(i) + self.depth(j) - 2.0 * self.prefixes[i][meet_depth]
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

/// A finite family of vectors `e_a` with `⟨e_a, e_b⟩ = λ^{ρ(a,b)}`, realized
/// by the Cholesky factor of the Gram matrix.
///
/// Vectors of the span are handled as coefficient vectors in the `e` basis;
/// inner products go through the Gram matrix.
#[derive(Clone, Debug)]
pub struct GramContext {
    lambda: f64,
    family: TreeFamily,
    vertices: Vec<VertexAddress>,
    index: HashMap<VertexAddress, usize>,
    depths: Vec<f64>,
    gram: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl GramContext {
    pub fn build(family: &TreeFamily, lambda: f64, vertices: &[VertexAddress]) -> Result<Self> {
        check_lambda(lambda)?;
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, a) in vertices.iter().enumerate() {
            family.check_address(a)?;
            if index.insert(a.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(a.clone()));
            }
        }
        let table = DistanceTable::new(family, vertices);
        let n = vertices.len();
        let mut gram = DMatrix::from_element(n, n, 1.0);
        for i in 0..n {
            for j in 0..i {
                let m = vertices[i].meet(&vertices[j]).depth();
                let v = lambda.powf(table.rho(i, j, m));
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let factor = match Cholesky::new(gram.clone()) {
            Some(c) => c.l(),
            None => return Err(Error::NotPositiveDefinite { min_eigenvalue: min_eigenvalue(&gram) }),
        };
        Ok(GramContext {
            lambda,
            family: family.clone(),
            vertices: vertices.to_vec(),
            index,
            depths: (0..n).map(|i| table.depth(i)).collect(),
            gram,
            factor,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn family(&self) -> &TreeFamily {
        &self.family
    }

    pub fn vertices(&self) -> &[VertexAddress] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, a: &VertexAddress) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn require(&self, a: &VertexAddress) -> Result<usize> {
        self.index_of(a).ok_or_else(|| Error::MissingVertex(a.clone()))
    }

    /// The matrix `λ^{ρ(a,b)}`.
    pub fn gram_e(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Lower triangular `L` with `L Lᵀ` equal to the Gram matrix; its rows are
    /// coordinates of the vectors `e_a`.
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    /// Largest entry of `L Lᵀ − G`.
    pub fn factor_residual(&self) -> f64 {
        (&self.factor * self.factor.transpose() - &self.gram).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.gram)
    }

    /// `ρ(ξ, a)` for the vertex at position `i`.
    pub fn depth_len(&self, i: usize) -> f64 {
        self.depths[i]
    }

    /// The scale factors `λ^{−ρ(ξ,a)}` relating `f_a` to `e_a`.
    pub fn f_scale(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.depths.iter().map(|&d| self.lambda.powf(-d)))
    }

    /// The matrix `⟨f_a, f_b⟩ = λ^{−θ(a,b)}`, computed from θ directly.
    pub fn gram_f(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            let pre = prefix_lengths(&self.family, &self.vertices[i]);
            for j in 0..=i {
                let m = self.vertices[i].meet(&self.vertices[j]).depth();
                let v = self.lambda.powf(-2.0 * pre[m]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn e_vector(&self, a: &VertexAddress) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(self.len());
        v[self.require(a)?] = 1.0;
        Ok(v)
    }

    /// `f_a = λ^{−ρ(ξ,a)} e_a`.
    pub fn f_vector(&self, a: &VertexAddress) -> Result<DVector<f64>> {
        let i = self.require(a)?;
        let mut v = DVector::zeros(self.len());
        v[i] = self.lambda.powf(-self.depths[i]);
        Ok(v)
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.gram * y))
    }

    pub fn norm_sq(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x)
    }

    /// Coordinates of `x` in the orthonormal frame given by the factor.
    pub fn coordinates(&self, x: &DVector<f64>) -> DVector<f64> {
        self.factor.transpose() * x
    }

    pub fn descriptor(&self) -> ContextDescriptor {
        ContextDescriptor {
            family: serde_json::from_str(&self.family.to_json()).expect("family json"),
            lambda: self.lambda,
            vertices: self.vertices.clone(),
        }
    }
}

/// Serializable description from which a context can be rebuilt.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContextDescriptor {
    pub family: serde_json::Value,
    pub lambda: f64,
    pub vertices: Vec<VertexAddress>,
}

impl ContextDescriptor {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn build(&self) -> Result<GramContext> {
        let family = TreeFamily::from_json(&self.family.to_string())?;
        GramContext::build(&family, self.lambda, &self.vertices)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn build_gram(family: &TreeFamily, lambda: f64, vertices: &[VertexAddress]) -> Result<GramContext> {
    GramContext::build(family, lambda, vertices)
}

pub fn gram_f(ctx: &GramContext) -> DMatrix<f64> {
    ctx.gram_f()
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

/// Comma separated rows, full precision.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:e}", m[(i, j)])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn a(s: &str) -> VertexAddress {
        s.parse().unwrap()
    }

    #[test]
    fn small_gram_examples() {
        let f = TreeFamily::bruhat_tits(2).unwrap();
        let ctx = GramContext::build(&f, 0.5, &[a("")]).unwrap();
        assert_eq!(ctx.gram_e(), &DMatrix::from_element(1, 1, 1.0));
        let ctx = GramContext::build(&f, 0.5, &[a(""), a("0"), a("1")]).unwrap();
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.5, 0.5, 1.0, 0.25, 0.5, 0.25, 1.0]);
        assert_relative_eq!(ctx.gram_e(), &want, epsilon = 1e-15);
        assert!(ctx.factor_residual() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let f = TreeFamily::bruhat_tits(2).unwrap();
        assert_eq!(GramContext::build(&f, 1.0, &[]).unwrap_err(), Error::LambdaOutOfRange(1.0));
        assert_eq!(GramContext::build(&f, 0.5, &[a("0"), a("0")]).unwrap_err(), Error::DuplicateVertex(a("0")));
        assert!(GramContext::build(&f, 0.5, &[a("3")]).is_err());
    }

    #[test]
    fn f_gram_examples_and_rescaling() {
        let f = TreeFamily::bruhat_tits(2).unwrap();
        let verts = f.vertices_to_depth(3);
        let ctx = GramContext::build(&f, 0.5, &verts).unwrap();
        let gf = ctx.gram_f();
        let (x, i0, i1) = (ctx.require(&a("")).unwrap(), ctx.require(&a("0")).unwrap(), ctx.require(&a("1")).unwrap());
        assert_eq!(gf[(x, x)], 1.0);
        assert_eq!(gf[(i0, i1)], 1.0);
        let k = ctx.require(&a("011")).unwrap();
        assert_relative_eq!(gf[(k, k)], 0.5f64.powi(-6), max_relative = 1e-15);
        let d = DMatrix::from_diagonal(&ctx.f_scale());
        let rescaled = &d * ctx.gram_e() * &d;
        for i in 0..ctx.len() {
            for j in 0..ctx.len() {
                assert!((rescaled[(i, j)] - gf[(i, j)]).abs() <= 1e-12 * gf[(i, j)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let f = TreeFamily::free_group(Length::from_integer(1), Length::from_integer(2)).unwrap();
        let ctx = GramContext::build(&f, 0.7, &f.vertices_to_depth(2)).unwrap();
        let d = ContextDescriptor::from_json(&ctx.descriptor().to_json()).unwrap();
        let again = d.build().unwrap();
        assert_eq!(again.gram_e(), ctx.gram_e());
    }
}
