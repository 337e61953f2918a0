use std::collections::BTreeMap;

use super::gram::{check_lambda, GramContext};
use crate::error::Result;
use crate::tree::{length_to_f64, Kind, TreeFamily, VertexAddress};

/// A point of the affine embedding: one coordinate per edge on the path from
/// the basepoint, keyed by the lower endpoint of the edge.
pub type AffinePoint = BTreeMap<VertexAddress, f64>;

/// Places every vertex so that `‖N_a − N_b‖² = ρ(a,b)·ln(1/λ)`, hence
/// `exp(−‖N_a − N_b‖²) = λ^{ρ(a,b)}`.
pub fn affine_embedding(family: &TreeFamily, lambda: f64, vertices: &[VertexAddress]) -> Result<Vec<AffinePoint>> {
    check_lambda(lambda)?;
    let scale = (1.0 / lambda).ln();
    let mut out = Vec::with_capacity(vertices.len());
    for a in vertices {
        family.check_address(a)?;
        let mut point = AffinePoint::new();
        let mut kind = Kind::Root;
        for (k, &l) in a.letters().iter().enumerate() {
            let len = length_to_f64(&family.edge_length(kind, l));
            point.insert(a.prefix(k + 1), (len * scale).sqrt());
            kind = family.child_kind(kind, l);
        }
        out.push(point);
    }
    Ok(out)
}

pub fn squared_distance(p: &AffinePoint, q: &AffinePoint) -> f64 {
    let mut total = 0.0;
    for (axis, x) in p {
        let y = q.get(axis).copied().unwrap_or(0.0);
        total += (x - y) * (x - y);
    }
    for (axis, y) in q {
        if !p.contains_key(axis) {
            total += y * y;
        }
    }
    total
}

/// Largest deviation of `exp(−‖N_a − N_b‖²)` from the Gram matrix of `ctx`.
pub fn kernel_check(ctx: &GramContext) -> Result<f64> {
    let points = affine_embedding(ctx.family(), ctx.lambda(), ctx.vertices())?;
    let g = ctx.gram_e();
    let mut worst: f64 = 0.0;
    for i in 0..points.len() {
        for j in 0..=i {
            let k = (-squared_distance(&points[i], &points[j])).exp();
            worst = worst.max((k - g[(i, j)]).abs());
        }
    }
    Ok(worst)
}
