use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::cylinder::CylinderMeasure;
use super::series::{sum_levels, LevelSeries};
use crate::error::Result;
use crate::hilbert::{check_lambda, GramContext};
use crate::tree::{length_to_f64, BoundaryPoint, Cut, EpWord, Kind, Point, TreeFamily, VertexAddress};

/// `e`-basis coefficients of `Ψ[μ] = Σ μ(u) f_u` over the cut of `m`.
pub fn psi_vector(ctx: &GramContext, m: &CylinderMeasure) -> Result<DVector<f64>> {
    let mut v = DVector::zeros(ctx.len());
    for (u, x) in m.iter() {
        let i = ctx.require(u)?;
        v[i] += x * ctx.lambda().powf(-ctx.depth_len(i));
    }
    Ok(v)
}

/// `‖Ψ[μ]‖²` at the cut of `m`.
pub fn norm_gram(ctx: &GramContext, m: &CylinderMeasure) -> Result<f64> {
    let v = psi_vector(ctx, m)?;
    Ok(ctx.norm_sq(&v))
}

pub fn bilinear_gram(ctx: &GramContext, m1: &CylinderMeasure, m2: &CylinderMeasure) -> Result<f64> {
    Ok(ctx.inner(&psi_vector(ctx, m1)?, &psi_vector(ctx, m2)?))
}

/// A context on the elements of a cut.
pub fn cut_context(family: &TreeFamily, lambda: f64, c: &Cut) -> Result<GramContext> {
    GramContext::build(family, lambda, c.boundary())
}

/// Two rays through `u` that part at `u`.
fn diverging_rays(family: &TreeFamily, u: &VertexAddress) -> (BoundaryPoint, BoundaryPoint) {
    let ray = |head: &[u8]| {
        BoundaryPoint::from_word(family, EpWord::new(head.to_vec(), vec![0])).expect("letter 0 is always valid")
    };
    let mut a = u.letters().to_vec();
    let mut b = a.clone();
    a.push(0);
    b.push(1);
    (ray(&a), ray(&b))
}

fn any_ray(family: &TreeFamily, u: &VertexAddress) -> BoundaryPoint {
    let mut head = u.letters().to_vec();
    if head.is_empty() {
        head.push(0);
    }
    BoundaryPoint::from_word(family, EpWord::new(head, vec![0])).expect("letter 0 is always valid")
}

/// Lower Darboux sum over the balls of `c`: for each pair of balls, the
/// least value of `λ^{−θ}` on the product times the two masses. The minima
/// are attained at explicit pairs of rays.
pub fn darboux_sum(family: &TreeFamily, lambda: f64, m1: &CylinderMeasure, m2: &CylinderMeasure, c: &Cut) -> Result<f64> {
    check_lambda(lambda)?;
    let a = m1.push_to_cut(family, c)?;
    let b = m2.push_to_cut(family, c)?;
    let n = c.len();
    let boundary = c.boundary();
    let anchors: Vec<Point> = boundary.iter().map(|u| Point::Boundary(any_ray(family, u))).collect();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let theta = if i == j {
                let (x, y) = diverging_rays(family, &boundary[i]);
                family.theta(&Point::Boundary(x), &Point::Boundary(y))
            } else {
                family.theta(&anchors[i], &anchors[j])
            };
            let w = lambda.powf(-theta.to_f64());
            total += w * a.values()[i] * b.values()[j];
        }
    }
    Ok(total)
}

/// `Σ` over the levels below a unit mass at a vertex of kind `kind`, with
/// distances measured from that vertex.
pub fn ball_tail(family: &TreeFamily, lambda: f64, kind: Kind) -> Result<f64> {
    sum_levels(LevelSeries::unit_ball(family, lambda, kind)?, lambda, 1)
}

/// The limit inner products of the ball indicators of `c`: `λ^{−θ(u,v)}`
/// for distinct balls and the limit squared norm on the diagonal.
pub fn ball_kernel(family: &TreeFamily, lambda: f64, c: &Cut) -> Result<DMatrix<f64>> {
    check_lambda(lambda)?;
    let ctx = cut_context(family, lambda, c)?;
    let mut k = ctx.gram_f();
    let mut tails: BTreeMap<Kind, f64> = BTreeMap::new();
    for (i, u) in c.boundary().iter().enumerate() {
        let kind = family.kind_of(u);
        let tail = match tails.get(&kind) {
            Some(t) => *t,
            None => {
                let t = ball_tail(family, lambda, kind)?;
                tails.insert(kind, t);
                t
            }
        };
        k[(i, i)] = lambda.powf(-2.0 * length_to_f64(&family.depth_len(u))) * (1.0 + tail);
    }
    Ok(k)
}

/// Inner product of two charges in the limit of ever finer cuts.
pub fn inner_e(family: &TreeFamily, lambda: f64, m1: &CylinderMeasure, m2: &CylinderMeasure) -> Result<f64> {
    let c = Cut::common_refinement(m1.cut(), m2.cut());
    let a = m1.restate(family, &c);
    let b = m2.restate(family, &c);
    let k = ball_kernel(family, lambda, &c)?;
    let x = DVector::from_column_slice(a.values());
    let y = DVector::from_column_slice(b.values());
    Ok(x.dot(&(k * y)))
}
