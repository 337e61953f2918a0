use std::collections::BTreeMap;

use super::cylinder::CylinderMeasure;
use crate::error::{Error, Result};
use crate::hilbert::check_lambda;
use crate::tree::{length_to_f64, Kind, Length, TreeFamily, VertexAddress};

fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(λ^{−2ℓ} − 1)`, stable for tiny λ.
fn ln_gap(ln_lambda: f64, len: f64) -> f64 {
    let x = 2.0 * len * ln_lambda;
    -x + (-(x.exp())).ln_1p()
}

/// `z_u = λ^{−2ρ(ξ,u)} Σ_k (λ^{−2ℓ_k} − 1) t_k²`, the growth of the squared
/// norm when the cut element `u` is replaced by its children, whose balls
/// carry masses `t_k`.
pub fn z_value(family: &TreeFamily, lambda: f64, m: &CylinderMeasure, u: &VertexAddress) -> f64 {
    ln_z(family, lambda.ln(), m, u).exp()
}

fn ln_z(family: &TreeFamily, ln_lambda: f64, m: &CylinderMeasure, u: &VertexAddress) -> f64 {
    let kind = family.kind_of(u);
    let mut acc = f64::NEG_INFINITY;
    for k in 0..family.degree_of(kind) as u8 {
        let t = m.ball_value(family, &u.child(k));
        if t != 0.0 {
            let len = length_to_f64(&family.edge_length(kind, k));
            acc = logaddexp(acc, ln_gap(ln_lambda, len) + 2.0 * t.abs().ln());
        }
    }
    -2.0 * length_to_f64(&family.depth_len(u)) * ln_lambda + acc
}

/// `z_u` for every vertex above simplicial depth `depth`.
pub fn z_terms(family: &TreeFamily, lambda: f64, m: &CylinderMeasure, depth: usize) -> BTreeMap<VertexAddress, f64> {
    let mut out = BTreeMap::new();
    if depth == 0 {
        return out;
    }
    for u in family.vertices_to_depth(depth - 1) {
        let z = z_value(family, lambda, m, &u);
        out.insert(u, z);
    }
    out
}

/// Per-level sums of `z_u` in log form, one level per simplicial depth.
///
/// Vertices at or below the measure's cut all carry equally split masses,
/// so they are tracked only through the total `Σ t²` for each pair of edge
/// class and distance to the basepoint. Vertices inside the cut are summed
/// one by one.
pub struct LevelSeries<'a> {
    family: &'a TreeFamily,
    ln_lambda: f64,
    level: usize,
    states: BTreeMap<(Kind, Length), f64>,
    entering: BTreeMap<usize, Vec<(Kind, Length, f64)>>,
    explicit: BTreeMap<usize, f64>,
    ln_a: BTreeMap<Kind, f64>,
}

impl<'a> LevelSeries<'a> {
    pub fn new(family: &'a TreeFamily, lambda: f64, m: &CylinderMeasure) -> Result<Self> {
        check_lambda(lambda)?;
        let ln_lambda = lambda.ln();
        let mut entering: BTreeMap<usize, Vec<(Kind, Length, f64)>> = BTreeMap::new();
        for (c, x) in m.iter() {
            if x != 0.0 {
                entering.entry(c.depth()).or_default().push((family.kind_of(c), family.depth_len(c), 2.0 * x.abs().ln()));
            }
        }
        let mut explicit = BTreeMap::new();
        for u in m.cut().interior() {
            let e = explicit.entry(u.depth()).or_insert(f64::NEG_INFINITY);
            *e = logaddexp(*e, ln_z(family, ln_lambda, m, &u));
        }
        Ok(LevelSeries { family, ln_lambda, level: 0, states: BTreeMap::new(), entering, explicit, ln_a: BTreeMap::new() })
    }

    /// The series of a unit mass sitting at a vertex of the given kind with
    /// distance zero to the basepoint.
    pub fn unit_ball(family: &'a TreeFamily, lambda: f64, kind: Kind) -> Result<Self> {
        check_lambda(lambda)?;
        let mut states = BTreeMap::new();
        states.insert((kind, Length::from_integer(0)), 0.0);
        Ok(LevelSeries {
            family,
            ln_lambda: lambda.ln(),
            level: 0,
            states,
            entering: BTreeMap::new(),
            explicit: BTreeMap::new(),
            ln_a: BTreeMap::new(),
        })
    }

    fn ln_a(&mut self, kind: Kind) -> f64 {
        let (family, ln_lambda) = (self.family, self.ln_lambda);
        *self.ln_a.entry(kind).or_insert_with(|| {
            (0..family.degree_of(kind) as u8)
                .map(|k| ln_gap(ln_lambda, length_to_f64(&family.edge_length(kind, k))))
                .fold(f64::NEG_INFINITY, logaddexp)
        })
    }

    /// Whether every remaining level is zero.
    pub fn exhausted(&self) -> bool {
        self.states.is_empty() && self.entering.range(self.level..).next().is_none()
            && self.explicit.range(self.level..).next().is_none()
    }
}

impl Iterator for LevelSeries<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let d = self.level;
        if let Some(new) = self.entering.remove(&d) {
            for (kind, rho, lw) in new {
                let e = self.states.entry((kind, rho)).or_insert(f64::NEG_INFINITY);
                *e = logaddexp(*e, lw);
            }
        }
        let mut term = self.explicit.get(&d).copied().unwrap_or(f64::NEG_INFINITY);
        let states = std::mem::take(&mut self.states);
        let mut next: BTreeMap<(Kind, Length), f64> = BTreeMap::new();
        for ((kind, rho), lw) in states {
            let rho_f = length_to_f64(&rho);
            let deg = self.family.degree_of(kind);
            let child_lw = lw - 2.0 * (deg as f64).ln();
            term = logaddexp(term, -2.0 * rho_f * self.ln_lambda + self.ln_a(kind) + child_lw);
            for k in 0..deg as u8 {
                let key = (self.family.child_kind(kind, k), rho + self.family.edge_length(kind, k));
                let e = next.entry(key).or_insert(f64::NEG_INFINITY);
                *e = logaddexp(*e, child_lw);
            }
        }
        self.states = next;
        self.level += 1;
        Some(term)
    }
}

/// Logarithms of the level sums `Σ_{depth(u) = d} z_u` for `d < depth`.
pub fn level_terms(family: &TreeFamily, lambda: f64, m: &CylinderMeasure, depth: usize) -> Result<Vec<f64>> {
    Ok(LevelSeries::new(family, lambda, m)?.take(depth).collect())
}

/// `μ(Abs)² + Σ z_u` over vertices above simplicial depth `depth`; for
/// `depth` at least the depth of the cut this is the squared norm at the
/// depth-`depth` cut.
pub fn norm_series(family: &TreeFamily, lambda: f64, m: &CylinderMeasure, depth: usize) -> Result<f64> {
    let terms = level_terms(family, lambda, m, depth)?;
    Ok(m.total().powi(2) + terms.iter().map(|t| t.exp()).sum::<f64>())
}

/// Sum of a level series with a geometric tail estimate. Fails with
/// [`Error::Divergent`] once the level ratio settles at or above one.
pub(crate) fn sum_levels(mut series: LevelSeries<'_>, lambda: f64, settle_after: usize) -> Result<f64> {
    const MAX_LEVELS: usize = 200_000;
    let mut sum = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_ratio = f64::NAN;
    for d in 0..MAX_LEVELS {
        if series.exhausted() {
            return Ok(sum);
        }
        let t = series.next().expect("infinite iterator");
        let term = t.exp();
        if !term.is_finite() {
            return Err(Error::Divergent(lambda));
        }
        sum += term;
        if let Some(p) = prev {
            if d > settle_after && t > f64::NEG_INFINITY && p > f64::NEG_INFINITY {
                let ratio = (t - p).exp();
                let settled = (ratio - prev_ratio).abs() <= 1e-12 * ratio.max(1.0);
                if settled && ratio >= 1.0 {
                    return Err(Error::Divergent(lambda));
                }
                if ratio < 1.0 {
                    let tail = term * ratio / (1.0 - ratio);
                    if tail <= 1e-17 * sum || (settled && d > settle_after + 20) {
                        return Ok(sum + tail);
                    }
                }
                prev_ratio = ratio;
            }
        }
        prev = Some(t);
    }
    Err(Error::Divergent(lambda))
}

/// The squared norm of the charge in the limit of ever finer cuts.
pub fn norm_limit(family: &TreeFamily, lambda: f64, m: &CylinderMeasure) -> Result<f64> {
    let series = LevelSeries::new(family, lambda, m)?;
    Ok(m.total().powi(2) + sum_levels(series, lambda, m.cut().max_depth() + 1)?)
}

/// Closed form of the limit squared norm of the uniform measure on the
/// unit-length tree of degree `p + 1`.
pub fn uniform_norm_closed_form(p: usize, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let (p, l2) = (p as f64, lambda * lambda);
    if l2 * p <= 1.0 {
        return Err(Error::Divergent(lambda));
    }
    Ok(1.0 + p * (1.0 - l2) / ((p + 1.0) * (l2 * p - 1.0)))
}

/// `λ^{−2Nσ}(λ^{−2σ} − 1) Σ μ(u)²` over the cut of `m`, where `σ` bounds the
/// edge lengths from below and `N` is the simplicial depth of the cut.
pub fn norm_lower_bound(m: &CylinderMeasure, lambda: f64, n: usize, sigma: f64) -> f64 {
    let squares: f64 = m.values().iter().map(|v| v * v).sum();
    lambda.powf(-2.0 * n as f64 * sigma) * (lambda.powf(-2.0 * sigma) - 1.0) * squares
}

/// One bisection probe.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaRow {
    pub lambda: f64,
    pub depth: usize,
    /// Squared norm at the depth cut; may overflow to infinity.
    pub partial_norm: f64,
    /// Geometric mean of the last twenty level ratios.
    pub ratio: f64,
    pub convergent: bool,
}

#[derive(Clone, Debug)]
pub struct SigmaEstimate {
    pub sigma: f64,
    pub lo: f64,
    pub hi: f64,
    pub trace: Vec<SigmaRow>,
}

pub const SIGMA_DEFAULT_DEPTH: usize = 120;
const RATIO_WINDOW: usize = 20;

/// Classifies λ by the growth of the last twenty level sums.
pub fn sigma_probe(family: &TreeFamily, probe: &CylinderMeasure, lambda: f64, depth: usize) -> Result<SigmaRow> {
    if depth <= RATIO_WINDOW + probe.cut().max_depth() {
        return Err(Error::NonDiscriminating(format!("depth {depth} leaves no window for the ratio test")));
    }
    let terms = level_terms(family, lambda, probe, depth)?;
    let (last, first) = (terms[depth - 1], terms[depth - 1 - RATIO_WINDOW]);
    if last == f64::NEG_INFINITY || first == f64::NEG_INFINITY {
        return Err(Error::NonDiscriminating("probe has vanishing level sums".into()));
    }
    let ratio = ((last - first) / RATIO_WINDOW as f64).exp();
    let partial_norm = probe.total().powi(2) + terms.iter().map(|t| t.exp()).sum::<f64>();
    Ok(SigmaRow { lambda, depth, partial_norm, ratio, convergent: ratio < 1.0 })
}

/// Bisection for the threshold between divergent and convergent norm
/// series of `probe`.
pub fn estimate_sigma(family: &TreeFamily, probe: &CylinderMeasure, depth: usize, tol: f64) -> Result<SigmaEstimate> {
    let (mut lo, mut hi) = (1e-3, 1.0 - 1e-9);
    let mut trace = Vec::new();
    let bottom = sigma_probe(family, probe, lo, depth)?;
    let top = sigma_probe(family, probe, hi, depth)?;
    let ok = !bottom.convergent && top.convergent;
    trace.push(bottom);
    trace.push(top);
    if !ok {
        return Err(Error::NonDiscriminating("the bracket ends classify alike".into()));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let row = sigma_probe(family, probe, mid, depth)?;
        if row.convergent {
            hi = mid;
        } else {
            lo = mid;
        }
        trace.push(row);
    }
    Ok(SigmaEstimate { sigma: 0.5 * (lo + hi), lo, hi, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Cut;

    fn t2() -> TreeFamily {
        TreeFamily::bruhat_tits(2).unwrap()
    }

    #[test]
    fn uniform_depth_one() {
        let f = t2();
        let m = CylinderMeasure::uniform();
        assert!((norm_series(&f, 0.8, &m, 1).unwrap() - 1.1875).abs() < 1e-14);
        assert_eq!(norm_series(&f, 0.8, &m, 0).unwrap(), 1.0);
    }

    #[test]
    fn aggregated_levels_match_vertexwise_sums() {
        let f = TreeFamily::free_group(Length::from_integer(1), Length::from_integer(2)).unwrap();
        let m = CylinderMeasure::from_pairs(&f, &[("0", 0.5), ("10", -1.0), ("11", 0.25), ("12", 2.0), ("2", 0.0), ("3", -0.75)])
            .unwrap();
        let z = z_terms(&f, 0.7, &m, 5);
        let terms = level_terms(&f, 0.7, &m, 5).unwrap();
        for (d, t) in terms.iter().enumerate() {
            let direct: f64 = z.iter().filter(|(u, _)| u.depth() == d).map(|(_, v)| v).sum();
            assert!((t.exp() - direct).abs() <= 1e-12 * direct.max(1.0), "level {d}");
        }
    }

    #[test]
    fn closed_form_limits() {
        let f = t2();
        assert!((uniform_norm_closed_form(2, 0.8).unwrap() - 13.0 / 7.0).abs() < 1e-14);
        assert!(uniform_norm_closed_form(2, 0.7).is_err());
        assert!((uniform_norm_closed_form(2, 1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-6);
        let lim = norm_limit(&f, 0.8, &CylinderMeasure::uniform()).unwrap();
        assert!((lim - 13.0 / 7.0).abs() < 1e-12);
        assert_eq!(norm_limit(&f, 0.7, &CylinderMeasure::uniform()), Err(Error::Divergent(0.7)));
    }

    #[test]
    fn zero_measure_has_zero_norm_and_bound() {
        let f = t2();
        let m = CylinderMeasure::zero(Cut::depth_cut(&f, 2));
        assert_eq!(norm_series(&f, 0.8, &m, 10).unwrap(), 0.0);
        assert_eq!(norm_limit(&f, 0.8, &m).unwrap(), 0.0);
        assert_eq!(norm_lower_bound(&m, 0.8, 2, 1.0), 0.0);
    }

    #[test]
    fn sigma_on_t2() {
        let f = t2();
        let est = estimate_sigma(&f, &CylinderMeasure::uniform(), SIGMA_DEFAULT_DEPTH, 1e-4).unwrap();
        assert!((est.sigma - 0.5f64.sqrt()).abs() < 0.02);
        assert!(est.trace.len() > 2);
    }
}
