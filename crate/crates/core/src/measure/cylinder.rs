use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{Cut, TreeFamily, VertexAddress};

/// A real charge on the absolute, given by its values on the balls of a cut
/// and extended to finer cuts by splitting each value equally among the
/// children.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMeasure {
    cut: Cut,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    cut: Vec<VertexAddress>,
    values: Vec<f64>,
}

impl CylinderMeasure {
    /// `values[i]` is the mass of the ball below `cut.boundary()[i]`.
    pub fn new(cut: Cut, values: Vec<f64>) -> Result<Self> {
        if values.len() != cut.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} values for a cut with {} elements",
                values.len(),
                cut.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite value {v}")));
        }
        Ok(CylinderMeasure { cut, values })
    }

    /// Builds a measure from `(vertex, value)` pairs forming a cut.
    pub fn from_pairs(family: &TreeFamily, pairs: &[(&str, f64)]) -> Result<Self> {
        let mut pairs: Vec<(VertexAddress, f64)> =
            pairs.iter().map(|(k, v)| Ok((k.parse()?, *v))).collect::<Result<_>>()?;
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let cut = Cut::new(family, pairs.iter().map(|p| p.0.clone()))?;
        if cut.len() != pairs.len() {
            return Err(Error::InvalidMeasure("repeated vertex".into()));
        }
        CylinderMeasure::new(cut, pairs.into_iter().map(|p| p.1).collect())
    }

    pub fn zero(cut: Cut) -> Self {
        let n = cut.len();
        CylinderMeasure { cut, values: vec![0.0; n] }
    }

    /// Total mass one, split equally at every refinement.
    pub fn uniform() -> Self {
        CylinderMeasure { cut: Cut::root(), values: vec![1.0] }
    }

    /// Unit mass on the ball below `u`.
    pub fn indicator(family: &TreeFamily, u: &VertexAddress) -> Result<Self> {
        family.check_address(u)?;
        let cut = path_cut(family, u);
        let values = cut.boundary().iter().map(|c| if c == u { 1.0 } else { 0.0 }).collect();
        Ok(CylinderMeasure { cut, values })
    }

    pub fn cut(&self) -> &Cut {
        &self.cut
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexAddress, f64)> {
        self.cut.boundary().iter().zip(self.values.iter().copied())
    }

    /// Mass of the whole absolute.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Total variation, exact at the defining cut since equal splitting
    /// never mixes signs.
    pub fn variation(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn positive_part(&self) -> CylinderMeasure {
        CylinderMeasure { cut: self.cut.clone(), values: self.values.iter().map(|v| v.max(0.0)).collect() }
    }

    pub fn negative_part(&self) -> CylinderMeasure {
        CylinderMeasure { cut: self.cut.clone(), values: self.values.iter().map(|v| (-v).max(0.0)).collect() }
    }

    /// Mass of the ball below an arbitrary vertex.
    pub fn ball_value(&self, family: &TreeFamily, v: &VertexAddress) -> f64 {
        if let Some(c) = self.cut.element_above(v) {
            let i = self.cut.index_of(c).expect("boundary element");
            let mut value = self.values[i];
            let mut node = c.clone();
            for &l in &v.letters()[c.depth()..] {
                value /= family.degree_at(&node) as f64;
                node = node.child(l);
            }
            return value;
        }
        // `v` is interior: sum the cut elements below it, which are contiguous
        // in address order.
        let start = self.cut.boundary().partition_point(|c| c < v);
        self.cut.boundary()[start..]
            .iter()
            .zip(&self.values[start..])
            .take_while(|(c, _)| v.is_prefix_of(c))
            .map(|(_, x)| x)
            .sum()
    }

    /// The same measure described on another cut nested with the current one.
    pub fn push_to_cut(&self, family: &TreeFamily, c: &Cut) -> Result<CylinderMeasure> {
        if !c.refines(&self.cut) && !self.cut.refines(c) {
            return Err(Error::NotNested);
        }
        Ok(self.restate(family, c))
    }

    /// Values on `c` without the nesting check; used for common refinements.
    pub(crate) fn restate(&self, family: &TreeFamily, c: &Cut) -> CylinderMeasure {
        let values = c.boundary().iter().map(|v| self.ball_value(family, v)).collect();
        CylinderMeasure { cut: c.clone(), values }
    }

    /// Replaces the boundary element `u` by its children.
    pub fn refine_at(&self, family: &TreeFamily, u: &VertexAddress) -> Result<CylinderMeasure> {
        Ok(self.restate(family, &self.cut.refine(family, u)?))
    }

    /// Zeroes the mass outside the ball below `b`.
    pub fn restrict_to_ball(&self, family: &TreeFamily, b: &VertexAddress) -> CylinderMeasure {
        let c = Cut::common_refinement(&self.cut, &path_cut(family, b));
        let mut m = self.restate(family, &c);
        for (v, x) in m.cut.boundary().iter().zip(m.values.iter_mut()) {
            if !b.is_prefix_of(v) {
                *x = 0.0;
            }
        }
        m
    }

    pub fn scaled(&self, s: f64) -> CylinderMeasure {
        CylinderMeasure { cut: self.cut.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MeasureJson { cut: self.cut.boundary().to_vec(), values: self.values.clone() })
            .expect("serializable")
    }

    pub fn from_json(family: &TreeFamily, s: &str) -> Result<Self> {
        let wire: MeasureJson = serde_json::from_str(s)?;
        if wire.cut.len() != wire.values.len() {
            return Err(Error::InvalidMeasure("cut and values differ in length".into()));
        }
        let mut pairs: Vec<(VertexAddress, f64)> = wire.cut.into_iter().zip(wire.values).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let n = pairs.len();
        let cut = Cut::new(family, pairs.iter().map(|p| p.0.clone()))?;
        if cut.len() != n {
            return Err(Error::InvalidMeasure("repeated vertex".into()));
        }
        CylinderMeasure::new(cut, pairs.into_iter().map(|p| p.1).collect())
    }
}

/// The coarsest cut containing `u`: siblings of every vertex on the path.
pub fn path_cut(family: &TreeFamily, u: &VertexAddress) -> Cut {
    let mut c = Cut::root();
    for k in 0..u.depth() {
        c = c.refine(family, &u.prefix(k)).expect("path vertex on the boundary");
    }
    c
}

/// A cut reached from the root by `steps` random refinements, never going
/// below simplicial depth `max_depth`. The root is always refined first
/// when `max_depth > 0`.
pub fn random_cut<R: Rng>(family: &TreeFamily, rng: &mut R, max_depth: usize, steps: usize) -> Cut {
    let mut c = Cut::root();
    if max_depth == 0 {
        return c;
    }
    c = Cut::depth_cut(family, 1);
    for _ in 0..steps {
        let open: Vec<&VertexAddress> = c.boundary().iter().filter(|v| v.depth() < max_depth).collect();
        let Some(&u) = open.choose(rng) else { break };
        let u = u.clone();
        c = c.refine(family, &u).expect("boundary element");
    }
    c
}

/// A charge with independent values in `[-1, 1]` on a random cut.
pub fn random_charge<R: Rng>(family: &TreeFamily, rng: &mut R, max_depth: usize, steps: usize) -> CylinderMeasure {
    let cut = random_cut(family, rng, max_depth, steps);
    let values = (0..cut.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    CylinderMeasure { cut, values }
}
