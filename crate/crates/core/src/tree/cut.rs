use std::collections::BTreeSet;

use super::address::VertexAddress;
use super::boundary::BoundaryPoint;
use super::family::TreeFamily;
use crate::error::{Error, Result};

/// Boundary of a complete subtree containing the basepoint: a finite maximal
/// antichain of vertices. Every ray from the basepoint passes through exactly
/// one element.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Cut {
    boundary: Vec<VertexAddress>,
}

impl Cut {
    pub fn new(family: &TreeFamily, boundary: impl IntoIterator<Item = VertexAddress>) -> Result<Self> {
        let cut = Cut::from_sorted_unchecked(boundary);
        cut.validate(family)?;
        Ok(cut)
    }

    pub(crate) fn from_sorted_unchecked(boundary: impl IntoIterator<Item = VertexAddress>) -> Self {
        let mut boundary: Vec<VertexAddress> = boundary.into_iter().collect();
        boundary.sort();
        boundary.dedup();
        Cut { boundary }
    }

    pub fn parse(family: &TreeFamily, keys: &[&str]) -> Result<Self> {
        let addrs = keys.iter().map(|k| k.parse()).collect::<Result<Vec<VertexAddress>>>()?;
        Cut::new(family, addrs)
    }

    /// The cut consisting of the basepoint alone.
    pub fn root() -> Self {
        Cut { boundary: vec![VertexAddress::root()] }
    }

    /// All vertices at simplicial depth `k`.
    pub fn depth_cut(family: &TreeFamily, k: usize) -> Self {
        let mut level = vec![VertexAddress::root()];
        for _ in 0..k {
            level = level.iter().flat_map(|v| family.children(v)).collect();
        }
        Cut::from_sorted_unchecked(level)
    }

    pub fn boundary(&self) -> &[VertexAddress] {
        &self.boundary
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn contains(&self, a: &VertexAddress) -> bool {
        self.boundary.binary_search(a).is_ok()
    }

    pub fn index_of(&self, a: &VertexAddress) -> Option<usize> {
        self.boundary.binary_search(a).ok()
    }

    pub fn max_depth(&self) -> usize {
        self.boundary.iter().map(VertexAddress::depth).max().unwrap_or(0)
    }

    /// Proper prefixes of boundary elements, i.e. the vertices of the complete
    /// subtree that are not on its boundary.
    pub fn interior(&self) -> BTreeSet<VertexAddress> {
        self.boundary.iter().flat_map(|b| b.proper_prefixes()).collect()
    }

    /// Checks that the boundary is a prefix-free set that every ray meets.
    pub fn validate(&self, family: &TreeFamily) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCut(m));
        if self.boundary.is_empty() {
            return bad("empty boundary".into());
        }
        if let Some(a) = self.boundary.iter().find(|a| !family.is_valid_address(a)) {
            return bad(format!("address {a} is not a vertex of the family"));
        }
        if self.boundary.len() == 1 && self.boundary[0].is_root() {
            return Ok(());
        }
        // In sorted order a prefix sits directly before some extension of it.
        for w in self.boundary.windows(2) {
            if w[0].is_prefix_of(&w[1]) {
                return bad(format!("{} is a prefix of {}", w[0], w[1]));
            }
        }
        let interior = self.interior();
        for v in &interior {
            for c in family.children(v) {
                if !interior.contains(&c) && !self.contains(&c) {
                    return bad(format!("rays through {c} miss the cut"));
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, family: &TreeFamily) -> bool {
        self.validate(family).is_ok()
    }

    /// Replaces `u` by its children.
    pub fn refine(&self, family: &TreeFamily, u: &VertexAddress) -> Result<Cut> {
        let i = self.index_of(u).ok_or_else(|| Error::NotOnBoundary(u.clone()))?;
        let mut b = self.boundary.clone();
        b.remove(i);
        b.extend(family.children(u));
        Ok(Cut::from_sorted_unchecked(b))
    }

    /// Boundary element lying on the path from the basepoint to `a`, if any.
    pub fn element_above(&self, a: &VertexAddress) -> Option<&VertexAddress> {
        // The candidate is the largest element not exceeding `a` in address order.
        let i = match self.boundary.binary_search(a) {
            Ok(i) => return Some(&self.boundary[i]),
            Err(i) => i,
        };
        i.checked_sub(1).map(|j| &self.boundary[j]).filter(|u| u.is_prefix_of(a))
    }

    /// Boundary element through which the ray passes.
    pub fn element_on_ray(&self, w: &BoundaryPoint) -> &VertexAddress {
        let probe = w.vertex_at(self.max_depth());
        self.element_above(&probe).expect("a cut meets every ray")
    }

    /// Whether every element of `self` lies at or below an element of `coarse`.
    pub fn refines(&self, coarse: &Cut) -> bool {
        self.boundary.iter().all(|a| coarse.element_above(a).is_some())
    }

    /// Nearest vertex of the coarser complete subtree to an element of `self`.
    pub fn retraction<'a>(&self, coarse: &'a Cut, a: &VertexAddress) -> Result<&'a VertexAddress> {
        if !self.contains(a) {
            return Err(Error::NotOnBoundary(a.clone()));
        }
        if !self.refines(coarse) {
            return Err(Error::NotNested);
        }
        Ok(coarse.element_above(a).expect("checked nesting"))
    }

    /// Coarsest cut refining both inputs: the deeper element of every
    /// comparable pair.
    pub fn common_refinement(a: &Cut, b: &Cut) -> Cut {
        let keep_a = a.boundary.iter().filter(|x| b.element_above(x).is_some());
        let keep_b = b.boundary.iter().filter(|y| a.element_above(y).is_some());
        Cut::from_sorted_unchecked(keep_a.chain(keep_b).cloned())
    }

    pub fn keys(&self) -> Vec<String> {
        self.boundary.iter().map(VertexAddress::to_key).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t2() -> TreeFamily {
        TreeFamily::bruhat_tits(2).unwrap()
    }

    fn a(s: &str) -> VertexAddress {
        s.parse().unwrap()
    }

    /// Independent maximality oracle: every address at the deepest level has
    /// exactly one prefix in the boundary.
    fn covers_every_ray(family: &TreeFamily, cut: &[VertexAddress]) -> bool {
        let depth = cut.iter().map(|c| c.depth()).max().unwrap_or(0);
        Cut::depth_cut(family, depth)
            .boundary()
            .iter()
            .all(|leaf| cut.iter().filter(|c| c.is_prefix_of(leaf)).count() == 1)
    }

    #[test]
    fn refine_examples() {
        let f = t2();
        let c1 = Cut::root().refine(&f, &a("")).unwrap();
        assert_eq!(c1, Cut::parse(&f, &["0", "1", "2"]).unwrap());
        let c2 = c1.refine(&f, &a("0")).unwrap();
        assert_eq!(c2.keys(), vec!["00", "01", "1", "2"]);
        assert!(matches!(c2.refine(&f, &a("0")), Err(Error::NotOnBoundary(_))));
    }

    #[test]
    fn depth_cut_and_validation() {
        let f = t2();
        assert_eq!(Cut::depth_cut(&f, 1).keys(), vec!["0", "1", "2"]);
        assert!(Cut::parse(&f, &["0", "10"]).is_err());
        assert!(!covers_every_ray(&f, &[a("0"), a("10")]));
        assert!(Cut::parse(&f, &["0", "01", "1", "2"]).is_err());
        assert!(Cut::parse(&f, &["0", "10", "11", "2"]).is_ok());
    }

    #[test]
    fn retraction_examples() {
        let f = t2();
        let fine = Cut::parse(&f, &["00", "01", "1", "2"]).unwrap();
        let coarse = Cut::depth_cut(&f, 1);
        assert_eq!(fine.retraction(&coarse, &a("01")).unwrap(), &a("0"));
        assert_eq!(coarse.retraction(&fine, &a("0")), Err(Error::NotNested));
    }

    #[test]
    fn common_refinement_takes_deeper_elements() {
        let f = t2();
        let x = Cut::parse(&f, &["00", "01", "1", "2"]).unwrap();
        let y = Cut::parse(&f, &["0", "10", "11", "2"]).unwrap();
        let c = Cut::common_refinement(&x, &y);
        assert_eq!(c.keys(), vec!["00", "01", "10", "11", "2"]);
        assert!(c.refines(&x) && c.refines(&y));
    }

    #[test]
    fn boundary_count_on_bruhat_tits() {
        for p in 2..5 {
            let f = TreeFamily::bruhat_tits(p).unwrap();
            for k in 1..5 {
                assert_eq!(Cut::depth_cut(&f, k).len(), (p + 1) * p.pow(k as u32 - 1));
            }
        }
    }

    proptest! {
        #[test]
        fn random_refinement_chains_stay_valid(choices in proptest::collection::vec(0usize..1000, 0..25)) {
            let f = t2();
            let mut cut = Cut::root();
            for c in choices {
                let u = cut.boundary()[c % cut.len()].clone();
                let before = cut.len();
                cut = cut.refine(&f, &u).unwrap();
                prop_assert!(cut.is_valid(&f));
                prop_assert!(covers_every_ray(&f, cut.boundary()));
                prop_assert_eq!(cut.len(), before + f.degree_at(&u) - 1);
            }
        }
    }
}
