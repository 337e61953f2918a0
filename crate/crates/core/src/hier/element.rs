use std::collections::{BTreeMap, BTreeSet};

use super::isometry::BranchIsometry;
use crate::error::{Error, Result};
use crate::tree::{BoundaryPoint, Cut, Length, TreeFamily, VertexAddress};

/// A hierarchomorphism in cut form.
///
/// The branches hanging below the domain cut are carried isometrically onto
/// the branches below the range cut. With an interior map (a bijection
/// between the finite interiors of the two cuts) the value is a bijection of
/// the whole vertex set; without it only the action on the absolute is
/// described.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Hierarchomorphism {
    domain: Cut,
    range: Cut,
    branch_map: BTreeMap<VertexAddress, VertexAddress>,
    isometries: BTreeMap<VertexAddress, BranchIsometry>,
    interior: Option<BTreeMap<VertexAddress, VertexAddress>>,
}

impl Hierarchomorphism {
    /// Assembles an element without checking it; see [`Self::validate`].
    pub fn from_parts(
        domain: Cut,
        range: Cut,
        branch_map: BTreeMap<VertexAddress, VertexAddress>,
        isometries: BTreeMap<VertexAddress, BranchIsometry>,
        interior: Option<BTreeMap<VertexAddress, VertexAddress>>,
    ) -> Self {
        let isometries = isometries.into_iter().filter(|(_, i)| !i.is_identity()).collect();
        Hierarchomorphism { domain, range, branch_map, isometries, interior }
    }

    pub fn identity() -> Self {
        Hierarchomorphism::from_parts(
            Cut::root(),
            Cut::root(),
            BTreeMap::from([(VertexAddress::root(), VertexAddress::root())]),
            BTreeMap::new(),
            Some(BTreeMap::new()),
        )
    }

    /// An automorphism fixing the basepoint, described by local permutations.
    pub fn root_isometry(iso: BranchIsometry) -> Self {
        let mut g = Hierarchomorphism::identity();
        if !iso.is_identity() {
            g.isometries.insert(VertexAddress::root(), iso);
        }
        g
    }

    pub fn domain(&self) -> &Cut {
        &self.domain
    }

    pub fn range(&self) -> &Cut {
        &self.range
    }

    pub fn branch_map(&self) -> &BTreeMap<VertexAddress, VertexAddress> {
        &self.branch_map
    }

    pub fn isometries(&self) -> &BTreeMap<VertexAddress, BranchIsometry> {
        &self.isometries
    }

    pub fn interior_map(&self) -> Option<&BTreeMap<VertexAddress, VertexAddress>> {
        self.interior.as_ref()
    }

    /// Drops the interior map, keeping only the action on the absolute.
    pub fn without_interior(mut self) -> Self {
        self.interior = None;
        self
    }

    pub fn isometry(&self, u: &VertexAddress) -> BranchIsometry {
        self.isometries.get(u).cloned().unwrap_or_default()
    }

    /// Branches plus interior singletons.
    pub fn piece_count(&self) -> usize {
        self.domain.len() + self.domain.interior().len()
    }

    /// All violated invariants; empty for a valid element.
    pub fn check(&self, family: &TreeFamily) -> Vec<String> {
        let mut out = Vec::new();
        for (name, cut) in [("domain", &self.domain), ("range", &self.range)] {
            if let Err(e) = cut.validate(family) {
                out.push(format!("{name}: {e}"));
            }
        }
        if self.domain.len() != self.range.len() {
            out.push(format!(
                "domain cut has {} branches but range cut has {}",
                self.domain.len(),
                self.range.len()
            ));
        }
        let keys: BTreeSet<&VertexAddress> = self.branch_map.keys().collect();
        let values: BTreeSet<&VertexAddress> = self.branch_map.values().collect();
        if keys != self.domain.boundary().iter().collect() {
            out.push("branch map keys differ from the domain cut".into());
        }
        if values.len() != self.branch_map.len() || values != self.range.boundary().iter().collect() {
            out.push("branch map is not a bijection onto the range cut".into());
        }
        for (u, v) in &self.branch_map {
            if !family.is_valid_address(u) || !family.is_valid_address(v) {
                continue;
            }
            if family.kind_of(u) != family.kind_of(v) {
                out.push(format!("branches {u} and {v} have different shapes"));
            }
        }
        for (u, iso) in &self.isometries {
            if !self.branch_map.contains_key(u) {
                out.push(format!("isometry attached to {u}, which is not a domain branch"));
            } else if family.is_valid_address(u) {
                out.extend(iso.check(family, family.kind_of(u)).into_iter().map(|m| format!("branch {u}: {m}")));
            }
        }
        if let Some(map) = &self.interior {
            let dom = self.domain.interior();
            let ran = self.range.interior();
            let keys: BTreeSet<VertexAddress> = map.keys().cloned().collect();
            let values: BTreeSet<VertexAddress> = map.values().cloned().collect();
            if keys != dom {
                out.push("interior map keys differ from the domain interior".into());
            }
            if values.len() != map.len() || values != ran {
                out.push("interior map is not a bijection onto the range interior".into());
            }
        }
        out
    }

    pub fn validate(&self, family: &TreeFamily) -> Result<()> {
        let problems = self.check(family);
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidElement(problems))
        }
    }

    pub fn is_valid(&self, family: &TreeFamily) -> bool {
        self.check(family).is_empty()
    }

    fn branch_image(&self, u: &VertexAddress, rel: &[u8]) -> VertexAddress {
        let head = &self.branch_map[u];
        match self.isometries.get(u) {
            Some(iso) => head.concat(&iso.apply(rel)),
            None => head.concat(rel),
        }
    }

    pub fn apply_vertex(&self, a: &VertexAddress) -> Result<VertexAddress> {
        if let Some(u) = self.domain.element_above(a) {
            return Ok(self.branch_image(u, a.strip_prefix(u).expect("prefix")));
        }
        match &self.interior {
            Some(map) => map.get(a).cloned().ok_or_else(|| Error::MissingVertex(a.clone())),
            None => Err(Error::MissingInteriorMap(a.clone())),
        }
    }

    pub fn apply_boundary(&self, w: &BoundaryPoint) -> BoundaryPoint {
        let u = self.domain.element_on_ray(w);
        let tail = w.word().shift(u.depth());
        let image = match self.isometries.get(u) {
            Some(iso) => iso.apply_word(&tail),
            None => tail,
        };
        BoundaryPoint::from_word_unchecked(image.prepend(self.branch_map[u].letters()))
    }

    /// The constant depth shift `ρ(ξ, u) − ρ(ξ, g(u))` on the ball of the
    /// domain branch `u`.
    pub fn branch_shift(&self, family: &TreeFamily, u: &VertexAddress) -> Length {
        family.depth_len(u) - family.depth_len(&self.branch_map[u])
    }

    /// The pseudoderivative at a point of the absolute.
    pub fn pseudoderivative(&self, family: &TreeFamily, w: &BoundaryPoint) -> Length {
        self.branch_shift(family, self.domain.element_on_ray(w))
    }

    pub fn inverse(&self) -> Hierarchomorphism {
        Hierarchomorphism {
            domain: self.range.clone(),
            range: self.domain.clone(),
            branch_map: self.branch_map.iter().map(|(u, v)| (v.clone(), u.clone())).collect(),
            isometries: self.isometries.iter().map(|(u, iso)| (self.branch_map[u].clone(), iso.inverse())).collect(),
            interior: self.interior.as_ref().map(|m| m.iter().map(|(a, b)| (b.clone(), a.clone())).collect()),
        }
    }

    /// The same map re-expressed over a finer domain cut.
    pub fn extend_core(&self, family: &TreeFamily, finer: &Cut) -> Result<Hierarchomorphism> {
        if !finer.refines(&self.domain) {
            return Err(Error::NotNested);
        }
        let mut branch_map = BTreeMap::new();
        let mut isometries = BTreeMap::new();
        let mut interior = self.interior.clone();
        for v in finer.boundary() {
            let u = self.domain.element_above(v).expect("refinement");
            let rel = v.strip_prefix(u).expect("prefix");
            branch_map.insert(v.clone(), self.branch_image(u, rel));
            let iso = self.isometries.get(u);
            if let Some(iso) = iso {
                isometries.insert(v.clone(), iso.restrict(rel));
            }
            if let Some(map) = interior.as_mut() {
                for k in 0..rel.len() {
                    map.insert(u.concat(&rel[..k]), self.branch_image(u, &rel[..k]));
                }
            }
        }
        let range = Cut::from_sorted_unchecked(branch_map.values().cloned());
        debug_assert!(range.is_valid(family));
        Ok(Hierarchomorphism::from_parts(finer.clone(), range, branch_map, isometries, interior))
    }

    /// The same map re-expressed so that its range cut is `finer`.
    pub fn extend_range(&self, family: &TreeFamily, finer: &Cut) -> Result<Hierarchomorphism> {
        Ok(self.inverse().extend_core(family, finer)?.inverse())
    }

    /// `outer ∘ inner`, expressed over the coarsest cut on which the range of
    /// `inner` and the domain of `outer` agree.
    pub fn compose(family: &TreeFamily, outer: &Hierarchomorphism, inner: &Hierarchomorphism) -> Result<Hierarchomorphism> {
        let middle = Cut::common_refinement(&inner.range, &outer.domain);
        let first = inner.extend_range(family, &middle)?;
        let second = outer.extend_core(family, &middle)?;
        let mut branch_map = BTreeMap::new();
        let mut isometries = BTreeMap::new();
        for (u, mid) in &first.branch_map {
            branch_map.insert(u.clone(), second.branch_map[mid].clone());
            let iso = BranchIsometry::then(&first.isometry(u), &second.isometry(mid));
            if !iso.is_identity() {
                isometries.insert(u.clone(), iso);
            }
        }
        let interior = match (&first.interior, &second.interior) {
            (Some(a), Some(b)) => Some(a.iter().map(|(x, y)| (x.clone(), b[y].clone())).collect()),
            _ => None,
        };
        Ok(Hierarchomorphism::from_parts(
            first.domain.clone(),
            second.range.clone(),
            branch_map,
            isometries,
            interior,
        ))
    }

    /// Re-expresses the element over a domain cut deep enough that every
    /// branch isometry is the canonical identification.
    pub fn flatten(&self, family: &TreeFamily) -> Hierarchomorphism {
        let mut boundary = Vec::new();
        for u in self.domain.boundary() {
            let depth = self.isometries.get(u).map_or(0, BranchIsometry::support_depth);
            boundary.extend(descendants_at(family, u, depth));
        }
        let cut = Cut::from_sorted_unchecked(boundary);
        self.extend_core(family, &cut).expect("refines the domain")
    }

    /// Exact comparison of the actions on the absolute.
    pub fn acts_equal_on_boundary(&self, family: &TreeFamily, other: &Hierarchomorphism) -> bool {
        let common = Cut::common_refinement(&self.domain, &other.domain);
        let a = self.extend_core(family, &common).expect("refines").flatten(family);
        let b = other.extend_core(family, &common).expect("refines").flatten(family);
        let common = Cut::common_refinement(&a.domain, &b.domain);
        let a = a.extend_core(family, &common).expect("refines");
        let b = b.extend_core(family, &common).expect("refines");
        a.branch_map == b.branch_map
    }

    /// Whether the action on the absolute comes from an automorphism of the
    /// tree fixing the basepoint: no depth shift on any branch and θ between
    /// distinct branches preserved.
    pub fn is_root_fixing_isometry(&self, family: &TreeFamily) -> bool {
        let pairs: Vec<(&VertexAddress, &VertexAddress)> = self.branch_map.iter().collect();
        if pairs.iter().any(|(u, v)| family.depth_len(u) != family.depth_len(v)) {
            return false;
        }
        for (i, (u1, v1)) in pairs.iter().enumerate() {
            for (u2, v2) in &pairs[i + 1..] {
                if family.depth_len(&u1.meet(u2)) != family.depth_len(&v1.meet(v2)) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the action on the absolute comes from an automorphism of the
    /// tree that may move the basepoint. Such a map satisfies
    /// `θ(gω, gω′) + n(g,ω) + n(g,ω′) = θ(ω, ω′)` for all pairs of rays;
    /// inside one branch this holds automatically, so only pairs of distinct
    /// branches are checked.
    pub fn is_tree_isometry(&self, family: &TreeFamily) -> bool {
        let pairs: Vec<(&VertexAddress, &VertexAddress)> = self.branch_map.iter().collect();
        for (i, (u1, v1)) in pairs.iter().enumerate() {
            let n1 = self.branch_shift(family, u1);
            for (u2, v2) in &pairs[i + 1..] {
                let n2 = self.branch_shift(family, u2);
                let before = family.depth_len(&u1.meet(u2)) * 2;
                let after = family.depth_len(&v1.meet(v2)) * 2;
                if after + n1 + n2 != before {
                    return false;
                }
            }
        }
        true
    }
}

/// All vertices `depth` levels below `u`.
pub(crate) fn descendants_at(family: &TreeFamily, u: &VertexAddress, depth: usize) -> Vec<VertexAddress> {
    let mut level = vec![u.clone()];
    for _ in 0..depth {
        level = level.iter().flat_map(|v| family.children(v)).collect();
    }
    level
}
