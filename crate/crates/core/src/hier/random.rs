use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::element::Hierarchomorphism;
use super::isometry::BranchIsometry;
use super::perm::Perm;
use crate::tree::{BoundaryPoint, Cut, Kind, TreeFamily, VertexAddress};

/// A valid element drawn deterministically from `seed`.
///
/// Both cuts reach at most simplicial depth `depth_budget`; branch isometries
/// carry permutations only at relative depth below `support_budget`. Letters
/// are only ever exchanged within an edge class, so validity holds by
/// construction.
pub fn random_element(family: &TreeFamily, seed: u64, depth_budget: usize, support_budget: usize) -> Hierarchomorphism {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_element_with(family, &mut rng, depth_budget, support_budget)
}

pub fn random_element_with<R: Rng>(
    family: &TreeFamily,
    rng: &mut R,
    depth_budget: usize,
    support_budget: usize,
) -> Hierarchomorphism {
    let mut domain = Cut::root();
    let mut range = Cut::root();
    if depth_budget > 0 {
        domain = Cut::depth_cut(family, 1);
        range = domain.clone();
        for _ in 0..rng.gen_range(0..=2 * (depth_budget - 1)) {
            let open: Vec<&VertexAddress> = domain.boundary().iter().filter(|d| d.depth() < depth_budget).collect();
            let Some(&d) = open.choose(rng) else { break };
            let kind = family.kind_of(d);
            let partners: Vec<&VertexAddress> = range
                .boundary()
                .iter()
                .filter(|r| r.depth() < depth_budget && family.kind_of(r) == kind)
                .collect();
            let Some(&r) = partners.choose(rng) else { continue };
            let (d, r) = (d.clone(), r.clone());
            domain = domain.refine(family, &d).expect("boundary element");
            range = range.refine(family, &r).expect("boundary element");
        }
    }

    // Refinements were paired by kind, so each kind occurs equally often on
    // both sides.
    let mut by_kind: BTreeMap<Kind, (Vec<VertexAddress>, Vec<VertexAddress>)> = BTreeMap::new();
    for d in domain.boundary() {
        by_kind.entry(family.kind_of(d)).or_default().0.push(d.clone());
    }
    for r in range.boundary() {
        by_kind.entry(family.kind_of(r)).or_default().1.push(r.clone());
    }
    let mut branch_map = BTreeMap::new();
    for (_, (ds, mut rs)) in by_kind {
        rs.shuffle(rng);
        branch_map.extend(ds.into_iter().zip(rs));
    }

    let mut isometries = BTreeMap::new();
    for d in domain.boundary() {
        let iso = random_branch_isometry(family, rng, family.kind_of(d), support_budget);
        if !iso.is_identity() {
            isometries.insert(d.clone(), iso);
        }
    }

    let dom_int: Vec<VertexAddress> = domain.interior().into_iter().collect();
    let mut ran_int: Vec<VertexAddress> = range.interior().into_iter().collect();
    ran_int.shuffle(rng);
    let interior = dom_int.into_iter().zip(ran_int).collect();

    Hierarchomorphism::from_parts(domain, range, branch_map, isometries, Some(interior))
}

/// A random automorphism fixing the basepoint, with local permutations at
/// depth below `support_budget`.
pub fn random_isometry<R: Rng>(family: &TreeFamily, rng: &mut R, support_budget: usize) -> Hierarchomorphism {
    Hierarchomorphism::root_isometry(random_branch_isometry(family, rng, Kind::Root, support_budget))
}

/// A random eventually periodic ray: a preperiod of `1..=max_pre` letters
/// (the root letter is never repeated) followed by `1..=max_period` letters
/// of period.
pub fn random_ray<R: Rng>(family: &TreeFamily, rng: &mut R, max_pre: usize, max_period: usize) -> BoundaryPoint {
    let pre_len = rng.gen_range(1..=max_pre.max(1));
    let per_len = rng.gen_range(1..=max_period.max(1));
    let mut letters = Vec::with_capacity(pre_len + per_len);
    for i in 0..pre_len + per_len {
        let deg = if i == 0 { family.root_degree() } else { family.child_degree() };
        letters.push(rng.gen_range(0..deg) as u8);
    }
    let period = letters.split_off(pre_len);
    BoundaryPoint::new(family, letters, period).expect("letters drawn within range")
}

fn random_branch_isometry<R: Rng>(family: &TreeFamily, rng: &mut R, root_kind: Kind, support_budget: usize) -> BranchIsometry {
    let mut local = Vec::new();
    let mut level = vec![(Vec::<u8>::new(), root_kind)];
    for _ in 0..support_budget {
        let mut next = Vec::new();
        for (rel, kind) in level {
            if rng.gen_bool(0.5) {
                local.push((VertexAddress::from_letters(rel.clone()), class_preserving_perm(family, rng, kind)));
            }
            for x in 0..family.degree_of(kind) as u8 {
                let mut child = rel.clone();
                child.push(x);
                next.push((child, family.child_kind(kind, x)));
            }
        }
        level = next;
    }
    BranchIsometry::from_local(local)
}

fn class_preserving_perm<R: Rng>(family: &TreeFamily, rng: &mut R, kind: Kind) -> Perm {
    let deg = family.degree_of(kind);
    let mut classes: BTreeMap<Kind, Vec<u8>> = BTreeMap::new();
    for x in 0..deg as u8 {
        classes.entry(family.child_kind(kind, x)).or_default().push(x);
    }
    let mut images = vec![0u8; deg];
    for letters in classes.values() {
        let mut shuffled = letters.clone();
        shuffled.shuffle(rng);
        for (&x, &y) in letters.iter().zip(&shuffled) {
            images[x as usize] = y;
        }
    }
    Perm::from_images(&images).expect("bijection")
}
