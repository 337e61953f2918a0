use std::collections::BTreeMap;

use super::perm::Perm;
use crate::tree::{EpWord, Kind, TreeFamily, VertexAddress};

/// An isometry between two branches of the same kind, given by finitely many
/// local letter permutations. The permutation stored at a relative address
/// `p` acts on the children of the source vertex `root · p`; away from the
/// support the branches are identified letter by letter.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct BranchIsometry {
    local: BTreeMap<VertexAddress, Perm>,
}

impl BranchIsometry {
    pub fn identity() -> Self {
        BranchIsometry::default()
    }

    pub fn from_local(local: impl IntoIterator<Item = (VertexAddress, Perm)>) -> Self {
        BranchIsometry {
            local: local.into_iter().filter(|(_, p)| !p.is_identity()).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.local.is_empty()
    }

    pub fn local(&self) -> &BTreeMap<VertexAddress, Perm> {
        &self.local
    }

    pub fn perm_at(&self, rel: &[u8]) -> Option<&Perm> {
        self.local.get(rel)
    }

    /// Number of letters past which the isometry is the canonical identification.
    pub fn support_depth(&self) -> usize {
        self.local.keys().map(|k| k.depth() + 1).max().unwrap_or(0)
    }

    pub fn apply(&self, rel: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(rel.len());
        for (i, &x) in rel.iter().enumerate() {
            out.push(match self.local.get(&rel[..i]) {
                Some(p) => p.apply(x),
                None => x,
            });
        }
        out
    }

    pub fn apply_word(&self, w: &EpWord) -> EpWord {
        let k = self.support_depth();
        let head = self.apply(&w.take(k));
        w.shift(k).prepend(&head)
    }

    pub fn inverse(&self) -> BranchIsometry {
        BranchIsometry::from_local(self.local.iter().map(|(p, perm)| {
            (VertexAddress::from_letters(self.apply(p.letters())), perm.inverse())
        }))
    }

    /// `after ∘ before`, where `after` is the isometry attached to the image
    /// branch of `before`.
    pub fn then(before: &BranchIsometry, after: &BranchIsometry) -> BranchIsometry {
        let before_inv = before.inverse();
        let mut keys: Vec<VertexAddress> = before.local.keys().cloned().collect();
        keys.extend(after.local.keys().map(|q| VertexAddress::from_letters(before_inv.apply(q.letters()))));
        keys.sort();
        keys.dedup();
        BranchIsometry::from_local(keys.into_iter().map(|p| {
            let mid = before.apply(p.letters());
            let first = before.local.get(&p).cloned().unwrap_or_default();
            let second = after.local.get(mid.as_slice()).cloned().unwrap_or_default();
            (p, Perm::then(&first, &second))
        }))
    }

    /// The isometry induced on the sub-branch at relative address `rel`.
    pub fn restrict(&self, rel: &[u8]) -> BranchIsometry {
        BranchIsometry::from_local(self.local.iter().filter_map(|(p, perm)| {
            p.letters().strip_prefix(rel).map(|tail| (VertexAddress::from_letters(tail), perm.clone()))
        }))
    }

    /// Violations of letter ranges or of edge-class preservation, for a
    /// branch whose root has kind `root_kind`.
    pub fn check(&self, family: &TreeFamily, root_kind: Kind) -> Vec<String> {
        let mut out = Vec::new();
        for (p, perm) in &self.local {
            if !family.letters_valid_from(root_kind, p.letters()) {
                out.push(format!("isometry support {} leaves the branch", p.to_key()));
                continue;
            }
            let kind = family.walk_kind(root_kind, p.letters());
            let deg = family.degree_of(kind);
            if perm.max_moved().is_some_and(|m| m as usize >= deg) {
                out.push(format!("permutation {perm} at {} exceeds degree {deg}", p.to_key()));
                continue;
            }
            for (x, y) in perm.moved() {
                if family.child_kind(kind, x) != family.child_kind(kind, y) {
                    out.push(format!(
                        "permutation {perm} at {} maps letter {x} to letter {y} of a different edge class",
                        p.to_key()
                    ));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(entries: &[(&str, &str)]) -> BranchIsometry {
        BranchIsometry::from_local(
            entries.iter().map(|(k, c)| (k.parse().unwrap(), Perm::parse_cycles(c).unwrap())),
        )
    }

    #[test]
    fn applies_letterwise_by_source_prefix() {
        let g = iso(&[("", "(01)"), ("0", "(01)")]);
        assert_eq!(g.apply(&[0, 0, 1]), vec![1, 1, 1]);
        assert_eq!(g.apply(&[1, 0, 1]), vec![0, 0, 1]);
        assert_eq!(g.support_depth(), 2);
    }

    #[test]
    fn inverse_and_composition() {
        let g = iso(&[("", "(01)"), ("0", "(01)"), ("11", "(01)")]);
        let h = iso(&[("1", "(01)"), ("", "(01)")]);
        let words: Vec<Vec<u8>> = (0..16u8).map(|m| (0..4).map(|i| (m >> i) & 1).collect()).collect();
        for w in &words {
            assert_eq!(&g.inverse().apply(&g.apply(w)), w);
            assert_eq!(BranchIsometry::then(&g, &h).apply(w), h.apply(&g.apply(w)));
        }
        assert!(BranchIsometry::then(&g, &g.inverse()).is_identity());
    }

    #[test]
    fn restriction_matches_tail_action() {
        let g = iso(&[("0", "(01)"), ("01", "(01)")]);
        let r = g.restrict(&[0]);
        assert_eq!(r.apply(&[0, 0]), g.apply(&[0, 0, 0])[1..].to_vec());
        assert_eq!(r.apply(&[1, 1]), g.apply(&[0, 1, 1])[1..].to_vec());
    }

    #[test]
    fn class_check_on_free_group_tree() {
        let one = crate::tree::Length::from_integer(1);
        let fg = TreeFamily::free_group(one, one * 2).unwrap();
        // Below an α-edge, letter 0 is α and letters 1, 2 are β.
        assert!(iso(&[("", "(12)")]).check(&fg, Kind::Class(0)).is_empty());
        assert_eq!(iso(&[("", "(01)")]).check(&fg, Kind::Class(0)).len(), 2);
        assert_eq!(iso(&[("", "(03)")]).check(&fg, Kind::Class(0)).len(), 1);
    }
}
