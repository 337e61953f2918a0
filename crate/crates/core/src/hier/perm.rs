use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::tree::{char_letter, letter_char};

/// A finitely supported permutation of child letters. Only moved letters are
/// stored, so the identity is the empty map regardless of degree.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(BTreeMap<u8, u8>);

impl Perm {
    pub fn identity() -> Self {
        Perm(BTreeMap::new())
    }

    /// From the full image list `images[i] = σ(i)`.
    pub fn from_images(images: &[u8]) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &j in images {
            if j as usize >= images.len() || std::mem::replace(&mut seen[j as usize], true) {
                return Err(Error::InvalidPermutation(format!("{images:?}")));
            }
        }
        Ok(Perm(
            images.iter().enumerate().filter(|(i, &j)| *i as u8 != j).map(|(i, &j)| (i as u8, j)).collect(),
        ))
    }

    pub fn transposition(a: u8, b: u8) -> Self {
        if a == b {
            return Perm::identity();
        }
        Perm(BTreeMap::from([(a, b), (b, a)]))
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, x: u8) -> u8 {
        self.0.get(&x).copied().unwrap_or(x)
    }

    /// Largest moved letter.
    pub fn max_moved(&self) -> Option<u8> {
        self.0.keys().next_back().copied()
    }

    pub fn moved(&self) -> impl Iterator<Item = (u8, u8)> + '_ {
        self.0.iter().map(|(&a, &b)| (a, b))
    }

    pub fn inverse(&self) -> Perm {
        Perm(self.0.iter().map(|(&a, &b)| (b, a)).collect())
    }

    /// `after ∘ before`.
    pub fn then(before: &Perm, after: &Perm) -> Perm {
        let mut out = BTreeMap::new();
        for x in before.0.keys().chain(after.0.keys()) {
            let y = after.apply(before.apply(*x));
            if y != *x {
                out.insert(*x, y);
            }
        }
        Perm(out)
    }

    /// Cycle notation over letter characters, smallest letter first in each
    /// cycle; the identity is `()`.
    pub fn to_cycles(&self) -> String {
        if self.is_identity() {
            return "()".into();
        }
        let mut done = std::collections::BTreeSet::new();
        let mut s = String::new();
        for &start in self.0.keys() {
            if !done.insert(start) {
                continue;
            }
            s.push('(');
            s.push(letter_char(start));
            let mut x = self.apply(start);
            while x != start {
                done.insert(x);
                s.push(letter_char(x));
                x = self.apply(x);
            }
            s.push(')');
        }
        s
    }

    pub fn parse_cycles(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPermutation(s.to_string());
        let mut map = BTreeMap::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let inner = rest.strip_prefix('(').ok_or_else(bad)?;
            let end = inner.find(')').ok_or_else(bad)?;
            let cycle = inner[..end].chars().map(char_letter).collect::<Option<Vec<u8>>>().ok_or_else(bad)?;
            for (i, &x) in cycle.iter().enumerate() {
                let y = cycle[(i + 1) % cycle.len()];
                if map.insert(x, y).is_some() {
                    return Err(bad());
                }
            }
            rest = inner[end + 1..].trim_start();
        }
        map.retain(|a, b| a != b);
        Ok(Perm(map))
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycles())
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycles())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_notation() {
        let p = Perm::parse_cycles("(12)(03)").unwrap();
        assert_eq!(p.to_cycles(), "(03)(12)");
        assert_eq!(Perm::parse_cycles("()").unwrap(), Perm::identity());
        assert_eq!(Perm::parse_cycles("(021)").unwrap().apply(2), 1);
        assert!(Perm::parse_cycles("(01)(12)").is_err());
        assert!(Perm::parse_cycles("01").is_err());
    }

    #[test]
    fn composition_and_inverse() {
        let a = Perm::parse_cycles("(012)").unwrap();
        let b = Perm::transposition(0, 1);
        let ab = Perm::then(&a, &b);
        for x in 0..3 {
            assert_eq!(ab.apply(x), b.apply(a.apply(x)));
        }
        assert!(Perm::then(&a, &a.inverse()).is_identity());
        assert_eq!(Perm::from_images(&[1, 0, 2]).unwrap(), b);
        assert!(Perm::from_images(&[1, 1, 2]).is_err());
    }
}
