use std::fmt;

use super::address::{char_letter, letter_char, VertexAddress};
use super::family::{Kind, TreeFamily};
use crate::error::{Error, Result};

/// An eventually periodic infinite word `pre · period · period · …`,
/// kept in canonical form (primitive period, shortest preperiod).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EpWord {
    pre: Vec<u8>,
    period: Vec<u8>,
}

impl EpWord {
    pub fn new(pre: Vec<u8>, period: Vec<u8>) -> Self {
        assert!(!period.is_empty(), "period must be nonempty");
        let mut w = EpWord { pre, period };
        w.canonicalize();
        w
    }

    fn canonicalize(&mut self) {
        let n = self.period.len();
        let d = (1..=n)
            .find(|&d| n.is_multiple_of(d) && (d..n).all(|i| self.period[i] == self.period[i - d]))
            .unwrap_or(n);
        self.period.truncate(d);
        while let (Some(&p), Some(&q)) = (self.pre.last(), self.period.last()) {
            if p != q {
                break;
            }
            self.pre.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    pub fn letter(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre[i]
        } else {
            self.period[(i - self.pre.len()) % self.period.len()]
        }
    }

    pub fn take(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.letter(i)).collect()
    }

    /// The word with its first `k` letters removed.
    pub fn shift(&self, k: usize) -> EpWord {
        if k <= self.pre.len() {
            EpWord::new(self.pre[k..].to_vec(), self.period.clone())
        } else {
            let mut period = self.period.clone();
            period.rotate_left((k - self.pre.len()) % self.period.len());
            EpWord::new(Vec::new(), period)
        }
    }

    /// `head · self`.
    pub fn prepend(&self, head: &[u8]) -> EpWord {
        let mut pre = head.to_vec();
        pre.extend_from_slice(&self.pre);
        EpWord::new(pre, self.period.clone())
    }

    /// Length of the longest common prefix, or `None` when the words coincide.
    pub fn common_prefix_len(&self, other: &EpWord) -> Option<usize> {
        if self == other {
            return None;
        }
        // Two distinct eventually periodic words differ before this bound.
        let bound = self.pre.len().max(other.pre.len()) + self.period.len() * other.period.len();
        (0..=bound).find(|&i| self.letter(i) != other.letter(i))
    }
}

impl fmt::Display for EpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.pre {
            write!(f, "{}", letter_char(l))?;
        }
        write!(f, "(")?;
        for &l in &self.period {
            write!(f, "{}", letter_char(l))?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for EpWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A point of the absolute given by an eventually periodic ray from the
/// basepoint. Written `pre(period)`, e.g. `0(1)` for the ray `0111…`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryPoint(EpWord);

impl BoundaryPoint {
    pub fn new(family: &TreeFamily, pre: Vec<u8>, period: Vec<u8>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidBoundaryPoint("empty period".into()));
        }
        BoundaryPoint::from_word(family, EpWord::new(pre, period))
    }

    pub fn from_word(family: &TreeFamily, word: EpWord) -> Result<Self> {
        // One full period past the preperiod covers every letter position class.
        let n = word.pre.len() + word.period.len() + 1;
        if family.letters_valid_from(Kind::Root, &word.take(n)) {
            Ok(BoundaryPoint(word))
        } else {
            Err(Error::InvalidBoundaryPoint(format!("{word} leaves the letter ranges")))
        }
    }

    /// For words already known to be valid rays, such as images under a
    /// valid element.
    pub(crate) fn from_word_unchecked(word: EpWord) -> Self {
        BoundaryPoint(word)
    }

    pub fn parse(family: &TreeFamily, s: &str) -> Result<Self> {
        let bad = || Error::InvalidBoundaryPoint(s.to_string());
        let (pre, rest) = s.split_once('(').ok_or_else(bad)?;
        let period = rest.strip_suffix(')').ok_or_else(bad)?;
        let letters = |t: &str| t.chars().map(char_letter).collect::<Option<Vec<u8>>>();
        BoundaryPoint::new(family, letters(pre).ok_or_else(bad)?, letters(period).ok_or_else(bad)?)
    }

    pub fn word(&self) -> &EpWord {
        &self.0
    }

    pub fn letter(&self, i: usize) -> u8 {
        self.0.letter(i)
    }

    /// The vertex at simplicial depth `n` on the ray.
    pub fn vertex_at(&self, n: usize) -> VertexAddress {
        VertexAddress::from_letters(self.0.take(n))
    }

    pub fn passes_through(&self, v: &VertexAddress) -> bool {
        v.letters().iter().enumerate().all(|(i, &l)| self.letter(i) == l)
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_reduction() {
        let w = EpWord::new(vec![0, 1, 0, 1], vec![0, 1, 0, 1]);
        assert_eq!(w.preperiod(), &[] as &[u8]);
        assert_eq!(w.period(), &[0, 1]);
        let w = EpWord::new(vec![1, 0], vec![1, 0]);
        assert_eq!(w, EpWord::new(vec![], vec![1, 0]));
        assert_eq!(EpWord::new(vec![0, 0], vec![0]).to_string(), "(0)");
    }

    #[test]
    fn validates_ray_letters() {
        let t2 = TreeFamily::bruhat_tits(2).unwrap();
        assert!(BoundaryPoint::parse(&t2, "2(0)").is_ok());
        assert!(BoundaryPoint::parse(&t2, "(2)").is_err());
        assert!(BoundaryPoint::parse(&t2, "02(1)").is_err());
        assert!(BoundaryPoint::parse(&t2, "0(").is_err());
    }

    #[test]
    fn distinct_words_differ_within_bound() {
        let a = EpWord::new(vec![], vec![0, 0, 1]);
        let b = EpWord::new(vec![0, 0, 1, 0, 0, 1], vec![0, 1, 0]);
        assert_eq!(a.common_prefix_len(&b), Some(7));
        assert_eq!(a.common_prefix_len(&a.clone()), None);
    }

    proptest! {
        #[test]
        fn canonical_form_preserves_letters(
            pre in proptest::collection::vec(0u8..2, 0..6),
            period in proptest::collection::vec(0u8..2, 1..5),
            k in 0usize..8,
        ) {
            let w = EpWord::new(pre.clone(), period.clone());
            let raw = |i: usize| if i < pre.len() { pre[i] } else { period[(i - pre.len()) % period.len()] };
            for i in 0..40 {
                prop_assert_eq!(w.letter(i), raw(i));
                prop_assert_eq!(w.shift(k).letter(i), raw(i + k));
            }
        }
    }
}
