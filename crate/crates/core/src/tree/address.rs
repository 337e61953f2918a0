use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest degree representable with one character per letter (`0-9a-z`).
pub const MAX_DEGREE: usize = 36;

pub(crate) fn letter_char(l: u8) -> char {
    std::char::from_digit(l as u32, MAX_DEGREE as u32).expect("letter below 36")
}

pub(crate) fn char_letter(c: char) -> Option<u8> {
    c.to_digit(MAX_DEGREE as u32).map(|d| d as u8)
}

/// A vertex of a rooted tree, addressed by the letters on the path from the
/// basepoint. The empty address is the basepoint itself.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexAddress(Vec<u8>);

impl VertexAddress {
    pub fn root() -> Self {
        VertexAddress(Vec::new())
    }

    pub fn from_letters(letters: impl Into<Vec<u8>>) -> Self {
        VertexAddress(letters.into())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// Simplicial distance to the basepoint.
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn parent(&self) -> Option<VertexAddress> {
        if self.0.is_empty() {
            None
        } else {
            Some(VertexAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, letter: u8) -> VertexAddress {
        let mut v = self.0.clone();
        v.push(letter);
        VertexAddress(v)
    }

    pub fn concat(&self, tail: &[u8]) -> VertexAddress {
        let mut v = self.0.clone();
        v.extend_from_slice(tail);
        VertexAddress(v)
    }

    pub fn prefix(&self, len: usize) -> VertexAddress {
        VertexAddress(self.0[..len].to_vec())
    }

    /// True when `self` lies on the path from the basepoint to `other`
    /// (including `self == other`).
    pub fn is_prefix_of(&self, other: &VertexAddress) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_proper_prefix_of(&self, other: &VertexAddress) -> bool {
        self.0.len() < other.0.len() && other.0.starts_with(&self.0)
    }

    /// The letters of `self` after the prefix `base`.
    pub fn strip_prefix(&self, base: &VertexAddress) -> Option<&[u8]> {
        self.0.strip_prefix(base.0.as_slice())
    }

    /// Longest common prefix.
    pub fn meet(&self, other: &VertexAddress) -> VertexAddress {
        let n = common_prefix_len(&self.0, &other.0);
        self.prefix(n)
    }

    /// All vertices strictly between the basepoint-side end and `self`,
    /// i.e. the proper prefixes, shortest first.
    pub fn proper_prefixes(&self) -> impl Iterator<Item = VertexAddress> + '_ {
        (0..self.0.len()).map(move |k| self.prefix(k))
    }
}

pub(crate) fn common_prefix_len(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Borrow<[u8]> for VertexAddress {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ξ");
        }
        for &l in &self.0 {
            write!(f, "{}", letter_char(l))?;
        }
        Ok(())
    }
}

impl fmt::Debug for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self.to_key())
    }
}

impl VertexAddress {
    /// Serialized form: one character per letter, the basepoint is `""`.
    pub fn to_key(&self) -> String {
        self.0.iter().map(|&l| letter_char(l)).collect()
    }
}

impl FromStr for VertexAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(char_letter)
            .collect::<Option<Vec<u8>>>()
            .map(VertexAddress)
            .ok_or_else(|| Error::InvalidAddress(s.to_string()))
    }
}

impl Serialize for VertexAddress {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_key())
    }
}

impl<'de> Deserialize<'de> for VertexAddress {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
