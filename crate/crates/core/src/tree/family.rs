use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::address::{VertexAddress, MAX_DEGREE};
use super::boundary::BoundaryPoint;
use crate::error::{Error, Result};

/// Exact edge and path lengths.
pub type Length = Ratio<i64>;

pub fn length_to_f64(l: &Length) -> f64 {
    l.to_f64().expect("finite rational")
}

/// The type of a vertex: the basepoint, or the class of the edge leading into it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Root,
    Class(usize),
}

/// Value of θ: finite, or infinite for two equal boundary points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theta {
    Finite(Length),
    Infinite,
}

impl Theta {
    pub fn to_f64(self) -> f64 {
        match self {
            Theta::Finite(l) => length_to_f64(&l),
            Theta::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<Length> {
        match self {
            Theta::Finite(l) => Some(l),
            Theta::Infinite => None,
        }
    }
}

/// A vertex or a point of the absolute.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Point {
    Vertex(VertexAddress),
    Boundary(BoundaryPoint),
}

impl From<VertexAddress> for Point {
    fn from(v: VertexAddress) -> Self {
        Point::Vertex(v)
    }
}

impl From<BoundaryPoint> for Point {
    fn from(b: BoundaryPoint) -> Self {
        Point::Boundary(b)
    }
}

/// An infinite rooted metric tree generated lazily from a finite rule.
///
/// The basepoint has `root_degree` children and every other vertex has
/// `child_degree` children. Every edge carries a class; the class of a child
/// edge is a function of the class of the parent edge and the child letter,
/// and each class has a fixed positive length. A single class gives the
/// homogeneous trees; two classes with the "same generator continues" rule
/// give the Cayley tree of the free group on two generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeFamily {
    root_degree: usize,
    child_degree: usize,
    class_lengths: Vec<Length>,
    root_classes: Vec<usize>,
    child_classes: Vec<Vec<usize>>,
}

impl TreeFamily {
    pub fn new(
        root_degree: usize,
        child_degree: usize,
        class_lengths: Vec<Length>,
        root_classes: Vec<usize>,
        child_classes: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidFamily(m));
        if root_degree < 3 {
            return bad(format!("root_degree must be at least 3, got {root_degree}"));
        }
        if child_degree < 2 {
            return bad(format!("child_degree must be at least 2, got {child_degree}"));
        }
        if root_degree > MAX_DEGREE || child_degree > MAX_DEGREE {
            return bad(format!("degrees above {MAX_DEGREE} are not addressable"));
        }
        if class_lengths.is_empty() {
            return bad("at least one edge class is required".into());
        }
        if let Some(l) = class_lengths.iter().find(|l| **l <= Length::zero()) {
            return bad(format!("edge lengths must be positive, got {l}"));
        }
        let n = class_lengths.len();
        if root_classes.len() != root_degree {
            return bad("root_classes must have one entry per root letter".into());
        }
        if child_classes.len() != n || child_classes.iter().any(|r| r.len() != child_degree) {
            return bad("child_classes must have one row of child_degree entries per class".into());
        }
        if root_classes.iter().chain(child_classes.iter().flatten()).any(|&c| c >= n) {
            return bad("class index out of range".into());
        }
        Ok(TreeFamily {
            root_degree,
            child_degree,
            class_lengths,
            root_classes,
            child_classes,
        })
    }

    /// All edges share one class of the given length.
    pub fn regular(root_degree: usize, child_degree: usize, length: Length) -> Result<Self> {
        TreeFamily::new(
            root_degree,
            child_degree,
            vec![length],
            vec![0; root_degree],
            vec![vec![0; child_degree]],
        )
    }

    /// The Bruhat–Tits tree of valence `p + 1` with unit edges.
    pub fn bruhat_tits(p: usize) -> Result<Self> {
        TreeFamily::regular(p + 1, p, Length::from_integer(1))
    }

    /// Cayley tree of the free group on `α, β`: root letters `0,1` are
    /// `α^{±1}` and `2,3` are `β^{±1}`; below the root, child letter `0`
    /// repeats the generator of the incoming edge and letters `1,2` switch to
    /// the other generator. `α`-edges have length `l1`, `β`-edges `l2`.
    pub fn free_group(l1: Length, l2: Length) -> Result<Self> {
        TreeFamily::new(4, 3, vec![l1, l2], vec![0, 0, 1, 1], vec![vec![0, 1, 1], vec![1, 0, 0]])
    }

    pub fn root_degree(&self) -> usize {
        self.root_degree
    }

    pub fn child_degree(&self) -> usize {
        self.child_degree
    }

    pub fn class_count(&self) -> usize {
        self.class_lengths.len()
    }

    pub fn class_length(&self, class: usize) -> Length {
        self.class_lengths[class]
    }

    pub fn min_edge_length(&self) -> Length {
        *self.class_lengths.iter().min().expect("nonempty")
    }

    pub fn max_edge_length(&self) -> Length {
        *self.class_lengths.iter().max().expect("nonempty")
    }

    pub fn degree_of(&self, kind: Kind) -> usize {
        match kind {
            Kind::Root => self.root_degree,
            Kind::Class(_) => self.child_degree,
        }
    }

    /// Number of children of a vertex.
    pub fn degree_at(&self, a: &VertexAddress) -> usize {
        if a.is_root() {
            self.root_degree
        } else {
            self.child_degree
        }
    }

    pub fn child_kind(&self, parent: Kind, letter: u8) -> Kind {
        match parent {
            Kind::Root => Kind::Class(self.root_classes[letter as usize]),
            Kind::Class(c) => Kind::Class(self.child_classes[c][letter as usize]),
        }
    }

    /// Length of the edge from a vertex of kind `parent` to its child `letter`.
    pub fn edge_length(&self, parent: Kind, letter: u8) -> Length {
        match self.child_kind(parent, letter) {
            Kind::Class(c) => self.class_lengths[c],
            Kind::Root => unreachable!("children are never the root"),
        }
    }

    /// Kind reached by following `letters` from a vertex of kind `start`.
    pub fn walk_kind(&self, start: Kind, letters: &[u8]) -> Kind {
        letters.iter().fold(start, |k, &l| self.child_kind(k, l))
    }

    pub fn kind_of(&self, a: &VertexAddress) -> Kind {
        self.walk_kind(Kind::Root, a.letters())
    }

    /// Whether `letters`, read from a vertex of kind `start`, respect the
    /// letter ranges.
    pub fn letters_valid_from(&self, start: Kind, letters: &[u8]) -> bool {
        let mut deg = self.degree_of(start);
        for &l in letters {
            if l as usize >= deg {
                return false;
            }
            deg = self.child_degree;
        }
        true
    }

    pub fn is_valid_address(&self, a: &VertexAddress) -> bool {
        self.letters_valid_from(Kind::Root, a.letters())
    }

    pub fn check_address(&self, a: &VertexAddress) -> Result<()> {
        if self.is_valid_address(a) {
            Ok(())
        } else {
            Err(Error::InvalidAddress(a.to_key()))
        }
    }

    /// Path length of `letters` read from a vertex of kind `start`.
    pub fn path_length_from(&self, start: Kind, letters: &[u8]) -> Length {
        let mut kind = start;
        let mut total = Length::zero();
        for &l in letters {
            total += self.edge_length(kind, l);
            kind = self.child_kind(kind, l);
        }
        total
    }

    /// ρ(ξ, a).
    pub fn depth_len(&self, a: &VertexAddress) -> Length {
        self.path_length_from(Kind::Root, a.letters())
    }

    pub fn children(&self, a: &VertexAddress) -> Vec<VertexAddress> {
        (0..self.degree_at(a) as u8).map(|l| a.child(l)).collect()
    }

    /// Sum of edge lengths along the unique path from `a` to `b`.
    pub fn distance(&self, a: &VertexAddress, b: &VertexAddress) -> Length {
        let m = a.meet(b);
        let k = m.depth();
        let mk = self.kind_of(&m);
        self.path_length_from(mk, &a.letters()[k..]) + self.path_length_from(mk, &b.letters()[k..])
    }

    /// Number of edges on the path from `a` to `b`.
    pub fn simplicial_distance(&self, a: &VertexAddress, b: &VertexAddress) -> usize {
        let k = a.meet(b).depth();
        a.depth() + b.depth() - 2 * k
    }

    /// Twice the distance from the basepoint to the path between two points.
    pub fn theta(&self, a: &Point, b: &Point) -> Theta {
        let meet_len = match (a, b) {
            (Point::Vertex(x), Point::Vertex(y)) => x.meet(y).depth(),
            (Point::Vertex(x), Point::Boundary(w)) | (Point::Boundary(w), Point::Vertex(x)) => {
                x.letters()
                    .iter()
                    .enumerate()
                    .take_while(|(i, &l)| w.letter(*i) == l)
                    .count()
            }
            (Point::Boundary(w1), Point::Boundary(w2)) => match w1.word().common_prefix_len(w2.word()) {
                Some(n) => n,
                None => return Theta::Infinite,
            },
        };
        let letters: Vec<u8> = match (a, b) {
            (Point::Vertex(x), _) => x.letters()[..meet_len].to_vec(),
            (_, Point::Vertex(y)) => y.letters()[..meet_len].to_vec(),
            (Point::Boundary(w), _) => w.word().take(meet_len),
        };
        Theta::Finite(self.path_length_from(Kind::Root, &letters) * 2)
    }

    /// Vertices with simplicial depth at most `depth`, in address order.
    pub fn vertices_to_depth(&self, depth: usize) -> Vec<VertexAddress> {
        let mut out = vec![VertexAddress::root()];
        let mut frontier = vec![VertexAddress::root()];
        for _ in 0..depth {
            frontier = frontier.iter().flat_map(|v| self.children(v)).collect();
            out.extend(frontier.iter().cloned());
        }
        out.sort();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FamilyJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: FamilyJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

/// Wire format of a family:
/// `{"root_degree":3,"child_degree":2,"lengths":{"default":1}}`, optionally
/// with `"lengths":{"classes":[..]}` plus `root_classes` / `child_classes`.
#[derive(Serialize, Deserialize)]
struct FamilyJson {
    root_degree: usize,
    child_degree: usize,
    lengths: LengthsJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root_classes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    child_classes: Option<Vec<Vec<usize>>>,
}

#[derive(Serialize, Deserialize)]
struct LengthsJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<Value>>,
}

pub(crate) fn length_to_json(l: &Length) -> Value {
    if l.is_integer() {
        Value::from(*l.numer())
    } else {
        Value::from(l.to_string())
    }
}

pub(crate) fn length_from_json(v: &Value) -> Result<Length> {
    let bad = || Error::InvalidFamily(format!("cannot read length {v}"));
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Length::from_integer(i))
            } else {
                let f = n.as_f64().ok_or_else(bad)?;
                Length::approximate_float(f).ok_or_else(bad)
            }
        }
        Value::String(s) => parse_length(s).ok_or_else(bad),
        _ => Err(bad()),
    }
}

/// Parses `"3"` or `"3/2"`.
pub fn parse_length(s: &str) -> Option<Length> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Length::new(n.trim().parse().ok()?, d))
        }
        None => s.parse::<i64>().ok().map(Length::from_integer),
    }
}

impl From<&TreeFamily> for FamilyJson {
    fn from(f: &TreeFamily) -> Self {
        if f.class_count() == 1 {
            FamilyJson {
                root_degree: f.root_degree,
                child_degree: f.child_degree,
                lengths: LengthsJson { default: Some(length_to_json(&f.class_lengths[0])), classes: None },
                root_classes: None,
                child_classes: None,
            }
        } else {
            FamilyJson {
                root_degree: f.root_degree,
                child_degree: f.child_degree,
                lengths: LengthsJson {
                    default: None,
                    classes: Some(f.class_lengths.iter().map(length_to_json).collect()),
                },
                root_classes: Some(f.root_classes.clone()),
                child_classes: Some(f.child_classes.clone()),
            }
        }
    }
}

impl TryFrom<FamilyJson> for TreeFamily {
    type Error = Error;

    fn try_from(raw: FamilyJson) -> Result<Self> {
        match raw.lengths.classes {
            Some(classes) => {
                let lengths = classes.iter().map(length_from_json).collect::<Result<Vec<_>>>()?;
                let n = lengths.len();
                let root = raw.root_classes.unwrap_or_else(|| vec![0; raw.root_degree]);
                let child = raw
                    .child_classes
                    .unwrap_or_else(|| vec![vec![0; raw.child_degree]; n]);
                TreeFamily::new(raw.root_degree, raw.child_degree, lengths, root, child)
            }
            None => {
                let len = match &raw.lengths.default {
                    Some(v) => length_from_json(v)?,
                    None => Length::from_integer(1),
                };
                TreeFamily::regular(raw.root_degree, raw.child_degree, len)
            }
        }
    }
}
