//! Rooted, lazily generated metric trees: addresses, distances, θ, rays to
//! the absolute and cuts (boundaries of complete subtrees).

mod address;
mod boundary;
mod cut;
mod family;

pub use address::{VertexAddress, MAX_DEGREE};
pub use boundary::{BoundaryPoint, EpWord};
pub use cut::Cut;
pub use family::{length_to_f64, parse_length, Kind, Length, Point, Theta, TreeFamily};

pub(crate) use address::{char_letter, letter_char};

