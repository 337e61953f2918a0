//! Hierarchomorphisms in cut form: branch isometries with finite support,
//! group operations, the action on the absolute and the pseudoderivative.

mod element;
mod isometry;
mod json;
mod perm;
mod random;

pub use element::Hierarchomorphism;
pub use isometry::BranchIsometry;
pub use perm::Perm;
pub use random::{random_element, random_isometry, random_ray};


