//! Computable hierarchomorphism groups of locally finite metric trees, the
//! Hilbert spaces spanned by vectors `e_a` with `⟨e_a, e_b⟩ = λ^{ρ(a,b)}`, and
//! the spaces of boundary charges embedded into them.

pub mod error;
pub mod hier;
pub mod hilbert;
pub mod measure;
pub mod tree;

pub use error::{Error, Result};
