//! Finite sections of the space spanned by vectors `e_a` with
//! `⟨e_a, e_b⟩ = λ^{ρ(a,b)}`: Gram matrices, the affine embedding that
//! certifies positivity, subtree projections and the operators `U(g)`.

mod embedding;
mod gram;
mod ops;

pub use embedding::{affine_embedding, kernel_check, squared_distance, AffinePoint};
pub use gram::{build_gram, gram_f, matrix_to_csv, ContextDescriptor, GramContext};
pub use ops::{
    adapted_contexts, adapted_vertex_sets, check_subtree, cross_projection, deviation_form, nearest_vertex,
    numerical_rank, numerical_rank_scaled, project_onto_subtree, transport_matrix, u_matrix, DEFAULT_RANK_TOL,
};

pub(crate) use gram::check_lambda;
