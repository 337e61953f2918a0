//! Charges on the absolute described on cuts, their norms in the space
//! completed under `⟨f_a, f_b⟩ = λ^{−θ(a,b)}`, and the action of
//! hierarchomorphisms on them.

mod action;
mod cylinder;
mod inner;
mod series;

pub use action::{boundary_deviation_matrix, boundary_deviation_rank, transform_measure};
pub use cylinder::{path_cut, random_charge, random_cut, CylinderMeasure};
pub use inner::{ball_kernel, ball_tail, bilinear_gram, cut_context, darboux_sum, inner_e, norm_gram, psi_vector};
pub use series::{
    estimate_sigma, level_terms, norm_limit, norm_lower_bound, norm_series, sigma_probe, uniform_norm_closed_form,
    z_terms, z_value, LevelSeries, SigmaEstimate, SigmaRow, SIGMA_DEFAULT_DEPTH,
};
