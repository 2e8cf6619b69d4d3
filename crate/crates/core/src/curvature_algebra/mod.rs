//! Pointwise tensor algebra for second fundamental forms and the pinching
//! inequalities built from them.

mod inequalities;
mod reaction;
pub mod sampling;
mod sff;

pub use inequalities::{
    amc_lemma23_defect, chen_sectional_defect, codazzi_gradient_ratio, codazzi_sharpness_search,
    lemma23_simplification_limit, peter_paul_defect, sample_planes, sectional_curvature, Lemma23Defect, Plane,
    SymmetricTensor3,
};
pub use reaction::{
    euclidean_pinching_threshold, minimal_r1_bound_defect, pinching_reaction_defect, reaction_terms,
    sphere_reaction_defect, traceless_reaction_bound_defect, PinchingMonitorParams, ReactionTerms,
    SpherePinchingConstants,
};
pub use sff::{adapted_decompose, norms_and_traceless, AdaptedDecomposition, CurvatureNorms, SecondFundamentalForm};
