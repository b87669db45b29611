//! Convex analysis in pseudo-Euclidean spaces.
//!
//! The crate works with a symmetric invertible bilinear form `S` on `R^d`
//! (a [`ScalarProduct`]) and finite `S`-monotone point sets. From a set `G`
//! it builds the Fitzpatrick function `psi_G(x) = max_{y in G} S(x,y) - S(y,y)/2`
//! as a polyhedral convex function, the projection `P_G` onto `G` in the
//! sense of the scalar square, and the singular points where `P_G` is
//! multi-valued. The [`covering`] module constructs difference-of-convex
//! ("c-c") surfaces `x^j + g1(x^{-j}) - g2(x^{-j}) = 0` whose union contains
//! those singular points, and checks the claim numerically.
//!
//! Coordinate indices `j` are zero-based throughout the library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod covering;
pub mod error;
pub mod lp;
pub mod monotone;
pub mod polyconvex;
pub mod pseudo_space;
pub mod singularity;
mod vecops;

pub use covering::{
    mean_value_witness, MeanValueWitness, SurfaceOrigin,
    cover_sigma0, cover_sigma0_lines, cover_sigma1, cover_sigma_j_a, eval_surface,
    rescale_theta, surface_gradient_check, theorem1_build, verify_coverage, CcSurface,
    ClusterOptions, Cover, CoverReport, GradientCheck, IsotropicHyperplane, PointFilter,
};
pub use error::{Error, Result};
pub use monotone::{
    check_monotone, graph_from_lipschitz, random_monotone, random_monotone_with_chain,
    MonotoneSet, ProjectionResult,
};
pub use polyconvex::{hull_membership, ActiveSet, PolyConvexFn};
pub use pseudo_space::{InertiaDecomposition, PairClass, ScalarProduct};
pub use singularity::{
    candidate_singular_points, classify_point, classify_point_with, reverify, sigma_j_a, Order, SingularPoint, Witness,
};

/// Default absolute activity tolerance for polyhedral active sets.
pub const ACTIVITY_TOL: f64 = 1e-9;
/// Default isotropy tolerance, scaled by `max(1, |y - z|^2)`.
pub const ISOTROPY_TOL: f64 = 1e-9;
/// Coordinates closer than this count as equal when forming `j`-index sets.
pub const COORD_EPS: f64 = 1e-12;
