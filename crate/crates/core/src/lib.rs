//! Skew ruled surfaces from their invariant system.
//!
//! A ruled surface x(u, v) = s(u) + v·e(u) in Euclidean 3-space is determined
//! up to rigid motion by three scalar invariants along its striction line:
//! the conical curvature k(u), the drall δ(u), and the striction σ(u)
//! (carried here as λ = cot σ). This crate
//!
//! * integrates the companion frame and striction line from the invariants
//!   ([`frame`]) and extracts the invariants back from an arbitrary
//!   parametrization ([`frame::extract_standard_form`]),
//! * evaluates fundamental tensors, Gaussian/mean/principal curvatures, and
//!   normal curvatures in arbitrary directions ([`geometry`]),
//! * evaluates the distinguished curve families S1–S4 and the curvature
//!   lines ([`families`]),
//! * detects normal-curvature power laws k_N = f(u)·wⁿ with w = √(v² + δ²)
//!   and classifies the surface (helicoid, Edlinger, orthoid, constant
//!   drall, conoid) ([`classify`]),
//! * reads surface specs from JSON and writes CSV/OBJ artifacts ([`spec_io`]).

pub mod classify;
pub mod expr;
pub mod families;
pub mod frame;
pub mod geometry;
pub mod profile;
pub mod spec_io;
pub mod vec3;

pub use classify::{
    check_corollary2, classify_by_invariants, fit_power_law, theorem_table_lookup,
    verify_surface, ClassificationReport, ClassifyError, CorollaryResult, GridSpec, PowerLawFit,
    SurfaceClass, FIT_TOL_ANALYTIC, FIT_TOL_EXTRACTED,
};
pub use expr::{Expr, ParseError};
pub use families::{
    direction_field, family_normal_curvature, integrate_family_curve, CurveFamily, FamilyError,
};
pub use frame::{
    advance_frame, extract_standard_form, integrate_striction_frame, FrameError, FrameState,
    RawRuledMap, StrictionCurve,
};
pub use geometry::{
    curvature_scalars, fundamental_tensors, normal_curvature, GeometryError, PointGeometry,
    RuledSurface,
};
pub use profile::{make_builtin_profile, InvariantProfile, ProfileError, ScalarProfile};
pub use vec3::Vec3;
