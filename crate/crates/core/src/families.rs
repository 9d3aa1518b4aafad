//! Distinguished curve families on a skew ruled surface and their normal
//! curvatures.
//!
//! The five families and their direction fields:
//! - S1: curves of constant striction distance, v = const, direction (1, 0)
//! - S2: orthogonal trajectories of S1, [v²+δ²(λ²+1)] du + δλ dv = 0
//! - S3: orthogonal trajectories of the generators, δλ du + dv = 0
//! - S4: curves of constant Gaussian curvature, δ'(δ²-v²) du + 2δv dv = 0
//! - principal curves: eigen directions of the shape operator

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    curvature_scalars, DirectionUV, GeometryError,
};
use crate::profile::{InvariantProfile, ProfileError};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("direction field of {family:?} degenerate at (u, v) = ({u}, {v})")]
    Degenerate { family: CurveFamily, u: f64, v: f64 },
    #[error("curve integration left the domain at u = {u}")]
    LeftDomain { u: f64 },
    #[error("ruling-directed field: du component below {min_du} at u = {u}")]
    RulingDirected { u: f64, min_du: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveFamily {
    /// Constant striction distance (v = const).
    S1,
    /// Orthogonal trajectories of S1.
    S2,
    /// Orthogonal trajectories of the generators.
    S3,
    /// Constant Gaussian curvature.
    S4,
    Principal1,
    Principal2,
}

/// Direction of a family field at a point, with a flag for the S4 → S1
/// degeneration (δ' = 0 makes the S4 condition vanish identically at v = 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldDirection {
    pub dir: DirectionUV,
    pub s1_fallback: bool,
}

impl FieldDirection {
    fn plain(dir: DirectionUV) -> Self {
        FieldDirection { dir, s1_fallback: false }
    }
}

/// Solves the family's linear condition a·du + b·dv = 0 for the direction,
/// normalized with du ≥ 0 (dv > 0 when du = 0).
pub fn direction_field(
    family: CurveFamily,
    profile: &InvariantProfile,
    u: f64,
    v: f64,
) -> Result<FieldDirection, FamilyError> {
    let from_condition = |a: f64, b: f64, scale: f64| -> Option<DirectionUV> {
        if a.abs().max(b.abs()) <= 1e-12 * scale.max(1.0) {
            None
        } else {
            Some(DirectionUV::new(b, -a).unwrap().canonical_sign())
        }
    };
    match family {
        CurveFamily::S1 => Ok(FieldDirection::plain(DirectionUV { du: 1.0, dv: 0.0 })),
        CurveFamily::S2 => {
            let d = profile.delta(u)?;
            let l = profile.lambda(u)?;
            let g11 = v * v + d * d * (l * l + 1.0);
            // g11 > 0 always, never degenerate
            Ok(FieldDirection::plain(
                from_condition(g11, d * l, g11).expect("g positive definite"),
            ))
        }
        CurveFamily::S3 => {
            let d = profile.delta(u)?;
            let l = profile.lambda(u)?;
            Ok(FieldDirection::plain(
                from_condition(d * l, 1.0, 1.0 + (d * l).abs()).expect("dv coefficient is 1"),
            ))
        }
        CurveFamily::S4 => {
            let d = profile.delta(u)?;
            let dp = profile.delta_prime(u)?;
            let a = dp * (d * d - v * v);
            let b = 2.0 * d * v;
            let scale = (d * d + v * v) * (1.0 + dp.abs());
            match from_condition(a, b, scale) {
                Some(dir) => Ok(FieldDirection::plain(dir)),
                // δ' = 0 at v = 0: the family degenerates onto S1
                None => Ok(FieldDirection {
                    dir: DirectionUV { du: 1.0, dv: 0.0 },
                    s1_fallback: true,
                }),
            }
        }
        CurveFamily::Principal1 | CurveFamily::Principal2 => {
            let pg = curvature_scalars(profile, u, v)?;
            let kappa = if family == CurveFamily::Principal1 { pg.k1 } else { pg.k2 };
            // (h - κ g) X = 0; use the row with the larger residual norm
            let r1 = (pg.h.a11 - kappa * pg.g.a11, pg.h.a12 - kappa * pg.g.a12);
            let r2 = (pg.h.a12 - kappa * pg.g.a12, pg.h.a22 - kappa * pg.g.a22);
            let n1 = (r1.0 * r1.0 + r1.1 * r1.1).sqrt();
            let n2 = (r2.0 * r2.0 + r2.1 * r2.1).sqrt();
            let (a, b) = if n1 >= n2 { r1 } else { r2 };
            match DirectionUV::new(b, -a) {
                Ok(dir) => Ok(FieldDirection::plain(dir.canonical_sign())),
                Err(_) => Err(FamilyError::Degenerate { family, u, v }),
            }
        }
    }
}

/// Specialized closed-form normal curvature along the family direction.
///
/// The S1 numerator carries -δ²(k-λ), consistent with the general du:dv
/// formula; the Edlinger cross-check (k_N = -k/w) pins the sign down.
pub fn family_normal_curvature(
    family: CurveFamily,
    profile: &InvariantProfile,
    u: f64,
    v: f64,
) -> Result<f64, FamilyError> {
    let k = profile.k(u)?;
    let d = profile.delta(u)?;
    let l = profile.lambda(u)?;
    let dp = profile.delta_prime(u)?;
    let w = (v * v + d * d).sqrt();
    let s1_value =
        -(k * v * v + dp * v + d * d * (k - l)) / (w * (v * v + d * d * (l * l + 1.0)));
    match family {
        CurveFamily::S1 => Ok(s1_value),
        CurveFamily::S2 => {
            let g11 = v * v + d * d * (l * l + 1.0);
            let numer = -d * d * l
                * ((k * l + 2.0) * v * v + dp * l * v + d * d * (l * l + k * l + 2.0));
            Ok(numer / (w * w * w * g11))
        }
        CurveFamily::S3 => Ok(-(k * v * v + dp * v + d * d * (k + l)) / (w * w * w)),
        CurveFamily::S4 => {
            let a = (4.0 * d * d + dp * dp) * v.powi(4)
                + 4.0 * d * d * dp * l * v.powi(3)
                + 2.0 * d * d * (2.0 * d * d * (l * l + 1.0) - dp * dp) * v * v
                - 4.0 * d.powi(4) * dp * l * v
                + d.powi(4) * dp * dp;
            let scale = (d * d + v * v).powi(2) * (1.0 + dp * dp);
            if a.abs() <= 1e-12 * scale {
                // degenerate onto S1 (δ' = 0, v = 0)
                return Ok(s1_value);
            }
            let numer = -4.0 * d * d * v
                * (k * v.powi(3) + d * d * (k - l) * v + d * d * dp);
            Ok(numer / (w * a))
        }
        CurveFamily::Principal1 => Ok(curvature_scalars(profile, u, v)?.k1),
        CurveFamily::Principal2 => Ok(curvature_scalars(profile, u, v)?.k2),
    }
}

/// Integrated family curve as ordered (u, v) samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyCurveSample {
    pub family: CurveFamily,
    pub points: Vec<(f64, f64)>,
}

/// RK4 integration of dv/du along the family field, starting at `start` and
/// spanning `span` in u. The field must stay bounded away from the ruling
/// direction (du-component ≥ 0.05 after normalization).
pub fn integrate_family_curve(
    family: CurveFamily,
    profile: &InvariantProfile,
    start: (f64, f64),
    span: f64,
    step: f64,
) -> Result<FamilyCurveSample, FamilyError> {
    assert!(step > 0.0 && span > 0.0);
    let (lo, hi) = profile.domain();
    let slope = |u: f64, v: f64| -> Result<f64, FamilyError> {
        let fd = direction_field(family, profile, u, v)?;
        if fd.dir.du.abs() < 0.05 {
            return Err(FamilyError::RulingDirected { u, min_du: 0.05 });
        }
        Ok(fd.dir.dv / fd.dir.du)
    };
    let steps = ((span / step) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let (mut u, mut v) = start;
    let mut points = Vec::with_capacity(steps + 1);
    points.push((u, v));
    for _ in 0..steps {
        if u + h > hi + 1e-9 || u < lo - 1e-9 {
            return Err(FamilyError::LeftDomain { u });
        }
        let k1 = slope(u, v)?;
        let k2 = slope(u + h / 2.0, v + h / 2.0 * k1)?;
        let k3 = slope(u + h / 2.0, v + h / 2.0 * k2)?;
        let k4 = slope(u + h, v + h * k3)?;
        v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        u += h;
        points.push((u, v));
    }
    Ok(FamilyCurveSample { family, points })
}

/// Residual of the family's defining linear condition along integrated
/// samples, measured via the discrete tangent.
pub fn curve_condition_residual(
    sample: &FamilyCurveSample,
    profile: &InvariantProfile,
) -> Result<f64, FamilyError> {
    let mut worst: f64 = 0.0;
    let pts = &sample.points;
    for i in 1..pts.len().saturating_sub(1) {
        let (u, v) = pts[i];
        let du = pts[i + 1].0 - pts[i - 1].0;
        let dv = pts[i + 1].1 - pts[i - 1].1;
        let tangent = DirectionUV::new(du, dv).unwrap();
        let fd = direction_field(sample.family, profile, u, v)?;
        // cross product of unit directions
        worst = worst.max((tangent.du * fd.dir.dv - tangent.dv * fd.dir.du).abs());
    }
    Ok(worst)
}
