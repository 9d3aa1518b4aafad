//! Pointwise surface geometry: embedding, fundamental tensors, Gaussian and
//! mean curvature, principal and normal curvatures, plus an independent
//! finite-difference oracle over the embedding.
//!
//! Closed forms, with w = √(v² + δ²):
//!
//! ```text
//! g11 = v² + δ²(λ²+1)    g12 = δλ    g22 = 1
//! h11 = -[k v² + δ'v + δ²(k-λ)]/w    h12 = δ/w    h22 = 0
//! K = -δ²/w⁴    H = -[k v² + δ'v + δ²(k+λ)]/(2w³)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{integrate_striction_frame, FrameError, StrictionCurve};
use crate::profile::{InvariantProfile, ProfileError};
use crate::vec3::Vec3;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("v = {v} outside v-range [{lo}, {hi}]")]
    VRange { v: f64, lo: f64, hi: f64 },
    #[error("degenerate tangent direction (du = dv = 0)")]
    DegenerateDirection,
    #[error("not an Edlinger surface at u = {u}: {detail}")]
    NotEdlinger { u: f64, detail: String },
    #[error("oracle step {step} too large for domain margin")]
    StepTooLarge { step: f64 },
}

/// Symmetric 2×2 tensor in the (u, v) coordinate basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    /// Bilinear form a(p, q).
    pub fn apply(&self, p: DirectionUV, q: DirectionUV) -> f64 {
        self.a11 * p.du * q.du + self.a12 * (p.du * q.dv + p.dv * q.du) + self.a22 * p.dv * q.dv
    }
}

///// Tangent direction du:dv, normalized to du² + dv² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionUV {
    pub du: f64,
    pub dv: f64,
}

impl DirectionUV {
    pub fn new(du: f64, dv: f64) -> Result<Self, GeometryError> {
        let norm = (du * du + dv * dv).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(GeometryError::DegenerateDirection);
        }
        Ok(DirectionUV { du: du / norm, dv: dv / norm })
    }

    /// Along the ruling.
    pub fn ruling() -> Self {
        DirectionUV { du: 0.0, dv: 1.0 }
    }

    /// Deterministic sign: du ≥ 0, and dv > 0 when du = 0.
    pub fn canonical_sign(self) -> Self {
        if self.du < 0.0 || (self.du == 0.0 && self.dv < 0.0) {
            DirectionUV { du: -self.du, dv: -self.dv }
        } else {
            self
        }
    }
}

/// All pointwise curvature data at (u, v).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PointGeometry {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub g: Sym2,
    pub h: Sym2,
    pub gauss: f64,
    pub mean: f64,
    /// Principal curvatures ordered k1 ≥ k2.
    pub k1: f64,
    pub k2: f64,
}

/// Evaluable ruled surface: invariants plus integrated striction data.
#[derive(Debug, Clone)]
pub struct RuledSurface {
    profile: InvariantProfile,
    striction: StrictionCurve,
    v_range: (f64, f64),
}

impl RuledSurface {
    pub fn new(profile: InvariantProfile, striction: StrictionCurve, v_range: (f64, f64)) -> Self {
        RuledSurface { profile, striction, v_range }
    }

    /// Integrates the striction curve over the full profile domain.
    pub fn from_profile(
        profile: InvariantProfile,
        h: f64,
        v_range: (f64, f64),
    ) -> Result<Self, GeometryError> {
        let (u0, u1) = profile.domain();
        let striction = integrate_striction_frame(&profile, u0, u1, h)?;
        Ok(RuledSurface { profile, striction, v_range })
    }

    pub fn profile(&self) -> &InvariantProfile {
        &self.profile
    }

    pub fn striction(&self) -> &StrictionCurve {
        &self.striction
    }

    pub fn v_range(&self) -> (f64, f64) {
        self.v_range
    }

    /// Striction point and generator direction at u, interpolated between the
    /// ODE samples by quintic Hermite so the embedding is C² in u.
    pub fn ruling_at(&self, u: f64) -> Result<(Vec3, Vec3), GeometryError> {
        let samples = self.striction.samples();
        if samples.len() == 1 {
            let s0 = &samples[0];
            return Ok((s0.s, s0.frame.e));
        }
        let (i, x) = self.striction.locate(u);
        let h = self.striction.step();
        let (a, b) = (&samples[i], &samples[i + 1]);

        // nodal derivatives from the frame ODE and the invariants
        let node = |smp: &crate::frame::StrictionSample| -> Result<_, GeometryError> {
            let uu = smp.u;
            let k = self.profile.k(uu)?;
            let d = self.profile.delta(uu)?;
            let l = self.profile.lambda(uu)?;
            let dp = self.profile.delta_prime(uu)?;
            let lp = self.profile.lambda_prime(uu)?;
            let f = &smp.frame;
            let s1 = f.e * (d * l) + f.z * d;
            let dl_prime = dp * l + d * lp;
            let s2 = f.e * dl_prime + f.n * (d * l - d * k) + f.z * dp;
            let e1 = f.n;
            let e2 = -f.e + f.z * k;
            Ok((smp.s, s1, s2, f.e, e1, e2))
        };
        let (sa, sa1, sa2, ea, ea1, ea2) = node(a)?;
        let (sb, sb1, sb2, eb, eb1, eb2) = node(b)?;
        let s = quintic_hermite(x, h, sa, sa1, sa2, sb, sb1, sb2);
        let e = quintic_hermite(x, h, ea, ea1, ea2, eb, eb1, eb2);
        Ok((s, e))
    }

    /// x(u, v) = s(u) + v e(u).
    pub fn position(&self, u: f64, v: f64) -> Result<Vec3, GeometryError> {
        let (lo, hi) = self.v_range;
        let eps = 1e-9 * (hi - lo).max(1.0);
        if v < lo - eps || v > hi + eps {
            return Err(GeometryError::VRange { v, lo, hi });
        }
        let (s, e) = self.ruling_at(u)?;
        Ok(s + e * v)
    }
}

// Quintic Hermite on a segment of length h; x in [0, 1], derivatives given
// with respect to u.
fn quintic_hermite(
    x: f64,
    h: f64,
    f0: Vec3,
    d0: Vec3,
    c0: Vec3,
    f1: Vec3,
    d1: Vec3,
    c1: Vec3,
) -> Vec3 {
    let d0 = d0 * h;
    let d1 = d1 * h;
    let c0 = c0 * (h * h);
    let c1 = c1 * (h * h);
    let a0 = f0;
    let a1 = d0;
    let a2 = c0 * 0.5;
    let r0 = f1 - f0 - d0 - c0 * 0.5;
    let r1 = d1 - d0 - c0;
    let r2 = c1 - c0;
    let a3 = r0 * 10.0 - r1 * 4.0 + r2 * 0.5;
    let a4 = r0 * -15.0 + r1 * 7.0 - r2;
    let a5 = r0 * 6.0 - r1 * 3.0 + r2 * 0.5;
    ((((a5 * x + a4) * x + a3) * x + a2) * x + a1) * x + a0
}

/// First and second fundamental tensors and w at (u, v), from the closed
/// forms in the invariants.
pub fn fundamental_tensors(
    profile: &InvariantProfile,
    u: f64,
    v: f64,
) -> Result<(Sym2, Sym2, f64), GeometryError> {
    let k = profile.k(u)?;
    let d = profile.delta(u)?;
    let l = profile.lambda(u)?;
    let dp = profile.delta_prime(u)?;
    let w = (v * v + d * d).sqrt();
    let g = Sym2 {
        a11: v * v + d * d * (l * l + 1.0),
        a12: d * l,
        a22: 1.0,
    };
    let h = Sym2 {
        a11: -(k * v * v + dp * v + d * d * (k - l)) / w,
        a12: d / w,
        a22: 0.0,
    };
    Ok((g, h, w))
}

/// K, H and the principal curvatures at (u, v). k1 ≥ k2; K < 0 guarantees a
/// positive discriminant, so no umbilic handling is needed.
pub fn curvature_scalars(
    profile: &InvariantProfile,
    u: f64,
    v: f64,
) -> Result<PointGeometry, GeometryError> {
    let (g, h, w) = fundamental_tensors(profile, u, v)?;
    let k = profile.k(u)?;
    let d = profile.delta(u)?;
    let l = profile.lambda(u)?;
    let dp = profile.delta_prime(u)?;
    let gauss = -(d * d) / (w * w * w * w);
    let mean = -(k * v * v + dp * v + d * d * (k + l)) / (2.0 * w * w * w);
    let disc = (mean * mean - gauss).sqrt();
    Ok(PointGeometry {
        u,
        v,
        w,
        g,
        h,
        gauss,
        mean,
        k1: mean + disc,
        k2: mean - disc,
    })
}

/// Principal curvatures of an Edlinger surface in the classical index order:
/// k1 = -k/w (striction-distance branch), k2 = δ²/(k w³).
pub fn edlinger_principal_curvatures(
    profile: &InvariantProfile,
    u: f64,
    v: f64,
) -> Result<(f64, f64), GeometryError> {
    let k = profile.k(u)?;
    let l = profile.lambda(u)?;
    let dp = profile.delta_prime(u)?;
    if dp.abs() > 1e-9 || (k * l + 1.0).abs() > 1e-9 {
        return Err(GeometryError::NotEdlinger {
            u,
            detail: format!("δ' = {dp}, kλ+1 = {}", k * l + 1.0),
        });
    }
    if k == 0.0 {
        return Err(GeometryError::NotEdlinger {
            u,
            detail: "k vanishes".into(),
        });
    }
    let d = profile.delta(u)?;
    let w = (v * v + d * d).sqrt();
    Ok((-k / w, d * d / (k * w * w * w)))
}

/// Normal curvature in direction du:dv.
pub fn normal_curvature(
    profile: &InvariantProfile,
    u: f64,
    v: f64,
    dir: DirectionUV,
) -> Result<f64, GeometryError> {
    let k = profile.k(u)?;
    let d = profile.delta(u)?;
    let l = profile.lambda(u)?;
    let dp = profile.delta_prime(u)?;
    let w = (v * v + d * d).sqrt();
    let (du, dv) = (dir.du, dir.dv);
    let numer = -(k * v * v + dp * v + d * d * (k - l)) * du * du + 2.0 * d * du * dv;
    let denom = (v * v + d * d * (l * l + 1.0)) * du * du + 2.0 * d * l * du * dv + dv * dv;
    Ok(numer / (w * denom))
}

/// Independent verification oracle: all tensors from central differences on
/// the embedding. h22 is set to 0 exactly (rulings are straight lines).
pub fn fd_geometry_oracle(
    surface: &RuledSurface,
    u: f64,
    v: f64,
    step: f64,
) -> Result<PointGeometry, GeometryError> {
    let (lo, hi) = surface.profile().domain();
    if u - 2.0 * step < lo || u + 2.0 * step > hi {
        return Err(GeometryError::StepTooLarge { step });
    }
    let x = |uu: f64, vv: f64| surface.position(uu, vv);
    let h = step;
    let x_u = (x(u + h, v)? - x(u - h, v)?) / (2.0 * h);
    let x_v = (x(u, v + h)? - x(u, v - h)?) / (2.0 * h);
    let x_uu = (x(u + h, v)? - x(u, v)? * 2.0 + x(u - h, v)?) / (h * h);
    let x_uv =
        (x(u + h, v + h)? - x(u + h, v - h)? - x(u - h, v + h)? + x(u - h, v - h)?) / (4.0 * h * h);
    let normal = x_u.cross(x_v).normalized();
    let g = Sym2 {
        a11: x_u.dot(x_u),
        a12: x_u.dot(x_v),
        a22: x_v.dot(x_v),
    };
    let hh = Sym2 {
        a11: x_uu.dot(normal),
        a12: x_uv.dot(normal),
        a22: 0.0,
    };
    let det_g = g.det();
    let gauss = hh.det() / det_g;
    let mean = (g.a22 * hh.a11 - 2.0 * g.a12 * hh.a12 + g.a11 * hh.a22) / (2.0 * det_g);
    let disc = (mean * mean - gauss).max(0.0).sqrt();
    Ok(PointGeometry {
        u,
        v,
        w: det_g.sqrt(),
        g,
        h: hh,
        gauss,
        mean,
        k1: mean + disc,
        k2: mean - disc,
    })
}

/// Row-major vertex grid with quad faces; row i is the ruling at u_i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mesh {
    pub nu: usize,
    pub nv: usize,
    pub vertices: Vec<Vec3>,
    pub quads: Vec<[usize; 4]>,
}

pub fn sample_mesh(surface: &RuledSurface, nu: usize, nv: usize) -> Result<Mesh, GeometryError> {
    assert!(nu >= 2 && nv >= 2);
    let (u0, u1) = surface.profile().domain();
    let (v0, v1) = surface.v_range();
    let mut vertices = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = u0 + (u1 - u0) * i as f64 / (nu - 1) as f64;
        let (s, e) = surface.ruling_at(u)?;
        for j in 0..nv {
            let v = v0 + (v1 - v0) * j as f64 / (nv - 1) as f64;
            vertices.push(s + e * v);
        }
    }
    let mut quads = Vec::with_capacity((nu - 1) * (nv - 1));
    for i in 0..nu - 1 {
        for j in 0..nv - 1 {
            quads.push([
                i * nv + j,
                (i + 1) * nv + j,
                (i + 1) * nv + j + 1,
                i * nv + j + 1,
            ]);
        }
    }
    Ok(Mesh { nu, nv, vertices, quads })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::make_builtin_profile;
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

    fn builtin(name: &str, params: &[(&str, f64)], domain: (f64, f64)) -> InvariantProfile {
        let map: BTreeMap<String, f64> =
            params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        make_builtin_profile(name, &map, domain).unwrap()
    }

    fn helicoid() -> InvariantProfile {
        builtin("helicoid", &[("delta0", 1.0)], (0.0, 2.0 * PI))
    }

    fn edlinger() -> InvariantProfile {
        builtin("edlinger", &[("k0", -1.0), ("delta0", 1.0)], (0.0, 2.0 * PI))
    }

    #[test]
    fn position_at_v_zero_is_striction_line() {
        let surf = RuledSurface::from_profile(helicoid(), 1e-3, (-2.0, 2.0)).unwrap();
        let p = surf.position(1.234, 0.0).unwrap();
        let samples = surf.striction().samples();
        let near = samples
            .iter()
            .min_by(|a, b| {
                (a.u - 1.234).abs().partial_cmp(&(b.u - 1.234).abs()).unwrap()
            })
            .unwrap();
        assert!((p - near.s).norm() < 2e-3);
    }

    #[test]
    fn position_honors_initial_frame() {
        let surf = RuledSurface::from_profile(helicoid(), 1e-3, (-2.0, 2.0)).unwrap();
        let p = surf.position(0.0, 2.0).unwrap();
        assert!((p - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rulings_are_straight() {
        let surf = RuledSurface::from_profile(edlinger(), 1e-3, (-3.0, 3.0)).unwrap();
        let u = 2.5;
        let p0 = surf.position(u, 0.0).unwrap();
        let p1 = surf.position(u, 1.0).unwrap();
        let p2 = surf.position(u, 2.0).unwrap();
        assert!(((p2 - p1) - (p1 - p0)).norm() < 1e-12);
    }

    #[test]
    fn helicoid_tensors_at_striction() {
        let (g, h, w) = fundamental_tensors(&helicoid(), 1.0, 0.0).unwrap();
        assert_eq!(w, 1.0);
        assert_eq!((g.a11, g.a12, g.a22), (1.0, 0.0, 1.0));
        assert_eq!((h.a11, h.a12, h.a22), (0.0, 1.0, 0.0));
    }

    #[test]
    fn edlinger_tensors_at_v_one() {
        let (g, h, w) = fundamental_tensors(&edlinger(), 1.0, 1.0).unwrap();
        let rt2 = 2.0_f64.sqrt();
        assert!((w - rt2).abs() < 1e-15);
        assert_eq!((g.a11, g.a12, g.a22), (3.0, 1.0, 1.0));
        assert!((h.a11 - 3.0 / rt2).abs() < 1e-15);
        assert!((h.a12 - 1.0 / rt2).abs() < 1e-15);
        assert_eq!(h.a22, 0.0);
    }

    #[test]
    fn structural_zeros_hold_for_generic_profile() {
        let p = InvariantProfile::new(
            crate::profile::ScalarProfile::constant(0.3),
            crate::profile::ScalarProfile::parse("1 + 0.1*sin(u)").unwrap(),
            crate::profile::ScalarProfile::constant(0.2),
            (0.0, 6.0),
        )
        .unwrap();
        for (u, v) in [(0.5, -1.0), (3.0, 0.7), (5.5, 2.0)] {
            let (g, h, _) = fundamental_tensors(&p, u, v).unwrap();
            assert_eq!(h.a22, 0.0);
            assert_eq!(g.a22, 1.0);
        }
    }

    #[test]
    fn helicoid_curvatures() {
        let pg = curvature_scalars(&helicoid(), 1.0, 1.0).unwrap();
        assert!((pg.gauss + 0.25).abs() < 1e-15);
        assert!(pg.mean.abs() < 1e-15);
        assert!((pg.k1 - 0.5).abs() < 1e-15);
        assert!((pg.k2 + 0.5).abs() < 1e-15);
    }

    #[test]
    fn edlinger_curvatures_match_closed_pair() {
        let p = edlinger();
        let pg = curvature_scalars(&p, 1.0, 0.0).unwrap();
        assert!((pg.gauss + 1.0).abs() < 1e-15);
        assert!(pg.mean.abs() < 1e-15);
        assert!((pg.k1 - 1.0).abs() < 1e-14 && (pg.k2 + 1.0).abs() < 1e-14);

        let pg = curvature_scalars(&p, 1.0, 1.0).unwrap();
        let rt2 = 2.0_f64.sqrt();
        assert!((pg.k1 - 1.0 / rt2).abs() < 1e-14);
        assert!((pg.k2 + 1.0 / (2.0 * rt2)).abs() < 1e-14);
        assert!((pg.mean - 1.0 / (4.0 * rt2)).abs() < 1e-14);

        let (k1, k2) = edlinger_principal_curvatures(&p, 1.0, 1.0).unwrap();
        assert!((k1 - 1.0 / rt2).abs() < 1e-14);
        assert!((k2 + 1.0 / (2.0 * rt2)).abs() < 1e-14);
    }

    #[test]
    fn edlinger_pair_rejected_for_helicoid() {
        assert!(matches!(
            edlinger_principal_curvatures(&helicoid(), 1.0, 0.5),
            Err(GeometryError::NotEdlinger { .. })
        ));
    }

    #[test]
    fn ruling_direction_is_asymptotic() {
        for p in [helicoid(), edlinger()] {
            for (u, v) in [(0.3, -1.5), (2.0, 0.0), (5.0, 1.2)] {
                let kn = normal_curvature(&p, u, v, DirectionUV::ruling()).unwrap();
                assert_eq!(kn, 0.0);
            }
        }
    }

    #[test]
    fn normal_curvature_examples() {
        let kn = normal_curvature(&helicoid(), 0.5, 0.0, DirectionUV::new(1.0, 1.0).unwrap())
            .unwrap();
        assert!((kn - 1.0).abs() < 1e-14);
        let kn = normal_curvature(&edlinger(), 0.5, 1.0, DirectionUV::new(1.0, 0.0).unwrap())
            .unwrap();
        assert!((kn - 1.0 / 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn normal_curvature_invariant_under_direction_scaling() {
        let p = edlinger();
        let a = normal_curvature(&p, 1.0, 0.7, DirectionUV::new(2.0, -3.0).unwrap()).unwrap();
        let b = normal_curvature(&p, 1.0, 0.7, DirectionUV::new(-4.0, 6.0).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn oracle_matches_closed_forms() {
        let surf = RuledSurface::from_profile(edlinger(), 1e-3, (-2.0, 2.0)).unwrap();
        let pg = curvature_scalars(surf.profile(), 1.0, 1.0).unwrap();
        let fd = fd_geometry_oracle(&surf, 1.0, 1.0, 1e-4).unwrap();
        assert!((fd.gauss - pg.gauss).abs() < 1e-5 * pg.gauss.abs());
        assert!((fd.mean - pg.mean).abs() < 1e-5 * pg.mean.abs().max(0.1));
        assert!((fd.mean - 0.17678).abs() < 1e-5);
    }

    #[test]
    fn oracle_second_v_derivative_vanishes() {
        let surf = RuledSurface::from_profile(helicoid(), 1e-3, (-2.0, 2.0)).unwrap();
        let (u, v, h) = (1.0, 0.5, 1e-4);
        let x_vv = (surf.position(u, v + h).unwrap() - surf.position(u, v).unwrap() * 2.0
            + surf.position(u, v - h).unwrap())
            / (h * h);
        assert!(x_vv.norm() < 1e-6);
    }

    #[test]
    fn mesh_counting_and_collinearity() {
        let surf = RuledSurface::from_profile(helicoid(), 1e-2, (0.0, 2.0)).unwrap();
        let mesh = sample_mesh(&surf, 2, 2).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.quads.len(), 1);

        let mesh = sample_mesh(&surf, 8, 5).unwrap();
        for i in 0..8 {
            let p0 = mesh.vertices[i * 5];
            let p1 = mesh.vertices[i * 5 + 1];
            let dir = p1 - p0;
            for j in 2..5 {
                let q = mesh.vertices[i * 5 + j];
                let expect = p0 + dir * j as f64;
                assert!((q - expect).norm() < 1e-12);
            }
            // v-range starts at 0: first vertex of each ruling on the striction line
            let (s, _) = surf.ruling_at(2.0 * PI * i as f64 / 7.0).unwrap();
            assert!((p0 - s).norm() < 1e-12);
        }
    }

    #[test]
    fn gauss_scaling_with_drall() {
        let p1 = builtin("helicoid", &[("delta0", 1.0)], (0.0, 1.0));
        let p2 = builtin("helicoid", &[("delta0", 2.0)], (0.0, 1.0));
        let k1 = curvature_scalars(&p1, 0.5, 0.0).unwrap().gauss;
        let k2 = curvature_scalars(&p2, 0.5, 0.0).unwrap().gauss;
        assert!((k2 - k1 / 4.0).abs() < 1e-15);
    }
}
