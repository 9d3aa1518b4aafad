//! Companion-frame kinematics: frame ODE integration, striction line, and
//! reduction of a raw ruled parametrization to standard form.
//!
//! The frame {e, n, z} obeys e' = n, n' = -e + k z, z' = -k n, and the
//! striction line obeys s' = δλ e + δ z (⟨s',n⟩ = 0 from the striction
//! property, ⟨s',z⟩ = δ, ⟨s',e⟩ = δλ from λ = cot σ). Integration is
//! classical RK4 with Gram-Schmidt renormalization after every step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::{InvariantProfile, ProfileError, ScalarProfile};
use crate::vec3::{det3, Vec3};

#[derive(Debug, Error)]
pub enum FrameError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("integration step [{u}, {u_next}] leaves domain [{lo}, {hi}]")]
    StepOutOfDomain { u: f64, u_next: f64, lo: f64, hi: f64 },
    #[error("torsal point: |δ| = {delta_abs} below 1e-8 of the drall scale near u = {u}")]
    TorsalPoint { u: f64, delta_abs: f64 },
    #[error("degenerate spherical image: |de/du| = {speed} < 1e-10 at u = {u}")]
    DegenerateSphericalImage { u: f64, speed: f64 },
    #[error("invariant violation at u = {u}: {detail}")]
    InvariantViolation { u: f64, detail: String },
}

/// Orthonormal companion frame at parameter u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameState {
    pub u: f64,
    pub e: Vec3,
    pub n: Vec3,
    pub z: Vec3,
}

impl FrameState {
    /// Canonical initial frame: the standard basis.
    pub fn canonical(u: f64) -> Self {
        FrameState {
            u,
            e: Vec3::new(1.0, 0.0, 0.0),
            n: Vec3::new(0.0, 1.0, 0.0),
            z: Vec3::new(0.0, 0.0, 1.0),
        }
    }

    /// Max deviation of the pairwise products from the identity Gram matrix.
    pub fn orthonormality_error(&self) -> f64 {
        let vs = [self.e, self.n, self.z];
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((vs[i].dot(vs[j]) - target).abs());
            }
        }
        worst
    }

    /// ⟨e × n, z⟩; 1 for a right-handed orthonormal frame.
    pub fn handedness(&self) -> f64 {
        det3(self.e, self.n, self.z)
    }

    /// Gram-Schmidt: e first, then n, then z = e × n.
    pub fn renormalized(&self) -> FrameState {
        let e = self.e.normalized();
        let n = (self.n - e * self.n.dot(e)).normalized();
        let z = e.cross(n);
        FrameState { u: self.u, e, n, z }
    }
}

/// One RK4 step of the frame ODE without renormalization. Exposed so the
/// per-step drift can be measured independently.
pub fn rk4_frame_step(
    state: &FrameState,
    profile: &InvariantProfile,
    h: f64,
) -> Result<FrameState, FrameError> {
    let full = rk4_full_step(state, Vec3::ZERO, profile, h, false)?;
    Ok(full.0)
}

/// RK4 step of the frame ODE followed by Gram-Schmidt, restoring the
/// orthonormality and handedness invariants exactly.
pub fn advance_frame(
    state: &FrameState,
    profile: &InvariantProfile,
    h: f64,
) -> Result<FrameState, FrameError> {
    if h == 0.0 {
        return Ok(*state);
    }
    check_step_in_domain(state.u, state.u + h, profile)?;
    Ok(rk4_frame_step(state, profile, h)?.renormalized())
}

fn check_step_in_domain(u: f64, u_next: f64, profile: &InvariantProfile) -> Result<(), FrameError> {
    let (lo, hi) = profile.domain();
    let eps = 1e-9 * (hi - lo).max(1.0);
    let (a, b) = if u <= u_next { (u, u_next) } else { (u_next, u) };
    if a < lo - eps || b > hi + eps {
        return Err(FrameError::StepOutOfDomain { u, u_next, lo, hi });
    }
    Ok(())
}

// Combined RK4 step for (e, n, z, s). When `with_striction` is false the s
// part is carried but meaningless.
fn rk4_full_step(
    state: &FrameState,
    s: Vec3,
    profile: &InvariantProfile,
    h: f64,
    with_striction: bool,
) -> Result<(FrameState, Vec3), FrameError> {
    #[derive(Clone, Copy)]
    struct Y {
        e: Vec3,
        n: Vec3,
        z: Vec3,
        s: Vec3,
    }
    let deriv = |u: f64, y: &Y| -> Result<Y, FrameError> {
        let k = profile.k(u)?;
        let (ds, _) = if with_striction {
            let d = profile.delta(u)?;
            let l = profile.lambda(u)?;
            (y.e * (d * l) + y.z * d, ())
        } else {
            (Vec3::ZERO, ())
        };
        Ok(Y {
            e: y.n,
            n: -y.e + y.z * k,
            z: -y.n * k,
            s: ds,
        })
    };
    let add = |a: &Y, b: &Y, c: f64| Y {
        e: a.e + b.e * c,
        n: a.n + b.n * c,
        z: a.z + b.z * c,
        s: a.s + b.s * c,
    };
    let y0 = Y { e: state.e, n: state.n, z: state.z, s };
    let u = state.u;
    let k1 = deriv(u, &y0)?;
    let k2 = deriv(u + h / 2.0, &add(&y0, &k1, h / 2.0))?;
    let k3 = deriv(u + h / 2.0, &add(&y0, &k2, h / 2.0))?;
    let k4 = deriv(u + h, &add(&y0, &k3, h))?;
    let mut y = y0;
    for (ki, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
        y = add(&y, ki, w * h / 6.0);
    }
    Ok((
        FrameState { u: u + h, e: y.e, n: y.n, z: y.z },
        y.s,
    ))
}

/// Striction line sample with its frame.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StrictionSample {
    pub u: f64,
    pub s: Vec3,
    pub frame: FrameState,
}

/// Uniformly sampled striction line with frames.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrictionCurve {
    samples: Vec<StrictionSample>,
    step: f64,
}

impl StrictionCurve {
    pub fn samples(&self) -> &[StrictionSample] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn u_start(&self) -> f64 {
        self.samples[0].u
    }

    pub fn u_end(&self) -> f64 {
        self.samples[self.samples.len() - 1].u
    }

    /// Index of the segment containing u and the local coordinate in [0, 1].
    pub(crate) fn locate(&self, u: f64) -> (usize, f64) {
        let last = self.samples.len() - 1;
        if last == 0 {
            return (0, 0.0);
        }
        let x = (u - self.u_start()) / self.step;
        let i = (x.floor() as isize).clamp(0, last as isize - 1) as usize;
        (i, x - i as f64)
    }
}

/// Integrates frame and striction line from the canonical initial conditions
/// (standard-basis frame, s = origin at u0).
pub fn integrate_striction_frame(
    profile: &InvariantProfile,
    u0: f64,
    u1: f64,
    h: f64,
) -> Result<StrictionCurve, FrameError> {
    assert!(h > 0.0, "step must be positive");
    check_step_in_domain(u0, u1, profile)?;
    if u1 == u0 {
        return Ok(StrictionCurve {
            samples: vec![StrictionSample {
                u: u0,
                s: Vec3::ZERO,
                frame: FrameState::canonical(u0),
            }],
            step: h,
        });
    }
    let span = u1 - u0;
    let steps = ((span / h) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut frame = FrameState::canonical(u0);
    let mut s = Vec3::ZERO;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(StrictionSample { u: u0, s, frame });
    for i in 0..steps {
        let u = u0 + span * i as f64 / steps as f64;
        frame.u = u; // avoid accumulated roundoff in u
        let (next, s_next) = rk4_full_step(&frame, s, profile, h, true)?;
        frame = next.renormalized();
        s = s_next;
        if !s.is_finite() {
            return Err(FrameError::InvariantViolation {
                u: frame.u,
                detail: "striction integration produced non-finite values".into(),
            });
        }
        samples.push(StrictionSample { u: u0 + span * (i + 1) as f64 / steps as f64, s, frame });
    }
    Ok(StrictionCurve { samples, step: h })
}

/// A ruled surface before normalization: directrix c(u) and (not necessarily
/// unit) direction d(u), each given componentwise as scalar profiles.
#[derive(Debug, Clone)]
pub struct RawRuledMap {
    pub directrix: [ScalarProfile; 3],
    pub direction: [ScalarProfile; 3],
    pub domain: (f64, f64),
}

impl RawRuledMap {
    /// Table-backed raw map from an integrated striction curve, used for
    /// round-trip checks: c = s samples, d = e samples.
    pub fn from_striction_curve(curve: &StrictionCurve) -> Self {
        let u0 = curve.u_start();
        let step = curve.step();
        let comp = |f: &dyn Fn(&StrictionSample) -> f64| {
            ScalarProfile::table(u0, step, curve.samples().iter().map(f).collect())
        };
        RawRuledMap {
            directrix: [
                comp(&|s| s.s.x),
                comp(&|s| s.s.y),
                comp(&|s| s.s.z),
            ],
            direction: [
                comp(&|s| s.frame.e.x),
                comp(&|s| s.frame.e.y),
                comp(&|s| s.frame.e.z),
            ],
            domain: (u0, curve.u_end()),
        }
    }

    fn eval3(p: &[ScalarProfile; 3], u: f64, order: u8) -> Result<Vec3, ProfileError> {
        let f = |sp: &ScalarProfile| -> Result<f64, ProfileError> {
            if order == 0 {
                sp.eval(u)
            } else {
                sp.derivative(u, order)
            }
        };
        Ok(Vec3::new(f(&p[0])?, f(&p[1])?, f(&p[2])?))
    }
}

// Pointwise data of the normalized map at one u: unit direction with its u-
// derivatives, striction point with its u-derivative, and spherical speed.
struct PointData {
    e_hat: Vec3,
    e_hat_u: Vec3,
    e_hat_uu: Vec3,
    s: Vec3,
    s_u: Vec3,
    speed: f64,
}

fn point_data(raw: &RawRuledMap, u: f64) -> Result<PointData, FrameError> {
    let d = RawRuledMap::eval3(&raw.direction, u, 0)?;
    let d1 = RawRuledMap::eval3(&raw.direction, u, 1)?;
    let d2 = RawRuledMap::eval3(&raw.direction, u, 2)?;
    let c = RawRuledMap::eval3(&raw.directrix, u, 0)?;
    let c1 = RawRuledMap::eval3(&raw.directrix, u, 1)?;
    let c2 = RawRuledMap::eval3(&raw.directrix, u, 2)?;

    let m = d.norm();
    if m < 1e-12 {
        return Err(FrameError::InvariantViolation {
            u,
            detail: "direction vector vanishes".into(),
        });
    }
    let e_hat = d / m;
    let m1 = d.dot(d1) / m;
    let m2 = (d1.dot(d1) + d.dot(d2) - m1 * m1) / m;
    let e_hat_u = (d1 - e_hat * m1) / m;
    let e_hat_uu = (d2 - e_hat_u * (2.0 * m1) - e_hat * m2) / m;
    let speed = e_hat_u.norm();
    if speed < 1e-10 {
        return Err(FrameError::DegenerateSphericalImage { u, speed });
    }

    // striction point s = c - (⟨c', e_hat'⟩/⟨e_hat', e_hat'⟩) e_hat
    let q = e_hat_u.dot(e_hat_u);
    let rho = c1.dot(e_hat_u) / q;
    let rho_u = (c2.dot(e_hat_u) + c1.dot(e_hat_uu)) / q
        - rho * 2.0 * e_hat_u.dot(e_hat_uu) / q;
    let s = c - e_hat * rho;
    let s_u = c1 - e_hat * rho_u - e_hat_u * rho;
    Ok(PointData { e_hat, e_hat_u, e_hat_uu, s, s_u, speed })
}

/// Normalizes a raw ruled map to standard form: unit direction, spherical
/// arc-length parameter, striction directrix; returns the invariants as
/// uniformly resampled tables together with the striction curve.
///
/// `nu_out` is the number of output samples (at least 8).
pub fn extract_standard_form(
    raw: &RawRuledMap,
    nu_out: usize,
) -> Result<(InvariantProfile, StrictionCurve), FrameError> {
    assert!(nu_out >= 8);
    let (a, b) = raw.domain;

    // arc length t(u) of the spherical image, composite Simpson per interval
    // on a grid 4x finer than the output grid
    let fine_n = 4 * (nu_out - 1) + 1;
    let hu = (b - a) / (fine_n - 1) as f64;
    let mut speeds = Vec::with_capacity(fine_n);
    let mut us = Vec::with_capacity(fine_n);
    for i in 0..fine_n {
        let u = a + hu * i as f64;
        us.push(u);
        speeds.push(point_data(raw, u)?.speed);
    }
    let mut t_of_u = vec![0.0_f64; fine_n];
    for i in 0..fine_n - 1 {
        let mid = point_data(raw, us[i] + hu / 2.0)?.speed;
        t_of_u[i + 1] = t_of_u[i] + hu / 6.0 * (speeds[i] + 4.0 * mid + speeds[i + 1]);
    }
    let total = t_of_u[fine_n - 1];

    // invert t -> u on the uniform output t-grid; cubic Hermite in each fine
    // interval (t and t' = speed known at the endpoints), Newton refinement
    let invert = |t_target: f64| -> f64 {
        if t_target <= 0.0 {
            return a;
        }
        if t_target >= total {
            return b;
        }
        let j = match t_of_u.binary_search_by(|t| t.partial_cmp(&t_target).unwrap()) {
            Ok(j) => j.min(fine_n - 2),
            Err(j) => j - 1,
        };
        let (t0, t1) = (t_of_u[j], t_of_u[j + 1]);
        let (d0, d1) = (speeds[j] * hu, speeds[j + 1] * hu);
        // Hermite on x in [0,1]: t(x) = t0 + d0 x + (3Δ-2d0-d1)x² + (d0+d1-2Δ)x³
        let dt = t1 - t0;
        let c2 = 3.0 * dt - 2.0 * d0 - d1;
        let c3 = d0 + d1 - 2.0 * dt;
        let mut x = (t_target - t0) / dt;
        for _ in 0..30 {
            let f = t0 + x * (d0 + x * (c2 + x * c3)) - t_target;
            let fp = d0 + x * (2.0 * c2 + 3.0 * x * c3);
            if fp.abs() < 1e-300 {
                break;
            }
            let step = f / fp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        us[j] + x.clamp(0.0, 1.0) * hu
    };

    let ht = total / (nu_out - 1) as f64;
    let mut k_vals = Vec::with_capacity(nu_out);
    let mut d_vals = Vec::with_capacity(nu_out);
    let mut l_vals = Vec::with_capacity(nu_out);
    let mut samples = Vec::with_capacity(nu_out);
    for i in 0..nu_out {
        let t = ht * i as f64;
        let u = invert(t);
        let p = point_data(raw, u)?;
        let tp = p.speed;
        // chain rule: derivatives with respect to arc length t
        let k = det3(p.e_hat, p.e_hat_u, p.e_hat_uu) / (tp * tp * tp);
        let delta = det3(p.e_hat, p.e_hat_u, p.s_u) / (tp * tp);
        let e = p.e_hat;
        let n = p.e_hat_u / tp;
        let frame = FrameState { u: t, e, n, z: e.cross(n) };
        k_vals.push(k);
        d_vals.push(delta);
        l_vals.push(if delta != 0.0 { p.s_u.dot(e) / (tp * delta) } else { f64::NAN });
        samples.push(StrictionSample { u: t, s: p.s, frame });
    }

    let d_scale = d_vals.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    for (i, d) in d_vals.iter().enumerate() {
        if d.abs() <= 1e-8 * d_scale || !d.is_finite() {
            return Err(FrameError::TorsalPoint { u: samples[i].u, delta_abs: d.abs() });
        }
    }

    let profile = InvariantProfile::new(
        ScalarProfile::table(0.0, ht, k_vals),
        ScalarProfile::table(0.0, ht, d_vals),
        ScalarProfile::table(0.0, ht, l_vals),
        (0.0, total),
    )?;
    Ok((profile, StrictionCurve { samples, step: ht }))
}

/// Largest relative deviation of the extracted invariants from reference
/// closed-form profiles, sampled over the common domain interior.
pub fn roundtrip_error(
    extracted: &InvariantProfile,
    reference: &InvariantProfile,
    n_samples: usize,
) -> Result<f64, ProfileError> {
    let (lo, hi) = extracted.domain();
    let margin = (hi - lo) * 0.02;
    let (lo, hi) = (lo + margin, hi - margin);
    let mut worst: f64 = 0.0;
    for i in 0..n_samples {
        let u = lo + (hi - lo) * i as f64 / (n_samples - 1) as f64;
        for (ex, re) in [
            (extracted.k(u)?, reference.k(u)?),
            (extracted.delta(u)?, reference.delta(u)?),
            (extracted.lambda(u)?, reference.lambda(u)?),
        ] {
            worst = worst.max((ex - re).abs() / re.abs().max(1.0));
        }
    }
    Ok(worst)
}

/// Discretized striction property: the central-difference tangent of s is
/// orthogonal to the central normal, |⟨Δs/2h, n⟩| ≤ 10 h² · scale.
pub fn striction_orthogonality_error(curve: &StrictionCurve) -> f64 {
    let samples = curve.samples();
    let h = curve.step();
    let mut worst: f64 = 0.0;
    for i in 1..samples.len().saturating_sub(1) {
        let ds = (samples[i + 1].s - samples[i - 1].s) / (2.0 * h);
        worst = worst.max(ds.dot(samples[i].frame.n).abs() / ds.norm().max(1.0));
    }
    worst
}
