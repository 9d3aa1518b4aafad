//! Power-law detection k_N = f(u)·wⁿ and classification against the theorem
//! table for the distinguished curve families.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{family_normal_curvature, CurveFamily, FamilyError};
use crate::geometry::{curvature_scalars, GeometryError};
use crate::profile::{InvariantProfile, ProfileError};

/// Fit tolerance for closed-form (analytic) pipelines.
pub const FIT_TOL_ANALYTIC: f64 = 1e-8;
/// Fit tolerance for extraction-derived (finite-difference) pipelines.
pub const FIT_TOL_EXTRACTED: f64 = 1e-4;

const EXPONENT_RANGE: std::ops::RangeInclusive<i32> = -6..=3;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("grid too small: need at least 5×5, got {nu}×{nv}")]
    GridTooSmall { nu: usize, nv: usize },
    #[error("non-finite input in k_N or w grid at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("need at least 20 u-samples, got {0}")]
    TooFewSamples(usize),
    #[error("k vanishes on the sample grid (|k| = {k_abs} at u = {u}); the corollary relation is trivial")]
    KVanishes { u: f64, k_abs: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Detected power law k_N = f(u)·wⁿ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: i32,
    /// (u_i, f_i) with f_i the per-u median of k_N·w⁻ⁿ across v.
    pub f_samples: Vec<(f64, f64)>,
    /// Max relative deviation of k_N·w⁻ⁿ from its per-u median.
    pub residual: f64,
    pub accepted: bool,
    /// Distinguished f ≡ 0 fit (exponent irrelevant).
    pub zero: bool,
}

/// Scans integer exponents and picks the one minimizing the residual.
///
/// `kn` and `w` are u-major grids (kn[i][j] at (u[i], v_j)); the v samples
/// must spread w over at least a decade for the exponent to be identifiable.
/// A grid that is zero to within the dimensionless threshold |k_N|·w ≤ tol
/// returns the flagged f ≡ 0 fit.
pub fn fit_power_law(
    u: &[f64],
    kn: &[Vec<f64>],
    w: &[Vec<f64>],
    tol: f64,
) -> Result<PowerLawFit, ClassifyError> {
    let nu = kn.len();
    let nv = if nu > 0 { kn[0].len() } else { 0 };
    if nu < 5 || nv < 5 {
        return Err(ClassifyError::GridTooSmall { nu, nv });
    }
    let mut max_scaled: f64 = 0.0;
    for (i, row) in kn.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() || !w[i][j].is_finite() {
                return Err(ClassifyError::NonFinite { i, j });
            }
            max_scaled = max_scaled.max((x * w[i][j]).abs());
        }
    }
    if max_scaled <= tol {
        return Ok(PowerLawFit {
            exponent: 0,
            f_samples: u.iter().map(|&ui| (ui, 0.0)).collect(),
            residual: 0.0,
            accepted: true,
            zero: true,
        });
    }

    let mut best: Option<PowerLawFit> = None;
    for n in EXPONENT_RANGE {
        let mut worst: f64 = 0.0;
        let mut f_samples = Vec::with_capacity(nu);
        for i in 0..nu {
            let mut c: Vec<f64> = (0..nv).map(|j| kn[i][j] * w[i][j].powi(-n)).collect();
            let med = median(&mut c);
            for &cj in &c {
                worst = worst.max((cj - med).abs() / med.abs().max(1e-14));
            }
            f_samples.push((u[i], med));
        }
        if best.as_ref().map_or(true, |b| worst < b.residual) {
            best = Some(PowerLawFit {
                exponent: n,
                f_samples,
                residual: worst,
                accepted: worst <= tol,
                zero: false,
            });
        }
    }
    Ok(best.expect("non-empty exponent range"))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Class membership flags from the invariant predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceClass {
    pub wendelflaeche: bool,
    pub edlinger: bool,
    pub orthoid: bool,
    pub const_drall: bool,
    pub konoid: bool,
}

impl SurfaceClass {
    pub fn generic_skew(&self) -> bool {
        !(self.wendelflaeche || self.edlinger || self.orthoid || self.const_drall || self.konoid)
    }

    pub fn labels(&self) -> Vec<&'static str> {
        if self.generic_skew() {
            return vec!["GENERIC_SKEW"];
        }
        let mut out = Vec::new();
        if self.wendelflaeche {
            out.push("WENDELFLAECHE");
        }
        if self.edlinger {
            out.push("EDLINGER");
        }
        if self.orthoid {
            out.push("ORTHOID");
        }
        if self.const_drall {
            out.push("CONST_DRALL");
        }
        if self.konoid {
            out.push("KONOID");
        }
        out
    }
}

/// Tests the defining predicates on u-samples:
/// constant drall (δ' = 0), orthoid (λ = 0), conoid (k = 0),
/// Edlinger (δ' = kλ+1 = 0), helicoid (k = λ = δ' = 0).
pub fn classify_by_invariants(
    profile: &InvariantProfile,
    u_samples: &[f64],
    tol: f64,
) -> Result<SurfaceClass, ClassifyError> {
    if u_samples.len() < 20 {
        return Err(ClassifyError::TooFewSamples(u_samples.len()));
    }
    let mut max_dp: f64 = 0.0;
    let mut max_d: f64 = 0.0;
    let mut max_l: f64 = 0.0;
    let mut max_k: f64 = 0.0;
    let mut max_kl1: f64 = 0.0;
    for &u in u_samples {
        let k = profile.k(u)?;
        let d = profile.delta(u)?;
        let l = profile.lambda(u)?;
        max_dp = max_dp.max(profile.delta_prime(u)?.abs());
        max_d = max_d.max(d.abs());
        max_l = max_l.max(l.abs());
        max_k = max_k.max(k.abs());
        max_kl1 = max_kl1.max((k * l + 1.0).abs());
    }
    let const_drall = max_dp <= tol * max_d;
    let orthoid = max_l <= tol;
    let konoid = max_k <= tol;
    let edlinger = const_drall && max_kl1 <= tol;
    Ok(SurfaceClass {
        wendelflaeche: orthoid && konoid && const_drall,
        edlinger,
        orthoid,
        const_drall,
        konoid,
    })
}

/// Family key of the theorem table; the two principal branches share rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FitFamily {
    Principal,
    S1,
    S2,
    S3,
    S4,
}

impl From<CurveFamily> for FitFamily {
    fn from(f: CurveFamily) -> Self {
        match f {
            CurveFamily::S1 => FitFamily::S1,
            CurveFamily::S2 => FitFamily::S2,
            CurveFamily::S3 => FitFamily::S3,
            CurveFamily::S4 => FitFamily::S4,
            CurveFamily::Principal1 | CurveFamily::Principal2 => FitFamily::Principal,
        }
    }
}

/// Closed-form shape of the factor f(u) in a table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FShape {
    Zero,
    MinusK,
    PlusMinusDelta,
    DeltaSqOverK,
    MinusDeltaSqLambda,
}

impl FShape {
    fn candidates(&self, profile: &InvariantProfile, u: f64) -> Result<Vec<f64>, ProfileError> {
        let k = profile.k(u)?;
        let d = profile.delta(u)?;
        let l = profile.lambda(u)?;
        Ok(match self {
            FShape::Zero => vec![0.0],
            FShape::MinusK => vec![-k],
            FShape::PlusMinusDelta => vec![d, -d],
            FShape::DeltaSqOverK => {
                if k == 0.0 {
                    vec![f64::NAN]
                } else {
                    vec![d * d / k]
                }
            }
            FShape::MinusDeltaSqLambda => vec![-d * d * l],
        })
    }
}

/// Surface class named by a table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassVerdict {
    Wendelflaeche,
    Edlinger,
    Orthoid,
    ConstDrallOrthoid,
    ConstDrallKonoid,
    ConstDrallOrthoidOrEdlinger,
}

impl ClassVerdict {
    /// Whether the predicate flags agree with the verdict.
    pub fn agrees_with(&self, class: &SurfaceClass) -> bool {
        match self {
            ClassVerdict::Wendelflaeche => class.wendelflaeche,
            ClassVerdict::Edlinger => class.edlinger,
            ClassVerdict::Orthoid => class.orthoid,
            ClassVerdict::ConstDrallOrthoid => class.const_drall && class.orthoid,
            ClassVerdict::ConstDrallKonoid => class.const_drall && class.konoid,
            ClassVerdict::ConstDrallOrthoidOrEdlinger => {
                (class.const_drall && class.orthoid) || class.edlinger
            }
        }
    }
}

/// One row of the summary table, with the shape check result for this fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub family: FitFamily,
    /// None for the f ≡ 0 rows.
    pub exponent: Option<i32>,
    pub f_shape: FShape,
    pub verdict: ClassVerdict,
    pub shape_matches: bool,
    pub shape_residual: f64,
}

fn table_rows(family: FitFamily) -> Vec<(Option<i32>, FShape, ClassVerdict)> {
    use ClassVerdict::*;
    use FShape::*;
    match family {
        FitFamily::Principal => vec![
            (Some(-1), MinusK, Edlinger),
            (Some(-2), PlusMinusDelta, Wendelflaeche),
            (Some(-3), DeltaSqOverK, Edlinger),
        ],
        FitFamily::S1 => vec![
            (None, Zero, Wendelflaeche),
            (Some(-1), MinusK, ConstDrallOrthoidOrEdlinger),
        ],
        FitFamily::S2 => vec![
            (None, Zero, Orthoid),
            (Some(-3), DeltaSqOverK, Edlinger),
        ],
        FitFamily::S3 => vec![
            (None, Zero, Wendelflaeche),
            (Some(-1), MinusK, ConstDrallOrthoid),
            (Some(-3), MinusDeltaSqLambda, ConstDrallKonoid),
        ],
        FitFamily::S4 => vec![
            (None, Zero, Wendelflaeche),
            (Some(-1), MinusK, ConstDrallOrthoidOrEdlinger),
        ],
    }
}

/// Returns the table rows matching the fit, each with its factor shape
/// verified against the profile. An empty result means the fit falls outside
/// the classification.
pub fn theorem_table_lookup(
    family: FitFamily,
    fit: &PowerLawFit,
    profile: &InvariantProfile,
    shape_tol: f64,
) -> Result<Vec<TableRow>, ClassifyError> {
    if !fit.accepted {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (exponent, shape, verdict) in table_rows(family) {
        let matches_exponent = match (exponent, fit.zero) {
            (None, true) => true,
            (Some(n), false) => n == fit.exponent,
            _ => false,
        };
        if !matches_exponent {
            continue;
        }
        let mut residual: f64 = 0.0;
        if !fit.zero {
            // the ± shape may pick a different sign per principal branch but
            // must be consistent along u within one fit
            let mut residual_per_candidate: Vec<f64> = Vec::new();
            let n_candidates = shape.candidates(profile, fit.f_samples[0].0)?.len();
            for c in 0..n_candidates {
                let mut worst: f64 = 0.0;
                for &(u, f) in &fit.f_samples {
                    let cand = shape.candidates(profile, u)?[c];
                    if !cand.is_finite() {
                        worst = f64::INFINITY;
                        break;
                    }
                    worst = worst.max((f - cand).abs() / cand.abs().max(1e-14));
                }
                residual_per_candidate.push(worst);
            }
            residual = residual_per_candidate
                .into_iter()
                .fold(f64::INFINITY, f64::min);
        }
        out.push(TableRow {
            family,
            exponent,
            f_shape: shape,
            verdict,
            shape_matches: residual <= shape_tol,
            shape_residual: residual,
        });
    }
    Ok(out)
}

/// Result of the principal-curvature relation δ²k₁³ + k⁴k₂ = 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorollaryResult {
    pub holds: bool,
    pub max_residual: f64,
    /// (u, v) maximizing the residual.
    pub witness: (f64, f64),
    /// True when the k1 ↔ k2 index swap gave the smaller residual.
    pub index_swapped: bool,
}

/// Checks δ²k₁³ + k⁴k₂ = 0 over the grid. k₁ is the -k/w branch when the
/// surface is Edlinger; otherwise both index assignments are tested and the
/// better one is reported.
pub fn check_corollary2(
    profile: &InvariantProfile,
    grid: &[(f64, f64)],
    tol: f64,
) -> Result<CorollaryResult, ClassifyError> {
    for &(u, _) in grid {
        let k = profile.k(u)?;
        if k.abs() <= 1e-12 {
            return Err(ClassifyError::KVanishes { u, k_abs: k.abs() });
        }
    }
    let mut worst = [0.0_f64; 2];
    let mut witness = [(0.0, 0.0); 2];
    for &(u, v) in grid {
        let pg = curvature_scalars(profile, u, v)?;
        let k = profile.k(u)?;
        let d = profile.delta(u)?;
        for (a, (k1, k2)) in [(pg.k1, pg.k2), (pg.k2, pg.k1)].into_iter().enumerate() {
            let lhs = d * d * k1.powi(3);
            let rhs = k.powi(4) * k2;
            let scale = lhs.abs().max(rhs.abs()).max(1e-14);
            let r = (lhs + rhs).abs() / scale;
            if r > worst[a] {
                worst[a] = r;
                witness[a] = (u, v);
            }
        }
    }
    let pick = if worst[1] < worst[0] { 1 } else { 0 };
    Ok(CorollaryResult {
        holds: worst[pick] <= tol,
        max_residual: worst[pick],
        witness: witness[pick],
        index_swapped: pick == 1,
    })
}

/// Grid used for the classification fits. The v offsets are multiples of the
/// drall scale so that w spans better than a decade.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub nu: usize,
    pub v_factors: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nu: 9,
            v_factors: vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

/// Per-family fit and its matching table rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyFitReport {
    pub curve_family: CurveFamily,
    pub fit: PowerLawFit,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub class: SurfaceClass,
    pub class_labels: Vec<String>,
    pub families: Vec<FamilyFitReport>,
    pub corollary: Option<CorollaryResult>,
    pub corollary_skipped: Option<String>,
    /// Table verdicts vs invariant predicates.
    pub consistent: bool,
    pub notes: Vec<String>,
}

impl ClassificationReport {
    pub fn family_report(&self, family: CurveFamily) -> &FamilyFitReport {
        self.families
            .iter()
            .find(|f| f.curve_family == family)
            .expect("all families present")
    }

    /// Rows whose fit was accepted and whose shape matched.
    pub fn matched_rows(&self) -> Vec<&TableRow> {
        self.families
            .iter()
            .flat_map(|f| f.rows.iter())
            .filter(|r| r.shape_matches)
            .collect()
    }
}

/// Runs the full battery: power-law fits on both principal branches and the
/// four families, invariant predicates, table lookups, and the principal-
/// curvature relation when k does not vanish.
pub fn verify_surface(
    profile: &InvariantProfile,
    grid: &GridSpec,
    tol: f64,
) -> Result<ClassificationReport, ClassifyError> {
    let (lo, hi) = profile.domain();
    let margin = (hi - lo) * 0.02;
    let us: Vec<f64> = (0..grid.nu)
        .map(|i| lo + margin + (hi - lo - 2.0 * margin) * i as f64 / (grid.nu - 1) as f64)
        .collect();
    let d_scale = {
        let mut m: f64 = 0.0;
        for &u in &us {
            m = m.max(profile.delta(u)?.abs());
        }
        m
    };
    let vs: Vec<f64> = grid.v_factors.iter().map(|f| f * d_scale).collect();

    let w_grid: Vec<Vec<f64>> = us
        .iter()
        .map(|&u| {
            let d = profile.delta(u)?;
            Ok(vs.iter().map(|&v| (v * v + d * d).sqrt()).collect())
        })
        .collect::<Result<_, ClassifyError>>()?;

    let families = [
        CurveFamily::Principal1,
        CurveFamily::Principal2,
        CurveFamily::S1,
        CurveFamily::S2,
        CurveFamily::S3,
        CurveFamily::S4,
    ];
    let mut reports = Vec::with_capacity(families.len());
    for family in families {
        let kn: Vec<Vec<f64>> = us
            .iter()
            .map(|&u| {
                vs.iter()
                    .map(|&v| Ok(family_normal_curvature(family, profile, u, v)?))
                    .collect::<Result<_, ClassifyError>>()
            })
            .collect::<Result<_, ClassifyError>>()?;
        let fit = fit_power_law(&us, &kn, &w_grid, tol)?;
        let rows = theorem_table_lookup(family.into(), &fit, profile, tol.sqrt())?;
        reports.push(FamilyFitReport { curve_family: family, fit, rows });
    }

    let class = classify_by_invariants(profile, &us_for_predicates(lo, hi), tol.max(1e-9))?;

    let mut corollary = None;
    let mut corollary_skipped = None;
    let pair_grid: Vec<(f64, f64)> = us
        .iter()
        .flat_map(|&u| vs.iter().map(move |&v| (u, v)))
        .collect();
    match check_corollary2(profile, &pair_grid, 1e-8) {
        Ok(res) => corollary = Some(res),
        Err(ClassifyError::KVanishes { u, .. }) => {
            corollary_skipped = Some(format!("k vanishes near u = {u}"));
        }
        Err(e) => return Err(e),
    }

    let mut notes = Vec::new();
    let mut consistent = true;
    for rep in &reports {
        for row in &rep.rows {
            if row.shape_matches && !row.verdict.agrees_with(&class) {
                consistent = false;
                notes.push(format!(
                    "{:?} fit (n = {:?}, shape {:?}) predicts {:?} but predicates say {:?}",
                    rep.curve_family,
                    row.exponent,
                    row.f_shape,
                    row.verdict,
                    class.labels()
                ));
            }
        }
        if !rep.fit.accepted && !rep.fit.zero {
            notes.push(format!(
                "{:?}: no power law (best n = {}, residual {:.3e}); outside the table",
                rep.curve_family, rep.fit.exponent, rep.fit.residual
            ));
        }
    }

    let class_labels = class.labels().iter().map(|s| s.to_string()).collect();
    Ok(ClassificationReport {
        class,
        class_labels,
        families: reports,
        corollary,
        corollary_skipped,
        consistent,
        notes,
    })
}

fn us_for_predicates(lo: f64, hi: f64) -> Vec<f64> {
    let n = 50;
    let margin = (hi - lo) * 0.02;
    (0..n)
        .map(|i| lo + margin + (hi - lo - 2.0 * margin) * i as f64 / (n - 1) as f64)
        .collect()
}
