//! Surface specification files, report/CSV/OBJ serialization, and the
//! command implementations behind the `ruled` binary.
//!
//! Spec schema (JSON):
//!
//! ```json
//! {
//!   "invariants": {"builtin": "helicoid", "params": {"delta0": 1.0}},
//!   "domain": [0.0, 6.283],
//!   "v_range": [-2.0, 2.0],
//!   "grid": [64, 16],
//!   "tol": {"fit": 1e-8}
//! }
//! ```
//!
//! `invariants` may instead carry expression strings `k`, `delta`, and one of
//! `lambda` / `sigma`; or the whole block can be replaced by
//! `parametrization` with `directrix` and `direction` expression triples, in
//! which case the invariants are extracted numerically.
//!
//! All numbers are written with Rust's shortest round-trip `Display`
//! formatting, so repeated runs are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{verify_surface, ClassificationReport, GridSpec};
use crate::classify::{FIT_TOL_ANALYTIC, FIT_TOL_EXTRACTED};
use crate::families::{family_normal_curvature, CurveFamily};
use crate::frame::{
    extract_standard_form, rk4_frame_step, roundtrip_error, striction_orthogonality_error,
    FrameState, RawRuledMap,
};
use crate::geometry::{
    curvature_scalars, fundamental_tensors, normal_curvature, sample_mesh, DirectionUV, Mesh,
    RuledSurface,
};
use crate::profile::{make_builtin_profile, InvariantProfile, ScalarProfile};

/// Spec- or IO-level failure (CLI exit code 2).
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON at line {line}, column {column}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("spec field `{field}`: {message}")]
    Schema { field: String, message: String },
}

/// Any command failure, carrying the process exit code.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Spec(_) => 2,
            RunError::Numeric(_) => 3,
        }
    }

    fn numeric(err: impl std::fmt::Display) -> Self {
        RunError::Numeric(err.to_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantsSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametrizationSpec {
    pub directrix: [String; 3],
    pub direction: [String; 3],
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicate: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<InvariantsSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parametrization: Option<ParametrizationSpec>,
    pub domain: [f64; 2],
    pub v_range: [f64; 2],
    pub grid: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<TolSpec>,
}

const BUILTIN_NAMES: [&str; 4] =
    ["helicoid", "edlinger", "const_drall_orthoid", "const_drall_conoid"];

fn schema(field: &str, message: impl Into<String>) -> SpecError {
    SpecError::Schema { field: field.to_string(), message: message.into() }
}

fn parse_field(field: &str, text: &str) -> Result<ScalarProfile, SpecError> {
    ScalarProfile::parse(text).map_err(|e| schema(field, e.to_string()))
}

impl SurfaceSpec {
    /// Structural validation with eager expression parsing; errors name the
    /// offending field.
    pub fn validate(&self) -> Result<(), SpecError> {
        match (&self.invariants, &self.parametrization) {
            (None, None) => {
                return Err(schema(
                    "invariants",
                    "exactly one of `invariants` or `parametrization` is required; neither present",
                ));
            }
            (Some(_), Some(_)) => {
                return Err(schema(
                    "invariants",
                    "exactly one of `invariants` or `parametrization` is required; both present",
                ));
            }
            (Some(inv), None) => inv.validate()?,
            (None, Some(par)) => par.validate()?,
        }
        if !(self.domain[0] < self.domain[1]) {
            return Err(schema(
                "domain",
                format!("need u_min < u_max, got [{}, {}]", self.domain[0], self.domain[1]),
            ));
        }
        if !(self.v_range[0] < self.v_range[1]) {
            return Err(schema(
                "v_range",
                format!("need v_min < v_max, got [{}, {}]", self.v_range[0], self.v_range[1]),
            ));
        }
        if self.grid[0] < 2 || self.grid[1] < 2 {
            return Err(schema(
                "grid",
                format!("need nu, nv >= 2, got [{}, {}]", self.grid[0], self.grid[1]),
            ));
        }
        if let Some(t) = &self.tol {
            for (name, value) in [("tol.fit", t.fit), ("tol.predicate", t.predicate)] {
                if let Some(x) = value {
                    if !(x > 0.0 && x.is_finite()) {
                        return Err(schema(name, format!("tolerance must be positive, got {x}")));
                    }
                }
            }
        }
        Ok(())
    }
}

impl InvariantsSpec {
    fn validate(&self) -> Result<(), SpecError> {
        let expr_fields = [&self.k, &self.delta, &self.lambda, &self.sigma];
        if let Some(name) = &self.builtin {
            if !BUILTIN_NAMES.contains(&name.as_str()) {
                return Err(schema(
                    "invariants.builtin",
                    format!("unknown builtin `{name}`; expected one of {BUILTIN_NAMES:?}"),
                ));
            }
            if expr_fields.iter().any(|f| f.is_some()) {
                return Err(schema(
                    "invariants",
                    "builtin form must not carry expression fields k/delta/lambda/sigma",
                ));
            }
            return Ok(());
        }
        if self.params.is_some() {
            return Err(schema("invariants.params", "`params` requires `builtin`"));
        }
        let k = self
            .k
            .as_deref()
            .ok_or_else(|| schema("invariants.k", "missing (expression form needs k)"))?;
        let delta = self
            .delta
            .as_deref()
            .ok_or_else(|| schema("invariants.delta", "missing (expression form needs delta)"))?;
        parse_field("invariants.k", k)?;
        parse_field("invariants.delta", delta)?;
        match (&self.lambda, &self.sigma) {
            (Some(l), None) => {
                parse_field("invariants.lambda", l)?;
            }
            (None, Some(s)) => {
                parse_field("invariants.sigma", s)?;
            }
            (None, None) => {
                return Err(schema("invariants.lambda", "exactly one of lambda/sigma required; neither present"));
            }
            (Some(_), Some(_)) => {
                return Err(schema("invariants.lambda", "exactly one of lambda/sigma required; both present"));
            }
        }
        Ok(())
    }
}

impl ParametrizationSpec {
    fn validate(&self) -> Result<(), SpecError> {
        for (name, triple) in
            [("directrix", &self.directrix), ("direction", &self.direction)]
        {
            for (i, text) in triple.iter().enumerate() {
                parse_field(&format!("parametrization.{name}[{i}]"), text)?;
            }
        }
        Ok(())
    }
}

/// Reads and validates a spec file.
pub fn load_spec(path: &Path) -> Result<SurfaceSpec, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SpecError::Io { path: path.to_path_buf(), source })?;
    let spec: SurfaceSpec = serde_json::from_str(&text).map_err(|e| SpecError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

/// A spec turned into a ready-to-use profile.
#[derive(Debug)]
pub struct ResolvedSpec {
    pub profile: InvariantProfile,
    /// True when the profile came from a raw parametrization via numerical
    /// extraction (looser default tolerances).
    pub extracted: bool,
    pub v_range: (f64, f64),
    pub grid: (usize, usize),
    pub fit_tol: f64,
    pub predicate_tol: f64,
}

/// Builds the invariant profile, extracting it numerically for the
/// parametrization form. `grid_override` / `tol_override` come from the CLI.
pub fn resolve_spec(
    spec: &SurfaceSpec,
    grid_override: Option<(usize, usize)>,
    tol_override: Option<f64>,
) -> Result<ResolvedSpec, RunError> {
    spec.validate()?;
    let domain = (spec.domain[0], spec.domain[1]);
    let grid = grid_override.unwrap_or((spec.grid[0], spec.grid[1]));
    if grid.0 < 2 || grid.1 < 2 {
        return Err(schema("grid", format!("need nu, nv >= 2, got {grid:?}")).into());
    }

    let (profile, extracted) = if let Some(inv) = &spec.invariants {
        (build_invariant_profile(inv, domain)?, false)
    } else {
        let par = spec.parametrization.as_ref().expect("validated");
        let comp = |field: &str, text: &str| parse_field(field, text);
        let raw = RawRuledMap {
            directrix: [
                comp("parametrization.directrix[0]", &par.directrix[0])?,
                comp("parametrization.directrix[1]", &par.directrix[1])?,
                comp("parametrization.directrix[2]", &par.directrix[2])?,
            ],
            direction: [
                comp("parametrization.direction[0]", &par.direction[0])?,
                comp("parametrization.direction[1]", &par.direction[1])?,
                comp("parametrization.direction[2]", &par.direction[2])?,
            ],
            domain,
        };
        let (profile, _) =
            extract_standard_form(&raw, grid.0.max(64)).map_err(RunError::numeric)?;
        (profile, true)
    };

    let default_fit = if extracted { FIT_TOL_EXTRACTED } else { FIT_TOL_ANALYTIC };
    let fit_tol = tol_override
        .or(spec.tol.as_ref().and_then(|t| t.fit))
        .unwrap_or(default_fit);
    let predicate_tol = spec
        .tol
        .as_ref()
        .and_then(|t| t.predicate)
        .unwrap_or(if extracted { 1e-6 } else { 1e-9 });
    Ok(ResolvedSpec {
        profile,
        extracted,
        v_range: (spec.v_range[0], spec.v_range[1]),
        grid,
        fit_tol,
        predicate_tol,
    })
}

fn build_invariant_profile(
    inv: &InvariantsSpec,
    domain: (f64, f64),
) -> Result<InvariantProfile, RunError> {
    if let Some(name) = &inv.builtin {
        let empty = BTreeMap::new();
        let params = inv.params.as_ref().unwrap_or(&empty);
        return make_builtin_profile(name, params, domain)
            .map_err(|e| schema("invariants", e.to_string()).into());
    }
    let k = parse_field("invariants.k", inv.k.as_deref().expect("validated"))?;
    let delta = parse_field("invariants.delta", inv.delta.as_deref().expect("validated"))?;
    let lambda = if let Some(l) = &inv.lambda {
        parse_field("invariants.lambda", l)?
    } else {
        // λ = cot σ, built symbolically from the σ expression
        let s = inv.sigma.as_deref().expect("validated");
        parse_field("invariants.sigma", &format!("cos(({s}))/sin(({s}))"))?
    };
    InvariantProfile::new(k, delta, lambda, domain)
        .map_err(|e| schema("invariants", e.to_string()).into())
}

/// Named example profiles exercised by `verify --all-builtins`.
pub fn builtin_showcase() -> Vec<(String, SurfaceSpec)> {
    let mk = |name: &str, params: &[(&str, f64)]| SurfaceSpec {
        invariants: Some(InvariantsSpec {
            builtin: Some(name.to_string()),
            params: Some(params.iter().map(|(k, v)| (k.to_string(), *v)).collect()),
            k: None,
            delta: None,
            lambda: None,
            sigma: None,
        }),
        parametrization: None,
        domain: [0.0, 2.0 * std::f64::consts::PI],
        v_range: [-2.0, 2.0],
        grid: [64, 16],
        tol: None,
    };
    vec![
        ("helicoid".to_string(), mk("helicoid", &[("delta0", 1.0)])),
        ("edlinger".to_string(), mk("edlinger", &[("k0", -1.0), ("delta0", 1.0)])),
        (
            "const_drall_orthoid".to_string(),
            mk("const_drall_orthoid", &[("k0", 0.7), ("delta0", 1.0)]),
        ),
        (
            "const_drall_conoid".to_string(),
            mk("const_drall_conoid", &[("lambda0", 1.0), ("delta0", 1.0)]),
        ),
    ]
}

// ---------------------------------------------------------------------------
// writers

/// Shortest round-trip decimal formatting shared by CSV and OBJ output.
fn fmt_num(x: f64) -> String {
    format!("{x}")
}

pub const CSV_COLUMNS: [&str; 13] = [
    "u", "v", "w", "g11", "g12", "g22", "h11", "h12", "h22", "K", "H", "k1", "k2",
];

/// Row-major curvature grid as CSV; returns (text, per-column [min, max]).
pub fn curvature_csv(
    profile: &InvariantProfile,
    us: &[f64],
    vs: &[f64],
) -> Result<(String, Vec<(String, [f64; 2])>), RunError> {
    let mut out = String::new();
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    let mut ranges: Vec<[f64; 2]> =
        vec![[f64::INFINITY, f64::NEG_INFINITY]; CSV_COLUMNS.len()];
    for &u in us {
        for &v in vs {
            let pg = curvature_scalars(profile, u, v).map_err(RunError::numeric)?;
            let row = [
                pg.u, pg.v, pg.w, pg.g.a11, pg.g.a12, pg.g.a22, pg.h.a11, pg.h.a12, pg.h.a22,
                pg.gauss, pg.mean, pg.k1, pg.k2,
            ];
            for (i, x) in row.iter().enumerate() {
                ranges[i][0] = ranges[i][0].min(*x);
                ranges[i][1] = ranges[i][1].max(*x);
            }
            let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    let named = CSV_COLUMNS
        .iter()
        .zip(ranges)
        .map(|(name, r)| (name.to_string(), r))
        .collect();
    Ok((out, named))
}

/// Wavefront OBJ: vertex records then 1-based quad faces, row-major.
pub fn obj_text(mesh: &Mesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", fmt_num(v.x), fmt_num(v.y), fmt_num(v.z));
    }
    for q in &mesh.quads {
        let _ = writeln!(out, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
    }
    out
}

pub fn striction_csv(surface: &RuledSurface) -> String {
    let mut out = String::from("u,x,y,z\n");
    for sample in surface.striction().samples() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_num(sample.u),
            fmt_num(sample.s.x),
            fmt_num(sample.s.y),
            fmt_num(sample.s.z)
        );
    }
    out
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, RunError> {
    std::fs::create_dir_all(dir)
        .map_err(|source| SpecError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|source| SpecError::Io { path: path.clone(), source })?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// reports and commands

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub vertices: usize,
    pub quads: usize,
}

/// Machine-readable run summary; field order is fixed by this struct, so
/// serialized reports diff cleanly.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub spec: SurfaceSpec,
    pub fit_tol: f64,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column_ranges: Option<Vec<(String, [f64; 2])>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    pub checks: Vec<CheckEntry>,
    pub passed: bool,
}

impl RunReport {
    fn new(command: &str, spec: &SurfaceSpec, fit_tol: f64) -> Self {
        RunReport {
            command: command.to_string(),
            spec: spec.clone(),
            fit_tol,
            outputs: Vec::new(),
            column_ranges: None,
            mesh: None,
            classification: None,
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    fn finish(mut self, out_dir: Option<&Path>) -> Result<Self, RunError> {
        if let Some(dir) = out_dir {
            let path = write_file(dir, "report.json", &(self.to_json() + "\n"))?;
            self.outputs.push(path.display().to_string());
        }
        Ok(self)
    }
}

/// Curvature grid CSV plus min/max summary.
pub fn cmd_analyze(
    spec: &SurfaceSpec,
    resolved: &ResolvedSpec,
    out_dir: Option<&Path>,
) -> Result<RunReport, RunError> {
    let mut report = RunReport::new("analyze", spec, resolved.fit_tol);
    let (lo, hi) = resolved.profile.domain();
    let us = linspace(lo, hi, resolved.grid.0);
    let vs = linspace(resolved.v_range.0, resolved.v_range.1, resolved.grid.1);
    let (csv, ranges) = curvature_csv(&resolved.profile, &us, &vs)?;
    report.column_ranges = Some(ranges);
    if let Some(dir) = out_dir {
        let path = write_file(dir, "surface.csv", &csv)?;
        report.outputs.push(path.display().to_string());
    }
    report.finish(out_dir)
}

/// Full classification battery (class flags, per-family fits, corollary).
pub fn cmd_classify(
    spec: &SurfaceSpec,
    resolved: &ResolvedSpec,
    out_dir: Option<&Path>,
) -> Result<RunReport, RunError> {
    let mut report = RunReport::new("classify", spec, resolved.fit_tol);
    let classification = verify_surface(&resolved.profile, &GridSpec::default(), resolved.fit_tol)
        .map_err(RunError::numeric)?;
    report.passed = classification.consistent;
    report.classification = Some(classification);
    report.finish(out_dir)
}

/// Integrates the surface and writes the OBJ mesh + striction polyline.
pub fn cmd_reconstruct(
    spec: &SurfaceSpec,
    resolved: &ResolvedSpec,
    out_dir: &Path,
) -> Result<RunReport, RunError> {
    if spec.invariants.is_none() {
        return Err(schema(
            "invariants",
            "reconstruct needs the invariants form (the profile drives the integration)",
        )
        .into());
    }
    let mut report = RunReport::new("reconstruct", spec, resolved.fit_tol);
    let surface = RuledSurface::from_profile(resolved.profile.clone(), 1e-3, resolved.v_range)
        .map_err(RunError::numeric)?;
    let mesh =
        sample_mesh(&surface, resolved.grid.0, resolved.grid.1).map_err(RunError::numeric)?;
    report.mesh = Some(MeshSummary { vertices: mesh.vertices.len(), quads: mesh.quads.len() });
    let obj_path = write_file(out_dir, "surface.obj", &obj_text(&mesh))?;
    let csv_path = write_file(out_dir, "striction.csv", &striction_csv(&surface))?;
    report.outputs.push(obj_path.display().to_string());
    report.outputs.push(csv_path.display().to_string());
    report.finish(Some(out_dir))
}

/// Full invariant/theorem suite; `passed` is false iff any check fails.
pub fn cmd_verify(
    spec: &SurfaceSpec,
    resolved: &ResolvedSpec,
    out_dir: Option<&Path>,
) -> Result<RunReport, RunError> {
    let mut report = RunReport::new("verify", spec, resolved.fit_tol);
    report.checks = run_check_battery(resolved).map_err(RunError::numeric)?;
    let classification = verify_surface(&resolved.profile, &GridSpec::default(), resolved.fit_tol)
        .map_err(RunError::numeric)?;
    report.checks.push(CheckEntry {
        name: "classification consistency".to_string(),
        residual: if classification.consistent { 0.0 } else { 1.0 },
        tolerance: 0.5,
        passed: classification.consistent,
    });
    report.classification = Some(classification);
    report.passed = report.checks.iter().all(|c| c.passed);
    report.finish(out_dir)
}

/// Runs the verify battery over every named example profile.
pub fn cmd_verify_all_builtins(
    out_dir: Option<&Path>,
) -> Result<Vec<(String, RunReport)>, RunError> {
    let mut out = Vec::new();
    for (name, spec) in builtin_showcase() {
        let resolved = resolve_spec(&spec, None, None)?;
        let sub_dir = out_dir.map(|d| d.join(&name));
        let report = cmd_verify(&spec, &resolved, sub_dir.as_deref())?;
        out.push((name, report));
    }
    Ok(out)
}

fn check(name: &str, residual: f64, tolerance: f64) -> CheckEntry {
    CheckEntry {
        name: name.to_string(),
        residual,
        tolerance,
        passed: residual <= tolerance,
    }
}

fn run_check_battery(resolved: &ResolvedSpec) -> Result<Vec<CheckEntry>, Box<dyn std::error::Error>> {
    let profile = &resolved.profile;
    let (lo, hi) = profile.domain();
    let mut checks = Vec::new();

    // frame drift: raw RK4 step vs renormalized state
    let h = 1e-3;
    let steps = (((hi - lo) / h).ceil() as usize).min(20_000);
    let mut state = FrameState::canonical(lo);
    let mut pre: f64 = 0.0;
    let mut post: f64 = 0.0;
    for i in 0..steps {
        let u_next = lo + (hi - lo) * (i + 1) as f64 / steps as f64;
        let raw = rk4_frame_step(&state, profile, u_next - state.u)?;
        pre = pre.max(raw.orthonormality_error()).max((raw.handedness() - 1.0).abs());
        state = raw.renormalized();
        post = post
            .max(state.orthonormality_error())
            .max((state.handedness() - 1.0).abs());
    }
    checks.push(check("frame orthonormality drift per step (raw)", pre, 1e-9));
    checks.push(check("frame orthonormality after renormalization", post, 1e-15));

    // striction line meets its defining orthogonality
    let surface = RuledSurface::from_profile(profile.clone(), 1e-3, resolved.v_range)?;
    checks.push(check(
        "striction orthogonality <s', n> = 0",
        striction_orthogonality_error(surface.striction()),
        1e-6,
    ));

    // structural identities on a coarse grid
    let margin = (hi - lo) * 0.02;
    let us = linspace(lo + margin, hi - margin, 12);
    let vs = linspace(resolved.v_range.0, resolved.v_range.1, 9);
    let mut s3_vs_2h: f64 = 0.0;
    let mut ruling_kn: f64 = 0.0;
    let mut worst_k_sign = f64::NEG_INFINITY;
    let mut product: f64 = 0.0;
    let mut sum: f64 = 0.0;
    for &u in &us {
        for &v in &vs {
            let pg = curvature_scalars(profile, u, v)?;
            let s3 = family_normal_curvature(CurveFamily::S3, profile, u, v)?;
            let scale = (2.0 * pg.mean).abs().max(1e-14);
            s3_vs_2h = s3_vs_2h.max((s3 - 2.0 * pg.mean).abs() / scale);
            ruling_kn =
                ruling_kn.max(normal_curvature(profile, u, v, DirectionUV::ruling())?.abs());
            worst_k_sign = worst_k_sign.max(pg.gauss);
            product = product
                .max((pg.k1 * pg.k2 - pg.gauss).abs() / pg.gauss.abs().max(1e-14));
            sum = sum.max((pg.k1 + pg.k2 - 2.0 * pg.mean).abs() / scale);
        }
    }
    checks.push(check("k_N(S3) = 2H", s3_vs_2h, 1e-12));
    checks.push(check("k_N along rulings = 0", ruling_kn, 0.0));
    checks.push(check("K < 0 everywhere (max K reported)", worst_k_sign, -1e-300));
    checks.push(check("k1 k2 = K", product, 1e-12));
    checks.push(check("k1 + k2 = 2H", sum, 1e-12));

    // invariants -> surface -> extraction round trip
    let raw = RawRuledMap::from_striction_curve(surface.striction());
    let (re_extracted, _) = extract_standard_form(&raw, 64)?;
    checks.push(check(
        "invariant round trip (k, delta, lambda)",
        roundtrip_error(&re_extracted, profile, 200)?,
        1e-6,
    ));

    // h22 is structurally zero
    let mut h22: f64 = 0.0;
    for &u in &us {
        for &v in &vs {
            let (_, h_tensor, _) = fundamental_tensors(profile, u, v)?;
            h22 = h22.max(h_tensor.a22.abs());
        }
    }
    checks.push(check("h22 = 0", h22, 0.0));

    Ok(checks)
}
