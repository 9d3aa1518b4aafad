use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ruled_surfaces::spec_io::{
    cmd_analyze, cmd_classify, cmd_reconstruct, cmd_verify, cmd_verify_all_builtins, load_spec,
    resolve_spec, RunError, RunReport,
};

/// Compute, verify, and classify skew ruled surfaces from their invariants.
#[derive(Parser)]
#[command(name = "ruled", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Surface specification (JSON)
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for reports and artifacts
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the power-law fit tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Override the sampling grid, e.g. 64x16
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
}

#[derive(Subcommand)]
enum Command {
    /// Curvature grid (CSV) with summary ranges
    Analyze(CommonArgs),
    /// Power-law fits, theorem table, and class flags
    Classify(CommonArgs),
    /// Integrate the surface; write OBJ mesh and striction polyline
    Reconstruct {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the full invariant/theorem check battery
    Verify {
        /// Surface specification (JSON)
        #[arg(long, required_unless_present = "all_builtins")]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// Verify every named example profile instead of a spec file
        #[arg(long, conflicts_with = "spec")]
        all_builtins: bool,
    },
}

fn parse_grid(text: &str) -> Result<(usize, usize), String> {
    let (nu, nv) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NUxNV, got `{text}`"))?;
    let nu: usize = nu.parse().map_err(|_| format!("bad nu in `{text}`"))?;
    let nv: usize = nv.parse().map_err(|_| format!("bad nv in `{text}`"))?;
    if nu < 2 || nv < 2 {
        return Err(format!("grid must be at least 2x2, got `{text}`"));
    }
    Ok((nu, nv))
}

fn run_one(
    common: &CommonArgs,
    f: impl FnOnce(
        &ruled_surfaces::spec_io::SurfaceSpec,
        &ruled_surfaces::spec_io::ResolvedSpec,
    ) -> Result<RunReport, RunError>,
) -> Result<RunReport, RunError> {
    let spec = load_spec(&common.spec)?;
    let resolved = resolve_spec(&spec, common.grid, common.tol)?;
    f(&spec, &resolved)
}

fn emit(report: &RunReport) {
    if report.outputs.is_empty() {
        println!("{}", report.to_json());
    } else {
        for path in &report.outputs {
            println!("wrote {path}");
        }
    }
}

fn run(cli: Cli) -> Result<bool, RunError> {
    match cli.command {
        Command::Analyze(common) => {
            let report = run_one(&common, |s, r| cmd_analyze(s, r, common.out.as_deref()))?;
            emit(&report);
            Ok(report.passed)
        }
        Command::Classify(common) => {
            let report = run_one(&common, |s, r| cmd_classify(s, r, common.out.as_deref()))?;
            emit(&report);
            let labels = report
                .classification
                .as_ref()
                .map(|c| c.class_labels.join("+"))
                .unwrap_or_default();
            eprintln!("class: {labels}");
            Ok(report.passed)
        }
        Command::Reconstruct { common } => {
            let out = common.out.clone().ok_or_else(|| {
                RunError::Spec(ruled_surfaces::spec_io::SpecError::Schema {
                    field: "--out".to_string(),
                    message: "reconstruct writes mesh files; an output directory is required"
                        .to_string(),
                })
            })?;
            let report = run_one(&common, |s, r| cmd_reconstruct(s, r, &out))?;
            emit(&report);
            Ok(report.passed)
        }
        Command::Verify { spec, out, tol, grid, all_builtins } => {
            if all_builtins {
                let reports = cmd_verify_all_builtins(out.as_deref())?;
                let mut all_passed = true;
                for (name, report) in &reports {
                    let failed: Vec<&str> = report
                        .checks
                        .iter()
                        .filter(|c| !c.passed)
                        .map(|c| c.name.as_str())
                        .collect();
                    if failed.is_empty() {
                        println!("{name}: ok ({} checks)", report.checks.len());
                    } else {
                        println!("{name}: FAILED {failed:?}");
                        all_passed = false;
                    }
                }
                return Ok(all_passed);
            }
            let common = CommonArgs { spec: spec.expect("required by clap"), out, tol, grid };
            let report = run_one(&common, |s, r| cmd_verify(s, r, common.out.as_deref()))?;
            emit(&report);
            for c in &report.checks {
                let status = if c.passed { "ok" } else { "FAIL" };
                eprintln!("{status}  {}  (residual {:.3e} vs {:.1e})", c.name, c.residual, c.tolerance);
            }
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
