//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 when a solver failed to
//! converge (artifacts are still written, flagged in the certificate).
//! Identical invocations produce byte-identical artifacts; every artifact
//! embeds a provenance header with the command line, grid spec, tolerances,
//! and iteration counts.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lipfit_core::envelope::{cone_error_from_report, lower_envelope, upper_envelope, ConeSign};
use lipfit_core::grid::{Grid, MaskSpec, ScalarField, StencilKind};
use lipfit_core::lip1d::project_lip_1d;
use lipfit_core::plaplace::{minimize_p, p_sweep};
use lipfit_core::projector::{
    kkt_residual, project_lip_dirichlet, project_lip_graph, Certificate, ProjectorError,
    ProjectorOptions,
};
use lipfit_core::sbv1d::minimize_sbv_1d;
use lipfit_core::viscosity::{
    boundary_condition_check, default_tau, eikonal_residual, infinity_laplacian_residual, regions,
    upwind_gradient,
};

use crate::builtins::Builtin;
use crate::io::{
    self, field_to_csv, field_to_json, read_field_auto, sweep_to_csv, to_json_string,
    BoundaryJson, CertificateJson, IoError, JumpsJson, Provenance, RegionsJson,
};

#[derive(Parser, Debug)]
#[command(
    name = "lipfit",
    version,
    about = "Best L2 approximation by 1-Lipschitz functions: solvers and verifiers",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Project the datum onto the 1-Lipschitz class
    Project(ProjectArgs),
    /// Finite-p continuation sweep toward the projection
    PlapSweep(SweepArgs),
    /// Upper/lower Lipschitz envelopes (extremal obstacle solutions)
    Envelope(EnvelopeArgs),
    /// Project, extract regions, and verify the limit PDE system
    Verify(VerifyArgs),
    /// 1D free-discontinuity minimization (fidelity + jump count)
    Sbv1d(SbvArgs),
    /// Reproduce a worked example end to end
    Examples(ExamplesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Solver {
    /// exact 1D dynamic programming when the grid is 1D, Dykstra otherwise
    Auto,
    Dp,
    Dykstra,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MaskArg {
    Full,
    Disk,
    Lshape,
}

#[derive(Args, Debug, Clone)]
struct DatumArgs {
    /// named builtin datum: 1 (plateau), 2 (steep vee), 3 (square root),
    /// radial (plateau on the unit disk)
    #[arg(long, value_name = "CASE")]
    case: Option<String>,

    /// read the datum from a field file (.csv 1D, .json masked 2D)
    #[arg(long, value_name = "FILE", conflicts_with = "case")]
    input: Option<PathBuf>,

    /// nodes per axis for builtin data
    #[arg(long, default_value_t = 2001)]
    n: usize,

    /// plateau height for case 1 / radial
    #[arg(long, default_value_t = 1.0)]
    k: f64,

    /// plateau half-width (case 1) or radius (radial)
    #[arg(long, default_value_t = 0.4)]
    r0: f64,

    /// 1D domain extent lo,hi for builtin cases
    #[arg(long, value_name = "LO,HI")]
    extent: Option<String>,

    /// mask for 2D builtin data
    #[arg(long, value_enum, default_value_t = MaskArg::Disk)]
    mask: MaskArg,

    /// 2D stencil: 8 or 16 neighbors
    #[arg(long, default_value_t = 8)]
    stencil: usize,
}

#[derive(Args, Debug, Clone)]
struct SolveArgs {
    /// feasibility tolerance (default 1e-8 x max edge length)
    #[arg(long)]
    tol_feas: Option<f64>,

    /// sweep-increment tolerance (default 1e-9 x ||f||_2)
    #[arg(long)]
    tol_inc: Option<f64>,

    /// Dykstra sweep budget
    #[arg(long, default_value_t = 200_000)]
    max_iter: usize,

    #[arg(long, value_enum, default_value_t = Solver::Auto)]
    solver: Solver,
}

#[derive(Args, Debug)]
struct OutArgs {
    /// output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,

    /// field format (default: csv in 1D, json in 2D)
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    #[command(flatten)]
    datum: DatumArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    out: OutArgs,
    /// zero-boundary variant via the clamped datum median(-delta, f, delta)
    #[arg(long)]
    dirichlet: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    datum: DatumArgs,
    #[command(flatten)]
    out: OutArgs,
    /// comma-separated increasing exponent list
    #[arg(long, value_name = "P1,P2,...", conflicts_with = "p")]
    ps: Option<String>,
    /// single exponent (one penalized solve)
    #[arg(long)]
    p: Option<f64>,
    /// descent tolerance factor (default 1e-8)
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct EnvelopeArgs {
    #[command(flatten)]
    datum: DatumArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    datum: DatumArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    out: OutArgs,
    /// region threshold (default max(1e-6, h))
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Args, Debug)]
struct SbvArgs {
    #[command(flatten)]
    datum: DatumArgs,
    #[command(flatten)]
    out: OutArgs,
    /// fidelity exponent r in {1, 2}
    #[arg(long, default_value_t = 2)]
    rexp: u8,
    /// jump penalty
    #[arg(long, default_value_t = 1.0)]
    penalty: f64,
}

#[derive(Args, Debug)]
struct ExamplesArgs {
    #[command(flatten)]
    datum: DatumArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    out: OutArgs,
    /// region threshold (default max(1e-6, h))
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
    /// artifacts written but a solver did not converge
    NonConverged,
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Failure(e.to_string())
    }
}

/// Entry point: returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut argv: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    // artifacts must not depend on where the binary lives
    if let Some(first) = argv.first_mut() {
        *first = "lipfit".to_string();
    }
    let cli = match Cli::try_parse_from(argv.iter()) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Project(a) => cmd_project(&argv, a),
        Command::PlapSweep(a) => cmd_sweep(&argv, a),
        Command::Envelope(a) => cmd_envelope(&argv, a),
        Command::Verify(a) => cmd_verify(&argv, a),
        Command::Sbv1d(a) => cmd_sbv(&argv, a),
        Command::Examples(a) => cmd_examples(&argv, a),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::NonConverged) => {
            eprintln!("solver did not converge; artifacts written with converged=false");
            2
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn parse_extent(s: &str) -> Result<[f64; 2], CliError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("--extent expects LO,HI, got '{s}'")))?;
    let lo: f64 = a.trim().parse().map_err(|_| CliError::Usage(format!("bad extent '{s}'")))?;
    let hi: f64 = b.trim().parse().map_err(|_| CliError::Usage(format!("bad extent '{s}'")))?;
    Ok([lo, hi])
}

struct LoadedDatum {
    grid: Arc<Grid>,
    f: ScalarField,
    grid_spec: String,
}

fn load_datum(d: &DatumArgs) -> Result<LoadedDatum, CliError> {
    if let Some(path) = &d.input {
        let (grid, f) = read_field_auto(path).map_err(|e| CliError::Failure(e.to_string()))?;
        let spec = format!(
            "file:{} dim={} n={:?}",
            path.display(),
            grid.dim(),
            (0..grid.dim()).map(|a| grid.n(a)).collect::<Vec<_>>()
        );
        return Ok(LoadedDatum { grid, f, grid_spec: spec });
    }
    let case = d
        .case
        .as_deref()
        .ok_or_else(|| CliError::Usage("one of --case or --input is required".into()))?;
    let stencil = match d.stencil {
        8 => StencilKind::Eight,
        16 => StencilKind::Sixteen,
        other => return Err(CliError::Usage(format!("--stencil must be 8 or 16, got {other}"))),
    };
    if !(d.n >= 3) {
        return Err(CliError::Usage(format!("--n must be at least 3, got {}", d.n)));
    }
    let builtin = match case {
        "1" | "case1" => Builtin::Case1 { k: d.k, r: d.r0 },
        "2" | "case2" => Builtin::Case2,
        "3" | "case3" => Builtin::Case3,
        "radial" => Builtin::Radial { k: d.k, r: d.r0 },
        other => {
            return Err(CliError::Usage(format!(
                "unknown case '{other}' (expected 1, 2, 3, or radial)"
            )))
        }
    };
    let (grid, f, spec) = if builtin.is_radial() {
        let mask = match d.mask {
            MaskArg::Disk => MaskSpec::Disk { center: [0.0, 0.0], radius: 1.0 },
            MaskArg::Full => MaskSpec::Full,
            MaskArg::Lshape => MaskSpec::LShape,
        };
        let grid = Grid::build(2, &[[-1.0, 1.0], [-1.0, 1.0]], &[d.n, d.n], &mask, stencil)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let (k, r) = (d.k, d.r0);
        let f = ScalarField::from_fn(&grid, move |[x, y]| if x.hypot(y) < r { k } else { 0.0 })
            .map_err(|e| CliError::Failure(e.to_string()))?;
        let spec = format!(
            "radial k={} r0={} mask={:?} n={}x{} stencil={}",
            d.k, d.r0, d.mask, d.n, d.n, d.stencil
        );
        (grid, f, spec)
    } else {
        let [lo, hi] = d.extent.as_deref().map(parse_extent).transpose()?.unwrap_or([-1.0, 1.0]);
        let grid = Grid::build(1, &[[lo, hi]], &[d.n], &MaskSpec::Full, stencil)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let rule: Box<dyn Fn(f64) -> f64> = match builtin {
            Builtin::Case1 { k, r } => Box::new(move |x| if x.abs() < r { k } else { 0.0 }),
            Builtin::Case2 => Box::new(|x| 2.0 * x.abs()),
            Builtin::Case3 => Box::new(|x| x.abs().sqrt()),
            Builtin::Radial { .. } => unreachable!(),
        };
        let f = ScalarField::from_fn_1d(&grid, rule)
            .map_err(|e| CliError::Failure(e.to_string()))?;
        let spec = format!("case{case} n={} extent=[{lo},{hi}]", d.n);
        (grid, f, spec)
    };
    Ok(LoadedDatum { grid, f, grid_spec: spec })
}

fn provenance(argv: &[String], spec: &str, tols: Vec<(String, f64)>, iters: Option<u64>) -> Provenance {
    Provenance {
        command: argv.to_vec(),
        grid: spec.to_string(),
        tolerances: tols,
        solver_iterations: iters,
    }
}

fn write_field(
    dir: &Path,
    stem: &str,
    field: &ScalarField,
    format: Option<Format>,
    prov: &Provenance,
) -> Result<(), CliError> {
    let fmt = match format {
        Some(f) => f,
        None => {
            if field.grid().dim() == 1 {
                Format::Csv
            } else {
                Format::Json
            }
        }
    };
    match fmt {
        Format::Csv => {
            if field.grid().dim() != 1 {
                return Err(CliError::Usage(
                    "csv field format is only defined for 1D grids; use --format json".into(),
                ));
            }
            io::write_text(&dir.join(format!("{stem}.csv")), &field_to_csv(field, Some(prov)))?;
        }
        Format::Json => {
            let json = field_to_json(field, None, Some(prov));
            io::write_text(&dir.join(format!("{stem}.json")), &to_json_string(&json)?)?;
        }
    }
    Ok(())
}

// Run the requested projection route; on sweep exhaustion return the best
// iterate with converged=false so artifacts can still be written.
fn solve_projection(
    f: &ScalarField,
    solve: &SolveArgs,
    dirichlet: bool,
) -> Result<(ScalarField, Certificate, bool), CliError> {
    let route_dp = match solve.solver {
        Solver::Dp => {
            if f.grid().dim() != 1 {
                return Err(CliError::Usage("--solver dp requires a 1D grid".into()));
            }
            true
        }
        Solver::Auto => f.grid().dim() == 1 && !dirichlet,
        Solver::Dykstra => false,
    };
    if route_dp && !dirichlet {
        let u = project_lip_1d(f, 1.0).map_err(|e| CliError::Failure(e.to_string()))?;
        let cert = kkt_residual(&u, f).map_err(|e| CliError::Failure(e.to_string()))?;
        return Ok((u, cert, true));
    }
    let opts = ProjectorOptions {
        tol_feas: solve.tol_feas,
        tol_inc: solve.tol_inc,
        max_sweeps: solve.max_iter,
        compute_kkt: true,
    };
    let result = if dirichlet {
        project_lip_dirichlet(f, &opts)
    } else {
        project_lip_graph(f, &opts)
    };
    match result {
        Ok((u, cert)) => Ok((u, cert, true)),
        Err(ProjectorError::MaxSweepsExceeded { field, certificate }) => {
            Ok((field, certificate, false))
        }
        Err(e) => Err(CliError::Failure(e.to_string())),
    }
}

fn solver_tols(f: &ScalarField, solve: &SolveArgs) -> Vec<(String, f64)> {
    let max_len = f.grid().edges().iter().fold(0.0f64, |m, e| m.max(e.len));
    vec![
        ("tol_feas".into(), solve.tol_feas.unwrap_or(1e-8 * max_len)),
        ("tol_inc".into(), solve.tol_inc.unwrap_or(1e-9 * f.l2_norm())),
        ("max_iter".into(), solve.max_iter as f64),
    ]
}

fn cmd_project(argv: &[String], a: ProjectArgs) -> Result<(), CliError> {
    let datum = load_datum(&a.datum)?;
    let (u, cert, converged) = solve_projection(&datum.f, &a.solve, a.dirichlet)?;
    let prov = provenance(
        argv,
        &datum.grid_spec,
        solver_tols(&datum.f, &a.solve),
        Some(cert.iterations as u64),
    );
    write_field(&a.out.out, "f", &datum.f, a.out.format, &prov)?;
    write_field(&a.out.out, "u", &u, a.out.format, &prov)?;
    let cert_json = CertificateJson::from_certificate(&cert, Some(&prov));
    io::write_text(&a.out.out.join("certificate.json"), &to_json_string(&cert_json)?)?;
    if converged {
        Ok(())
    } else {
        Err(CliError::NonConverged)
    }
}

fn cmd_sweep(argv: &[String], a: SweepArgs) -> Result<(), CliError> {
    let datum = load_datum(&a.datum)?;
    let prov = provenance(argv, &datum.grid_spec, Vec::new(), None);
    if let Some(p) = a.p {
        let (u, iters) =
            minimize_p(&datum.f, p, a.tol, None).map_err(|e| CliError::Failure(e.to_string()))?;
        let prov = provenance(argv, &datum.grid_spec, Vec::new(), Some(iters as u64));
        write_field(&a.out.out, "f", &datum.f, a.out.format, &prov)?;
        write_field(&a.out.out, "u_p", &u, a.out.format, &prov)?;
        return Ok(());
    }
    let ps_text = a
        .ps
        .ok_or_else(|| CliError::Usage("one of --ps or --p is required".into()))?;
    let ps: Vec<f64> = ps_text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("bad exponent list '{ps_text}'")))?;
    let report =
        p_sweep(&datum.f, &ps, a.tol).map_err(|e| CliError::Failure(e.to_string()))?;
    io::write_text(&a.out.out.join("sweep.csv"), &sweep_to_csv(&report.entries, Some(&prov)))?;
    write_field(&a.out.out, "f", &datum.f, a.out.format, &prov)?;
    write_field(&a.out.out, "reference", &report.reference, a.out.format, &prov)?;
    Ok(())
}

fn cmd_envelope(argv: &[String], a: EnvelopeArgs) -> Result<(), CliError> {
    let datum = load_datum(&a.datum)?;
    let prov = provenance(argv, &datum.grid_spec, Vec::new(), None);
    let upper = upper_envelope(&datum.f);
    let lower = lower_envelope(&datum.f);
    write_field(&a.out.out, "f", &datum.f, a.out.format, &prov)?;
    write_field(&a.out.out, "upper", &upper, a.out.format, &prov)?;
    write_field(&a.out.out, "lower", &lower, a.out.format, &prov)?;
    Ok(())
}

// Shared verify pipeline: regions, eikonal residuals, combined
// infinity-Laplacian residuals, boundary table.
fn verify_artifacts(
    dir: &Path,
    format: Option<Format>,
    u: &ScalarField,
    f: &ScalarField,
    tau: Option<f64>,
    prov: &Provenance,
) -> Result<(), CliError> {
    let tau = tau.unwrap_or_else(|| default_tau(u.grid()));
    let report = regions(u, f, tau).map_err(|e| CliError::Failure(e.to_string()))?;
    let eik = eikonal_residual(u, &report).map_err(|e| CliError::Failure(e.to_string()))?;
    let inf = infinity_laplacian_residual(u);
    // combined residuals of the equivalent second-order form, at the same
    // evaluated nodes as the eikonal stats
    let mut combined_plus = 0.0f64;
    for &v in &eik.evaluated_plus {
        let g = upwind_gradient(u, v as usize, -1.0);
        combined_plus = combined_plus.max((1.0 - g).max(-inf.values()[v as usize]).abs());
    }
    let mut combined_minus = 0.0f64;
    for &v in &eik.evaluated_minus {
        let g = upwind_gradient(u, v as usize, 1.0);
        combined_minus = combined_minus.max((g - 1.0).min(-inf.values()[v as usize]).abs());
    }
    let table = boundary_condition_check(u, f, &report)
        .map_err(|e| CliError::Failure(e.to_string()))?;

    let regions_json = RegionsJson::from_report(&report, Some(prov));
    io::write_text(&dir.join("regions.json"), &to_json_string(&regions_json)?)?;
    let residuals = io::residuals_json(&eik, combined_plus, combined_minus, Some(prov));
    io::write_text(&dir.join("residuals.json"), &to_json_string(&residuals)?)?;
    let boundary = BoundaryJson::from_table(&table, Some(prov));
    io::write_text(&dir.join("boundary.json"), &to_json_string(&boundary)?)?;
    let _ = format;
    Ok(())
}

fn cmd_verify(argv: &[String], a: VerifyArgs) -> Result<(), CliError> {
    let datum = load_datum(&a.datum)?;
    let (u, cert, converged) = solve_projection(&datum.f, &a.solve, false)?;
    let prov = provenance(
        argv,
        &datum.grid_spec,
        solver_tols(&datum.f, &a.solve),
        Some(cert.iterations as u64),
    );
    write_field(&a.out.out, "f", &datum.f, a.out.format, &prov)?;
    write_field(&a.out.out, "u", &u, a.out.format, &prov)?;
    let cert_json = CertificateJson::from_certificate(&cert, Some(&prov));
    io::write_text(&a.out.out.join("certificate.json"), &to_json_string(&cert_json)?)?;
    verify_artifacts(&a.out.out, a.out.format, &u, &datum.f, a.tau, &prov)?;
    if converged {
        Ok(())
    } else {
        Err(CliError::NonConverged)
    }
}

fn cmd_sbv(argv: &[String], a: SbvArgs) -> Result<(), CliError> {
    let datum = load_datum(&a.datum)?;
    if datum.grid.dim() != 1 {
        return Err(CliError::Usage("sbv1d requires a 1D datum".into()));
    }
    let sol = minimize_sbv_1d(&datum.f, a.rexp, a.penalty)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let prov = provenance(argv, &datum.grid_spec, vec![("penalty".into(), a.penalty)], None);
    write_field(&a.out.out, "f", &datum.f, a.out.format, &prov)?;
    let glued = sol.to_field(&datum.f).map_err(|e| CliError::Failure(e.to_string()))?;
    write_field(&a.out.out, "solution", &glued, a.out.format, &prov)?;
    let jumps = JumpsJson::from_solution(&sol, Some(&prov));
    io::write_text(&a.out.out.join("jumps.json"), &to_json_string(&jumps)?)?;
    Ok(())
}

fn cmd_examples(argv: &[String], a: ExamplesArgs) -> Result<(), CliError> {
    let datum = load_datum(&a.datum)?;
    let (u, cert, converged) = solve_projection(&datum.f, &a.solve, false)?;
    let prov = provenance(
        argv,
        &datum.grid_spec,
        solver_tols(&datum.f, &a.solve),
        Some(cert.iterations as u64),
    );
    write_field(&a.out.out, "f", &datum.f, a.out.format, &prov)?;
    write_field(&a.out.out, "u", &u, a.out.format, &prov)?;
    let cert_json = CertificateJson::from_certificate(&cert, Some(&prov));
    io::write_text(&a.out.out.join("certificate.json"), &to_json_string(&cert_json)?)?;
    verify_artifacts(&a.out.out, a.out.format, &u, &datum.f, a.tau, &prov)?;
    // cone representation diagnostics round out the example reproduction
    let tau = a.tau.unwrap_or_else(|| default_tau(u.grid()));
    let report = regions(&u, &datum.f, tau).map_err(|e| CliError::Failure(e.to_string()))?;
    let plus = cone_error_from_report(&u, &report, ConeSign::Plus)
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let minus = cone_error_from_report(&u, &report, ConeSign::Minus)
        .map_err(|e| CliError::Failure(e.to_string()))?;
    #[derive(serde::Serialize)]
    struct ConeJson {
        plus_max_error: f64,
        plus_region_size: u64,
        minus_max_error: f64,
        minus_region_size: u64,
        provenance: Provenance,
    }
    let cone = ConeJson {
        plus_max_error: plus.max_error,
        plus_region_size: plus.region_size as u64,
        minus_max_error: minus.max_error,
        minus_region_size: minus.region_size as u64,
        provenance: prov.clone(),
    };
    io::write_text(&a.out.out.join("cones.json"), &to_json_string(&cone)?)?;
    if converged {
        Ok(())
    } else {
        Err(CliError::NonConverged)
    }
}
