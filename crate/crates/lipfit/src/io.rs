//! File formats.
//!
//! 1D fields are CSV with header `x,value` and 17-significant-digit
//! scientific notation (exact round-trip). 2D fields are a JSON object
//! `{dim, extent, n, h, mask, values}` with row-major mask bits and `null`
//! outside the mask; numbers use serde_json's shortest exact representation,
//! so re-parsing reproduces the bits.
//!
//! Every artifact written by the CLI embeds a provenance header: a JSON
//! object with the command line, grid spec, tolerances, and solver iteration
//! counts. In CSV files it rides in a leading `#` comment line, which the
//! readers here skip.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use lipfit_core::grid::{Grid, MaskSpec, ScalarField, StencilKind};
use lipfit_core::projector::Certificate;
use lipfit_core::sbv1d::JumpSolution;
use lipfit_core::viscosity::{BoundaryConditionTable, EikonalResiduals, RegionReport};
use serde::{Deserialize, Serialize};

/// Reproducibility header embedded in every artifact.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub command: Vec<String>,
    pub grid: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub tolerances: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub solver_iterations: Option<u64>,
}

#[derive(Debug)]
pub enum IoError {
    Io(io::Error),
    Json(serde_json::Error),
    /// malformed CSV row or header
    Format(String),
    /// file contents inconsistent with a valid grid/field
    Invalid(String),
}

impl std::fmt::Display for IoError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoError::Io(e) => write!(f, "{e}"),
            IoError::Json(e) => write!(f, "{e}"),
            IoError::Format(m) => write!(f, "format error: {m}"),
            IoError::Invalid(m) => write!(f, "invalid contents: {m}"),
        }
    }
}

impl std::error::Error for IoError {}

impl From<io::Error> for IoError {
    fn from(e: io::Error) -> Self {
        IoError::Io(e)
    }
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Json(e)
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.17e}")
}

/// Render a 1D field as CSV (`x,value`), optionally with a provenance
/// comment line.
pub fn field_to_csv(field: &ScalarField, provenance: Option<&Provenance>) -> String {
    let grid = field.grid();
    let mut out = String::new();
    if let Some(p) = provenance {
        let header = serde_json::to_string(p).expect("provenance serializes");
        let _ = writeln!(out, "# provenance: {header}");
    }
    out.push_str("x,value\n");
    for (i, v) in field.values().iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt17(grid.coords(i)[0]), fmt17(*v));
    }
    out
}

/// Parse a 1D CSV field, reconstructing its uniform grid from the x column.
pub fn field_from_csv(text: &str) -> Result<(Arc<Grid>, ScalarField), IoError> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "x,value" {
                return Err(IoError::Format(format!("expected header 'x,value', got '{line}'")));
            }
            saw_header = true;
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| IoError::Format(format!("bad row '{line}'")))?;
        let x: f64 = a.trim().parse().map_err(|_| IoError::Format(format!("bad x '{a}'")))?;
        let v: f64 = b.trim().parse().map_err(|_| IoError::Format(format!("bad value '{b}'")))?;
        xs.push(x);
        vs.push(v);
    }
    if xs.len() < 3 {
        return Err(IoError::Invalid("need at least 3 rows".into()));
    }
    let n = xs.len();
    let h = (xs[n - 1] - xs[0]) / ((n - 1) as f64);
    for (i, &x) in xs.iter().enumerate() {
        let expect = xs[0] + i as f64 * h;
        if (x - expect).abs() > 1e-9 * (1.0 + h.abs()) {
            return Err(IoError::Invalid(format!("non-uniform x at row {i}")));
        }
    }
    let grid = Grid::build(1, &[[xs[0], xs[n - 1]]], &[n], &MaskSpec::Full, StencilKind::Eight)
        .map_err(|e| IoError::Invalid(e.to_string()))?;
    let field =
        ScalarField::from_values(&grid, vs).map_err(|e| IoError::Invalid(e.to_string()))?;
    Ok((grid, field))
}

/// JSON form of a (possibly masked, possibly 2D) field.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldJson {
    pub dim: usize,
    pub extent: Vec<[f64; 2]>,
    pub n: Vec<usize>,
    pub h: Vec<f64>,
    /// row-major 0/1 over the full lattice
    pub mask: Vec<u8>,
    /// row-major, null outside the mask
    pub values: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sources: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

pub fn field_to_json(
    field: &ScalarField,
    sources: Option<&[usize]>,
    provenance: Option<&Provenance>,
) -> FieldJson {
    let grid = field.grid();
    let dim = grid.dim();
    let lattice = grid.mask().len();
    let mut values = vec![None; lattice];
    for node in 0..grid.num_nodes() {
        values[grid.lattice_index(node)] = Some(field.values()[node]);
    }
    FieldJson {
        dim,
        extent: (0..dim).map(|d| grid.extent(d)).collect(),
        n: (0..dim).map(|d| grid.n(d)).collect(),
        h: (0..dim).map(|d| grid.spacing(d)).collect(),
        mask: grid.mask().iter().map(|&b| b as u8).collect(),
        values,
        sources: sources.map(|s| s.to_vec()),
        provenance: provenance.cloned(),
    }
}

pub fn field_from_json(json: &FieldJson) -> Result<(Arc<Grid>, ScalarField), IoError> {
    let mask: Vec<bool> = json.mask.iter().map(|&b| b != 0).collect();
    let grid = Grid::build(
        json.dim,
        &json.extent,
        &json.n,
        &MaskSpec::Explicit(mask),
        StencilKind::Eight,
    )
    .map_err(|e| IoError::Invalid(e.to_string()))?;
    let mut values = Vec::with_capacity(grid.num_nodes());
    for node in 0..grid.num_nodes() {
        match json.values.get(grid.lattice_index(node)) {
            Some(Some(v)) => values.push(*v),
            _ => {
                return Err(IoError::Invalid(format!(
                    "missing value at masked lattice index {}",
                    grid.lattice_index(node)
                )))
            }
        }
    }
    let field =
        ScalarField::from_values(&grid, values).map_err(|e| IoError::Invalid(e.to_string()))?;
    Ok((grid, field))
}

/// Certificate serialization: `{iters, feas, inc, kkt, slack, converged}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateJson {
    pub iters: u64,
    pub feas: f64,
    pub inc: f64,
    pub kkt: f64,
    pub slack: f64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

impl CertificateJson {
    pub fn from_certificate(c: &Certificate, provenance: Option<&Provenance>) -> Self {
        CertificateJson {
            iters: c.iterations as u64,
            feas: c.max_violation,
            inc: c.increment,
            kkt: c.kkt_residual,
            slack: c.complementarity_gap,
            converged: c.converged,
            provenance: provenance.cloned(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegionsJson {
    pub tau: f64,
    pub omega_plus: Vec<u32>,
    pub omega_minus: Vec<u32>,
    pub a_plus: Vec<u32>,
    pub a_minus: Vec<u32>,
    pub boundary_plus: Vec<u32>,
    pub boundary_minus: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

impl RegionsJson {
    pub fn from_report(r: &RegionReport, provenance: Option<&Provenance>) -> Self {
        RegionsJson {
            tau: r.tau(),
            omega_plus: r.omega_plus().to_vec(),
            omega_minus: r.omega_minus().to_vec(),
            a_plus: r.a_plus().to_vec(),
            a_minus: r.a_minus().to_vec(),
            boundary_plus: r.boundary_plus().to_vec(),
            boundary_minus: r.boundary_minus().to_vec(),
            provenance: provenance.cloned(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResidualStatsJson {
    pub max: f64,
    pub mean: f64,
    pub count: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResidualsJson {
    pub eikonal_plus: ResidualStatsJson,
    pub eikonal_minus: ResidualStatsJson,
    /// max over evaluated nodes of |max{1−|∇u|, −Δ∞u}| (plus side) and
    /// |min{|∇u|−1, −Δ∞u}| (minus side)
    pub combined_plus_max: f64,
    pub combined_minus_max: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BoundaryRowJson {
    pub node: u32,
    pub side: i8,
    pub grad: f64,
    pub normal_derivative: f64,
    pub primary: f64,
    pub companion: f64,
    pub primary_ok: bool,
    pub companion_ok: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BoundaryJson {
    pub slack: f64,
    pub violations: u64,
    pub rows: Vec<BoundaryRowJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

impl BoundaryJson {
    pub fn from_table(t: &BoundaryConditionTable, provenance: Option<&Provenance>) -> Self {
        BoundaryJson {
            slack: t.slack,
            violations: t.violations as u64,
            rows: t
                .rows
                .iter()
                .map(|r| BoundaryRowJson {
                    node: r.node,
                    side: r.side,
                    grad: r.upwind_gradient,
                    normal_derivative: r.normal_derivative,
                    primary: r.primary,
                    companion: r.companion,
                    primary_ok: r.primary_ok,
                    companion_ok: r.companion_ok,
                })
                .collect(),
            provenance: provenance.cloned(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct JumpsJson {
    pub jumps: Vec<f64>,
    pub energy: f64,
    pub fidelity: f64,
    pub njumps: u64,
    pub penalty: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

impl JumpsJson {
    pub fn from_solution(s: &JumpSolution, provenance: Option<&Provenance>) -> Self {
        JumpsJson {
            jumps: s.jump_positions.clone(),
            energy: s.energy,
            fidelity: s.fidelity,
            njumps: s.jump_count as u64,
            penalty: s.penalty,
            provenance: provenance.cloned(),
        }
    }
}

/// Residual summary assembled by the verify pipeline.
pub fn residuals_json(
    eik: &EikonalResiduals,
    combined_plus_max: f64,
    combined_minus_max: f64,
    provenance: Option<&Provenance>,
) -> ResidualsJson {
    ResidualsJson {
        eikonal_plus: ResidualStatsJson {
            max: eik.plus.max,
            mean: eik.plus.mean,
            count: eik.plus.count as u64,
        },
        eikonal_minus: ResidualStatsJson {
            max: eik.minus.max,
            mean: eik.minus.mean,
            count: eik.minus.count as u64,
        },
        combined_plus_max,
        combined_minus_max,
        provenance: provenance.cloned(),
    }
}

/// Pretty-printed JSON with a trailing newline (single canonical rendering
/// keeps repeated runs byte-identical).
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Load a field from a `.csv` or `.json` path.
pub fn read_field_auto(path: &Path) -> Result<(Arc<Grid>, ScalarField), IoError> {
    let text = fs::read_to_string(path)?;
    if path.extension().map(|e| e == "json").unwrap_or(false) {
        let json: FieldJson = serde_json::from_str(&text)?;
        field_from_json(&json)
    } else {
        field_from_csv(&text)
    }
}

/// p-sweep rows as CSV.
pub fn sweep_to_csv(
    entries: &[lipfit_core::plaplace::PSweepEntry],
    provenance: Option<&Provenance>,
) -> String {
    let mut out = String::new();
    if let Some(p) = provenance {
        let header = serde_json::to_string(p).expect("provenance serializes");
        let _ = writeln!(out, "# provenance: {header}");
    }
    out.push_str("p,sup_distance,sup_norm,l2_norm,grad_lp_norm,mean_misfit,iterations\n");
    for e in entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(e.p),
            fmt17(e.sup_distance),
            fmt17(e.sup_norm),
            fmt17(e.l2_norm),
            fmt17(e.grad_lp_norm),
            fmt17(e.mean_misfit),
            e.iterations
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipfit_core::grid::Grid;

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let g = Grid::line(-1.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| (x * 37.123).sin() / 3.0).unwrap();
        let text = field_to_csv(&f, None);
        let (g2, f2) = field_from_csv(&text).unwrap();
        assert_eq!(g.num_nodes(), g2.num_nodes());
        for (a, b) in f.values().iter().zip(f2.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_with_provenance_comment_roundtrips() {
        let g = Grid::line(0.0, 2.0, 11).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| x * x).unwrap();
        let p = Provenance {
            command: vec!["lipfit".into(), "project".into()],
            grid: "line(0,2,11)".into(),
            tolerances: vec![("tol_feas".into(), 1e-8)],
            solver_iterations: Some(42),
        };
        let text = field_to_csv(&f, Some(&p));
        assert!(text.starts_with("# provenance: "));
        let (_, f2) = field_from_csv(&text).unwrap();
        assert_eq!(f.values(), f2.values());
    }

    #[test]
    fn json_roundtrip_with_mask() {
        let g = Grid::build(
            2,
            &[[-1.0, 1.0], [-1.0, 1.0]],
            &[9, 9],
            &MaskSpec::Disk { center: [0.0, 0.0], radius: 1.0 },
            StencilKind::Eight,
        )
        .unwrap();
        let f = ScalarField::from_fn(&g, |[x, y]| x * y + 0.25).unwrap();
        let json = field_to_json(&f, Some(&[0, 3]), None);
        let text = to_json_string(&json).unwrap();
        let parsed: FieldJson = serde_json::from_str(&text).unwrap();
        let (g2, f2) = field_from_json(&parsed).unwrap();
        assert_eq!(g.signature(), g2.signature());
        for (a, b) in f.values().iter().zip(f2.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(parsed.sources, Some(vec![0, 3]));
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(field_from_csv("nonsense\n1,2\n").is_err());
        assert!(field_from_csv("x,value\n0.0,1.0\n0.5,oops\n").is_err());
        // non-uniform spacing
        let bad = "x,value\n0,0\n0.5,0\n0.6,0\n1.0,0\n";
        assert!(matches!(field_from_csv(bad), Err(IoError::Invalid(_))));
    }
}
