//! Discrete verification of the limit PDE system satisfied by the projection:
//! region extraction for {u ≷ f}, upwind eikonal residuals, a two-extreme-
//! neighbor infinity-Laplacian scheme, and the boundary-condition tables.
//!
//! Sign conventions: in Ω⁻ (u < f) the solution is a minimum of upward cones
//! and the Rouy–Tourin magnitude is applied to u directly; in Ω⁺ (u > f) it
//! is a maximum of downward cones and the scheme is applied to −u. Pointwise
//! residuals are meaningless at cone vertices and across region boundaries
//! (the equations hold there only in the viscosity sense), so statistics
//! exclude a 2-hop collar around region boundaries and around strict local
//! extrema of u inside the region. Strictness matters: a constant field has
//! no strict extrema, so forcing Ω⁻ on u ≡ 0 still reports residual 1.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{Grid, GridError, ScalarField};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum ViscosityError {
    /// u and f live on different grids, or a report was built elsewhere
    GridMismatch,
    /// tau must be nonnegative
    InvalidThreshold(f64),
    Grid(GridError),
}

impl fmt::Display for ViscosityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViscosityError::GridMismatch => write!(f, "fields live on different grids"),
            ViscosityError::InvalidThreshold(t) => write!(f, "invalid threshold {t}"),
            ViscosityError::Grid(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ViscosityError {}

impl From<GridError> for ViscosityError {
    fn from(e: GridError) -> Self {
        ViscosityError::Grid(e)
    }
}

/// Default contact threshold: separates genuine contact {u = f} from
/// discretization noise.
pub fn default_tau(grid: &Grid) -> f64 {
    grid.h_min().max(1e-6)
}

/// Node sets of the sign regions of u − f.
#[derive(Debug, Clone)]
pub struct RegionReport {
    grid_signature: u64,
    tau: f64,
    omega_plus: Vec<u32>,
    omega_minus: Vec<u32>,
    a_plus: Vec<u32>,
    a_minus: Vec<u32>,
    boundary_plus: Vec<u32>,
    boundary_minus: Vec<u32>,
    in_omega_plus: Vec<bool>,
    in_omega_minus: Vec<bool>,
    in_a_plus: Vec<bool>,
    in_a_minus: Vec<bool>,
}

impl RegionReport {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Interior nodes with u − f > tau.
    pub fn omega_plus(&self) -> &[u32] {
        &self.omega_plus
    }

    /// Interior nodes with f − u > tau.
    pub fn omega_minus(&self) -> &[u32] {
        &self.omega_minus
    }

    /// Graph closure of Ω⁺ (support of (u−f)⁺).
    pub fn a_plus(&self) -> &[u32] {
        &self.a_plus
    }

    pub fn a_minus(&self) -> &[u32] {
        &self.a_minus
    }

    /// Grid-boundary nodes with u − f > tau.
    pub fn boundary_plus(&self) -> &[u32] {
        &self.boundary_plus
    }

    pub fn boundary_minus(&self) -> &[u32] {
        &self.boundary_minus
    }

    pub fn in_omega_plus(&self, node: usize) -> bool {
        self.in_omega_plus[node]
    }

    pub fn in_omega_minus(&self, node: usize) -> bool {
        self.in_omega_minus[node]
    }

    pub fn in_a_plus(&self, node: usize) -> bool {
        self.in_a_plus[node]
    }

    pub fn in_a_minus(&self, node: usize) -> bool {
        self.in_a_minus[node]
    }

    pub fn grid_signature(&self) -> u64 {
        self.grid_signature
    }

    /// Force Ω⁻ to a given node set (testing aid: e.g. check δ against the
    /// eikonal equation on the whole interior).
    pub fn with_forced_minus(grid: &Grid, nodes: &[usize]) -> RegionReport {
        let nv = grid.num_nodes();
        let mut in_minus = vec![false; nv];
        for &v in nodes {
            in_minus[v] = true;
        }
        let omega_minus: Vec<u32> = nodes.iter().map(|&v| v as u32).collect();
        RegionReport {
            grid_signature: grid.signature(),
            tau: 0.0,
            omega_plus: Vec::new(),
            omega_minus: omega_minus.clone(),
            a_plus: Vec::new(),
            a_minus: omega_minus,
            boundary_plus: Vec::new(),
            boundary_minus: Vec::new(),
            in_omega_plus: vec![false; nv],
            in_omega_minus: in_minus.clone(),
            in_a_plus: vec![false; nv],
            in_a_minus: in_minus,
        }
    }
}

/// Extract Ω^± = {±(u − f) > tau}, their graph closures A^±, and the
/// boundary subsets (∂Ω)^±.
pub fn regions(u: &ScalarField, f: &ScalarField, tau: f64) -> Result<RegionReport, ViscosityError> {
    u.check_same_grid(f).map_err(|_| ViscosityError::GridMismatch)?;
    if !(tau >= 0.0) {
        return Err(ViscosityError::InvalidThreshold(tau));
    }
    let grid = u.grid();
    let nv = grid.num_nodes();
    let mut in_op = vec![false; nv];
    let mut in_om = vec![false; nv];
    let mut bp = Vec::new();
    let mut bm = Vec::new();
    for v in 0..nv {
        let d = u.values()[v] - f.values()[v];
        if d > tau {
            if grid.is_boundary(v) {
                bp.push(v as u32);
            } else {
                in_op[v] = true;
            }
        } else if -d > tau {
            if grid.is_boundary(v) {
                bm.push(v as u32);
            } else {
                in_om[v] = true;
            }
        }
    }
    let close = |inside: &[bool]| -> Vec<bool> {
        let mut out = inside.to_vec();
        for v in 0..nv {
            if inside[v] {
                for &(w, _) in grid.neighbors(v) {
                    out[w as usize] = true;
                }
            }
        }
        out
    };
    let in_ap = close(&in_op);
    let in_am = close(&in_om);
    let collect = |flags: &[bool]| -> Vec<u32> {
        flags
            .iter()
            .enumerate()
            .filter_map(|(v, &b)| b.then_some(v as u32))
            .collect()
    };
    Ok(RegionReport {
        grid_signature: grid.signature(),
        tau,
        omega_plus: collect(&in_op),
        omega_minus: collect(&in_om),
        a_plus: collect(&in_ap),
        a_minus: collect(&in_am),
        boundary_plus: bp,
        boundary_minus: bm,
        in_omega_plus: in_op,
        in_omega_minus: in_om,
        in_a_plus: in_ap,
        in_a_minus: in_am,
    })
}

/// Rouy–Tourin upwind gradient magnitude of `sign`·u at a node:
/// √ Σ_d max(D⁻_d, −D⁺_d, 0)², one-sided terms dropped where a neighbor is
/// missing. Consistent with viscosity solutions whose cones open upward.
pub fn upwind_gradient(u: &ScalarField, node: usize, sign: f64) -> f64 {
    let grid = u.grid();
    let vals = u.values();
    let mut sumsq = 0.0;
    for axis in 0..grid.dim() {
        let h = grid.spacing(axis);
        let here = sign * vals[node];
        let mut g = 0.0f64;
        if let Some(back) = grid.axis_neighbor(node, axis, -1) {
            g = g.max((here - sign * vals[back]) / h);
        }
        if let Some(fwd) = grid.axis_neighbor(node, axis, 1) {
            g = g.max(-((sign * vals[fwd] - here) / h));
        }
        sumsq += g * g;
    }
    math::sqrt(sumsq)
}

/// Residual statistics over the evaluated nodes of one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

impl ResidualStats {
    fn empty() -> Self {
        ResidualStats { max: 0.0, mean: 0.0, count: 0 }
    }

    fn from_values(vals: &[f64]) -> Self {
        if vals.is_empty() {
            return Self::empty();
        }
        let max = vals.iter().fold(0.0f64, |m, &v| m.max(v));
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        ResidualStats { max, mean, count: vals.len() }
    }
}

/// Per-region eikonal residuals | |∇u|_upwind − 1 |.
#[derive(Debug, Clone)]
pub struct EikonalResiduals {
    pub plus: ResidualStats,
    pub minus: ResidualStats,
    /// residual where evaluated, NaN elsewhere (serializes as null)
    pub per_node: Vec<f64>,
    pub evaluated_plus: Vec<u32>,
    pub evaluated_minus: Vec<u32>,
}

// Nodes within `hops` of a flagged node (in the stencil graph).
fn dilate(grid: &Grid, flagged: &[bool], hops: usize) -> Vec<bool> {
    let mut cur = flagged.to_vec();
    for _ in 0..hops {
        let mut next = cur.clone();
        for v in 0..grid.num_nodes() {
            if cur[v] {
                for &(w, _) in grid.neighbors(v) {
                    next[w as usize] = true;
                }
            }
        }
        cur = next;
    }
    cur
}

// Strict local extrema of u restricted to a region (cone vertices, where
// pointwise upwind residuals are scheme artifacts).
fn strict_extrema(grid: &Grid, vals: &[f64], in_region: &[bool]) -> Vec<bool> {
    let nv = grid.num_nodes();
    let mut out = vec![false; nv];
    for v in 0..nv {
        if !in_region[v] {
            continue;
        }
        let mut is_max = true;
        let mut is_min = true;
        for &(w, _) in grid.neighbors(v) {
            if vals[w as usize] >= vals[v] {
                is_max = false;
            }
            if vals[w as usize] <= vals[v] {
                is_min = false;
            }
            if !is_max && !is_min {
                break;
            }
        }
        out[v] = is_max || is_min;
    }
    out
}

fn region_residuals(
    u: &ScalarField,
    in_region: &[bool],
    sign: f64,
    per_node: &mut [f64],
    evaluated: &mut Vec<u32>,
) -> ResidualStats {
    let grid = u.grid();
    let nv = grid.num_nodes();
    // outside-the-region flags seed the collar
    let outside: Vec<bool> = (0..nv).map(|v| !in_region[v]).collect();
    let near_boundary = dilate(grid, &outside, 2);
    let vertices = strict_extrema(grid, u.values(), in_region);
    let near_vertex = dilate(grid, &vertices, 2);
    let mut vals = Vec::new();
    for v in 0..nv {
        if !in_region[v] || near_boundary[v] || near_vertex[v] {
            continue;
        }
        let r = (upwind_gradient(u, v, sign) - 1.0).abs();
        per_node[v] = r;
        evaluated.push(v as u32);
        vals.push(r);
    }
    ResidualStats::from_values(&vals)
}

/// Evaluate the eikonal residuals of the limit system: | |∇u| − 1 | with the
/// scheme on u in Ω⁻ and on −u in Ω⁺. Empty regions yield empty stats.
pub fn eikonal_residual(
    u: &ScalarField,
    report: &RegionReport,
) -> Result<EikonalResiduals, ViscosityError> {
    if u.grid().signature() != report.grid_signature {
        return Err(ViscosityError::GridMismatch);
    }
    let nv = u.grid().num_nodes();
    let mut per_node = vec![f64::NAN; nv];
    let mut evaluated_plus = Vec::new();
    let mut evaluated_minus = Vec::new();
    let plus = region_residuals(u, &report.in_omega_plus, -1.0, &mut per_node, &mut evaluated_plus);
    let minus = region_residuals(u, &report.in_omega_minus, 1.0, &mut per_node, &mut evaluated_minus);
    Ok(EikonalResiduals { plus, minus, per_node, evaluated_plus, evaluated_minus })
}

/// Two-extreme-neighbor infinity-Laplacian scheme,
/// (max slope + min slope) / h over all stencil neighbors. This is the
/// normalized operator (the plain one divided by |∇u|²); for u = ½x² in 1D
/// it returns ≈ 1 at interior nodes.
pub fn infinity_laplacian_residual(u: &ScalarField) -> ScalarField {
    let grid = u.grid().clone();
    let vals = u.values();
    let h = grid.h_min();
    let out: Vec<f64> = (0..grid.num_nodes())
        .map(|v| {
            let mut smax = f64::NEG_INFINITY;
            let mut smin = f64::INFINITY;
            for &(w, len) in grid.neighbors(v) {
                let s = (vals[w as usize] - vals[v]) / len;
                smax = smax.max(s);
                smin = smin.min(s);
            }
            (smax + smin) / h
        })
        .collect();
    ScalarField::from_values(&grid, out).expect("finite by construction")
}

/// One row of the boundary-condition table.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryConditionRow {
    pub node: u32,
    /// +1 for (∂Ω)⁺, −1 for (∂Ω)⁻
    pub side: i8,
    pub upwind_gradient: f64,
    pub normal_derivative: f64,
    /// 1 − |∇u| on the plus side, |∇u| − 1 on the minus side
    pub primary: f64,
    /// max{1 − |∇u|, ∂u/∂ν} on the plus side, min{|∇u| − 1, ∂u/∂ν} on minus
    pub companion: f64,
    pub primary_ok: bool,
    pub companion_ok: bool,
}

/// Evaluation of the four boundary inequalities with a fixed slack.
#[derive(Debug, Clone)]
pub struct BoundaryConditionTable {
    pub rows: Vec<BoundaryConditionRow>,
    pub slack: f64,
    pub violations: usize,
}

impl BoundaryConditionTable {
    pub fn all_hold(&self) -> bool {
        self.violations == 0
    }
}

/// One-sided inward difference along the best-aligned stencil neighbor,
/// approximating ∂u/∂ν at a boundary node.
pub fn normal_derivative(u: &ScalarField, node: usize) -> f64 {
    let grid = u.grid();
    let nrm = grid.outward_normal(node);
    let [x, y] = grid.coords(node);
    let mut best_align = f64::NEG_INFINITY;
    let mut deriv = 0.0;
    for &(w, len) in grid.neighbors(node) {
        let [wx, wy] = grid.coords(w as usize);
        let align = ((x - wx) * nrm[0] + (y - wy) * nrm[1]) / len;
        if align > best_align {
            best_align = align;
            deriv = (u.values()[node] - u.values()[w as usize]) / len;
        }
    }
    deriv
}

/// Check the four boundary inequalities of the limit system on (∂Ω)^±
/// with slack 3h.
pub fn boundary_condition_check(
    u: &ScalarField,
    f: &ScalarField,
    report: &RegionReport,
) -> Result<BoundaryConditionTable, ViscosityError> {
    u.check_same_grid(f).map_err(|_| ViscosityError::GridMismatch)?;
    if u.grid().signature() != report.grid_signature {
        return Err(ViscosityError::GridMismatch);
    }
    let slack = 3.0 * u.grid().h_min();
    let mut rows = Vec::new();
    let mut violations = 0usize;
    for (side, nodes) in [(1i8, &report.boundary_plus), (-1i8, &report.boundary_minus)] {
        for &b in nodes.iter() {
            let v = b as usize;
            let nd = normal_derivative(u, v);
            let g = upwind_gradient(u, v, if side > 0 { -1.0 } else { 1.0 });
            let (primary, companion) = if side > 0 {
                (1.0 - g, (1.0 - g).max(nd))
            } else {
                (g - 1.0, (g - 1.0).min(nd))
            };
            let (primary_ok, companion_ok) = if side > 0 {
                (primary <= slack, companion >= -slack)
            } else {
                (primary >= -slack, companion <= slack)
            };
            if !primary_ok {
                violations += 1;
            }
            if !companion_ok {
                violations += 1;
            }
            rows.push(BoundaryConditionRow {
                node: b,
                side,
                upwind_gradient: g,
                normal_derivative: nd,
                primary,
                companion,
                primary_ok,
                companion_ok,
            });
        }
    }
    Ok(BoundaryConditionTable { rows, slack, violations })
}

/// Discrete form of the double viscosity inequality satisfied by every
/// member of the Lipschitz class: both upwind magnitudes stay ≤ 1 up to the
/// stencil anisotropy, away from cone vertices.
#[derive(Debug, Clone, Copy)]
pub struct DoubleInequality {
    /// sup over interior nodes of the scheme on u
    pub max_up: f64,
    /// sup over interior nodes of the scheme on −u
    pub max_down: f64,
    /// same, excluding a 2-hop collar around strict extrema of u
    pub max_up_robust: f64,
    pub max_down_robust: f64,
}

/// Evaluate the double inequality for a (presumed graph-feasible) field.
pub fn double_inequality_check(u: &ScalarField) -> DoubleInequality {
    let grid = u.grid();
    let nv = grid.num_nodes();
    let all = vec![true; nv];
    let vertices = strict_extrema(grid, u.values(), &all);
    let near_vertex = dilate(grid, &vertices, 2);
    let mut out = DoubleInequality {
        max_up: 0.0,
        max_down: 0.0,
        max_up_robust: 0.0,
        max_down_robust: 0.0,
    };
    for v in 0..nv {
        if grid.is_boundary(v) {
            continue;
        }
        let up = upwind_gradient(u, v, 1.0);
        let down = upwind_gradient(u, v, -1.0);
        out.max_up = out.max_up.max(up);
        out.max_down = out.max_down.max(down);
        if !near_vertex[v] {
            out.max_up_robust = out.max_up_robust.max(up);
            out.max_down_robust = out.max_down_robust.max(down);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn equal_fields_have_empty_regions() {
        let g = Grid::line(-1.0, 1.0, 51).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| x).unwrap();
        let rep = regions(&f, &f, default_tau(&g)).unwrap();
        assert!(rep.omega_plus().is_empty());
        assert!(rep.omega_minus().is_empty());
        assert!(rep.boundary_plus().is_empty());
        assert!(rep.boundary_minus().is_empty());
    }

    #[test]
    fn case2_regions_cross_at_half() {
        let g = Grid::line(-1.0, 1.0, 401).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 2.0 * x.abs()).unwrap();
        let u = ScalarField::from_fn_1d(&g, |x| x.abs() + 0.5).unwrap();
        let tau = default_tau(&g);
        let rep = regions(&u, &f, tau).unwrap();
        let h = g.spacing(0);
        // u − f = 1/2 − |x|: positive inside |x| < 1/2
        for &v in rep.omega_plus() {
            let x = g.coords(v as usize)[0];
            assert!(x.abs() < 0.5 + 2.0 * h + tau);
        }
        for &v in rep.omega_minus() {
            let x = g.coords(v as usize)[0];
            assert!(x.abs() > 0.5 - 2.0 * h - tau);
        }
        assert!(!rep.omega_plus().is_empty());
        assert!(!rep.omega_minus().is_empty());
        // boundary nodes are on the minus side: u(±1) = 1.5 < 2 = f(±1)
        assert!(rep.boundary_plus().is_empty());
        assert_eq!(rep.boundary_minus().len(), 2);
    }

    #[test]
    fn zero_field_fails_forced_eikonal() {
        let g = Grid::line(-1.0, 1.0, 101).unwrap();
        let u = ScalarField::constant(&g, 0.0).unwrap();
        let interior: Vec<usize> = (0..g.num_nodes()).filter(|&v| !g.is_boundary(v)).collect();
        let rep = RegionReport::with_forced_minus(&g, &interior);
        let res = eikonal_residual(&u, &rep).unwrap();
        assert!(res.minus.count > 0);
        assert!((res.minus.max - 1.0).abs() < 1e-14);
        assert!((res.minus.mean - 1.0).abs() < 1e-14);
    }

    #[test]
    fn distance_function_solves_eikonal_1d() {
        let g = Grid::line(-1.0, 1.0, 401).unwrap();
        let delta = crate::metric::boundary_distance(&g).unwrap();
        let interior: Vec<usize> = (0..g.num_nodes()).filter(|&v| !g.is_boundary(v)).collect();
        let rep = RegionReport::with_forced_minus(&g, &interior);
        let res = eikonal_residual(&delta, &rep).unwrap();
        assert!(res.minus.count > 0);
        assert!(res.minus.max < 1e-12, "tent δ is exactly upwind-consistent");
    }

    #[test]
    fn affine_and_parabola_infinity_laplacian() {
        let g = Grid::line(-1.0, 1.0, 201).unwrap();
        let aff = ScalarField::from_fn_1d(&g, |x| 0.3 * x + 7.0).unwrap();
        let res = infinity_laplacian_residual(&aff);
        for v in 0..g.num_nodes() {
            if !g.is_boundary(v) {
                assert!(res.values()[v].abs() < 1e-10);
            }
        }
        let para = ScalarField::from_fn_1d(&g, |x| 0.5 * x * x).unwrap();
        let res = infinity_laplacian_residual(&para);
        let h = g.spacing(0);
        for v in 0..g.num_nodes() {
            if !g.is_boundary(v) {
                // normalized operator: u'' = 1 for the parabola
                assert!(
                    (res.values()[v] - 1.0).abs() < 10.0 * h,
                    "node {v}: {}",
                    res.values()[v]
                );
            }
        }
    }

    #[test]
    fn cone_vertex_is_infinity_harmonic_away_from_tip() {
        let g = Grid::line(-1.0, 1.0, 101).unwrap();
        let cone = ScalarField::from_fn_1d(&g, |x| (x - 0.25).abs()).unwrap();
        let res = infinity_laplacian_residual(&cone);
        for v in 0..g.num_nodes() {
            let x = g.coords(v)[0];
            if !g.is_boundary(v) && (x - 0.25).abs() > 2.5 * g.spacing(0) {
                assert!(res.values()[v].abs() < 1e-10, "x={x}");
            }
        }
    }

    #[test]
    fn feasible_field_satisfies_double_inequality_1d() {
        let g = Grid::line(-1.0, 1.0, 101).unwrap();
        let u = ScalarField::from_fn_1d(&g, |x| x.abs()).unwrap();
        let d = double_inequality_check(&u);
        assert!(d.max_up <= 1.0 + 1e-12);
        assert!(d.max_down <= 1.0 + 1e-12);
    }

    #[test]
    fn case2_boundary_conditions_hold() {
        let g = Grid::line(-1.0, 1.0, 401).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 2.0 * x.abs()).unwrap();
        let u = ScalarField::from_fn_1d(&g, |x| x.abs() + 0.5).unwrap();
        let rep = regions(&u, &f, default_tau(&g)).unwrap();
        let table = boundary_condition_check(&u, &f, &rep).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.all_hold(), "rows: {:?}", table.rows);
    }

    #[test]
    fn corrupted_boundary_detected() {
        // flatten u near one boundary node so |∇u| < 1 − 3h on the minus side
        let g = Grid::line(-1.0, 1.0, 401).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 2.0 * x.abs()).unwrap();
        let mut u = ScalarField::from_fn_1d(&g, |x| x.abs() + 0.5).unwrap();
        let n = g.num_nodes();
        let vals = u.values_mut();
        vals[n - 1] = vals[n - 2]; // kill the inward slope at x = 1
        let rep = regions(&u, &f, default_tau(&g)).unwrap();
        let table = boundary_condition_check(&u, &f, &rep).unwrap();
        assert!(!table.all_hold(), "flattened boundary should violate |∇u| − 1 ≥ 0");
    }
}
