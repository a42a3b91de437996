//! McShane-type envelopes: the smallest graph-1-Lipschitz majorant
//! ū(x) = max_y [f(y) − d(x,y)] and the largest minorant
//! u̲(x) = min_y [f(y) + d(x,y)], realizing the extremal obstacle solutions,
//! plus the cone representation check for the regions {u ≷ f}.
//!
//! Both envelopes are computed by a single multi-source label-setting pass
//! (maximizing f(y) − d equals minimizing (−f(y)) + d), O(E log V) instead of
//! the O(V²) brute force, which the tests retain as an oracle on small grids.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{GridError, ScalarField};
use crate::metric::generalized_distance;
use crate::viscosity::{regions, RegionReport, ViscosityError};

#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeError {
    /// u violates the edge bounds beyond tolerance
    InfeasibleInput { max_violation: f64 },
    Grid(GridError),
    Viscosity(ViscosityError),
}

impl fmt::Display for EnvelopeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvelopeError::InfeasibleInput { max_violation } => {
                write!(f, "input field violates edge bounds by {max_violation}")
            }
            EnvelopeError::Grid(e) => write!(f, "{e}"),
            EnvelopeError::Viscosity(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EnvelopeError {}

impl From<GridError> for EnvelopeError {
    fn from(e: GridError) -> Self {
        EnvelopeError::Grid(e)
    }
}

impl From<ViscosityError> for EnvelopeError {
    fn from(e: ViscosityError) -> Self {
        EnvelopeError::Viscosity(e)
    }
}

/// Smallest graph-1-Lipschitz majorant of f.
pub fn upper_envelope(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    let init: Vec<f64> = f.values().iter().map(|&v| -v).collect();
    let (dist, _) = generalized_distance(&grid, &init);
    let values: Vec<f64> = dist.iter().map(|&d| -d).collect();
    ScalarField::from_values(&grid, values).expect("finite on connected grid")
}

/// Largest graph-1-Lipschitz minorant of f.
pub fn lower_envelope(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    let (dist, _) = generalized_distance(&grid, f.values());
    ScalarField::from_values(&grid, dist).expect("finite on connected grid")
}

/// Which representation formula to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeSign {
    /// u(x) = max over ∂A⁺ of [u(y) − d(x,y)] on A⁺
    Plus,
    /// u(x) = min over ∂A⁻ of [u(y) + d(x,y)] on A⁻
    Minus,
}

/// Outcome of a representation-formula check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeCheck {
    /// max over the region of |u − reconstructed u|; 0 for empty regions,
    /// ∞ if the region is nonempty but has no graph boundary to anchor cones
    pub max_error: f64,
    pub region_size: usize,
    pub boundary_size: usize,
}

/// Verify the cone representation of u on A^± extracted at threshold `tau`:
/// reconstruct u inside the region from its boundary values and the graph
/// metric, and report the worst deviation.
pub fn cone_representation_error(
    u: &ScalarField,
    f: &ScalarField,
    sign: ConeSign,
    tau: f64,
) -> Result<ConeCheck, EnvelopeError> {
    let report = regions(u, f, tau)?;
    cone_error_from_report(u, &report, sign)
}

/// Same, reusing an already extracted region report.
pub fn cone_error_from_report(
    u: &ScalarField,
    report: &RegionReport,
    sign: ConeSign,
) -> Result<ConeCheck, EnvelopeError> {
    let grid = u.grid();
    let feas_tol = 1e-6 * grid.edges().iter().fold(0.0f64, |m, e| m.max(e.len));
    let violation = u.max_edge_violation();
    if violation > feas_tol {
        return Err(EnvelopeError::InfeasibleInput { max_violation: violation });
    }

    let in_region: &dyn Fn(usize) -> bool = match sign {
        ConeSign::Plus => &|v| report.in_a_plus(v),
        ConeSign::Minus => &|v| report.in_a_minus(v),
    };
    let members: Vec<usize> = (0..grid.num_nodes()).filter(|&v| in_region(v)).collect();
    if members.is_empty() {
        return Ok(ConeCheck { max_error: 0.0, region_size: 0, boundary_size: 0 });
    }
    // region boundary: members with a masked neighbor outside the region
    let mut seed = vec![f64::INFINITY; grid.num_nodes()];
    let mut boundary_size = 0usize;
    for &v in &members {
        let on_rim = grid.neighbors(v).iter().any(|&(w, _)| !in_region(w as usize));
        if on_rim {
            boundary_size += 1;
            seed[v] = match sign {
                ConeSign::Plus => -u.values()[v],
                ConeSign::Minus => u.values()[v],
            };
        }
    }
    if boundary_size == 0 {
        // region with no rim: formula has no anchors; report as failed
        return Ok(ConeCheck {
            max_error: f64::INFINITY,
            region_size: members.len(),
            boundary_size: 0,
        });
    }
    let (dist, _) = generalized_distance(grid, &seed);
    let mut max_error = 0.0f64;
    for &v in &members {
        let reconstructed = match sign {
            ConeSign::Plus => -dist[v],
            ConeSign::Minus => dist[v],
        };
        max_error = max_error.max((u.values()[v] - reconstructed).abs());
    }
    Ok(ConeCheck { max_error, region_size: members.len(), boundary_size })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::viscosity::default_tau;

    #[test]
    fn lipschitz_input_is_its_own_envelope() {
        let g = Grid::line(-1.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 0.7 * x - 0.2).unwrap();
        assert!(upper_envelope(&f).linf_distance(&f).unwrap() < 1e-12);
        assert!(lower_envelope(&f).linf_distance(&f).unwrap() < 1e-12);
    }

    #[test]
    fn upper_envelope_of_steep_vee() {
        // sup_y (2|y| − |x−y|) = 1 + |x| on [−1,1], attained at y = ±1
        let g = Grid::line(-1.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 2.0 * x.abs()).unwrap();
        let env = upper_envelope(&f);
        let exact = ScalarField::from_fn_1d(&g, |x| 1.0 + x.abs()).unwrap();
        assert!(env.linf_distance(&exact).unwrap() < 1e-12);
    }

    #[test]
    fn lower_envelope_mirror_symmetry() {
        let g = Grid::line(-1.0, 1.0, 81).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| (3.0 * x).sin() + 2.0 * x.abs()).unwrap();
        let neg = ScalarField::from_values(&g, f.values().iter().map(|v| -v).collect()).unwrap();
        let a = lower_envelope(&neg);
        let b = upper_envelope(&f);
        for v in 0..g.num_nodes() {
            assert!((a.values()[v] + b.values()[v]).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_against_brute_force() {
        use crate::metric::geodesic_distance;
        let g = Grid::square(-1.0, 1.0, 13).unwrap();
        let f = ScalarField::from_fn(&g, |[x, y]| (5.0 * x).sin() * (3.0 * y).cos() * 2.0).unwrap();
        let env = upper_envelope(&f);
        for v in 0..g.num_nodes() {
            let mut best = f64::NEG_INFINITY;
            let d = geodesic_distance(&g, &[v]).unwrap();
            for y in 0..g.num_nodes() {
                best = best.max(f.values()[y] - d.value(y));
            }
            assert!((env.values()[v] - best).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_envelope_is_capped_cone() {
        // f = χ(|x|<0.4): ū = min{1, 1.4 − |x|} up to one grid cell
        let g = Grid::line(-1.0, 1.0, 401).unwrap();
        let h = g.spacing(0);
        let f = ScalarField::from_fn_1d(&g, |x| if x.abs() < 0.4 { 1.0 } else { 0.0 }).unwrap();
        let env = upper_envelope(&f);
        let exact = ScalarField::from_fn_1d(&g, |x| (1.4 - x.abs()).min(1.0)).unwrap();
        assert!(env.linf_distance(&exact).unwrap() <= 2.0 * h);
    }

    #[test]
    fn envelopes_bracket_and_touch() {
        let g = Grid::line(-1.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| (7.0 * x).cos() * 1.5).unwrap();
        let up = upper_envelope(&f);
        let lo = lower_envelope(&f);
        let mut touches_up = false;
        let mut touches_lo = false;
        for v in 0..g.num_nodes() {
            assert!(up.values()[v] >= f.values()[v] - 1e-12);
            assert!(lo.values()[v] <= f.values()[v] + 1e-12);
            touches_up |= (up.values()[v] - f.values()[v]).abs() < 1e-12;
            touches_lo |= (lo.values()[v] - f.values()[v]).abs() < 1e-12;
        }
        assert!(touches_up && touches_lo, "contact sets must be nonempty");
    }

    #[test]
    fn representation_trivial_when_regions_empty() {
        let g = Grid::line(-1.0, 1.0, 101).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 0.5 * x).unwrap();
        let c = cone_representation_error(&f, &f, ConeSign::Plus, default_tau(&g)).unwrap();
        assert_eq!(c.region_size, 0);
        assert_eq!(c.max_error, 0.0);
    }

    #[test]
    fn infeasible_input_rejected() {
        let g = Grid::line(-1.0, 1.0, 11).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 5.0 * x).unwrap();
        let r = cone_representation_error(&f, &f, ConeSign::Plus, default_tau(&g));
        assert!(matches!(r, Err(EnvelopeError::InfeasibleInput { .. })));
    }
}
