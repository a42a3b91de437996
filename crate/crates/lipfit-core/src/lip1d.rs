//! Exact 1D solver for min Σ wᵢ·½(vᵢ − fᵢ)² subject to |vᵢ₊₁ − vᵢ| ≤ cᵢ,
//! by forward dynamic programming over convex piecewise-quadratic value
//! functions, then backtracking.
//!
//! The recursion is
//!
//! ```text
//! V₁(t) = ½w₁(t − f₁)²,
//! Vᵢ₊₁(t) = ½wᵢ₊₁(t − fᵢ₊₁)² + min_{|t−s| ≤ cᵢ} Vᵢ(s),
//! ```
//!
//! and the inner minimum (erosion of a convex function by an interval) is
//! computed symbolically: locate the arg-min interval of Vᵢ and splice the
//! left branch shifted left by cᵢ, a flat piece, and the right branch shifted
//! right by cᵢ. No value-axis discretization is involved, which makes this
//! solver the trusted oracle for every other 1D route in the crate.
//!
//! Chaining makes adjacent-edge bounds sufficient on a path graph, so the
//! discrete polytope here is exactly the graph-metric Lipschitz ball of the
//! 1D grid.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{GridError, ScalarField};

/// Errors from the 1D dynamic programming solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Lip1dError {
    /// operation requires a 1D grid
    NotOneDimensional,
    /// Lipschitz bound must be positive
    NonPositiveBound,
    /// slice indices out of range or reversed
    IndexOutOfRange { i: usize, j: usize, n: usize },
    /// exponent must be 1 or 2
    UnsupportedExponent(u8),
    /// the DP value function lost convexity or continuity: internal bug guard
    NonConvexValueFunction,
    /// weights/bounds length mismatch with targets
    LengthMismatch,
    Grid(GridError),
}

impl fmt::Display for Lip1dError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lip1dError::NotOneDimensional => write!(f, "operation requires a 1D grid"),
            Lip1dError::NonPositiveBound => write!(f, "Lipschitz bound must be positive"),
            Lip1dError::IndexOutOfRange { i, j, n } => {
                write!(f, "slice {i}..={j} out of range for {n} nodes")
            }
            Lip1dError::UnsupportedExponent(r) => write!(f, "unsupported exponent {r}"),
            Lip1dError::NonConvexValueFunction => {
                write!(f, "DP value function lost convexity (internal error)")
            }
            Lip1dError::LengthMismatch => write!(f, "targets/weights/bounds length mismatch"),
            Lip1dError::Grid(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Lip1dError {}

impl From<GridError> for Lip1dError {
    fn from(e: GridError) -> Self {
        Lip1dError::Grid(e)
    }
}

/// One parabolic piece a·t² + b·t + c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Quad {
    #[inline]
    fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }

    #[inline]
    fn slope(&self, t: f64) -> f64 {
        2.0 * self.a * t + self.b
    }

    /// The piece with its graph shifted right by `s`: t ↦ self(t − s).
    #[inline]
    fn shifted(&self, s: f64) -> Quad {
        Quad {
            a: self.a,
            b: self.b - 2.0 * self.a * s,
            c: (self.a * s - self.b) * s + self.c,
        }
    }
}

/// Convex piecewise-quadratic function with unbounded domain.
///
/// `pieces[k]` is valid on `[breaks[k−1], breaks[k]]` (±∞ at the ends);
/// breakpoints are strictly increasing and the function is continuous with
/// nondecreasing one-sided slopes.
#[derive(Debug, Clone)]
pub struct PiecewiseQuadratic {
    breaks: Vec<f64>,
    pieces: Vec<Quad>,
}

impl PiecewiseQuadratic {
    /// The single parabola ½w(t − f)² (a flat zero when w = 0).
    pub fn half_square_loss(w: f64, f: f64) -> Self {
        PiecewiseQuadratic {
            breaks: Vec::new(),
            pieces: vec![Quad { a: 0.5 * w, b: -w * f, c: 0.5 * w * f * f }],
        }
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Quad] {
        &self.pieces
    }

    #[inline]
    fn bounds(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { f64::NEG_INFINITY } else { self.breaks[k - 1] };
        let hi = if k == self.pieces.len() - 1 { f64::INFINITY } else { self.breaks[k] };
        (lo, hi)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.breaks.partition_point(|&b| b < t);
        self.pieces[k].eval(t)
    }

    /// Arg-min interval and minimum value. The interval is a point unless the
    /// bottom piece is flat (zero weight nodes).
    pub fn argmin(&self) -> (f64, f64, f64) {
        for k in 0..self.pieces.len() {
            let (lo, hi) = self.bounds(k);
            let q = self.pieces[k];
            if q.a > 0.0 {
                let v = -q.b / (2.0 * q.a);
                if v < lo {
                    return (lo, lo, q.eval(lo));
                }
                if v <= hi {
                    return (v, v, q.eval(v));
                }
            } else {
                // linear piece (a is never negative by construction)
                if q.b > 0.0 {
                    return (lo, lo, q.eval(lo));
                }
                if q.b == 0.0 {
                    return (lo, hi, q.c);
                }
            }
        }
        // only reachable if the function decreases forever: not convex-proper
        let (lo, _) = self.bounds(self.pieces.len() - 1);
        (lo, f64::INFINITY, self.eval(lo))
    }

    /// Add the parabola ½w(t − f)² to every piece.
    pub fn add_half_square_loss(&mut self, w: f64, f: f64) {
        let (da, db, dc) = (0.5 * w, -w * f, 0.5 * w * f * f);
        for q in &mut self.pieces {
            q.a += da;
            q.b += db;
            q.c += dc;
        }
    }

    /// Erosion by the interval [−r, r]: returns t ↦ min_{|t−s| ≤ r} self(s).
    ///
    /// Splices the decreasing branch shifted left, a flat bottom, and the
    /// increasing branch shifted right.
    pub fn erode(&self, r: f64) -> Self {
        debug_assert!(r > 0.0);
        let (t_lo, t_hi, m) = self.argmin();
        let mut pieces = Vec::with_capacity(self.pieces.len() + 2);
        let mut breaks = Vec::with_capacity(self.pieces.len() + 1);
        if t_lo.is_finite() {
            for k in 0..self.pieces.len() {
                let (lo, hi) = self.bounds(k);
                if lo >= t_lo {
                    break;
                }
                pieces.push(self.pieces[k].shifted(-r));
                breaks.push(hi.min(t_lo) - r);
            }
        }
        pieces.push(Quad { a: 0.0, b: 0.0, c: m });
        if t_hi.is_finite() {
            let mut first = true;
            for k in 0..self.pieces.len() {
                let (lo, hi) = self.bounds(k);
                if hi <= t_hi {
                    continue;
                }
                if first {
                    breaks.push(t_hi + r);
                    first = false;
                } else {
                    breaks.push(lo + r);
                }
                pieces.push(self.pieces[k].shifted(r));
            }
        }
        let mut out = PiecewiseQuadratic { breaks, pieces };
        out.merge_identical();
        out
    }

    // Drop breakpoints between bitwise-identical pieces (flat splices meet
    // untouched flats after repeated erosion).
    fn merge_identical(&mut self) {
        let mut k = 0;
        while k + 1 < self.pieces.len() {
            if self.pieces[k] == self.pieces[k + 1] {
                self.pieces.remove(k + 1);
                self.breaks.remove(k);
            } else {
                k += 1;
            }
        }
    }

    /// Validate continuity and slope monotonicity at the breakpoints.
    pub fn check_convex(&self, rel_tol: f64) -> bool {
        for (k, &bp) in self.breaks.iter().enumerate() {
            let (l, r) = (self.pieces[k], self.pieces[k + 1]);
            if l.a < 0.0 || r.a < 0.0 {
                return false;
            }
            let (vl, vr) = (l.eval(bp), r.eval(bp));
            if (vl - vr).abs() > rel_tol * (1.0 + vl.abs() + vr.abs()) {
                return false;
            }
            let (sl, sr) = (l.slope(bp), r.slope(bp));
            if sl > sr + rel_tol * (1.0 + sl.abs() + sr.abs()) {
                return false;
            }
        }
        true
    }
}

// Internal consistency guard threshold; the construction is exact up to
// rounding, so anything past this indicates a DP bug rather than noise.
const CONVEXITY_TOL: f64 = 1e-9;

/// Exact minimizer of Σ ½wᵢ(vᵢ − tᵢ)² over |vᵢ₊₁ − vᵢ| ≤ boundsᵢ.
///
/// `weights` must be nonnegative (zero entries make that node's value free),
/// `bounds` must be positive with `bounds.len() + 1 == targets.len()`.
pub fn project_weighted(
    targets: &[f64],
    weights: &[f64],
    bounds: &[f64],
) -> Result<Vec<f64>, Lip1dError> {
    let n = targets.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if weights.len() != n || (n > 1 && bounds.len() != n - 1) {
        return Err(Lip1dError::LengthMismatch);
    }
    if n == 1 {
        return Ok(vec![targets[0]]);
    }
    if bounds.iter().any(|&c| !(c > 0.0)) {
        return Err(Lip1dError::NonPositiveBound);
    }

    let mut value = PiecewiseQuadratic::half_square_loss(weights[0], targets[0]);
    let mut windows: Vec<(f64, f64)> = Vec::with_capacity(n - 1);
    for i in 1..n {
        let (lo, hi, _) = value.argmin();
        windows.push((lo, hi));
        value = value.erode(bounds[i - 1]);
        value.add_half_square_loss(weights[i], targets[i]);
        if !value.check_convex(CONVEXITY_TOL) {
            return Err(Lip1dError::NonConvexValueFunction);
        }
    }

    let (lo, hi, _) = value.argmin();
    let mut v = vec![0.0; n];
    // flat bottoms only occur with zero-weight tails; break the tie toward
    // the local target for determinism
    v[n - 1] = clamp_to(targets[n - 1], lo, hi);
    for i in (0..n - 1).rev() {
        let (lo, hi) = windows[i];
        let c = bounds[i];
        let next = v[i + 1];
        v[i] = if lo > next + c {
            next + c
        } else if hi < next - c {
            next - c
        } else {
            clamp_to(next, lo, hi)
        };
    }
    Ok(v)
}

#[inline]
fn clamp_to(t: f64, lo: f64, hi: f64) -> f64 {
    if t < lo {
        lo
    } else if t > hi {
        hi
    } else {
        t
    }
}

/// Minimum of Σ ½wᵢ(vᵢ − tᵢ)² over the same polytope, without backtracking.
pub fn min_cost_weighted(
    targets: &[f64],
    weights: &[f64],
    bounds: &[f64],
) -> Result<f64, Lip1dError> {
    let n = targets.len();
    if n <= 1 {
        return Ok(0.0);
    }
    if weights.len() != n || bounds.len() != n - 1 {
        return Err(Lip1dError::LengthMismatch);
    }
    let mut value = PiecewiseQuadratic::half_square_loss(weights[0], targets[0]);
    for i in 1..n {
        value = value.erode(bounds[i - 1]);
        value.add_half_square_loss(weights[i], targets[i]);
        if !value.check_convex(CONVEXITY_TOL) {
            return Err(Lip1dError::NonConvexValueFunction);
        }
    }
    Ok(value.argmin().2)
}

/// Incremental fidelity scanner: after `push`ing the targets of nodes
/// i..=j one by one, [`LipCostScan::current_min`] is the minimal
/// Σ ½w(v − t)² over 1-Lipschitz-on-the-segment candidates. Used to fill a
/// whole row of segment costs in one forward pass.
pub struct LipCostScan {
    value: PiecewiseQuadratic,
    weight: f64,
    bound: f64,
}

impl LipCostScan {
    pub fn new(first_target: f64, weight: f64, bound: f64) -> Self {
        LipCostScan {
            value: PiecewiseQuadratic::half_square_loss(weight, first_target),
            weight,
            bound,
        }
    }

    pub fn push(&mut self, target: f64) {
        self.value = self.value.erode(self.bound);
        self.value.add_half_square_loss(self.weight, target);
    }

    pub fn current_min(&self) -> f64 {
        self.value.argmin().2
    }
}

/// Exact discrete projection of a 1D field onto {|vᵢ₊₁ − vᵢ| ≤ L·h}, in the
/// grid's quadrature inner product (the same functional the graph projector
/// minimizes, so the two routes agree).
pub fn project_lip_1d(f: &ScalarField, lip: f64) -> Result<ScalarField, Lip1dError> {
    if f.grid().dim() != 1 {
        return Err(Lip1dError::NotOneDimensional);
    }
    if !(lip > 0.0) {
        return Err(Lip1dError::NonPositiveBound);
    }
    let grid = f.grid().clone();
    let bounds: Vec<f64> = grid.edges().iter().map(|e| lip * e.len).collect();
    let v = project_weighted(f.values(), grid.quad_weights(), &bounds)?;
    Ok(ScalarField::from_values(&grid, v)?)
}

/// Minimal (1/r)·Σ h·|v − f|^r over 1-Lipschitz v on the node slice i..=j.
///
/// r = 2 runs the exact symbolic DP; r = 1 discretizes the value axis and
/// refines ×2 until the cost is stable to 1e−4.
pub fn segment_cost(f: &ScalarField, i: usize, j: usize, r: u8) -> Result<f64, Lip1dError> {
    if f.grid().dim() != 1 {
        return Err(Lip1dError::NotOneDimensional);
    }
    let n = f.len();
    if i > j || j >= n {
        return Err(Lip1dError::IndexOutOfRange { i, j, n });
    }
    let h = f.grid().spacing(0);
    let vals = &f.values()[i..=j];
    match r {
        2 => {
            let weights = vec![h; vals.len()];
            let bounds = vec![h; vals.len().saturating_sub(1)];
            min_cost_weighted(vals, &weights, &bounds)
        }
        1 => Ok(segment_cost_l1(vals, h, h)),
        other => Err(Lip1dError::UnsupportedExponent(other)),
    }
}

/// L¹ segment cost on a discretized value axis, refined until stable.
pub(crate) fn segment_cost_l1(vals: &[f64], h: f64, step: f64) -> f64 {
    if vals.len() <= 1 {
        return 0.0;
    }
    let lo = vals.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let hi = vals.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    if hi - lo < 1e-15 {
        return 0.0;
    }
    let mut levels = 1024usize;
    let mut prev = f64::INFINITY;
    loop {
        let cost = l1_dp(vals, h, step, lo, hi, levels);
        if (cost - prev).abs() < 1e-4 || levels >= 1 << 16 {
            return cost;
        }
        prev = cost;
        levels *= 2;
    }
}

fn l1_dp(vals: &[f64], h: f64, step: f64, lo: f64, hi: f64, levels: usize) -> f64 {
    use alloc::collections::VecDeque;
    let dv = (hi - lo) / ((levels - 1) as f64);
    let radius = ((step / dv) * (1.0 + 1e-12)) as usize;
    let level_val = |m: usize| lo + m as f64 * dv;
    let mut cost: Vec<f64> = (0..levels).map(|m| h * (level_val(m) - vals[0]).abs()).collect();
    let mut eroded = vec![0.0f64; levels];
    let mut dq: VecDeque<usize> = VecDeque::with_capacity(levels);
    for &target in &vals[1..] {
        // sliding-window minimum over level windows [m − radius, m + radius]
        dq.clear();
        for e in 0..=radius.min(levels - 1) {
            while matches!(dq.back(), Some(&t) if cost[t] >= cost[e]) {
                dq.pop_back();
            }
            dq.push_back(e);
        }
        for m in 0..levels {
            if m > 0 {
                let enter = m + radius;
                if enter < levels {
                    while matches!(dq.back(), Some(&t) if cost[t] >= cost[enter]) {
                        dq.pop_back();
                    }
                    dq.push_back(enter);
                }
                while *dq.front().expect("window never empties") + radius < m {
                    dq.pop_front();
                }
            }
            eroded[m] = cost[*dq.front().expect("window never empties")];
        }
        for m in 0..levels {
            cost[m] = eroded[m] + h * (level_val(m) - target).abs();
        }
    }
    cost.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn three_node_active_constraint() {
        // min ½[(v0)² + (v1−2)² + (v2)²] s.t. |Δv| ≤ 0.5 ⇒ v = (0.5, 1, 0.5)
        let v = project_weighted(&[0.0, 2.0, 0.0], &[1.0, 1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-12);
        assert!((v[1] - 1.0).abs() < 1e-12);
        assert!((v[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn feasible_input_is_fixed_point() {
        let g = Grid::line(-1.0, 1.0, 201).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 0.5 * x).unwrap();
        let u = project_lip_1d(&f, 1.0).unwrap();
        assert!(u.linf_distance(&f).unwrap() < 1e-12);
    }

    #[test]
    fn single_node_slice_costs_nothing() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| 37.0 * x).unwrap();
        assert_eq!(segment_cost(&f, 4, 4, 2).unwrap(), 0.0);
        assert_eq!(segment_cost(&f, 4, 4, 1).unwrap(), 0.0);
    }

    #[test]
    fn zero_field_costs_nothing() {
        let g = Grid::line(0.0, 1.0, 21).unwrap();
        let f = ScalarField::constant(&g, 0.0).unwrap();
        assert_eq!(segment_cost(&f, 0, 20, 2).unwrap(), 0.0);
        assert_eq!(segment_cost(&f, 0, 20, 1).unwrap(), 0.0);
    }

    #[test]
    fn bad_arguments_rejected() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let f = ScalarField::constant(&g, 1.0).unwrap();
        assert!(matches!(
            segment_cost(&f, 3, 2, 2),
            Err(Lip1dError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            segment_cost(&f, 0, 11, 2),
            Err(Lip1dError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            segment_cost(&f, 0, 5, 3),
            Err(Lip1dError::UnsupportedExponent(3))
        ));
        assert!(matches!(project_lip_1d(&f, 0.0), Err(Lip1dError::NonPositiveBound)));
        let g2 = Grid::square(0.0, 1.0, 5).unwrap();
        let f2 = ScalarField::constant(&g2, 1.0).unwrap();
        assert!(matches!(project_lip_1d(&f2, 1.0), Err(Lip1dError::NotOneDimensional)));
    }

    #[test]
    fn case2_small_grid() {
        let g = Grid::line(-1.0, 1.0, 41).unwrap();
        let h = g.spacing(0);
        let f = ScalarField::from_fn_1d(&g, |x| 2.0 * x.abs()).unwrap();
        let u = project_lip_1d(&f, 1.0).unwrap();
        let exact = ScalarField::from_fn_1d(&g, |x| x.abs() + 0.5).unwrap();
        assert!(u.linf_distance(&exact).unwrap() <= 2.0 * h);
        // feasibility
        assert!(u.max_edge_violation() <= 1e-10);
    }

    #[test]
    fn erosion_matches_brute_force() {
        // V(t) = ½(t−1)² eroded by r: flat on [1−r, 1+r]
        let v = PiecewiseQuadratic::half_square_loss(1.0, 1.0);
        let e = v.erode(0.25);
        assert_eq!(e.num_pieces(), 3);
        for &t in &[-1.0, 0.5, 0.74, 0.76, 1.0, 1.24, 1.3, 2.0] {
            let mut brute = f64::INFINITY;
            let mut s = t - 0.25;
            while s <= t + 0.25 + 1e-12 {
                brute = brute.min(v.eval(s));
                s += 1e-4;
            }
            assert!((e.eval(t) - brute).abs() < 1e-6, "erosion mismatch at {t}");
        }
    }

    #[test]
    fn zero_weight_nodes_are_free() {
        // middle node has no data term; it should interpolate feasibly
        let v = project_weighted(&[0.0, 100.0, 1.0], &[1.0, 0.0, 1.0], &[10.0, 10.0]).unwrap();
        assert!((v[0] - 0.0).abs() < 1e-12);
        assert!((v[2] - 1.0).abs() < 1e-12);
        assert!((v[1] - v[0]).abs() <= 10.0 + 1e-12);
        assert!((v[1] - v[2]).abs() <= 10.0 + 1e-12);
    }

    #[test]
    fn l1_segment_cost_step_example() {
        // f = sign step of height 2 over [-1,1]; best 1-Lipschitz L¹ fit is a
        // ramp; cost is positive and below the v≡0 competitor
        let g = Grid::line(-1.0, 1.0, 201).unwrap();
        let f = ScalarField::from_fn_1d(&g, |x| if x > 0.0 { 1.0 } else { -1.0 }).unwrap();
        let c = segment_cost(&f, 0, 200, 1).unwrap();
        let h = g.spacing(0);
        let zero_cost: f64 = f.values().iter().map(|v| h * v.abs()).sum();
        assert!(c > 0.0 && c < zero_cost);
    }
}
