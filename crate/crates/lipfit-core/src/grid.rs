//! Masked node-centered grids and scalar fields on them.
//!
//! The domain Ω is a uniform lattice of nodes restricted by a boolean mask.
//! Fields store one value per masked node (compact indexing); the lattice is
//! kept only for geometry. The stencil edge list carries the graph metric
//! used by every other module: an edge (i, j, ℓ) asserts the Lipschitz bound
//! |v_i − v_j| ≤ ℓ and contributes a shortest-path segment of length ℓ.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Mask selecting which lattice nodes belong to Ω.
#[derive(Debug, Clone)]
pub enum MaskSpec {
    /// Every lattice node.
    Full,
    /// Nodes with ‖x − center‖ ≤ radius (2D only).
    Disk { center: [f64; 2], radius: f64 },
    /// Full square minus the open quadrant {x > 0 ∧ y > 0} (2D only).
    LShape,
    /// Explicit row-major bitmap over the full lattice.
    Explicit(Vec<bool>),
}

/// Neighbor stencil for 2D grids. 1D grids always use nearest neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StencilKind {
    /// 4 axis neighbors plus 4 diagonals. Anisotropy bound ≈ 0.0824.
    Eight,
    /// Eight-stencil plus the 8 knight moves. Anisotropy bound ≈ 0.0273.
    Sixteen,
}

impl StencilKind {
    /// Worst-case relative overestimation of Euclidean length by shortest
    /// stencil paths on the full plane (sup over directions of d_graph/|x| − 1).
    pub fn anisotropy_bound(self) -> f64 {
        match self {
            // max over θ of cosθ + (√2−1) sinθ, attained at tan θ = √2−1
            StencilKind::Eight => 0.08239220029239402,
            // max over θ of cosθ + (√5−2) sinθ, attained at tan θ = √5−2
            StencilKind::Sixteen => 0.027486296633946727,
        }
    }
}

/// Errors from grid construction and field sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    /// extent upper bound does not exceed the lower bound
    DegenerateExtent { axis: usize, lo: f64, hi: f64 },
    /// fewer than 3 nodes along an axis
    TooFewNodes { axis: usize, n: usize },
    /// dim must be 1 or 2
    UnsupportedDim(usize),
    /// the masked node set is not edge-connected
    DisconnectedDomain,
    /// mask selects fewer than 2 nodes, or the mask spec does not fit the grid
    InvalidMask,
    /// a field rule produced a non-finite value at a masked node
    NonFiniteSample { node: usize, value: f64 },
    /// field values attached to a different grid than expected
    GridMismatch,
    /// value vector length does not match the masked node count
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::DegenerateExtent { axis, lo, hi } => {
                write!(f, "degenerate extent on axis {axis}: [{lo}, {hi}]")
            }
            GridError::TooFewNodes { axis, n } => {
                write!(f, "need at least 3 nodes per axis, axis {axis} has {n}")
            }
            GridError::UnsupportedDim(d) => write!(f, "unsupported dimension {d}"),
            GridError::DisconnectedDomain => write!(f, "masked node set is not edge-connected"),
            GridError::InvalidMask => write!(f, "mask is invalid for this grid"),
            GridError::NonFiniteSample { node, value } => {
                write!(f, "non-finite sample {value} at node {node}")
            }
            GridError::GridMismatch => write!(f, "fields live on different grids"),
            GridError::LengthMismatch { expected, got } => {
                write!(f, "expected {expected} values, got {got}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GridError {}

/// Undirected stencil edge with its Euclidean length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub len: f64,
}

/// Cell used for gradient quadrature: node ids of its corners
/// (2 corners in 1D, 4 in 2D, all masked).
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub corners: [u32; 4],
    pub ncorners: usize,
}

/// Discretized domain Ω: uniform node lattice, node mask, stencil edges.
///
/// Immutable after construction; share freely via [`Arc`].
#[derive(Debug)]
pub struct Grid {
    dim: usize,
    extent: [[f64; 2]; 2],
    n: [usize; 2],
    h: [f64; 2],
    stencil: StencilKind,
    mask: Vec<bool>,
    node_at: Vec<Option<u32>>,
    lattice_of: Vec<u32>,
    coords: Vec<[f64; 2]>,
    edges: Vec<Edge>,
    adj_offsets: Vec<u32>,
    adj: Vec<(u32, f64)>,
    cells: Vec<Cell>,
    quad: Vec<f64>,
    is_boundary: Vec<bool>,
    boundary: Vec<u32>,
    normals: Vec<[f64; 2]>,
    signature: u64,
}

/// Build a grid.
///
/// `extent` and `n` must have one entry per axis. The spacing along axis d
/// is `(hi − lo) / (n − 1)` and nodes sit at `lo + i·h`.
pub fn build_grid(
    dim: usize,
    extent: &[[f64; 2]],
    n: &[usize],
    mask_spec: &MaskSpec,
) -> Result<Arc<Grid>, GridError> {
    Grid::build(dim, extent, n, mask_spec, StencilKind::Eight)
}

impl Grid {
    pub fn build(
        dim: usize,
        extent: &[[f64; 2]],
        n: &[usize],
        mask_spec: &MaskSpec,
        stencil: StencilKind,
    ) -> Result<Arc<Grid>, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::UnsupportedDim(dim));
        }
        if extent.len() != dim || n.len() != dim {
            return Err(GridError::InvalidMask);
        }
        let mut ext = [[0.0, 1.0]; 2];
        let mut nn = [1usize; 2];
        let mut h = [1.0f64; 2];
        for d in 0..dim {
            let [lo, hi] = extent[d];
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(GridError::DegenerateExtent { axis: d, lo, hi });
            }
            if n[d] < 3 {
                return Err(GridError::TooFewNodes { axis: d, n: n[d] });
            }
            ext[d] = [lo, hi];
            nn[d] = n[d];
            h[d] = (hi - lo) / ((n[d] - 1) as f64);
        }
        let (nx, ny) = (nn[0], nn[1]);
        let lattice_len = nx * ny;

        let coord_of = |ix: usize, iy: usize| -> [f64; 2] {
            let x = if ix + 1 == nx { ext[0][1] } else { ext[0][0] + ix as f64 * h[0] };
            let y = if dim == 1 {
                0.0
            } else if iy + 1 == ny {
                ext[1][1]
            } else {
                ext[1][0] + iy as f64 * h[1]
            };
            [x, y]
        };

        let mut mask = vec![false; lattice_len];
        for iy in 0..ny {
            for ix in 0..nx {
                let [x, y] = coord_of(ix, iy);
                mask[iy * nx + ix] = match mask_spec {
                    MaskSpec::Full => true,
                    MaskSpec::Disk { center, radius } => {
                        if dim != 2 {
                            return Err(GridError::InvalidMask);
                        }
                        let r = math::hypot(x - center[0], y - center[1]);
                        r <= radius * (1.0 + 1e-12) + 1e-14
                    }
                    MaskSpec::LShape => {
                        if dim != 2 {
                            return Err(GridError::InvalidMask);
                        }
                        // keep the axes, remove the strictly positive quadrant
                        let tol = 1e-9 * (h[0] + h[1]);
                        !(x > tol && y > tol)
                    }
                    MaskSpec::Explicit(bits) => {
                        if bits.len() != lattice_len {
                            return Err(GridError::InvalidMask);
                        }
                        bits[iy * nx + ix]
                    }
                };
            }
        }

        let mut node_at = vec![None; lattice_len];
        let mut lattice_of = Vec::new();
        let mut coords = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let li = iy * nx + ix;
                if mask[li] {
                    node_at[li] = Some(lattice_of.len() as u32);
                    lattice_of.push(li as u32);
                    coords.push(coord_of(ix, iy));
                }
            }
        }
        let nv = lattice_of.len();
        if nv < 2 {
            return Err(GridError::InvalidMask);
        }

        let masked = |ix: i64, iy: i64| -> Option<u32> {
            if ix < 0 || iy < 0 || ix >= nx as i64 || iy >= ny as i64 {
                return None;
            }
            node_at[iy as usize * nx + ix as usize]
        };

        // Canonical edge offsets: each unordered pair generated once.
        // Diagonals require the full cell they cross to be masked; knight
        // moves require the 2x3 block they cross. This forbids corner
        // cutting through unmasked area.
        let mut edges: Vec<Edge> = Vec::new();
        for iy in 0..ny as i64 {
            for ix in 0..nx as i64 {
                let Some(i) = masked(ix, iy) else { continue };
                let mut push = |j: Option<u32>, len: f64| {
                    if let Some(j) = j {
                        edges.push(Edge { i: i.min(j), j: i.max(j), len });
                    }
                };
                if dim == 1 {
                    push(masked(ix + 1, 0), h[0]);
                    continue;
                }
                push(masked(ix + 1, iy), h[0]);
                push(masked(ix, iy + 1), h[1]);
                let ldiag = math::hypot(h[0], h[1]);
                let cell_ok = |cx: i64, cy: i64| {
                    masked(cx, cy).is_some()
                        && masked(cx + 1, cy).is_some()
                        && masked(cx, cy + 1).is_some()
                        && masked(cx + 1, cy + 1).is_some()
                };
                if cell_ok(ix, iy) {
                    push(masked(ix + 1, iy + 1), ldiag);
                }
                if cell_ok(ix - 1, iy) {
                    push(masked(ix - 1, iy + 1), ldiag);
                }
                if stencil == StencilKind::Sixteen {
                    let block_ok = |xs: [i64; 2], ys: [i64; 3]| {
                        ys.iter().all(|&cy| xs.iter().all(|&cx| masked(cx, cy).is_some()))
                    };
                    let l12 = math::hypot(h[0], 2.0 * h[1]);
                    let l21 = math::hypot(2.0 * h[0], h[1]);
                    if block_ok([ix, ix + 1], [iy, iy + 1, iy + 2]) {
                        push(masked(ix + 1, iy + 2), l12);
                    }
                    if block_ok([ix - 1, ix], [iy, iy + 1, iy + 2]) {
                        push(masked(ix - 1, iy + 2), l12);
                    }
                    let block_ok_w = |xs: [i64; 3], ys: [i64; 2]| {
                        ys.iter().all(|&cy| xs.iter().all(|&cx| masked(cx, cy).is_some()))
                    };
                    if block_ok_w([ix, ix + 1, ix + 2], [iy, iy + 1]) {
                        push(masked(ix + 2, iy + 1), l21);
                    }
                    if block_ok_w([ix - 2, ix - 1, ix], [iy, iy + 1]) {
                        push(masked(ix - 2, iy + 1), l21);
                    }
                }
            }
        }
        edges.sort_unstable_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));

        // adjacency in CSR form, both directions
        let mut degree = vec![0u32; nv];
        for e in &edges {
            degree[e.i as usize] += 1;
            degree[e.j as usize] += 1;
        }
        let mut adj_offsets = vec![0u32; nv + 1];
        for v in 0..nv {
            adj_offsets[v + 1] = adj_offsets[v] + degree[v];
        }
        let mut adj = vec![(0u32, 0.0f64); adj_offsets[nv] as usize];
        let mut cursor: Vec<u32> = adj_offsets[..nv].to_vec();
        for e in &edges {
            adj[cursor[e.i as usize] as usize] = (e.j, e.len);
            cursor[e.i as usize] += 1;
            adj[cursor[e.j as usize] as usize] = (e.i, e.len);
            cursor[e.j as usize] += 1;
        }

        // connectivity over the edge graph
        {
            let mut seen = vec![false; nv];
            let mut stack = vec![0u32];
            seen[0] = true;
            let mut reached = 1usize;
            while let Some(v) = stack.pop() {
                let (s, t) = (adj_offsets[v as usize], adj_offsets[v as usize + 1]);
                for &(w, _) in &adj[s as usize..t as usize] {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        reached += 1;
                        stack.push(w);
                    }
                }
            }
            if reached != nv {
                return Err(GridError::DisconnectedDomain);
            }
        }

        // boundary nodes: any missing 8-stencil neighbor (or lattice edge)
        let mut is_boundary = vec![false; nv];
        let mut boundary = Vec::new();
        let mut normals = vec![[0.0f64; 2]; nv];
        for v in 0..nv {
            let li = lattice_of[v] as i64;
            let (ix, iy) = ((li % nx as i64), (li / nx as i64));
            let mut missing_dir = [0.0f64; 2];
            let mut any_missing = false;
            let neigh: &[[i64; 2]] = if dim == 1 {
                &[[1, 0], [-1, 0]]
            } else {
                &[[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [1, -1], [-1, 1], [-1, -1]]
            };
            for off in neigh {
                if masked(ix + off[0], iy + off[1]).is_none() {
                    any_missing = true;
                    let norm = math::hypot(off[0] as f64, off[1] as f64);
                    missing_dir[0] += off[0] as f64 / norm;
                    missing_dir[1] += off[1] as f64 / norm;
                }
            }
            if any_missing {
                is_boundary[v] = true;
                boundary.push(v as u32);
                let norm = math::hypot(missing_dir[0], missing_dir[1]);
                if norm > 1e-12 {
                    normals[v] = [missing_dir[0] / norm, missing_dir[1] / norm];
                }
            }
        }

        // trapezoid quadrature: half weight per axis along which a node
        // lacks a masked neighbor on either side
        let mut quad = vec![0.0f64; nv];
        for v in 0..nv {
            let li = lattice_of[v] as i64;
            let (ix, iy) = ((li % nx as i64), (li / nx as i64));
            let mut w = h[0] * if dim == 2 { h[1] } else { 1.0 };
            if masked(ix - 1, iy).is_none() || masked(ix + 1, iy).is_none() {
                w *= 0.5;
            }
            if dim == 2 && (masked(ix, iy - 1).is_none() || masked(ix, iy + 1).is_none()) {
                w *= 0.5;
            }
            quad[v] = w;
        }

        // cells with all corners masked, for gradient quadrature
        let mut cells = Vec::new();
        if dim == 1 {
            for ix in 0..nx as i64 - 1 {
                if let (Some(a), Some(b)) = (masked(ix, 0), masked(ix + 1, 0)) {
                    cells.push(Cell { corners: [a, b, 0, 0], ncorners: 2 });
                }
            }
        } else {
            for iy in 0..ny as i64 - 1 {
                for ix in 0..nx as i64 - 1 {
                    let c = [
                        masked(ix, iy),
                        masked(ix + 1, iy),
                        masked(ix, iy + 1),
                        masked(ix + 1, iy + 1),
                    ];
                    if let [Some(a), Some(b), Some(cc), Some(d)] = c {
                        cells.push(Cell { corners: [a, b, cc, d], ncorners: 4 });
                    }
                }
            }
        }

        let mut grid = Grid {
            dim,
            extent: ext,
            n: nn,
            h,
            stencil,
            mask,
            node_at,
            lattice_of,
            coords,
            edges,
            adj_offsets,
            adj,
            cells,
            quad,
            is_boundary,
            boundary,
            normals,
            signature: 0,
        };
        grid.signature = grid.compute_signature();
        Ok(Arc::new(grid))
    }

    fn compute_signature(&self) -> u64 {
        // FNV-1a over the defining data; used only for cheap mismatch checks
        let mut hash: u64 = 0xcbf29ce484222325;
        let mut eat = |byte: u8| {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        };
        eat(self.dim as u8);
        eat(match self.stencil {
            StencilKind::Eight => 8,
            StencilKind::Sixteen => 16,
        });
        for d in 0..self.dim {
            for b in (self.n[d] as u64).to_le_bytes() {
                eat(b);
            }
            for v in self.extent[d] {
                for b in v.to_bits().to_le_bytes() {
                    eat(b);
                }
            }
        }
        for &m in &self.mask {
            eat(m as u8);
        }
        hash
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-axis [lo, hi].
    pub fn extent(&self, axis: usize) -> [f64; 2] {
        self.extent[axis]
    }

    /// Per-axis node count.
    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    /// Per-axis spacing.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    /// Smallest axis spacing.
    pub fn h_min(&self) -> f64 {
        if self.dim == 1 {
            self.h[0]
        } else {
            self.h[0].min(self.h[1])
        }
    }

    pub fn stencil(&self) -> StencilKind {
        self.stencil
    }

    /// Number of masked nodes; fields carry this many values.
    pub fn num_nodes(&self) -> usize {
        self.lattice_of.len()
    }

    /// Coordinates of a masked node (y component is 0 in 1D).
    pub fn coords(&self, node: usize) -> [f64; 2] {
        self.coords[node]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Stencil neighbors of a node with edge lengths.
    pub fn neighbors(&self, node: usize) -> &[(u32, f64)] {
        let (s, t) = (self.adj_offsets[node], self.adj_offsets[node + 1]);
        &self.adj[s as usize..t as usize]
    }

    /// Masked axis neighbor of `node` one step along `axis` in direction
    /// `dir` (±1), if any.
    pub fn axis_neighbor(&self, node: usize, axis: usize, dir: i64) -> Option<usize> {
        let li = self.lattice_of[node] as i64;
        let nx = self.n[0] as i64;
        let (ix, iy) = (li % nx, li / nx);
        let (jx, jy) = match axis {
            0 => (ix + dir, iy),
            _ => (ix, iy + dir),
        };
        if jx < 0 || jy < 0 || jx >= nx || jy >= self.n[1].max(1) as i64 {
            return None;
        }
        self.node_at[(jy * nx + jx) as usize].map(|v| v as usize)
    }

    /// Quadrature weight of a node (trapezoid: half per boundary axis).
    pub fn quad_weight(&self, node: usize) -> f64 {
        self.quad[node]
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad
    }

    /// Total quadrature mass (≈ |Ω|).
    pub fn domain_measure(&self) -> f64 {
        self.quad.iter().sum()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.is_boundary[node]
    }

    /// Boundary nodes in ascending id order.
    pub fn boundary_nodes(&self) -> &[u32] {
        &self.boundary
    }

    /// Outward normal estimate at a node (zero vector for interior nodes).
    pub fn outward_normal(&self, node: usize) -> [f64; 2] {
        self.normals[node]
    }

    /// Row-major mask over the full lattice.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Compact node id at a row-major lattice index, if masked.
    pub fn node_at_lattice(&self, lattice: usize) -> Option<usize> {
        self.node_at[lattice].map(|v| v as usize)
    }

    /// Row-major lattice index of a masked node.
    pub fn lattice_index(&self, node: usize) -> usize {
        self.lattice_of[node] as usize
    }

    pub fn signature(&self) -> u64 {
        self.signature
    }

    /// Convenience: 1D grid on [lo, hi] with n nodes.
    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Arc<Grid>, GridError> {
        Grid::build(1, &[[lo, hi]], &[n], &MaskSpec::Full, StencilKind::Eight)
    }

    /// Convenience: full 2D square [lo, hi]² with n×n nodes.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Arc<Grid>, GridError> {
        Grid::build(2, &[[lo, hi], [lo, hi]], &[n, n], &MaskSpec::Full, StencilKind::Eight)
    }
}

/// Values of a function on the masked nodes of a grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap a value vector; every entry must be finite.
    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.num_nodes() {
            return Err(GridError::LengthMismatch {
                expected: grid.num_nodes(),
                got: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFiniteSample { node: i, value: v });
            }
        }
        Ok(ScalarField { grid: grid.clone(), values })
    }

    /// Sample a pointwise rule at the node coordinates.
    pub fn from_fn(
        grid: &Arc<Grid>,
        rule: impl Fn([f64; 2]) -> f64,
    ) -> Result<Self, GridError> {
        let values: Vec<f64> = (0..grid.num_nodes()).map(|i| rule(grid.coords(i))).collect();
        Self::from_values(grid, values)
    }

    /// Sample a 1D rule x ↦ f(x).
    pub fn from_fn_1d(grid: &Arc<Grid>, rule: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::from_fn(grid, |p| rule(p[0]))
    }

    /// Constant field.
    pub fn constant(grid: &Arc<Grid>, c: f64) -> Result<Self, GridError> {
        Self::from_values(grid, vec![c; grid.num_nodes()])
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Error unless `other` lives on a structurally identical grid.
    pub fn check_same_grid(&self, other: &ScalarField) -> Result<(), GridError> {
        if self.grid.signature() == other.grid.signature() {
            Ok(())
        } else {
            Err(GridError::GridMismatch)
        }
    }

    /// Quadrature L² norm √(Σ q v²).
    pub fn l2_norm(&self) -> f64 {
        math::sqrt(
            self.values
                .iter()
                .zip(self.grid.quad_weights())
                .map(|(v, q)| q * v * v)
                .sum::<f64>(),
        )
    }

    /// Quadrature L¹ norm Σ q |v|.
    pub fn l1_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.quad_weights())
            .map(|(v, q)| q * v.abs())
            .sum()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature integral Σ q v.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.quad_weights())
            .map(|(v, q)| q * v)
            .sum()
    }

    /// Quadrature mean: integral / |Ω|.
    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.domain_measure()
    }

    /// Pointwise difference (same grid required).
    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField, GridError> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ScalarField { grid: self.grid.clone(), values })
    }

    /// max |self − other|.
    pub fn linf_distance(&self, other: &ScalarField) -> Result<f64, GridError> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Largest violation of the edge Lipschitz bounds, max_e (|v_i − v_j| − ℓ_e)₊.
    pub fn max_edge_violation(&self) -> f64 {
        self.grid
            .edges()
            .iter()
            .fold(0.0f64, |m, e| {
                m.max((self.values[e.i as usize] - self.values[e.j as usize]).abs() - e.len)
            })
            .max(0.0)
    }
}
