//! Geodesic distance inside Ω as exact shortest paths on the stencil graph,
//! and the distance to the boundary δ.
//!
//! The graph metric overestimates the Euclidean geodesic by at most the
//! stencil anisotropy factor on convex domains; every Lipschitz constraint in
//! this crate is phrased in the same graph metric, so representation-formula
//! checks close exactly at the discrete level and only the continuum gap is
//! subject to the anisotropy bound.

use alloc::collections::BinaryHeap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::grid::{Grid, GridError, ScalarField};
use crate::math;

/// Errors from distance computations.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    EmptySourceSet,
    /// a source node id is out of range
    UnmaskedSource { node: usize },
    /// grid has no boundary nodes (cannot happen for valid grids)
    NoBoundary,
    Grid(GridError),
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::EmptySourceSet => write!(f, "source set is empty"),
            MetricError::UnmaskedSource { node } => {
                write!(f, "source node {node} is not a masked node")
            }
            MetricError::NoBoundary => write!(f, "grid has no boundary nodes"),
            MetricError::Grid(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for MetricError {}

impl From<GridError> for MetricError {
    fn from(e: GridError) -> Self {
        MetricError::Grid(e)
    }
}

/// Geodesic distances d(·, S) from a source set S, with the nearest source
/// recorded per node.
#[derive(Debug, Clone)]
pub struct DistanceField {
    grid: Arc<Grid>,
    sources: Vec<u32>,
    dist: Vec<f64>,
    nearest: Vec<u32>,
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse so smaller distance pops first,
        // ties broken toward the lower node id for bit-deterministic output
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Label-setting pass: for every node x, min over seeded y of
/// init[y] + d_graph(x, y).
///
/// `init` must have one entry per masked node; entries of `f64::INFINITY`
/// are not seeded. Returns the transformed labels together with the arg-min
/// seed per node (u32::MAX where unreachable, which cannot happen on
/// connected grids with at least one seed).
pub fn generalized_distance(grid: &Grid, init: &[f64]) -> (Vec<f64>, Vec<u32>) {
    let nv = grid.num_nodes();
    debug_assert_eq!(init.len(), nv);
    let mut dist = vec![f64::INFINITY; nv];
    let mut nearest = vec![u32::MAX; nv];
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    for (v, &d0) in init.iter().enumerate() {
        if d0.is_finite() {
            dist[v] = d0;
            nearest[v] = v as u32;
            heap.push(HeapEntry { dist: d0, node: v as u32 });
        }
    }
    while let Some(HeapEntry { dist: d, node }) = heap.pop() {
        if d > dist[node as usize] {
            continue; // stale entry
        }
        for &(w, len) in grid.neighbors(node as usize) {
            let cand = d + len;
            if cand < dist[w as usize] {
                dist[w as usize] = cand;
                nearest[w as usize] = nearest[node as usize];
                heap.push(HeapEntry { dist: cand, node: w });
            }
        }
    }
    (dist, nearest)
}

/// Exact multi-source shortest-path distances on the stencil graph.
pub fn geodesic_distance(grid: &Arc<Grid>, sources: &[usize]) -> Result<DistanceField, MetricError> {
    if sources.is_empty() {
        return Err(MetricError::EmptySourceSet);
    }
    let nv = grid.num_nodes();
    let mut init = vec![f64::INFINITY; nv];
    for &s in sources {
        if s >= nv {
            return Err(MetricError::UnmaskedSource { node: s });
        }
        init[s] = 0.0;
    }
    let (dist, nearest) = generalized_distance(grid, &init);
    let mut srcs: Vec<u32> = sources.iter().map(|&s| s as u32).collect();
    srcs.sort_unstable();
    srcs.dedup();
    Ok(DistanceField { grid: grid.clone(), sources: srcs, dist, nearest })
}

/// Distance to the boundary node set, as a field: δ ≥ 0, zero exactly on
/// boundary nodes, 1-Lipschitz in the graph metric.
pub fn boundary_distance(grid: &Arc<Grid>) -> Result<ScalarField, MetricError> {
    Ok(boundary_distance_field(grid)?.into_field())
}

/// Same as [`boundary_distance`], keeping the nearest-source labels (used by
/// ridge detection in refinement studies).
pub fn boundary_distance_field(grid: &Arc<Grid>) -> Result<DistanceField, MetricError> {
    if grid.boundary_nodes().is_empty() {
        return Err(MetricError::NoBoundary);
    }
    let sources: Vec<usize> = grid.boundary_nodes().iter().map(|&b| b as usize).collect();
    geodesic_distance(grid, &sources)
}

impl DistanceField {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Source node ids, ascending.
    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    pub fn values(&self) -> &[f64] {
        &self.dist
    }

    pub fn value(&self, node: usize) -> f64 {
        self.dist[node]
    }

    /// Id of the source realizing the distance at `node`.
    pub fn nearest_source(&self, node: usize) -> usize {
        self.nearest[node] as usize
    }

    pub fn into_field(self) -> ScalarField {
        // connectivity is a grid invariant, so every node carries a finite label
        ScalarField::from_values(&self.grid, self.dist).expect("distances finite on connected grid")
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField::from_values(&self.grid, self.dist.clone())
            .expect("distances finite on connected grid")
    }

    /// Nodes where fronts from well-separated sources meet: a node
    /// whose nearest source lies more than `separation` (Euclidean) from a
    /// neighbor's nearest source.
    pub fn ridge_nodes(&self, separation: f64) -> Vec<usize> {
        let mut out = Vec::new();
        for v in 0..self.dist.len() {
            let sv = self.nearest[v] as usize;
            let pv = self.grid.coords(sv);
            let mut is_ridge = false;
            for &(w, _) in self.grid.neighbors(v) {
                let sw = self.nearest[w as usize] as usize;
                if sw == sv {
                    continue;
                }
                let pw = self.grid.coords(sw);
                if math::hypot(pv[0] - pw[0], pv[1] - pw[1]) > separation {
                    is_ridge = true;
                    break;
                }
            }
            if is_ridge {
                out.push(v);
            }
        }
        out
    }
}
