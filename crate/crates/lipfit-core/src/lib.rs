//! Best L² approximation of a datum by 1-Lipschitz functions, and verifiers
//! for the first-order PDE system the limit minimizer satisfies.
//!
//! The toolkit is organized around the minimization problem
//!
//! ```text
//! min ½ ∫ (v − f)²   over   v with |v(x) − v(y)| ≤ d(x, y),
//! ```
//!
//! where d is the geodesic distance inside the domain. On a grid the
//! constraint becomes one bound per stencil edge, and the toolkit provides
//!
//! * [`grid`] — masked node grids, scalar fields, trapezoid quadrature;
//! * [`metric`] — exact shortest-path geodesic distances and the distance
//!   to the boundary;
//! * [`lip1d`] — an exact 1D solver by dynamic programming over convex
//!   piecewise-quadratic value functions (the trusted oracle);
//! * [`projector`] — Dykstra's alternating corrections for the projection on
//!   general masked grids, with a KKT certificate;
//! * [`plaplace`] — finite-p penalized solves and the p→∞ continuation sweep;
//! * [`envelope`] — minimal/maximal 1-Lipschitz envelopes (the obstacle
//!   solutions) and cone representation checks;
//! * [`viscosity`] — upwind eikonal / infinity-Laplacian residuals and the
//!   boundary-condition tables;
//! * [`sbv1d`] — the 1D free-discontinuity variant (fidelity + jump count)
//!   solved exactly by dynamic programming over jump configurations.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature instead of `std` for targets without a float runtime.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("lipfit-core requires either the `std` or the `libm` feature");

pub(crate) mod math;

pub mod envelope;
pub mod grid;
pub mod lip1d;
pub mod metric;
pub mod plaplace;
pub mod projector;
pub mod sbv1d;
pub mod viscosity;

pub use grid::{build_grid, Grid, GridError, MaskSpec, ScalarField, StencilKind};
pub use metric::{boundary_distance, geodesic_distance, DistanceField, MetricError};
