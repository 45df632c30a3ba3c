//! Track the distance from a moving observer to a convex body by integrating
//! an ODE instead of re-solving a nearest-point problem at every instant.
//!
//! Writing the observer position as `c = sigma(u, v) - r n(u, v)` (boundary
//! point minus distance times inward normal) turns distance tracking into an
//! initial value problem for `(u, v, r)`: project once at the start, then
//! integrate. The crate provides:
//!
//! - [`surfaces`]: parametric convex bodies in 2D/3D and their frames,
//!   curvature and Weingarten matrices;
//! - [`tracker`]: the tracking ODE right-hand sides, an adaptive
//!   Dormand-Prince 5(4) integrator with dense output, and residual
//!   monitoring of the reconstruction identity;
//! - [`oracle`]: independent brute-force nearest-point queries used to
//!   initialize and cross-check the tracker, plus numerical probes of
//!   metric-projection regularity;
//! - [`shapiro`]: a C^{1,1} convex set on which the one-sided derivative of
//!   the projection fails to exist at a point, with the experiments that
//!   exhibit the failure;
//! - [`scenes`]: JSON scene configs, run orchestration and CSV/JSON output
//!   shared by the CLI and the browser demo.

pub mod math;
pub mod oracle;
pub mod scenes;
pub mod shapiro;
pub mod surfaces;
pub mod tracker;
