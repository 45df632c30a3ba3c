//! The distance-tracking ODEs and their driver.
//!
//! Coordinatize the exterior of a convex body by boundary parameters plus
//! distance: `c = sigma(u) - r n(u)` in the plane, `c = sigma(u, v) - r n(u, v)`
//! in space. Differentiating along an observer path c(t) gives a closed ODE
//! system in `(u, r)` resp. `(u, v, r)`:
//!
//! - 2D, unit-speed boundary: `du/dt = (sigma' . cdot) / (1 + r kappa)`,
//!   `dr/dt = -n . cdot`; general parametrizations solve the 2x2 linear
//!   system with columns `(sigma' - r n')` and `(-n)`.
//! - 3D: `(du, dv, dr)/dt = blockdiag((I - rW)^-1, -1) Sigma^-1 cdot`.
//!
//! [`integrate2d`]/[`integrate3d`] drive these right-hand sides with the
//! Dormand-Prince solver, wrap periodic parameters, monitor the
//! reconstruction residual `|sigma - r n - c(t)|` at every accepted step and
//! output point, and optionally re-initialize through the projection oracle
//! if the residual ever breaches its tolerance.

pub mod dopri;
pub mod trajectory;

pub use trajectory::{
    Helix3, Line2, Line3, SampledTrajectory2, SampledTrajectory3, Trajectory2, Trajectory3,
    TrajectoryError,
};

use thiserror::Error;

use crate::math::{vec2, Mat2, Vec2, Vec3};
use crate::oracle::{project_curve, project_surface, OracleError};
use crate::surfaces::{frame2d, frame3d, Curve2d, Surface3d, SurfaceError};

use dopri::{solve, SolveError, StepControl};

/// Reconstruction residual bound for freshly initialized states.
pub const INIT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackError {
    #[error("observer inside or on the body at t = {t}: r = {r}")]
    InsideBody { t: f64, r: f64 },
    #[error("frame degenerate at t = {t}: |det| = {det:.3e}")]
    FrameDegenerate { t: f64, det: f64 },
    #[error("convexity/positivity violation at t = {t}: det(I - rW) = {det}")]
    ConvexityViolation { t: f64, det: f64 },
    #[error("tracking diverged at t = {t}: residual {residual:.3e} exceeds tolerance {tolerance:.1e}")]
    TrackingDiverged {
        t: f64,
        residual: f64,
        tolerance: f64,
    },
    #[error("stiffness/singularity abort: step size underflow at t = {t}")]
    StiffnessAbort { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    MaxSteps { t: f64 },
    #[error("not in the exterior region: {0}")]
    NotInOmega(String),
    #[error("trajectory domain [{lo}, {hi}] does not cover t = {t}")]
    TrajectoryDomain { t: f64, lo: f64, hi: f64 },
    #[error("initial residual {residual:.3e} exceeds residual tolerance {tolerance:.1e}")]
    BadInitialState { residual: f64, tolerance: f64 },
    #[error("output times must advance monotonically away from the initial time")]
    BadOutputGrid,
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Tracker unknowns for a plane body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerState2 {
    pub t: f64,
    pub u: f64,
    pub r: f64,
    pub residual: f64,
}

/// Tracker unknowns for a space body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerState3 {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub residual: f64,
}

/// Solver tolerances and residual policy.
#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    /// Reconstruction residual allowed at accepted steps and outputs.
    pub residual_tolerance: f64,
    /// Attempt a single oracle re-initialization when the residual breaches
    /// its tolerance, instead of aborting outright.
    pub reinit_on_breach: bool,
    /// Grid density for oracle-backed initialization and recovery.
    pub oracle_grid_density: usize,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_step: f64::INFINITY,
            residual_tolerance: 1e-5,
            reinit_on_breach: true,
            oracle_grid_density: crate::oracle::DEFAULT_GRID_DENSITY,
            max_steps: 10_000_000,
        }
    }
}

/// Counters and exceptional events of one integration run.
#[derive(Debug, Clone, Default)]
pub struct SolverReport {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
    /// Worst reconstruction residual seen at accepted steps and outputs.
    pub max_residual: f64,
    /// Times at which the tracker had to re-project through the oracle.
    pub reinit_events: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TrackRun2 {
    pub states: Vec<TrackerState2>,
    pub report: SolverReport,
}

#[derive(Debug, Clone)]
pub struct TrackRun3 {
    pub states: Vec<TrackerState3>,
    pub report: SolverReport,
}

fn wrap(p: f64, lo: f64, hi: f64) -> f64 {
    if p >= lo && p < hi {
        p
    } else {
        lo + (p - lo).rem_euclid(hi - lo)
    }
}

/// Right-hand side of the 2D tracking system at state `(u, r)` for observer
/// velocity `cdot`. Returns `(du/dt, dr/dt)`.
///
/// Unit-speed curves take the closed form; general parametrizations solve
/// the 2x2 system `[sigma' - r n' | -n] (du, dr)^T = cdot`, which reduces to
/// the closed form when `|sigma'| = 1`.
pub fn rhs2d<C: Curve2d + ?Sized>(
    curve: &C,
    u: f64,
    r: f64,
    cdot: Vec2,
) -> Result<(f64, f64), TrackError> {
    if r <= 0.0 {
        return Err(TrackError::InsideBody { t: f64::NAN, r });
    }
    let frame = frame2d(curve, u)?;
    if curve.unit_speed() {
        let du = frame.d1.dot(cdot) / (1.0 + r * frame.kappa);
        let dr = -frame.normal.dot(cdot);
        return Ok((du, dr));
    }
    // n(u) = rot90(sigma'/|sigma'|); differentiate the normalized tangent.
    let d1 = frame.d1;
    let d2 = curve.d2(u);
    let norm = d1.norm();
    let t_prime = d2 / norm - d1 * (d1.dot(d2) / (norm * norm * norm));
    let n_prime = t_prime.rot90();
    let m = Mat2::from_cols(d1 - n_prime * r, -frame.normal);
    let det = m.det();
    if det.abs() < 1e-12 {
        return Err(TrackError::FrameDegenerate { t: f64::NAN, det });
    }
    let sol = m
        .solve(cdot)
        .ok_or(TrackError::FrameDegenerate { t: f64::NAN, det })?;
    Ok((sol.x, sol.y))
}

/// Right-hand side of the 3D tracking system. Returns `(du/dt, dv/dt, dr/dt)`.
pub fn rhs3d<S: Surface3d + ?Sized>(
    surface: &S,
    u: f64,
    v: f64,
    r: f64,
    cdot: Vec3,
) -> Result<(f64, f64, f64), TrackError> {
    if r <= 0.0 {
        return Err(TrackError::InsideBody { t: f64::NAN, r });
    }
    surface.chart_guard(u, v)?;
    let frame = frame3d(surface, u, v)?;
    if frame.det_sigma.abs() < 1e-10 {
        return Err(TrackError::FrameDegenerate {
            t: f64::NAN,
            det: frame.det_sigma,
        });
    }
    let m = Mat2::from_rows(
        1.0 - r * frame.weingarten.col0.x,
        -r * frame.weingarten.col1.x,
        -r * frame.weingarten.col0.y,
        1.0 - r * frame.weingarten.col1.y,
    );
    let det = m.det();
    // With nonpositive W eigenvalues and r > 0 this determinant is >= 1.
    if det < 1.0 - 1e-8 {
        return Err(TrackError::ConvexityViolation { t: f64::NAN, det });
    }
    let w = frame
        .sigma
        .inverse()
        .ok_or(TrackError::FrameDegenerate {
            t: f64::NAN,
            det: frame.det_sigma,
        })?
        .mul_vec(cdot);
    let tangential = m
        .solve(vec2(w.x, w.y))
        .ok_or(TrackError::ConvexityViolation { t: f64::NAN, det })?;
    Ok((tangential.x, tangential.y, -w.z))
}

/// Time derivative of the projection point along the tracked solution:
/// `sigma_u du/dt + sigma_v dv/dt`.
pub fn projection_velocity<S: Surface3d + ?Sized>(
    surface: &S,
    u: f64,
    v: f64,
    du: f64,
    dv: f64,
) -> Vec3 {
    surface.d1u(u, v) * du + surface.d1v(u, v) * dv
}

fn residual2<C: Curve2d + ?Sized>(curve: &C, u: f64, r: f64, c: Vec2) -> Result<f64, TrackError> {
    let frame = frame2d(curve, u)?;
    Ok((curve.eval(u) - frame.normal * r - c).norm())
}

fn residual3<S: Surface3d + ?Sized>(
    surface: &S,
    u: f64,
    v: f64,
    r: f64,
    c: Vec3,
) -> Result<f64, TrackError> {
    let frame = frame3d(surface, u, v)?;
    Ok((surface.eval(u, v) - frame.normal * r - c).norm())
}

/// Solve the nearest-point problem once and package the result as a tracker
/// state: `sigma(u)` is the projection of `point` and `r` its distance.
pub fn initialize2d<C: Curve2d + ?Sized>(
    curve: &C,
    point: Vec2,
    grid_density: usize,
) -> Result<TrackerState2, TrackError> {
    let proj = match project_curve(curve, point, grid_density) {
        Ok(p) => p,
        Err(OracleError::OnBoundary(d)) => {
            return Err(TrackError::NotInOmega(format!(
                "point lies on the boundary (distance {d:.3e})"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let frame = frame2d(curve, proj.params)?;
    if proj.theta.dot(frame.normal) > 0.0 {
        return Err(TrackError::NotInOmega(
            "point lies inside the body".to_string(),
        ));
    }
    let residual = (curve.eval(proj.params) - frame.normal * proj.distance - point).norm();
    if residual > INIT_RESIDUAL_TOL {
        return Err(TrackError::NotInOmega(format!(
            "reconstruction residual {residual:.3e} after projection"
        )));
    }
    Ok(TrackerState2 {
        t: 0.0,
        u: proj.params,
        r: proj.distance,
        residual,
    })
}

/// 3D analogue of [`initialize2d`].
///
/// The exterior test is the separating-plane criterion: for a convex body,
/// `theta . (witness - nearest) < 0` exactly when the query point is outside.
/// When the projection lands on a degenerate chart point (a pole), the frame
/// is unavailable; the state is still returned (with `theta` standing in for
/// the normal) and tracking from it will be rejected by the chart guard.
pub fn initialize3d<S: Surface3d + ?Sized>(
    surface: &S,
    point: Vec3,
    grid_density: usize,
) -> Result<TrackerState3, TrackError> {
    let proj = match project_surface(surface, point, grid_density) {
        Ok(p) => p,
        Err(OracleError::OnBoundary(d)) => {
            return Err(TrackError::NotInOmega(format!(
                "point lies on the boundary (distance {d:.3e})"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let (u, v) = proj.params;
    if proj.theta.dot(surface.interior_witness() - proj.nearest) > 0.0 {
        return Err(TrackError::NotInOmega(
            "point lies inside the body".to_string(),
        ));
    }
    let residual = match frame3d(surface, u, v) {
        Ok(frame) => (surface.eval(u, v) - frame.normal * proj.distance - point).norm(),
        Err(SurfaceError::DegenerateChart { .. }) | Err(SurfaceError::ChartSingularity { .. }) => {
            (proj.nearest + proj.theta * proj.distance - point).norm()
        }
        Err(e) => return Err(e.into()),
    };
    if residual > INIT_RESIDUAL_TOL {
        return Err(TrackError::NotInOmega(format!(
            "reconstruction residual {residual:.3e} after projection"
        )));
    }
    Ok(TrackerState3 {
        t: 0.0,
        u,
        v,
        r: proj.distance,
        residual,
    })
}

fn check_grid(t0: f64, times: &[f64]) -> Result<f64, TrackError> {
    let Some(&t_end) = times.last() else {
        return Ok(t0);
    };
    let dir = (t_end - t0).signum();
    if dir == 0.0 {
        if times.iter().all(|&t| t == t0) {
            return Ok(t0);
        }
        return Err(TrackError::BadOutputGrid);
    }
    let mut prev = t0;
    for &t in times {
        if (t - prev) * dir < 0.0 || (t - t0) * dir < 0.0 {
            return Err(TrackError::BadOutputGrid);
        }
        prev = t;
    }
    Ok(t_end)
}

fn step_control(cfg: &IntegratorConfig) -> StepControl {
    StepControl {
        abs_tol: cfg.abs_tol,
        rel_tol: cfg.rel_tol,
        max_step: cfg.max_step,
        max_steps: cfg.max_steps,
        min_step_fraction: 1e-14,
    }
}

fn map_solve_error(e: SolveError<TrackError>) -> TrackError {
    match e {
        SolveError::StepSizeUnderflow { t } => TrackError::StiffnessAbort { t },
        SolveError::MaxStepsExceeded { t } => TrackError::MaxSteps { t },
        SolveError::Rhs(e) => e,
    }
}

/// Attach the current time to errors raised inside the right-hand side.
fn stamp(e: TrackError, t: f64) -> TrackError {
    match e {
        TrackError::InsideBody { r, .. } => TrackError::InsideBody { t, r },
        TrackError::FrameDegenerate { det, .. } => TrackError::FrameDegenerate { t, det },
        TrackError::ConvexityViolation { det, .. } => TrackError::ConvexityViolation { t, det },
        other => other,
    }
}

/// Track a plane body along a trajectory, emitting states at `output_times`.
///
/// `output_times` must advance monotonically from `init.t` (forward or
/// backward); `init` must satisfy the reconstruction identity to within the
/// configured residual tolerance.
pub fn integrate2d<C: Curve2d + ?Sized, T: Trajectory2 + ?Sized>(
    curve: &C,
    traj: &T,
    init: TrackerState2,
    cfg: &IntegratorConfig,
    output_times: &[f64],
) -> Result<TrackRun2, TrackError> {
    match integrate2d_partial(curve, traj, init, cfg, output_times) {
        (run, None) => Ok(run),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`integrate2d`], but an abort mid-run keeps the states emitted so
/// far: returns `(partial run, Some(error))` instead of dropping them.
/// Grid and precondition violations abort before any state is produced.
pub fn integrate2d_partial<C: Curve2d + ?Sized, T: Trajectory2 + ?Sized>(
    curve: &C,
    traj: &T,
    init: TrackerState2,
    cfg: &IntegratorConfig,
    output_times: &[f64],
) -> (TrackRun2, Option<TrackError>) {
    let empty = |e: TrackError| {
        (
            TrackRun2 {
                states: Vec::new(),
                report: SolverReport::default(),
            },
            Some(e),
        )
    };
    let t_end = match check_grid(init.t, output_times) {
        Ok(t) => t,
        Err(e) => return empty(e),
    };
    let (dlo, dhi) = traj.domain();
    for &t in [init.t, t_end].iter().chain(output_times) {
        if t < dlo || t > dhi {
            return empty(TrackError::TrajectoryDomain { t, lo: dlo, hi: dhi });
        }
    }
    if init.residual > cfg.residual_tolerance {
        return empty(TrackError::BadInitialState {
            residual: init.residual,
            tolerance: cfg.residual_tolerance,
        });
    }

    let (lo, hi) = curve.domain();
    let periodic = curve.periodic();
    let wrap2 = |y: &mut [f64; 2]| {
        if periodic {
            y[0] = wrap(y[0], lo, hi);
        }
    };

    let mut report = SolverReport {
        max_residual: init.residual,
        ..SolverReport::default()
    };
    let mut states: Vec<TrackerState2> = Vec::with_capacity(output_times.len());
    let mut idx = 0;
    let dir = (t_end - init.t).signum();
    let span = (t_end - init.t).abs().max(f64::MIN_POSITIVE);
    while idx < output_times.len() && (output_times[idx] - init.t).abs() <= 1e-12 * span {
        states.push(TrackerState2 {
            t: output_times[idx],
            ..init
        });
        idx += 1;
    }
    if init.t == t_end {
        return (TrackRun2 { states, report }, None);
    }

    let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2], TrackError> {
        let (du, dr) = rhs2d(curve, y[0], y[1], traj.velocity(t)).map_err(|e| stamp(e, t))?;
        Ok([du, dr])
    };

    let result = solve(
        rhs,
        init.t,
        [init.u, init.r],
        t_end,
        &step_control(cfg),
        |step, y| {
            // Emit dense outputs that fall inside this step.
            while idx < output_times.len()
                && (output_times[idx] - step.t_new) * dir <= 1e-12 * span
            {
                let t = output_times[idx];
                let mut yo = step.eval(t);
                wrap2(&mut yo);
                let residual =
                    residual2(curve, yo[0], yo[1], traj.position(t)).map_err(|e| stamp(e, t))?;
                report.max_residual = report.max_residual.max(residual);
                if residual > cfg.residual_tolerance {
                    return Err(TrackError::TrackingDiverged {
                        t,
                        residual,
                        tolerance: cfg.residual_tolerance,
                    });
                }
                states.push(TrackerState2 {
                    t,
                    u: yo[0],
                    r: yo[1],
                    residual,
                });
                idx += 1;
            }
            // Wrap and re-check the end-of-step state.
            wrap2(y);
            let t = step.t_new;
            let residual =
                residual2(curve, y[0], y[1], traj.position(t)).map_err(|e| stamp(e, t))?;
            report.max_residual = report.max_residual.max(residual);
            if residual > cfg.residual_tolerance {
                if cfg.reinit_on_breach {
                    let state = initialize2d(curve, traj.position(t), cfg.oracle_grid_density)?;
                    y[0] = state.u;
                    y[1] = state.r;
                    report.reinit_events.push(t);
                    return Ok(());
                }
                return Err(TrackError::TrackingDiverged {
                    t,
                    residual,
                    tolerance: cfg.residual_tolerance,
                });
            }
            Ok(())
        },
    );

    let abort = match result {
        Ok((stats, _)) => {
            report.steps_accepted = stats.accepted;
            report.steps_rejected = stats.rejected;
            report.rhs_evals = stats.rhs_evals;
            None
        }
        Err(e) => Some(map_solve_error(e)),
    };
    (TrackRun2 { states, report }, abort)
}

/// Track a space body along a trajectory, emitting states at `output_times`.
pub fn integrate3d<S: Surface3d + ?Sized, T: Trajectory3 + ?Sized>(
    surface: &S,
    traj: &T,
    init: TrackerState3,
    cfg: &IntegratorConfig,
    output_times: &[f64],
) -> Result<TrackRun3, TrackError> {
    match integrate3d_partial(surface, traj, init, cfg, output_times) {
        (run, None) => Ok(run),
        (_, Some(e)) => Err(e),
    }
}

/// 3D analogue of [`integrate2d_partial`].
pub fn integrate3d_partial<S: Surface3d + ?Sized, T: Trajectory3 + ?Sized>(
    surface: &S,
    traj: &T,
    init: TrackerState3,
    cfg: &IntegratorConfig,
    output_times: &[f64],
) -> (TrackRun3, Option<TrackError>) {
    let empty = |e: TrackError| {
        (
            TrackRun3 {
                states: Vec::new(),
                report: SolverReport::default(),
            },
            Some(e),
        )
    };
    let t_end = match check_grid(init.t, output_times) {
        Ok(t) => t,
        Err(e) => return empty(e),
    };
    let (dlo, dhi) = traj.domain();
    for &t in [init.t, t_end].iter().chain(output_times) {
        if t < dlo || t > dhi {
            return empty(TrackError::TrajectoryDomain { t, lo: dlo, hi: dhi });
        }
    }
    if init.residual > cfg.residual_tolerance {
        return empty(TrackError::BadInitialState {
            residual: init.residual,
            tolerance: cfg.residual_tolerance,
        });
    }

    let (ulo, uhi) = surface.domain_u();
    let (vlo, vhi) = surface.domain_v();
    let (pu, pv) = (surface.periodic_u(), surface.periodic_v());
    let wrap3 = |y: &mut [f64; 3]| {
        if pu {
            y[0] = wrap(y[0], ulo, uhi);
        }
        if pv {
            y[1] = wrap(y[1], vlo, vhi);
        }
    };
    // Chart-boundary watch: discrete steps can hop across a singular sliver
    // (a pole) without any stage landing inside the pointwise guard, so
    // non-periodic parameters leaving their domain abort explicitly.
    let chart_watch = |u: f64, v: f64| -> Result<(), TrackError> {
        if (!pu && (u < ulo || u > uhi)) || (!pv && (v < vlo || v > vhi)) {
            return Err(TrackError::Surface(SurfaceError::ChartSingularity {
                u,
                v,
                what: "tracked state left the chart domain".to_string(),
            }));
        }
        surface.chart_guard(u, v).map_err(TrackError::from)
    };

    let mut report = SolverReport {
        max_residual: init.residual,
        ..SolverReport::default()
    };
    let mut states: Vec<TrackerState3> = Vec::with_capacity(output_times.len());
    let mut idx = 0;
    let dir = (t_end - init.t).signum();
    let span = (t_end - init.t).abs().max(f64::MIN_POSITIVE);
    while idx < output_times.len() && (output_times[idx] - init.t).abs() <= 1e-12 * span {
        states.push(TrackerState3 {
            t: output_times[idx],
            ..init
        });
        idx += 1;
    }
    if init.t == t_end {
        return (TrackRun3 { states, report }, None);
    }

    let rhs = |t: f64, y: &[f64; 3]| -> Result<[f64; 3], TrackError> {
        let (du, dv, dr) =
            rhs3d(surface, y[0], y[1], y[2], traj.velocity(t)).map_err(|e| stamp(e, t))?;
        Ok([du, dv, dr])
    };

    let result = solve(
        rhs,
        init.t,
        [init.u, init.v, init.r],
        t_end,
        &step_control(cfg),
        |step, y| {
            while idx < output_times.len()
                && (output_times[idx] - step.t_new) * dir <= 1e-12 * span
            {
                let t = output_times[idx];
                let mut yo = step.eval(t);
                wrap3(&mut yo);
                chart_watch(yo[0], yo[1])?;
                let residual = residual3(surface, yo[0], yo[1], yo[2], traj.position(t))
                    .map_err(|e| stamp(e, t))?;
                report.max_residual = report.max_residual.max(residual);
                if residual > cfg.residual_tolerance {
                    return Err(TrackError::TrackingDiverged {
                        t,
                        residual,
                        tolerance: cfg.residual_tolerance,
                    });
                }
                states.push(TrackerState3 {
                    t,
                    u: yo[0],
                    v: yo[1],
                    r: yo[2],
                    residual,
                });
                idx += 1;
            }
            wrap3(y);
            chart_watch(y[0], y[1])?;
            let t = step.t_new;
            let residual = residual3(surface, y[0], y[1], y[2], traj.position(t))
                .map_err(|e| stamp(e, t))?;
            report.max_residual = report.max_residual.max(residual);
            if residual > cfg.residual_tolerance {
                if cfg.reinit_on_breach {
                    let state = initialize3d(surface, traj.position(t), cfg.oracle_grid_density)?;
                    y[0] = state.u;
                    y[1] = state.v;
                    y[2] = state.r;
                    report.reinit_events.push(t);
                    return Ok(());
                }
                return Err(TrackError::TrackingDiverged {
                    t,
                    residual,
                    tolerance: cfg.residual_tolerance,
                });
            }
            Ok(())
        },
    );

    let abort = match result {
        Ok((stats, _)) => {
            report.steps_accepted = stats.accepted;
            report.steps_rejected = stats.rejected;
            report.rhs_evals = stats.rhs_evals;
            None
        }
        Err(e) => Some(map_solve_error(e)),
    };
    (TrackRun3 { states, report }, abort)
}

#[cfg(test)]
mod tests;
