//! Scene configuration and run orchestration: one JSON document describes a
//! body, an observer trajectory, solver settings and a time grid; runs emit
//! CSV rows plus a JSON metadata report. The CLI and the browser demo both
//! drive this module.
//!
//! Conventions: all lengths share the ambient unit, all angles are radians.
//! CSV numbers are printed with 17 significant digits so a parsed file
//! round-trips to the exact bit pattern.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{vec2, vec3, SplitMix64, Vec2, Vec3};
use crate::oracle::{
    certify_curve_optimality, certify_surface_optimality, distance_gradient_check,
    project_curve, project_surface, projection_continuity_check, CurveProjector, OracleError,
    SurfaceProjector, DEFAULT_GRID_DENSITY, DEFAULT_SEED,
};
use crate::shapiro::{build_shapiro, ShapiroError, ShapiroSet};
use crate::surfaces::{
    builtin_curve, builtin_surface, validate_curve, validate_surface, Curve2d, Surface3d,
    SurfaceError,
};
use crate::tracker::{
    initialize2d, initialize3d, integrate2d_partial, integrate3d_partial, Helix3,
    IntegratorConfig, Line2, Line3, SampledTrajectory2, SampledTrajectory3, SolverReport,
    TrackError, TrackerState2, TrackerState3, Trajectory2, Trajectory3,
};

#[derive(Debug, Error)]
pub enum SceneError {
    /// Malformed or inconsistent configuration (CLI exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// Numerical failure during a run (CLI exit code 3).
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Shapiro(#[from] ShapiroError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<SurfaceError> for SceneError {
    fn from(e: SurfaceError) -> Self {
        SceneError::Config(e.to_string())
    }
}

/// Body description: a builtin name plus scalar parameters.
///
/// 2D kinds: `disk` (`radius`), `ellipse` (`a`, `b`), `shapiro` (`lambda`,
/// `c`, `arcs`). 3D kinds: `cylinder` (`kappa`, optional `u_min`/`u_max`),
/// `sphere` (`kappa`), `ellipsoid_of_revolution` (`kappa`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodySpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectorySpec {
    /// c(t) = start + t velocity.
    Line { start: Vec<f64>, velocity: Vec<f64> },
    /// Circle in the plane (2D) or in a horizontal plane through the center
    /// (3D).
    Circle {
        #[serde(default)]
        center: Option<Vec<f64>>,
        radius: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// 3D circle with a vertical climb rate.
    Helix {
        #[serde(default)]
        center: Option<Vec<f64>>,
        radius: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
        climb: f64,
    },
    /// CSV file of `t,x,y[,z]` samples, interpolated by a natural cubic
    /// spline.
    Samples { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorSettings {
    #[serde(default = "default_tol")]
    pub abs_tol: f64,
    #[serde(default = "default_tol")]
    pub rel_tol: f64,
    #[serde(default)]
    pub max_step: Option<f64>,
    #[serde(default = "default_residual_tol")]
    pub residual_tolerance: f64,
    #[serde(default = "default_true")]
    pub reinit_on_breach: bool,
    #[serde(default = "default_density")]
    pub oracle_grid_density: usize,
}

fn default_tol() -> f64 {
    1e-9
}
fn default_residual_tol() -> f64 {
    1e-5
}
fn default_true() -> bool {
    true
}
fn default_density() -> usize {
    DEFAULT_GRID_DENSITY
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            abs_tol: default_tol(),
            rel_tol: default_tol(),
            max_step: None,
            residual_tolerance: default_residual_tol(),
            reinit_on_breach: true,
            oracle_grid_density: default_density(),
        }
    }
}

impl IntegratorSettings {
    pub fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            residual_tolerance: self.residual_tolerance,
            reinit_on_breach: self.reinit_on_breach,
            oracle_grid_density: self.oracle_grid_density,
            ..IntegratorConfig::default()
        }
    }
}

/// Initial tracker state: `"auto"` projects the observer's start position
/// through the oracle; the explicit form gives `(u, v, r)` directly (`v`
/// omitted in 2D).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Named(String),
    Explicit {
        u: f64,
        #[serde(default)]
        v: Option<f64>,
        r: f64,
    },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Named("auto".to_string())
    }
}

/// Output time grid: `samples` evenly spaced times from `start` to `end`
/// inclusive (0 samples mean an empty run).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        match self.samples {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidateSettings {
    #[serde(default = "default_validate_tol")]
    pub r_tol: f64,
    #[serde(default = "default_validate_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_density")]
    pub grid_density: usize,
}

fn default_validate_tol() -> f64 {
    1e-6
}

impl Default for ValidateSettings {
    fn default() -> Self {
        ValidateSettings {
            r_tol: default_validate_tol(),
            residual_tol: default_validate_tol(),
            grid_density: default_density(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneConfig {
    pub body: BodySpec,
    pub trajectory: TrajectorySpec,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub initial: InitialSpec,
    pub time: TimeGrid,
    #[serde(default)]
    pub validate: ValidateSettings,
}

impl SceneConfig {
    pub fn from_json(text: &str) -> Result<SceneConfig, SceneError> {
        serde_json::from_str(text).map_err(|e| SceneError::Config(e.to_string()))
    }
}

/// A built body, ready to query.
pub enum Body {
    Curve(Box<dyn Curve2d + Send + Sync>),
    Surface(Box<dyn Surface3d + Send + Sync>),
    Piecewise(Box<ShapiroSet>),
}

impl Body {
    pub fn dimension(&self) -> usize {
        match self {
            Body::Curve(_) | Body::Piecewise(_) => 2,
            Body::Surface(_) => 3,
        }
    }
}

/// Build and sanity-check a body from its spec. Smooth bodies are sampled
/// for regularity and convexity and rejected if they fail.
pub fn build_body(spec: &BodySpec) -> Result<Body, SceneError> {
    match spec.kind.as_str() {
        "disk" | "circle" | "ellipse" => {
            let curve = builtin_curve(&spec.kind, &spec.params)?;
            validate_curve(curve.as_ref(), 256)?;
            Ok(Body::Curve(curve))
        }
        "cylinder" | "sphere" | "ellipsoid_of_revolution" => {
            let surface = builtin_surface(&spec.kind, &spec.params)?;
            validate_surface(surface.as_ref(), 32)?;
            Ok(Body::Surface(surface))
        }
        "shapiro" => {
            let lambda = spec.params.get("lambda").copied().unwrap_or(0.5);
            let c = spec
                .params
                .get("c")
                .copied()
                .unwrap_or(std::f64::consts::FRAC_PI_2);
            let arcs = spec.params.get("arcs").copied().unwrap_or(30.0) as usize;
            Ok(Body::Piecewise(Box::new(build_shapiro(lambda, c, arcs)?)))
        }
        other => Err(SceneError::Config(format!("unknown body kind `{other}`"))),
    }
}

fn as_vec2(v: &[f64], what: &str) -> Result<Vec2, SceneError> {
    if v.len() != 2 {
        return Err(SceneError::Config(format!(
            "{what} must have 2 components, got {}",
            v.len()
        )));
    }
    Ok(vec2(v[0], v[1]))
}

fn as_vec3(v: &[f64], what: &str) -> Result<Vec3, SceneError> {
    if v.len() != 3 {
        return Err(SceneError::Config(format!(
            "{what} must have 3 components, got {}",
            v.len()
        )));
    }
    Ok(vec3(v[0], v[1], v[2]))
}

/// Parse a `t,x,y[,z]` sample file (header row optional).
pub fn parse_samples(reader: impl BufRead) -> Result<(Vec<f64>, Vec<Vec<f64>>), SceneError> {
    let mut ts = Vec::new();
    let mut points = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields[0].parse::<f64>().is_err() {
            continue; // header
        }
        let nums: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let nums = nums.map_err(|e| {
            SceneError::Config(format!("sample file line {}: {e}", lineno + 1))
        })?;
        if nums.len() < 3 {
            return Err(SceneError::Config(format!(
                "sample file line {}: need t,x,y[,z]",
                lineno + 1
            )));
        }
        ts.push(nums[0]);
        points.push(nums[1..].to_vec());
    }
    Ok((ts, points))
}

pub fn build_trajectory2(
    spec: &TrajectorySpec,
    read_samples: impl FnOnce(&str) -> Result<(Vec<f64>, Vec<Vec<f64>>), SceneError>,
) -> Result<Box<dyn Trajectory2 + Send + Sync>, SceneError> {
    match spec {
        TrajectorySpec::Line { start, velocity } => Ok(Box::new(Line2 {
            start: as_vec2(start, "trajectory start")?,
            velocity: as_vec2(velocity, "trajectory velocity")?,
        })),
        TrajectorySpec::Circle {
            center,
            radius,
            omega,
            phase,
        } => {
            let center = match center {
                Some(c) => as_vec2(c, "trajectory center")?,
                None => Vec2::ZERO,
            };
            Ok(Box::new(crate::tracker::trajectory::Circle2 {
                center,
                radius: *radius,
                omega: *omega,
                phase: *phase,
            }))
        }
        TrajectorySpec::Helix { .. } => Err(SceneError::Config(
            "helix trajectories need a 3D body".to_string(),
        )),
        TrajectorySpec::Samples { path } => {
            let (ts, pts) = read_samples(path)?;
            let points: Result<Vec<Vec2>, _> =
                pts.iter().map(|p| as_vec2(p, "sample point")).collect();
            let traj = SampledTrajectory2::new(&ts, &points?)
                .map_err(|e| SceneError::Config(e.to_string()))?;
            Ok(Box::new(traj))
        }
    }
}

pub fn build_trajectory3(
    spec: &TrajectorySpec,
    read_samples: impl FnOnce(&str) -> Result<(Vec<f64>, Vec<Vec<f64>>), SceneError>,
) -> Result<Box<dyn Trajectory3 + Send + Sync>, SceneError> {
    match spec {
        TrajectorySpec::Line { start, velocity } => Ok(Box::new(Line3 {
            start: as_vec3(start, "trajectory start")?,
            velocity: as_vec3(velocity, "trajectory velocity")?,
        })),
        TrajectorySpec::Circle {
            center,
            radius,
            omega,
            phase,
        }
        | TrajectorySpec::Helix {
            center,
            radius,
            omega,
            phase,
            ..
        } => {
            let climb = match spec {
                TrajectorySpec::Helix { climb, .. } => *climb,
                _ => 0.0,
            };
            let center = match center {
                Some(c) => as_vec3(c, "trajectory center")?,
                None => Vec3::ZERO,
            };
            Ok(Box::new(Helix3 {
                center,
                radius: *radius,
                omega: *omega,
                phase: *phase,
                climb,
            }))
        }
        TrajectorySpec::Samples { path } => {
            let (ts, pts) = read_samples(path)?;
            let points: Result<Vec<Vec3>, _> =
                pts.iter().map(|p| as_vec3(p, "sample point")).collect();
            let traj = SampledTrajectory3::new(&ts, &points?)
                .map_err(|e| SceneError::Config(e.to_string()))?;
            Ok(Box::new(traj))
        }
    }
}

/// Default sample-file reader against the filesystem.
pub fn read_samples_file(path: &str) -> Result<(Vec<f64>, Vec<Vec<f64>>), SceneError> {
    let file = std::fs::File::open(path).map_err(|e| {
        SceneError::Config(format!("sample file `{path}`: {e}"))
    })?;
    parse_samples(std::io::BufReader::new(file))
}

/// One output row of a tracking run (`v` absent in 2D).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrackRow {
    pub t: f64,
    pub u: f64,
    pub v: Option<f64>,
    pub r: f64,
    pub residual: f64,
}

/// Metadata report of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub body_kind: String,
    pub trajectory_kind: String,
    pub dimension: usize,
    pub initial: (f64, Option<f64>, f64),
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub residual_tolerance: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
    pub max_residual: f64,
    /// Oracle re-projection events (exceptional; normally empty).
    pub reinit_events: Vec<f64>,
    /// Set when the run aborted; the rows written before the abort are kept.
    pub abort: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrackOutput {
    pub rows: Vec<TrackRow>,
    pub meta: RunMeta,
}

fn meta_from_report(
    config: &SceneConfig,
    dimension: usize,
    initial: (f64, Option<f64>, f64),
    traj_kind: &str,
    report: &SolverReport,
    abort: Option<String>,
) -> RunMeta {
    RunMeta {
        body_kind: config.body.kind.clone(),
        trajectory_kind: traj_kind.to_string(),
        dimension,
        initial,
        abs_tol: config.integrator.abs_tol,
        rel_tol: config.integrator.rel_tol,
        residual_tolerance: config.integrator.residual_tolerance,
        steps_accepted: report.steps_accepted,
        steps_rejected: report.steps_rejected,
        rhs_evals: report.rhs_evals,
        max_residual: report.max_residual,
        reinit_events: report.reinit_events.clone(),
        abort,
    }
}

/// Grid and domain mistakes are configuration errors; everything else a
/// tracking run reports is a numerical abort.
fn is_config_error(e: &TrackError) -> bool {
    matches!(
        e,
        TrackError::TrajectoryDomain { .. } | TrackError::BadOutputGrid
    )
}

/// Run the tracker for a scene. Bodies must be twice differentiable; the
/// piecewise counterexample body is projectable but not trackable.
pub fn run_track(config: &SceneConfig) -> Result<TrackOutput, SceneError> {
    let body = build_body(&config.body)?;
    let times = config.time.times();
    let cfg = config.integrator.to_config();
    match body {
        Body::Piecewise(_) => Err(SceneError::Config(
            "the shapiro body is not twice differentiable and cannot be tracked; use the oracle or shapiro subcommands".to_string(),
        )),
        Body::Curve(curve) => {
            let traj = build_trajectory2(&config.trajectory, read_samples_file)?;
            let init = match &config.initial {
                InitialSpec::Named(name) if name == "auto" => TrackerState2 {
                    t: config.time.start,
                    ..initialize2d(curve.as_ref(), traj.position(config.time.start), cfg.oracle_grid_density)?
                },
                InitialSpec::Named(other) => {
                    return Err(SceneError::Config(format!(
                        "unknown initial spec `{other}` (expected \"auto\" or explicit values)"
                    )))
                }
                InitialSpec::Explicit { u, v: None, r } => TrackerState2 {
                    t: config.time.start,
                    u: *u,
                    r: *r,
                    residual: {
                        let frame = crate::surfaces::frame2d(curve.as_ref(), *u)?;
                        (curve.eval(*u) - frame.normal * *r - traj.position(config.time.start))
                            .norm()
                    },
                },
                InitialSpec::Explicit { v: Some(_), .. } => {
                    return Err(SceneError::Config(
                        "initial v given for a 2D body".to_string(),
                    ))
                }
            };
            if times.is_empty() {
                return Ok(TrackOutput {
                    rows: Vec::new(),
                    meta: meta_from_report(
                        config,
                        2,
                        (init.u, None, init.r),
                        traj.source_tag(),
                        &SolverReport::default(),
                        None,
                    ),
                });
            }
            let (run, abort) = integrate2d_partial(curve.as_ref(), traj.as_ref(), init, &cfg, &times);
            if let Some(e) = &abort {
                if is_config_error(e) {
                    return Err(SceneError::Config(e.to_string()));
                }
            }
            let rows = run
                .states
                .iter()
                .map(|s| TrackRow {
                    t: s.t,
                    u: s.u,
                    v: None,
                    r: s.r,
                    residual: s.residual,
                })
                .collect();
            Ok(TrackOutput {
                rows,
                meta: meta_from_report(
                    config,
                    2,
                    (init.u, None, init.r),
                    traj.source_tag(),
                    &run.report,
                    abort.map(|e| e.to_string()),
                ),
            })
        }
        Body::Surface(surface) => {
            let traj = build_trajectory3(&config.trajectory, read_samples_file)?;
            let init = match &config.initial {
                InitialSpec::Named(name) if name == "auto" => TrackerState3 {
                    t: config.time.start,
                    ..initialize3d(surface.as_ref(), traj.position(config.time.start), cfg.oracle_grid_density)?
                },
                InitialSpec::Named(other) => {
                    return Err(SceneError::Config(format!(
                        "unknown initial spec `{other}` (expected \"auto\" or explicit values)"
                    )))
                }
                InitialSpec::Explicit { u, v: Some(v), r } => TrackerState3 {
                    t: config.time.start,
                    u: *u,
                    v: *v,
                    r: *r,
                    residual: {
                        let frame = crate::surfaces::frame3d(surface.as_ref(), *u, *v)?;
                        (surface.eval(*u, *v) - frame.normal * *r
                            - traj.position(config.time.start))
                        .norm()
                    },
                },
                InitialSpec::Explicit { v: None, .. } => {
                    return Err(SceneError::Config(
                        "initial v missing for a 3D body".to_string(),
                    ))
                }
            };
            if times.is_empty() {
                return Ok(TrackOutput {
                    rows: Vec::new(),
                    meta: meta_from_report(
                        config,
                        3,
                        (init.u, Some(init.v), init.r),
                        traj.source_tag(),
                        &SolverReport::default(),
                        None,
                    ),
                });
            }
            let (run, abort) =
                integrate3d_partial(surface.as_ref(), traj.as_ref(), init, &cfg, &times);
            if let Some(e) = &abort {
                if is_config_error(e) {
                    return Err(SceneError::Config(e.to_string()));
                }
            }
            let rows = run
                .states
                .iter()
                .map(|s| TrackRow {
                    t: s.t,
                    u: s.u,
                    v: Some(s.v),
                    r: s.r,
                    residual: s.residual,
                })
                .collect();
            Ok(TrackOutput {
                rows,
                meta: meta_from_report(
                    config,
                    3,
                    (init.u, Some(init.v), init.r),
                    traj.source_tag(),
                    &run.report,
                    abort.map(|e| e.to_string()),
                ),
            })
        }
    }
}

/// 17-significant-digit formatting: round-trip safe for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_track_csv(output: &TrackOutput, mut w: impl Write) -> std::io::Result<()> {
    if output.meta.dimension == 3 {
        writeln!(w, "t,u,v,r,residual")?;
        for row in &output.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(row.t),
                fmt_f64(row.u),
                fmt_f64(row.v.unwrap_or(f64::NAN)),
                fmt_f64(row.r),
                fmt_f64(row.residual)
            )?;
        }
    } else {
        writeln!(w, "t,u,r,residual")?;
        for row in &output.rows {
            writeln!(
                w,
                "{},{},{},{}",
                fmt_f64(row.t),
                fmt_f64(row.u),
                fmt_f64(row.r),
                fmt_f64(row.residual)
            )?;
        }
    }
    Ok(())
}

/// Parse a track CSV produced by [`write_track_csv`].
pub fn read_track_csv(reader: impl BufRead) -> Result<Vec<TrackRow>, SceneError> {
    let mut rows = Vec::new();
    let mut dim3 = true;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 {
            dim3 = line.starts_with("t,u,v,");
            continue;
        }
        let nums: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let nums =
            nums.map_err(|e| SceneError::Config(format!("track csv line {}: {e}", lineno + 1)))?;
        let expect = if dim3 { 5 } else { 4 };
        if nums.len() != expect {
            return Err(SceneError::Config(format!(
                "track csv line {}: expected {expect} fields",
                lineno + 1
            )));
        }
        rows.push(if dim3 {
            TrackRow {
                t: nums[0],
                u: nums[1],
                v: Some(nums[2]),
                r: nums[3],
                residual: nums[4],
            }
        } else {
            TrackRow {
                t: nums[0],
                u: nums[1],
                v: None,
                r: nums[2],
                residual: nums[3],
            }
        });
    }
    Ok(rows)
}

/// Per-time validation entry.
#[derive(Debug, Clone, Serialize)]
pub struct ValidateRow {
    pub t: f64,
    pub r_ode: f64,
    pub r_oracle: f64,
    pub r_abs_err: f64,
    /// Reconstruction residual recomputed from the CSV row.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidateReport {
    pub rows: Vec<ValidateRow>,
    pub max_r_abs_err: f64,
    pub max_residual: f64,
    pub r_tol: f64,
    pub residual_tol: f64,
    pub pass: bool,
}

/// Re-evaluate a completed track CSV against the scene: recompute the
/// reconstruction residual of every row through the body's chart and compare
/// the tracked distance with an independent oracle projection.
pub fn run_validate(config: &SceneConfig, rows: &[TrackRow]) -> Result<ValidateReport, SceneError> {
    let body = build_body(&config.body)?;
    let settings = &config.validate;
    let mut out = Vec::with_capacity(rows.len());
    let mut max_err = 0.0f64;
    let mut max_residual = 0.0f64;
    match body {
        Body::Piecewise(_) => {
            return Err(SceneError::Config(
                "validate needs a trackable body".to_string(),
            ))
        }
        Body::Curve(curve) => {
            let traj = build_trajectory2(&config.trajectory, read_samples_file)?;
            for row in rows {
                let c = traj.position(row.t);
                let frame = crate::surfaces::frame2d(curve.as_ref(), row.u)?;
                let residual = (curve.eval(row.u) - frame.normal * row.r - c).norm();
                let oracle = project_curve(curve.as_ref(), c, settings.grid_density)?;
                let err = (row.r - oracle.distance).abs();
                max_err = max_err.max(err);
                max_residual = max_residual.max(residual);
                out.push(ValidateRow {
                    t: row.t,
                    r_ode: row.r,
                    r_oracle: oracle.distance,
                    r_abs_err: err,
                    residual,
                });
            }
        }
        Body::Surface(surface) => {
            let traj = build_trajectory3(&config.trajectory, read_samples_file)?;
            for row in rows {
                let v = row.v.ok_or_else(|| {
                    SceneError::Config("3D body but 2D track rows".to_string())
                })?;
                let c = traj.position(row.t);
                let frame = crate::surfaces::frame3d(surface.as_ref(), row.u, v)?;
                let residual = (surface.eval(row.u, v) - frame.normal * row.r - c).norm();
                let oracle = project_surface(surface.as_ref(), c, settings.grid_density)?;
                let err = (row.r - oracle.distance).abs();
                max_err = max_err.max(err);
                max_residual = max_residual.max(residual);
                out.push(ValidateRow {
                    t: row.t,
                    r_ode: row.r,
                    r_oracle: oracle.distance,
                    r_abs_err: err,
                    residual,
                });
            }
        }
    }
    Ok(ValidateReport {
        rows: out,
        max_r_abs_err: max_err,
        max_residual,
        r_tol: settings.r_tol,
        residual_tol: settings.residual_tol,
        pass: max_err <= settings.r_tol && max_residual <= settings.residual_tol,
    })
}

/// One oracle query: a point, with an optional probe direction for the
/// regularity checks (a seeded random direction is drawn when omitted).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleQuery {
    pub point: Vec<f64>,
    #[serde(default)]
    pub dir: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    pub body: BodySpec,
    pub queries: Vec<OracleQuery>,
    #[serde(default = "default_density")]
    pub grid_density: usize,
    /// Also certify each distance against random boundary samples.
    #[serde(default)]
    pub certify: bool,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub point: Vec<f64>,
    pub nearest: Vec<f64>,
    pub distance: f64,
    pub theta: Vec<f64>,
    pub params: Vec<f64>,
    pub dir: Vec<f64>,
    /// |Delta(t) - theta . dir| for t in {1e-2, 1e-3, 1e-4}.
    pub gradient_discrepancies: Vec<f64>,
    pub gradient_decreasing: bool,
    /// |Pi(x + h dir) - Pi(x)| for h in {1e-1 .. 1e-4}.
    pub continuity_deltas: Vec<f64>,
    pub continuity_modulus: f64,
    /// Worst margin of the optimality certificate, when requested.
    pub certificate_margin: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub seed: u64,
    pub grid_density: usize,
    pub results: Vec<OracleResult>,
}

/// Run projection queries and regularity checks against a body.
pub fn run_oracle(config: &OracleConfig, seed_override: Option<u64>) -> Result<OracleReport, SceneError> {
    let body = build_body(&config.body)?;
    let seed = seed_override.or(config.seed).unwrap_or(DEFAULT_SEED);
    let mut rng = SplitMix64::new(seed);
    let mut results = Vec::with_capacity(config.queries.len());
    for query in &config.queries {
        let result = match &body {
            Body::Curve(curve) => {
                let x = as_vec2(&query.point, "query point")?;
                let dir = match &query.dir {
                    Some(d) => as_vec2(d, "query dir")?.normalized(),
                    None => Vec2::from_angle(rng.range(0.0, std::f64::consts::TAU)),
                };
                let proj = project_curve(curve.as_ref(), x, config.grid_density)?;
                let projector = CurveProjector {
                    curve: curve.as_ref(),
                    grid_density: config.grid_density,
                };
                let grad = distance_gradient_check(&projector, x, dir)?;
                let cont = projection_continuity_check(&projector, x, dir)?;
                let margin = config.certify.then(|| {
                    certify_curve_optimality(curve.as_ref(), x, proj.distance, 100_000, seed)
                });
                OracleResult {
                    point: query.point.clone(),
                    nearest: vec![proj.nearest.x, proj.nearest.y],
                    distance: proj.distance,
                    theta: vec![proj.theta.x, proj.theta.y],
                    params: vec![proj.params],
                    dir: vec![dir.x, dir.y],
                    gradient_discrepancies: grad.probes.iter().map(|p| p.discrepancy).collect(),
                    gradient_decreasing: grad.decreasing(),
                    continuity_deltas: cont.probes.iter().map(|p| p.delta).collect(),
                    continuity_modulus: cont.fitted_modulus,
                    certificate_margin: margin,
                }
            }
            Body::Surface(surface) => {
                let x = as_vec3(&query.point, "query point")?;
                let dir = match &query.dir {
                    Some(d) => as_vec3(d, "query dir")?.normalized(),
                    None => {
                        let d = vec3(
                            rng.range(-1.0, 1.0),
                            rng.range(-1.0, 1.0),
                            rng.range(-1.0, 1.0),
                        );
                        d.normalized()
                    }
                };
                let proj = project_surface(surface.as_ref(), x, config.grid_density)?;
                let projector = SurfaceProjector {
                    surface: surface.as_ref(),
                    grid_density: config.grid_density,
                };
                let grad = distance_gradient_check(&projector, x, dir)?;
                let cont = projection_continuity_check(&projector, x, dir)?;
                let margin = config.certify.then(|| {
                    certify_surface_optimality(surface.as_ref(), x, proj.distance, 100_000, seed)
                });
                OracleResult {
                    point: query.point.clone(),
                    nearest: vec![proj.nearest.x, proj.nearest.y, proj.nearest.z],
                    distance: proj.distance,
                    theta: vec![proj.theta.x, proj.theta.y, proj.theta.z],
                    params: vec![proj.params.0, proj.params.1],
                    dir: vec![dir.x, dir.y, dir.z],
                    gradient_discrepancies: grad.probes.iter().map(|p| p.discrepancy).collect(),
                    gradient_decreasing: grad.decreasing(),
                    continuity_deltas: cont.probes.iter().map(|p| p.delta).collect(),
                    continuity_modulus: cont.fitted_modulus,
                    certificate_margin: margin,
                }
            }
            Body::Piecewise(set) => {
                let x = as_vec2(&query.point, "query point")?;
                let dir = match &query.dir {
                    Some(d) => as_vec2(d, "query dir")?.normalized(),
                    None => Vec2::from_angle(rng.range(0.0, std::f64::consts::TAU)),
                };
                let proj = set.boundary.project(x);
                let grad = distance_gradient_check(&set.boundary, x, dir)?;
                let cont = projection_continuity_check(&set.boundary, x, dir)?;
                OracleResult {
                    point: query.point.clone(),
                    nearest: vec![proj.nearest.x, proj.nearest.y],
                    distance: proj.distance,
                    theta: {
                        let theta = (x - proj.nearest) / proj.distance;
                        vec![theta.x, theta.y]
                    },
                    params: vec![proj.arc_coord],
                    dir: vec![dir.x, dir.y],
                    gradient_discrepancies: grad.probes.iter().map(|p| p.discrepancy).collect(),
                    gradient_decreasing: grad.decreasing(),
                    continuity_deltas: cont.probes.iter().map(|p| p.delta).collect(),
                    continuity_modulus: cont.fitted_modulus,
                    certificate_margin: None,
                }
            }
        };
        results.push(result);
    }
    Ok(OracleReport {
        seed,
        grid_density: config.grid_density,
        results,
    })
}
