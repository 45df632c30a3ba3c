//! Observer trajectories c(t) with exact velocities.
//!
//! Builtin analytic paths (line, circle, helix) plus a C^2 natural cubic
//! spline through time-stamped samples for externally supplied paths. The
//! tracking equations require a continuously differentiable c, which every
//! variant here provides.

use thiserror::Error;

use crate::math::{vec2, vec3, Vec2, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("sample times must be strictly increasing (index {index})")]
    NonMonotonicTimes { index: usize },
    #[error("time {t} outside trajectory domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },
}

/// A plane trajectory.
pub trait Trajectory2 {
    fn position(&self, t: f64) -> Vec2;
    fn velocity(&self, t: f64) -> Vec2;
    /// Valid time span; unbounded for analytic builtins.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    /// Human-readable source tag recorded in run metadata.
    fn source_tag(&self) -> &'static str;
}

/// A space trajectory.
pub trait Trajectory3 {
    fn position(&self, t: f64) -> Vec3;
    fn velocity(&self, t: f64) -> Vec3;
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn source_tag(&self) -> &'static str;
}

/// c(t) = start + t * velocity.
#[derive(Debug, Clone, Copy)]
pub struct Line2 {
    pub start: Vec2,
    pub velocity: Vec2,
}

impl Trajectory2 for Line2 {
    fn position(&self, t: f64) -> Vec2 {
        self.start + self.velocity * t
    }
    fn velocity(&self, _t: f64) -> Vec2 {
        self.velocity
    }
    fn source_tag(&self) -> &'static str {
        "line"
    }
}

/// c(t) = center + radius (cos, sin)(omega t + phase).
#[derive(Debug, Clone, Copy)]
pub struct Circle2 {
    pub center: Vec2,
    pub radius: f64,
    pub omega: f64,
    pub phase: f64,
}

impl Trajectory2 for Circle2 {
    fn position(&self, t: f64) -> Vec2 {
        self.center + Vec2::from_angle(self.omega * t + self.phase) * self.radius
    }
    fn velocity(&self, t: f64) -> Vec2 {
        Vec2::from_angle(self.omega * t + self.phase).rot90() * (self.radius * self.omega)
    }
    fn source_tag(&self) -> &'static str {
        "circle"
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Line3 {
    pub start: Vec3,
    pub velocity: Vec3,
}

impl Trajectory3 for Line3 {
    fn position(&self, t: f64) -> Vec3 {
        self.start + self.velocity * t
    }
    fn velocity(&self, _t: f64) -> Vec3 {
        self.velocity
    }
    fn source_tag(&self) -> &'static str {
        "line"
    }
}

/// Circle in a z = const plane with optional axial climb rate; a helix when
/// `climb` is nonzero.
#[derive(Debug, Clone, Copy)]
pub struct Helix3 {
    pub center: Vec3,
    pub radius: f64,
    pub omega: f64,
    pub phase: f64,
    pub climb: f64,
}

impl Trajectory3 for Helix3 {
    fn position(&self, t: f64) -> Vec3 {
        let a = self.omega * t + self.phase;
        self.center + vec3(self.radius * a.cos(), self.radius * a.sin(), self.climb * t)
    }
    fn velocity(&self, t: f64) -> Vec3 {
        let a = self.omega * t + self.phase;
        vec3(
            -self.radius * self.omega * a.sin(),
            self.radius * self.omega * a.cos(),
            self.climb,
        )
    }
    fn source_tag(&self) -> &'static str {
        if self.climb == 0.0 {
            "circle"
        } else {
            "helix"
        }
    }
}

/// Natural cubic spline through scalar samples: C^2, interpolating, with
/// zero second derivative at the ends.
#[derive(Debug, Clone)]
struct CubicSpline {
    ts: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    fn fit(ts: &[f64], ys: &[f64]) -> Result<CubicSpline, TrajectoryError> {
        let n = ts.len();
        if n < 3 {
            return Err(TrajectoryError::TooFewSamples { need: 3, got: n });
        }
        for i in 1..n {
            if ts[i] <= ts[i - 1] {
                return Err(TrajectoryError::NonMonotonicTimes { index: i });
            }
        }
        // Tridiagonal system for interior second derivatives, natural ends.
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = ts[i] - ts[i - 1];
            let h1 = ts[i + 1] - ts[i];
            sub[i] = h0;
            diag[i] = 2.0 * (h0 + h1);
            sup[i] = h1;
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        // Thomas algorithm.
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(CubicSpline {
            ts: ts.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    fn segment(&self, t: f64) -> usize {
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.ts.len() - 2),
            Err(i) => i.clamp(1, self.ts.len() - 1) - 1,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.ts[i + 1] - self.ts[i];
        let a = (self.ts[i + 1] - t) / h;
        let b = (t - self.ts[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn deriv(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.ts[i + 1] - self.ts[i];
        let a = (self.ts[i + 1] - t) / h;
        let b = (t - self.ts[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }
}

/// Spline-of-samples space trajectory.
#[derive(Debug, Clone)]
pub struct SampledTrajectory3 {
    x: CubicSpline,
    y: CubicSpline,
    z: CubicSpline,
    lo: f64,
    hi: f64,
}

impl SampledTrajectory3 {
    pub fn new(ts: &[f64], points: &[Vec3]) -> Result<SampledTrajectory3, TrajectoryError> {
        if ts.len() != points.len() {
            return Err(TrajectoryError::TooFewSamples {
                need: ts.len(),
                got: points.len(),
            });
        }
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        let zs: Vec<f64> = points.iter().map(|p| p.z).collect();
        Ok(SampledTrajectory3 {
            x: CubicSpline::fit(ts, &xs)?,
            y: CubicSpline::fit(ts, &ys)?,
            z: CubicSpline::fit(ts, &zs)?,
            lo: ts[0],
            hi: *ts.last().unwrap(),
        })
    }
}

impl Trajectory3 for SampledTrajectory3 {
    fn position(&self, t: f64) -> Vec3 {
        vec3(self.x.eval(t), self.y.eval(t), self.z.eval(t))
    }
    fn velocity(&self, t: f64) -> Vec3 {
        vec3(self.x.deriv(t), self.y.deriv(t), self.z.deriv(t))
    }
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    fn source_tag(&self) -> &'static str {
        "spline-of-samples"
    }
}

/// Spline-of-samples plane trajectory.
#[derive(Debug, Clone)]
pub struct SampledTrajectory2 {
    x: CubicSpline,
    y: CubicSpline,
    lo: f64,
    hi: f64,
}

impl SampledTrajectory2 {
    pub fn new(ts: &[f64], points: &[Vec2]) -> Result<SampledTrajectory2, TrajectoryError> {
        if ts.len() != points.len() {
            return Err(TrajectoryError::TooFewSamples {
                need: ts.len(),
                got: points.len(),
            });
        }
        let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        Ok(SampledTrajectory2 {
            x: CubicSpline::fit(ts, &xs)?,
            y: CubicSpline::fit(ts, &ys)?,
            lo: ts[0],
            hi: *ts.last().unwrap(),
        })
    }
}

impl Trajectory2 for SampledTrajectory2 {
    fn position(&self, t: f64) -> Vec2 {
        vec2(self.x.eval(t), self.y.eval(t))
    }
    fn velocity(&self, t: f64) -> Vec2 {
        vec2(self.x.deriv(t), self.y.deriv(t))
    }
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    fn source_tag(&self) -> &'static str {
        "spline-of-samples"
    }
}
