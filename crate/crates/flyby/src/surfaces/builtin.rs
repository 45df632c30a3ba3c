//! Built-in convex bodies: circle and ellipse in the plane; cylinder, sphere
//! and ellipsoid of revolution in 3-space.
//!
//! The 3D parametrizations are chosen so that `sigma_u x sigma_v` already
//! points into the body (positive frame determinant, no normal flip).

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::math::{vec3, Vec2, Vec3};

use super::{Curve2d, Surface3d, SurfaceError};

/// Angular margin around sphere/ellipsoid chart poles inside which tracking
/// refuses to evaluate frames: |sin v| below this aborts.
pub const POLE_GUARD: f64 = 1e-6;

fn param(params: &BTreeMap<String, f64>, name: &str, default: f64) -> f64 {
    params.get(name).copied().unwrap_or(default)
}

fn require_positive(name: &str, value: f64) -> Result<(), SurfaceError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SurfaceError::InvalidParameter {
            name: name.to_string(),
            value,
            why: "must be positive and finite".to_string(),
        })
    }
}

/// Circle of radius `r` about the origin: sigma(u) = r (cos u, sin u).
/// Unit speed exactly when r = 1.
#[derive(Debug, Clone, Copy)]
pub struct Circle {
    pub radius: f64,
}

impl Circle {
    pub fn new(radius: f64) -> Result<Circle, SurfaceError> {
        require_positive("radius", radius)?;
        Ok(Circle { radius })
    }

    pub fn unit() -> Circle {
        Circle { radius: 1.0 }
    }
}

impl Curve2d for Circle {
    fn eval(&self, u: f64) -> Vec2 {
        Vec2::from_angle(u) * self.radius
    }
    fn d1(&self, u: f64) -> Vec2 {
        Vec2::from_angle(u).rot90() * self.radius
    }
    fn d2(&self, u: f64) -> Vec2 {
        -Vec2::from_angle(u) * self.radius
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }
    fn periodic(&self) -> bool {
        true
    }
    fn unit_speed(&self) -> bool {
        self.radius == 1.0
    }
}

/// Axis-aligned ellipse: sigma(u) = (a cos u, b sin u).
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
}

impl Ellipse {
    pub fn new(a: f64, b: f64) -> Result<Ellipse, SurfaceError> {
        require_positive("a", a)?;
        require_positive("b", b)?;
        Ok(Ellipse { a, b })
    }
}

impl Curve2d for Ellipse {
    fn eval(&self, u: f64) -> Vec2 {
        Vec2 {
            x: self.a * u.cos(),
            y: self.b * u.sin(),
        }
    }
    fn d1(&self, u: f64) -> Vec2 {
        Vec2 {
            x: -self.a * u.sin(),
            y: self.b * u.cos(),
        }
    }
    fn d2(&self, u: f64) -> Vec2 {
        Vec2 {
            x: -self.a * u.cos(),
            y: -self.b * u.sin(),
        }
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }
    fn periodic(&self) -> bool {
        true
    }
}

/// Cylinder of radius 1/kappa about the z-axis:
/// sigma(u, v) = (cos(v)/kappa, sin(v)/kappa, u).
///
/// The axial parameter u is unbounded in principle; `u_min`/`u_max` bound the
/// region the projection oracle searches.
#[derive(Debug, Clone, Copy)]
pub struct Cylinder {
    pub kappa: f64,
    pub u_min: f64,
    pub u_max: f64,
}

impl Cylinder {
    pub fn new(kappa: f64) -> Result<Cylinder, SurfaceError> {
        Cylinder::with_span(kappa, -100.0, 100.0)
    }

    pub fn with_span(kappa: f64, u_min: f64, u_max: f64) -> Result<Cylinder, SurfaceError> {
        require_positive("kappa", kappa)?;
        if !u_min.is_finite() || !u_max.is_finite() || u_min >= u_max {
            return Err(SurfaceError::InvalidParameter {
                name: "u_max".to_string(),
                value: u_max,
                why: "u_min must be less than u_max".to_string(),
            });
        }
        Ok(Cylinder {
            kappa,
            u_min,
            u_max,
        })
    }
}

impl Surface3d for Cylinder {
    fn eval(&self, u: f64, v: f64) -> Vec3 {
        vec3(v.cos() / self.kappa, v.sin() / self.kappa, u)
    }
    fn d1u(&self, _u: f64, _v: f64) -> Vec3 {
        vec3(0.0, 0.0, 1.0)
    }
    fn d1v(&self, _u: f64, v: f64) -> Vec3 {
        vec3(-v.sin() / self.kappa, v.cos() / self.kappa, 0.0)
    }
    fn d2uu(&self, _u: f64, _v: f64) -> Vec3 {
        Vec3::ZERO
    }
    fn d2uv(&self, _u: f64, _v: f64) -> Vec3 {
        Vec3::ZERO
    }
    fn d2vv(&self, _u: f64, v: f64) -> Vec3 {
        vec3(-v.cos() / self.kappa, -v.sin() / self.kappa, 0.0)
    }
    fn domain_u(&self) -> (f64, f64) {
        (self.u_min, self.u_max)
    }
    fn domain_v(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }
    fn periodic_u(&self) -> bool {
        false
    }
    fn periodic_v(&self) -> bool {
        true
    }
    fn interior_witness(&self) -> Vec3 {
        vec3(0.0, 0.0, (self.u_min + self.u_max) / 2.0)
    }
}

/// Sphere of radius 1/kappa about the origin in polar-angle coordinates:
/// sigma(u, v) = (cos u sin v, sin u sin v, cos v) / kappa.
#[derive(Debug, Clone, Copy)]
pub struct Sphere {
    pub kappa: f64,
}

impl Sphere {
    pub fn new(kappa: f64) -> Result<Sphere, SurfaceError> {
        require_positive("kappa", kappa)?;
        Ok(Sphere { kappa })
    }
}

impl Surface3d for Sphere {
    fn eval(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            u.cos() * v.sin() / self.kappa,
            u.sin() * v.sin() / self.kappa,
            v.cos() / self.kappa,
        )
    }
    fn d1u(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            -u.sin() * v.sin() / self.kappa,
            u.cos() * v.sin() / self.kappa,
            0.0,
        )
    }
    fn d1v(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            u.cos() * v.cos() / self.kappa,
            u.sin() * v.cos() / self.kappa,
            -v.sin() / self.kappa,
        )
    }
    fn d2uu(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            -u.cos() * v.sin() / self.kappa,
            -u.sin() * v.sin() / self.kappa,
            0.0,
        )
    }
    fn d2uv(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            -u.sin() * v.cos() / self.kappa,
            u.cos() * v.cos() / self.kappa,
            0.0,
        )
    }
    fn d2vv(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            -u.cos() * v.sin() / self.kappa,
            -u.sin() * v.sin() / self.kappa,
            -v.cos() / self.kappa,
        )
    }
    fn domain_u(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }
    fn domain_v(&self) -> (f64, f64) {
        (0.0, PI)
    }
    fn periodic_u(&self) -> bool {
        true
    }
    fn periodic_v(&self) -> bool {
        false
    }
    fn interior_witness(&self) -> Vec3 {
        Vec3::ZERO
    }
    fn chart_guard(&self, u: f64, v: f64) -> Result<(), SurfaceError> {
        if v.sin().abs() < POLE_GUARD {
            return Err(SurfaceError::ChartSingularity {
                u,
                v,
                what: format!("|sin v| = {:.3e} below pole guard {POLE_GUARD:.0e}", v.sin().abs()),
            });
        }
        Ok(())
    }
}

/// Ellipsoid of revolution about the z-axis:
/// sigma(u, v) = (cos u sin v, sin u sin v, cos(v)/sqrt(kappa)).
///
/// kappa in (0, 1) gives a cigar, kappa > 1 a flattened ellipsoid, and
/// kappa = 1 the unit sphere.
#[derive(Debug, Clone, Copy)]
pub struct EllipsoidOfRevolution {
    pub kappa: f64,
}

impl EllipsoidOfRevolution {
    pub fn new(kappa: f64) -> Result<EllipsoidOfRevolution, SurfaceError> {
        require_positive("kappa", kappa)?;
        Ok(EllipsoidOfRevolution { kappa })
    }

    /// q1 = sqrt(1 + (kappa - 1) cos^2 v), the normalization shared by the
    /// normal and the closed-form Weingarten entries.
    pub fn q1(&self, v: f64) -> f64 {
        (1.0 + (self.kappa - 1.0) * v.cos() * v.cos()).sqrt()
    }
}

impl Surface3d for EllipsoidOfRevolution {
    fn eval(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            u.cos() * v.sin(),
            u.sin() * v.sin(),
            v.cos() / self.kappa.sqrt(),
        )
    }
    fn d1u(&self, u: f64, v: f64) -> Vec3 {
        vec3(-u.sin() * v.sin(), u.cos() * v.sin(), 0.0)
    }
    fn d1v(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            u.cos() * v.cos(),
            u.sin() * v.cos(),
            -v.sin() / self.kappa.sqrt(),
        )
    }
    fn d2uu(&self, u: f64, v: f64) -> Vec3 {
        vec3(-u.cos() * v.sin(), -u.sin() * v.sin(), 0.0)
    }
    fn d2uv(&self, u: f64, v: f64) -> Vec3 {
        vec3(-u.sin() * v.cos(), u.cos() * v.cos(), 0.0)
    }
    fn d2vv(&self, u: f64, v: f64) -> Vec3 {
        vec3(
            -u.cos() * v.sin(),
            -u.sin() * v.sin(),
            -v.cos() / self.kappa.sqrt(),
        )
    }
    fn domain_u(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }
    fn domain_v(&self) -> (f64, f64) {
        (0.0, PI)
    }
    fn periodic_u(&self) -> bool {
        true
    }
    fn periodic_v(&self) -> bool {
        false
    }
    fn interior_witness(&self) -> Vec3 {
        Vec3::ZERO
    }
    fn chart_guard(&self, u: f64, v: f64) -> Result<(), SurfaceError> {
        if v.sin().abs() < POLE_GUARD {
            return Err(SurfaceError::ChartSingularity {
                u,
                v,
                what: format!("|sin v| = {:.3e} below pole guard {POLE_GUARD:.0e}", v.sin().abs()),
            });
        }
        Ok(())
    }
}

/// Construct a built-in surface by name.
///
/// Recognized names: `cylinder` (params: `kappa`, optional `u_min`/`u_max`),
/// `sphere` (`kappa`), `ellipsoid_of_revolution` (`kappa`).
pub fn builtin_surface(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<Box<dyn Surface3d + Send + Sync>, SurfaceError> {
    let kappa = param(params, "kappa", 1.0);
    match name {
        "cylinder" => {
            let u_min = param(params, "u_min", -100.0);
            let u_max = param(params, "u_max", 100.0);
            Ok(Box::new(Cylinder::with_span(kappa, u_min, u_max)?))
        }
        "sphere" => Ok(Box::new(Sphere::new(kappa)?)),
        "ellipsoid_of_revolution" => Ok(Box::new(EllipsoidOfRevolution::new(kappa)?)),
        other => Err(SurfaceError::UnknownBuiltin(other.to_string())),
    }
}

/// Construct a built-in plane curve by name.
///
/// Recognized names: `disk`/`circle` (param `radius`, default 1) and
/// `ellipse` (params `a`, `b`).
pub fn builtin_curve(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<Box<dyn Curve2d + Send + Sync>, SurfaceError> {
    match name {
        "disk" | "circle" => Ok(Box::new(Circle::new(param(params, "radius", 1.0))?)),
        "ellipse" => Ok(Box::new(Ellipse::new(
            param(params, "a", 1.0),
            param(params, "b", 1.0),
        )?)),
        other => Err(SurfaceError::UnknownBuiltin(other.to_string())),
    }
}
