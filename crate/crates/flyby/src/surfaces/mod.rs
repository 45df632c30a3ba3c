//! Parametric boundary representations of convex bodies in 2D and 3D, and
//! the per-point geometric frames derived from them.
//!
//! A [`Curve2d`] supplies a boundary curve and its first two derivatives; a
//! [`Surface3d`] supplies a chart of a boundary surface and its first and
//! second partials. [`frame2d`] and [`frame3d`] turn those derivatives into
//! the tangent frame, the inward unit normal, and the curvature data (scalar
//! curvature in 2D, the 2x2 Weingarten matrix in 3D) that the tracking ODEs
//! consume.
//!
//! Conventions: 2D boundaries are parametrized anti-clockwise, so the inward
//! normal is the tangent rotated by +90 degrees and the signed curvature of a
//! convex boundary is nonnegative. In 3D the normal points *into* the body
//! and the frame matrix with columns (sigma_u, sigma_v, n) has positive
//! determinant; the eigenvalues of -W are the principal curvatures and are
//! nonnegative for a convex body.

mod builtin;

pub use builtin::{
    builtin_curve, builtin_surface, Circle, Cylinder, Ellipse, EllipsoidOfRevolution, Sphere,
};

use thiserror::Error;

use crate::math::{Mat2, Mat3, Vec2, Vec3};

/// Below this, a first derivative or chart cross product counts as degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;
/// Chart cross-product threshold for 3D frames.
pub const CHART_TOL: f64 = 1e-10;
/// A principal curvature of a convex body may not drop below -CONVEXITY_TOL.
pub const CONVEXITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("singular parametrization at u = {u}: |sigma'| = {norm:.3e}")]
    SingularParametrization { u: f64, norm: f64 },
    #[error("degenerate chart point at (u, v) = ({u}, {v}): |sigma_u x sigma_v| = {norm:.3e}")]
    DegenerateChart { u: f64, v: f64, norm: f64 },
    #[error("non-convex curvature detected at (u, v) = ({u}, {v}): min eigenvalue of -W = {eig:.3e}")]
    NonConvex { u: f64, v: f64, eig: f64 },
    #[error("chart singularity at (u, v) = ({u}, {v}): {what}")]
    ChartSingularity { u: f64, v: f64, what: String },
    #[error("unknown builtin body `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid parameter {name} = {value}: {why}")]
    InvalidParameter {
        name: String,
        value: f64,
        why: String,
    },
}

/// A twice differentiable parametric boundary curve of a convex body in the
/// plane, oriented anti-clockwise.
pub trait Curve2d {
    /// Boundary point sigma(u).
    fn eval(&self, u: f64) -> Vec2;
    /// First derivative sigma'(u).
    fn d1(&self, u: f64) -> Vec2;
    /// Second derivative sigma''(u).
    fn d2(&self, u: f64) -> Vec2;
    /// Parameter domain `[u_min, u_max]`.
    fn domain(&self) -> (f64, f64);
    /// Whether the parameter wraps around at the domain ends.
    fn periodic(&self) -> bool;
    /// Whether |sigma'(u)| = 1 everywhere, enabling the closed-form tracking
    /// equations.
    fn unit_speed(&self) -> bool {
        false
    }
}

/// A twice differentiable chart of the boundary surface of a convex body in
/// 3-space, oriented so that sigma_u x sigma_v points into the body.
pub trait Surface3d {
    fn eval(&self, u: f64, v: f64) -> Vec3;
    fn d1u(&self, u: f64, v: f64) -> Vec3;
    fn d1v(&self, u: f64, v: f64) -> Vec3;
    fn d2uu(&self, u: f64, v: f64) -> Vec3;
    fn d2uv(&self, u: f64, v: f64) -> Vec3;
    fn d2vv(&self, u: f64, v: f64) -> Vec3;
    fn domain_u(&self) -> (f64, f64);
    fn domain_v(&self) -> (f64, f64);
    fn periodic_u(&self) -> bool;
    fn periodic_v(&self) -> bool;
    /// A point strictly inside the body, used to fix the normal sign on
    /// charts whose orientation is unknown.
    fn interior_witness(&self) -> Vec3;
    /// Reject parameter values too close to a chart singularity (e.g. the
    /// poles of a sphere-like chart). Evaluation itself may be fine there;
    /// frames and tracking are not.
    fn chart_guard(&self, _u: f64, _v: f64) -> Result<(), SurfaceError> {
        Ok(())
    }
}

/// Tangent frame of a 2D boundary point.
#[derive(Debug, Clone, Copy)]
pub struct Frame2 {
    /// First derivative sigma'(u) (not normalized).
    pub d1: Vec2,
    /// Unit tangent sigma'/|sigma'|.
    pub tangent: Vec2,
    /// Inward unit normal (tangent rotated by +90 degrees).
    pub normal: Vec2,
    /// Signed curvature with the inward-normal convention; >= 0 for a convex
    /// boundary.
    pub kappa: f64,
    /// Determinant of the 2x2 frame matrix with columns (sigma', n).
    pub det_sigma: f64,
}

/// Tangent frame of a 3D boundary point.
#[derive(Debug, Clone, Copy)]
pub struct Frame3 {
    /// Frame matrix with columns (sigma_u, sigma_v, n).
    pub sigma: Mat3,
    /// Inward unit normal.
    pub normal: Vec3,
    /// Weingarten matrix W: (n_u, n_v) = (sigma_u, sigma_v) W columnwise.
    pub weingarten: Mat2,
    pub det_sigma: f64,
}

/// Compute the tangent/normal/curvature frame of a plane curve at `u`.
///
/// The curvature is `(sigma'' . n) / |sigma'|^2` with `n` the inward unit
/// normal, which equals the geometric signed curvature for any regular
/// parametrization and reduces to `|z''|` for unit-speed convex input.
pub fn frame2d<C: Curve2d + ?Sized>(curve: &C, u: f64) -> Result<Frame2, SurfaceError> {
    let d1 = curve.d1(u);
    let norm = d1.norm();
    if norm < DEGENERATE_TOL {
        return Err(SurfaceError::SingularParametrization { u, norm });
    }
    let tangent = d1 / norm;
    let normal = tangent.rot90();
    let kappa = curve.d2(u).dot(normal) / (norm * norm);
    Ok(Frame2 {
        d1,
        tangent,
        normal,
        kappa,
        det_sigma: d1.cross(normal),
    })
}

/// Compute the frame matrix, inward normal and Weingarten matrix of a surface
/// chart at `(u, v)`.
///
/// W is assembled from the first and second fundamental forms: with
/// E, F, G = inner products of the tangent vectors and e, f, g = second
/// partials dotted with the inward normal, the identities
/// `n_u . sigma_u = -e` etc. give `W = -[[E,F],[F,G]]^-1 [[e,f],[f,g]]`.
/// That needs only the derivatives the chart already supplies.
pub fn frame3d<S: Surface3d + ?Sized>(surface: &S, u: f64, v: f64) -> Result<Frame3, SurfaceError> {
    let su = surface.d1u(u, v);
    let sv = surface.d1v(u, v);
    let cross = su.cross(sv);
    let cross_norm = cross.norm();
    if cross_norm < CHART_TOL {
        return Err(SurfaceError::DegenerateChart {
            u,
            v,
            norm: cross_norm,
        });
    }
    let mut normal = cross / cross_norm;

    // Fix the sign so the normal points toward the body interior. Charts
    // oriented per the crate convention never need the flip.
    let p = surface.eval(u, v);
    if normal.dot(surface.interior_witness() - p) < 0.0 {
        normal = -normal;
    }

    let e_ = normal.dot(surface.d2uu(u, v));
    let f_ = normal.dot(surface.d2uv(u, v));
    let g_ = normal.dot(surface.d2vv(u, v));
    let first = Mat2::from_rows(su.dot(su), su.dot(sv), su.dot(sv), sv.dot(sv));
    let second = Mat2::from_rows(e_, f_, f_, g_);
    let first_inv = first.inverse().ok_or(SurfaceError::DegenerateChart {
        u,
        v,
        norm: cross_norm,
    })?;
    let weingarten = first_inv.mul_mat(&second).scale(-1.0);

    let (eig_min, _) = weingarten.scale(-1.0).eigenvalues_real();
    if eig_min < -CONVEXITY_TOL {
        return Err(SurfaceError::NonConvex { u, v, eig: eig_min });
    }

    let sigma = Mat3::from_cols(su, sv, normal);
    Ok(Frame3 {
        sigma,
        normal,
        weingarten,
        det_sigma: sigma.det(),
    })
}

/// Sample a curve across its domain and reject irregular or non-convex input.
pub fn validate_curve<C: Curve2d + ?Sized>(curve: &C, samples: usize) -> Result<(), SurfaceError> {
    let (lo, hi) = curve.domain();
    let n = samples.max(2);
    let denom = if curve.periodic() { n } else { n - 1 };
    for i in 0..n {
        let u = lo + (hi - lo) * i as f64 / denom as f64;
        let frame = frame2d(curve, u)?;
        if frame.kappa < -CONVEXITY_TOL {
            return Err(SurfaceError::NonConvex {
                u,
                v: 0.0,
                eig: frame.kappa,
            });
        }
    }
    Ok(())
}

/// Sample a surface chart on a grid and reject irregular or non-convex input.
/// Grid points rejected by the chart guard (e.g. pole rows) are skipped.
pub fn validate_surface<S: Surface3d + ?Sized>(
    surface: &S,
    samples_per_axis: usize,
) -> Result<(), SurfaceError> {
    let (ulo, uhi) = surface.domain_u();
    let (vlo, vhi) = surface.domain_v();
    let n = samples_per_axis.max(2);
    let du = if surface.periodic_u() { n } else { n - 1 };
    let dv = if surface.periodic_v() { n } else { n - 1 };
    for i in 0..n {
        let u = ulo + (uhi - ulo) * i as f64 / du as f64;
        for j in 0..n {
            let v = vlo + (vhi - vlo) * j as f64 / dv as f64;
            if surface.chart_guard(u, v).is_err() {
                continue;
            }
            frame3d(surface, u, v)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
