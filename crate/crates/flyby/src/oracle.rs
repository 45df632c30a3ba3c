//! Brute-force nearest-point queries, independent of the ODE tracker, plus
//! numerical probes of the regularity of the distance function and the
//! metric projection.
//!
//! The projector does a coarse global grid search over the parameter domain
//! followed by damped Newton refinement of the squared distance. It is the
//! reference the tracker is initialized from and validated against, so it
//! deliberately shares no code with the tracking ODEs.

use thiserror::Error;

use crate::math::{vec2, SplitMix64, Vec2, Vec3};
use crate::surfaces::{Curve2d, Surface3d};

use std::ops::{Add, Mul, Neg, Sub};

/// Default number of grid points per parameter axis in the global search.
pub const DEFAULT_GRID_DENSITY: usize = 720;
/// Newton iterations before falling back to derivative-free refinement.
const NEWTON_MAX_ITER: usize = 100;
/// Convergence threshold on the gradient of the squared distance.
const GRAD_TOL: f64 = 1e-12;
/// Seed recorded in reports of randomized checks.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("oracle failure: refinement did not converge (best distance {best_distance}, gradient {gradient:.3e})")]
    NoConvergence { best_distance: f64, gradient: f64 },
    #[error("query point lies on the boundary (distance {0:.3e})")]
    OnBoundary(f64),
    #[error("non-finite value encountered in projection")]
    NonFinite,
}

/// Minimal vector interface shared by [`Vec2`] and [`Vec3`] so the regularity
/// checks can be written once for both dimensions.
pub trait Vector:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Neg<Output = Self>
{
    fn dot(self, rhs: Self) -> f64;
    fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Vector for Vec2 {
    fn dot(self, rhs: Self) -> f64 {
        Vec2::dot(self, rhs)
    }
}

impl Vector for Vec3 {
    fn dot(self, rhs: Self) -> f64 {
        Vec3::dot(self, rhs)
    }
}

/// Nearest point of a body to a query point.
#[derive(Debug, Clone, Copy)]
pub struct Projection<V, P> {
    /// The nearest boundary point.
    pub nearest: V,
    /// Distance from the query point to `nearest`.
    pub distance: f64,
    /// Unit vector from `nearest` toward the query point.
    pub theta: V,
    /// Parameter value(s) of `nearest` when the body is parametric.
    pub params: P,
}

pub type Projection2 = Projection<Vec2, f64>;
pub type Projection3 = Projection<Vec3, (f64, f64)>;

/// Anything that can answer exact or refined nearest-point queries.
pub trait Projectable {
    type Point: Vector;
    /// Nearest boundary point and distance.
    fn project(&self, x: Self::Point) -> Result<(Self::Point, f64), OracleError>;
}

/// Project a point onto a parametric plane curve: global grid search plus
/// damped Newton on the squared distance.
pub fn project_curve<C: Curve2d + ?Sized>(
    curve: &C,
    x: Vec2,
    grid_density: usize,
) -> Result<Projection2, OracleError> {
    let (lo, hi) = curve.domain();
    let n = grid_density.max(8);
    let steps = if curve.periodic() { n } else { n - 1 };
    let h = (hi - lo) / steps as f64;

    let mut best_u = lo;
    let mut best_d2 = f64::INFINITY;
    for i in 0..n {
        let u = lo + h * i as f64;
        let d2 = (curve.eval(u) - x).norm_sq();
        if d2 < best_d2 {
            best_d2 = d2;
            best_u = u;
        }
    }

    let clampu = |u: f64| -> f64 {
        if curve.periodic() {
            let span = hi - lo;
            lo + (u - lo).rem_euclid(span)
        } else {
            u.clamp(lo, hi)
        }
    };

    // Damped Newton on g(u) = |sigma(u) - x|^2. Near the minimum g itself
    // flattens below its own rounding floor while the gradient remains
    // computable to full precision, so a step is also acceptable when it
    // shrinks the gradient.
    let grad_at = |u: f64| -> f64 {
        let d = curve.eval(u) - x;
        2.0 * d.dot(curve.d1(u))
    };
    let mut u = best_u;
    let mut g = best_d2;
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let d = curve.eval(u) - x;
        let d1 = curve.d1(u);
        let grad = 2.0 * d.dot(d1);
        if grad.abs() < GRAD_TOL {
            converged = true;
            break;
        }
        let hess = 2.0 * (d1.norm_sq() + d.dot(curve.d2(u)));
        let mut step = if hess > 0.0 { -grad / hess } else { -grad.signum() * h };
        // Keep refinement inside the basin found by the grid.
        step = step.clamp(-h, h);
        let mut accepted = false;
        for _ in 0..40 {
            let u_new = clampu(u + step);
            if u_new == u {
                break;
            }
            let g_new = (curve.eval(u_new) - x).norm_sq();
            if g_new <= g || grad_at(u_new).abs() < grad.abs() {
                u = u_new;
                g = g_new.min(g);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = grad.abs() < 1e-9;
            break;
        }
    }

    if !converged {
        // Golden-section fallback on the bracketing grid cell.
        let (u_gold, g_gold) = golden_section(
            |t| (curve.eval(clampu(t)) - x).norm_sq(),
            best_u - h,
            best_u + h,
        );
        if g_gold <= g {
            u = clampu(u_gold);
            g = g_gold;
        }
        let d = curve.eval(u) - x;
        let grad = 2.0 * d.dot(curve.d1(u));
        if grad.abs() > 1e-6 * (1.0 + g) {
            return Err(OracleError::NoConvergence {
                best_distance: g.sqrt(),
                gradient: grad,
            });
        }
    }

    finish2(curve.eval(u), x, u, g)
}

fn finish2(nearest: Vec2, x: Vec2, u: f64, g: f64) -> Result<Projection2, OracleError> {
    let distance = g.sqrt();
    if !distance.is_finite() {
        return Err(OracleError::NonFinite);
    }
    if distance < 1e-12 {
        return Err(OracleError::OnBoundary(distance));
    }
    Ok(Projection2 {
        nearest,
        distance,
        theta: (x - nearest) / distance,
        params: u,
    })
}

/// Project a point onto a parametric surface chart: global grid search plus
/// damped Newton on the squared distance, with a coordinate-descent fallback.
pub fn project_surface<S: Surface3d + ?Sized>(
    surface: &S,
    x: Vec3,
    grid_density: usize,
) -> Result<Projection3, OracleError> {
    let (ulo, uhi) = surface.domain_u();
    let (vlo, vhi) = surface.domain_v();
    let n = grid_density.max(8);
    let usteps = if surface.periodic_u() { n } else { n - 1 };
    let vsteps = if surface.periodic_v() { n } else { n - 1 };
    let hu = (uhi - ulo) / usteps as f64;
    let hv = (vhi - vlo) / vsteps as f64;

    let mut best = (ulo, vlo);
    let mut best_d2 = f64::INFINITY;
    for i in 0..n {
        let u = ulo + hu * i as f64;
        for j in 0..n {
            let v = vlo + hv * j as f64;
            let d2 = (surface.eval(u, v) - x).norm_sq();
            if d2 < best_d2 {
                best_d2 = d2;
                best = (u, v);
            }
        }
    }

    let wrap = |p: f64, lo: f64, hi: f64, periodic: bool| -> f64 {
        if periodic {
            lo + (p - lo).rem_euclid(hi - lo)
        } else {
            p.clamp(lo, hi)
        }
    };
    let clamp_uv = |u: f64, v: f64| -> (f64, f64) {
        (
            wrap(u, ulo, uhi, surface.periodic_u()),
            wrap(v, vlo, vhi, surface.periodic_v()),
        )
    };

    // Projected gradient: at a clamped edge of a non-periodic axis only the
    // inward component counts.
    let grad_at = |u: f64, v: f64| -> Vec2 {
        let d = surface.eval(u, v) - x;
        let mut grad = vec2(2.0 * d.dot(surface.d1u(u, v)), 2.0 * d.dot(surface.d1v(u, v)));
        if !surface.periodic_v() {
            if (v - vlo).abs() < 1e-15 && grad.y > 0.0 {
                grad.y = 0.0;
            }
            if (v - vhi).abs() < 1e-15 && grad.y < 0.0 {
                grad.y = 0.0;
            }
        }
        grad
    };
    let (mut u, mut v) = best;
    let mut g = best_d2;
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        let d = surface.eval(u, v) - x;
        let su = surface.d1u(u, v);
        let sv = surface.d1v(u, v);
        let grad = grad_at(u, v);
        if grad.norm() < GRAD_TOL {
            converged = true;
            break;
        }
        let huu = 2.0 * (su.norm_sq() + d.dot(surface.d2uu(u, v)));
        let huv = 2.0 * (su.dot(sv) + d.dot(surface.d2uv(u, v)));
        let hvv = 2.0 * (sv.norm_sq() + d.dot(surface.d2vv(u, v)));
        let hess = crate::math::Mat2::from_rows(huu, huv, huv, hvv);
        let newton = if hess.det() > 0.0 && huu > 0.0 {
            hess.solve(-grad)
        } else {
            None
        };
        let mut step = newton.unwrap_or_else(|| -grad * (hu.min(hv) / (1.0 + grad.norm())));
        // Stay within the basin located by the grid search.
        let cap = 2.0 * hu.max(hv);
        if step.norm() > cap {
            step = step * (cap / step.norm());
        }
        // A step is acceptable when it lowers the squared distance or, near
        // the rounding floor of g, when it shrinks the gradient.
        let mut accepted = false;
        for _ in 0..40 {
            let (un, vn) = clamp_uv(u + step.x, v + step.y);
            if un == u && vn == v {
                break;
            }
            let gn = (surface.eval(un, vn) - x).norm_sq();
            if gn <= g || grad_at(un, vn).norm() < grad.norm() {
                u = un;
                v = vn;
                g = gn.min(g);
                accepted = true;
                break;
            }
            step = step * 0.5;
        }
        if !accepted {
            converged = grad.norm() < 1e-9;
            break;
        }
    }

    if !converged {
        // Coordinate-wise golden-section sweeps around the current point.
        let mut span_u = hu;
        let mut span_v = hv;
        for _ in 0..60 {
            let (u_new, _) = golden_section(
                |t| {
                    let (uu, vv) = clamp_uv(t, v);
                    (surface.eval(uu, vv) - x).norm_sq()
                },
                u - span_u,
                u + span_u,
            );
            u = clamp_uv(u_new, v).0;
            let (v_new, g_new) = golden_section(
                |t| {
                    let (uu, vv) = clamp_uv(u, t);
                    (surface.eval(uu, vv) - x).norm_sq()
                },
                v - span_v,
                v + span_v,
            );
            v = clamp_uv(u, v_new).1;
            g = g_new;
            span_u *= 0.5;
            span_v *= 0.5;
        }
        let d = surface.eval(u, v) - x;
        let grad = vec2(2.0 * d.dot(surface.d1u(u, v)), 2.0 * d.dot(surface.d1v(u, v)));
        if grad.norm() > 1e-6 * (1.0 + g) {
            return Err(OracleError::NoConvergence {
                best_distance: g.sqrt(),
                gradient: grad.norm(),
            });
        }
    }

    let nearest = surface.eval(u, v);
    let distance = g.sqrt();
    if !distance.is_finite() {
        return Err(OracleError::NonFinite);
    }
    if distance < 1e-12 {
        return Err(OracleError::OnBoundary(distance));
    }
    Ok(Projection3 {
        nearest,
        distance,
        theta: (x - nearest) / distance,
        params: (u, v),
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / 2.0;
    (mid, f(mid))
}

/// Grid-plus-Newton projector for a plane curve, usable wherever a
/// [`Projectable`] body is expected.
pub struct CurveProjector<'a> {
    pub curve: &'a (dyn Curve2d + 'a),
    pub grid_density: usize,
}

impl<'a> CurveProjector<'a> {
    pub fn new(curve: &'a (dyn Curve2d + 'a)) -> Self {
        CurveProjector {
            curve,
            grid_density: DEFAULT_GRID_DENSITY,
        }
    }
}

impl Projectable for CurveProjector<'_> {
    type Point = Vec2;
    fn project(&self, x: Vec2) -> Result<(Vec2, f64), OracleError> {
        let p = project_curve(self.curve, x, self.grid_density)?;
        Ok((p.nearest, p.distance))
    }
}

/// Grid-plus-Newton projector for a surface chart.
pub struct SurfaceProjector<'a> {
    pub surface: &'a (dyn Surface3d + 'a),
    pub grid_density: usize,
}

impl<'a> SurfaceProjector<'a> {
    pub fn new(surface: &'a (dyn Surface3d + 'a)) -> Self {
        SurfaceProjector {
            surface,
            grid_density: DEFAULT_GRID_DENSITY,
        }
    }
}

impl Projectable for SurfaceProjector<'_> {
    type Point = Vec3;
    fn project(&self, x: Vec3) -> Result<(Vec3, f64), OracleError> {
        let p = project_surface(self.surface, x, self.grid_density)?;
        Ok((p.nearest, p.distance))
    }
}

/// One row of a difference-quotient probe of the distance function.
#[derive(Debug, Clone, Copy)]
pub struct GradientProbe {
    pub t: f64,
    /// Forward difference quotient [d(x + t dir) - d(x)] / t.
    pub delta: f64,
    /// |delta - theta . dir|.
    pub discrepancy: f64,
}

/// Report of [`distance_gradient_check`].
#[derive(Debug, Clone)]
pub struct GradientReport {
    pub theta_dot_dir: f64,
    pub probes: Vec<GradientProbe>,
}

impl GradientReport {
    /// Discrepancies shrink (weakly) as t does. The slack covers quotient
    /// rounding noise (distance differences of order t carry absolute errors
    /// near machine epsilon, so the quotient wobbles at eps / t).
    pub fn decreasing(&self) -> bool {
        self.probes
            .windows(2)
            .all(|w| w[1].discrepancy <= w[0].discrepancy + 1e-11)
    }

    pub fn final_discrepancy(&self) -> f64 {
        self.probes.last().map(|p| p.discrepancy).unwrap_or(0.0)
    }
}

/// Probe the derivative law of the distance function: the forward difference
/// quotient of d along `dir` must approach `theta . dir`, where `theta` is
/// the unit vector from the projection toward the query point.
pub fn distance_gradient_check<B: Projectable + ?Sized>(
    body: &B,
    x: B::Point,
    dir: B::Point,
) -> Result<GradientReport, OracleError> {
    let (nearest, d0) = body.project(x)?;
    let theta = (x - nearest) * (1.0 / d0);
    let theta_dot_dir = theta.dot(dir);
    let mut probes = Vec::new();
    for t in [1e-2, 1e-3, 1e-4] {
        let (_, dt) = body.project(x + dir * t)?;
        let delta = (dt - d0) / t;
        probes.push(GradientProbe {
            t,
            delta,
            discrepancy: (delta - theta_dot_dir).abs(),
        });
    }
    Ok(GradientReport {
        theta_dot_dir,
        probes,
    })
}

/// One row of a continuity probe of the projection map.
#[derive(Debug, Clone, Copy)]
pub struct ContinuityProbe {
    pub h: f64,
    /// |Pi(x + h dir) - Pi(x)|.
    pub delta: f64,
}

/// Report of [`projection_continuity_check`].
#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub probes: Vec<ContinuityProbe>,
    /// Smallest C with delta <= C h across the probes.
    pub fitted_modulus: f64,
}

/// Probe continuity of the projection: |Pi(x + h dir) - Pi(x)| stays bounded
/// by a fitted constant times h.
pub fn projection_continuity_check<B: Projectable + ?Sized>(
    body: &B,
    x: B::Point,
    dir: B::Point,
) -> Result<ContinuityReport, OracleError> {
    let (nearest, _) = body.project(x)?;
    let mut probes = Vec::new();
    let mut fitted: f64 = 0.0;
    for h in [1e-1, 1e-2, 1e-3, 1e-4] {
        let (nh, _) = body.project(x + dir * h)?;
        let delta = (nh - nearest).norm();
        fitted = fitted.max(delta / h);
        probes.push(ContinuityProbe { h, delta });
    }
    Ok(ContinuityReport {
        probes,
        fitted_modulus: fitted,
    })
}

/// Optimality certificate: the projected distance is no larger than the
/// distance to `samples` random boundary points. Returns the worst margin
/// (min over samples of |x - sigma(p)| - distance); nonnegative means pass.
pub fn certify_curve_optimality<C: Curve2d + ?Sized>(
    curve: &C,
    x: Vec2,
    distance: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let (lo, hi) = curve.domain();
    let mut rng = SplitMix64::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let u = rng.range(lo, hi);
        worst = worst.min((curve.eval(u) - x).norm() - distance);
    }
    worst
}

/// Surface version of [`certify_curve_optimality`].
pub fn certify_surface_optimality<S: Surface3d + ?Sized>(
    surface: &S,
    x: Vec3,
    distance: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let (ulo, uhi) = surface.domain_u();
    let (vlo, vhi) = surface.domain_v();
    let mut rng = SplitMix64::new(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let u = rng.range(ulo, uhi);
        let v = rng.range(vlo, vhi);
        worst = worst.min((surface.eval(u, v) - x).norm() - distance);
    }
    worst
}
