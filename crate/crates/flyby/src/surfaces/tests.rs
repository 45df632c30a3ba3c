use std::collections::BTreeMap;
use std::f64::consts::PI;

use approx::assert_relative_eq;

use super::*;
use crate::math::vec2;

/// Independent curvature oracle: circumradius of the triangle through three
/// nearby curve points, kappa = 1/R = 4 * area / (|a| |b| |c|).
fn osculating_fit<C: Curve2d + ?Sized>(curve: &C, u: f64, h: f64) -> f64 {
    let p0 = curve.eval(u - h);
    let p1 = curve.eval(u);
    let p2 = curve.eval(u + h);
    let a = p1 - p0;
    let b = p2 - p1;
    let c = p2 - p0;
    let area2 = a.cross(b).abs();
    2.0 * area2 / (a.norm() * b.norm() * c.norm())
}

/// Straight piece used as the zero-curvature limit case.
struct Segment;

impl Curve2d for Segment {
    fn eval(&self, u: f64) -> Vec2 {
        vec2(u, 0.0)
    }
    fn d1(&self, _u: f64) -> Vec2 {
        vec2(1.0, 0.0)
    }
    fn d2(&self, _u: f64) -> Vec2 {
        Vec2::ZERO
    }
    fn domain(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
    fn periodic(&self) -> bool {
        false
    }
}

/// Saddle chart z = x^2 - y^2; not the boundary of any convex body.
struct Saddle;

impl Surface3d for Saddle {
    fn eval(&self, u: f64, v: f64) -> crate::math::Vec3 {
        crate::math::vec3(u, v, u * u - v * v)
    }
    fn d1u(&self, u: f64, _v: f64) -> crate::math::Vec3 {
        crate::math::vec3(1.0, 0.0, 2.0 * u)
    }
    fn d1v(&self, _u: f64, v: f64) -> crate::math::Vec3 {
        crate::math::vec3(0.0, 1.0, -2.0 * v)
    }
    fn d2uu(&self, _u: f64, _v: f64) -> crate::math::Vec3 {
        crate::math::vec3(0.0, 0.0, 2.0)
    }
    fn d2uv(&self, _u: f64, _v: f64) -> crate::math::Vec3 {
        crate::math::Vec3::ZERO
    }
    fn d2vv(&self, _u: f64, _v: f64) -> crate::math::Vec3 {
        crate::math::vec3(0.0, 0.0, -2.0)
    }
    fn domain_u(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
    fn domain_v(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
    fn periodic_u(&self) -> bool {
        false
    }
    fn periodic_v(&self) -> bool {
        false
    }
    fn interior_witness(&self) -> crate::math::Vec3 {
        crate::math::vec3(0.0, 0.0, -10.0)
    }
}

#[test]
fn unit_circle_frame_at_zero() {
    let circle = Circle::unit();
    let f = frame2d(&circle, 0.0).unwrap();
    assert_relative_eq!(f.d1.x, 0.0, epsilon = 1e-15);
    assert_relative_eq!(f.d1.y, 1.0, epsilon = 1e-15);
    assert_relative_eq!(f.normal.x, -1.0, epsilon = 1e-15);
    assert_relative_eq!(f.normal.y, 0.0, epsilon = 1e-15);
    assert_relative_eq!(f.kappa, 1.0, epsilon = 1e-15);
}

#[test]
fn unit_circle_curvature_everywhere() {
    let circle = Circle::unit();
    for i in 0..360 {
        let u = 2.0 * PI * i as f64 / 360.0;
        let f = frame2d(&circle, u).unwrap();
        assert!((f.kappa - 1.0).abs() <= 1e-12, "kappa = {} at u = {u}", f.kappa);
        assert!((f.normal.norm() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn straight_segment_curvature_is_zero() {
    let f = frame2d(&Segment, 0.3).unwrap();
    assert_eq!(f.kappa, 0.0);
}

#[test]
fn ellipse_curvature_matches_osculating_fit() {
    let ellipse = Ellipse::new(2.0, 1.0).unwrap();
    // Frozen from the fit oracle: circumradius through three nearby points of
    // (2 cos u, sin u) at u = 0 gives kappa -> 2.
    let fitted = osculating_fit(&ellipse, 0.0, 1e-4);
    assert_relative_eq!(fitted, 2.0, epsilon = 1e-6);
    let f = frame2d(&ellipse, 0.0).unwrap();
    assert_relative_eq!(f.kappa, 2.0, epsilon = 1e-12);
    // Non-unit-speed parametrization: general formula still matches the fit.
    for i in 1..8 {
        let u = i as f64 * 0.7;
        let f = frame2d(&ellipse, u).unwrap();
        let fit = osculating_fit(&ellipse, u, 1e-4);
        assert_relative_eq!(f.kappa, fit, epsilon = 1e-5);
    }
}

#[test]
fn degenerate_parametrization_rejected() {
    struct Cusp;
    impl Curve2d for Cusp {
        fn eval(&self, u: f64) -> Vec2 {
            vec2(u * u, 0.0)
        }
        fn d1(&self, u: f64) -> Vec2 {
            vec2(2.0 * u, 0.0)
        }
        fn d2(&self, _u: f64) -> Vec2 {
            vec2(2.0, 0.0)
        }
        fn domain(&self) -> (f64, f64) {
            (-1.0, 1.0)
        }
        fn periodic(&self) -> bool {
            false
        }
    }
    let err = frame2d(&Cusp, 0.0).unwrap_err();
    assert!(matches!(err, SurfaceError::SingularParametrization { .. }));
}

#[test]
fn cylinder_weingarten_closed_form() {
    for (kappa, u, v) in [(1.0, 0.0, 1.0), (0.5, -3.0, 2.5), (2.0, 7.0, 5.9)] {
        let cyl = Cylinder::new(kappa).unwrap();
        let f = frame3d(&cyl, u, v).unwrap();
        let w = f.weingarten;
        assert_relative_eq!(w.col0.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(w.col0.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(w.col1.x, 0.0, epsilon = 1e-12);
        assert_relative_eq!(w.col1.y, -kappa, epsilon = 1e-12);
    }
}

#[test]
fn ellipsoid_weingarten_closed_form() {
    let kappa = 1.0 / 9.0;
    let ell = EllipsoidOfRevolution::new(kappa).unwrap();
    for i in 1..20 {
        let v = PI * i as f64 / 20.0;
        let u = 0.37 * i as f64;
        let q1 = ell.q1(v);
        let f = frame3d(&ell, u, v).unwrap();
        let w = f.weingarten;
        assert_relative_eq!(w.col0.x, -1.0 / q1, epsilon = 1e-10);
        assert_relative_eq!(w.col1.y, -kappa / (q1 * q1 * q1), epsilon = 1e-10);
        assert_relative_eq!(w.col0.y, 0.0, epsilon = 1e-10);
        assert_relative_eq!(w.col1.x, 0.0, epsilon = 1e-10);
    }
}

#[test]
fn unit_sphere_weingarten_is_minus_identity() {
    let sph = Sphere::new(1.0).unwrap();
    let ell = EllipsoidOfRevolution::new(1.0).unwrap();
    for i in 1..10 {
        let v = PI * i as f64 / 10.0;
        let u = 0.61 * i as f64;
        for f in [frame3d(&sph, u, v).unwrap(), frame3d(&ell, u, v).unwrap()] {
            assert_relative_eq!(f.weingarten.col0.x, -1.0, epsilon = 1e-10);
            assert_relative_eq!(f.weingarten.col1.y, -1.0, epsilon = 1e-10);
            assert_relative_eq!(f.weingarten.col0.y, 0.0, epsilon = 1e-10);
            assert_relative_eq!(f.weingarten.col1.x, 0.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn frame_matrix_inverse_roundtrip_and_orientation() {
    let cyl = Cylinder::new(1.0).unwrap();
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let surfaces: [&dyn Surface3d; 2] = [&cyl, &ell];
    for surface in surfaces {
        for i in 1..15 {
            let (ulo, uhi) = surface.domain_u();
            let (vlo, vhi) = surface.domain_v();
            let u = ulo + (uhi - ulo) * i as f64 / 16.0;
            let v = vlo + (vhi - vlo) * i as f64 / 16.0;
            let f = frame3d(surface, u, v).unwrap();
            assert!(f.det_sigma > 0.0, "det = {} at ({u}, {v})", f.det_sigma);
            assert!((f.normal.norm() - 1.0).abs() <= 1e-12);
            let inv = f.sigma.inverse().unwrap();
            let id = f.sigma.mul_mat(&inv);
            assert_relative_eq!(id.col0.x, 1.0, epsilon = 1e-10);
            assert_relative_eq!(id.col1.y, 1.0, epsilon = 1e-10);
            assert_relative_eq!(id.col2.z, 1.0, epsilon = 1e-10);
            assert_relative_eq!(id.col0.y, 0.0, epsilon = 1e-10);
            assert_relative_eq!(id.col1.z, 0.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn normal_points_into_body() {
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    for i in 1..10 {
        let u = 0.5 * i as f64;
        let v = 0.2 + 0.27 * i as f64;
        let f = frame3d(&ell, u, v).unwrap();
        let p = ell.eval(u, v);
        let eps = 1e-4;
        // One step along n must move toward the interior witness.
        let closer = (p + f.normal * eps - ell.interior_witness()).norm();
        let here = (p - ell.interior_witness()).norm();
        assert!(closer < here);
    }
}

#[test]
fn builtin_surface_factory_examples() {
    let mut params = BTreeMap::new();
    params.insert("kappa".to_string(), 1.0);
    let cyl = builtin_surface("cylinder", &params).unwrap();
    let p = cyl.eval(0.0, PI / 2.0);
    assert_relative_eq!(p.x, 0.0, epsilon = 1e-15);
    assert_relative_eq!(p.y, 1.0, epsilon = 1e-15);
    assert_relative_eq!(p.z, 0.0, epsilon = 1e-15);

    params.insert("kappa".to_string(), 1.0 / 9.0);
    let ell = builtin_surface("ellipsoid_of_revolution", &params).unwrap();
    let p = ell.eval(0.0, PI / 2.0);
    assert_relative_eq!(p.x, 1.0, epsilon = 1e-15);
    assert_relative_eq!(p.y, 0.0, epsilon = 1e-15);
    assert_relative_eq!(p.z, 0.0, epsilon = 1e-12);

    // Inward normal at (0, pi/2), frozen from normalizing sigma_u x sigma_v
    // by hand (q1 = 1 there).
    let f = frame3d(ell.as_ref(), 0.0, PI / 2.0).unwrap();
    assert_relative_eq!(f.normal.x, -1.0, epsilon = 1e-12);
    assert_relative_eq!(f.normal.y, 0.0, epsilon = 1e-12);
    assert_relative_eq!(f.normal.z, 0.0, epsilon = 1e-12);
}

#[test]
fn builtin_factory_rejects_bad_input() {
    let params = BTreeMap::new();
    assert!(matches!(
        builtin_surface("torus", &params),
        Err(SurfaceError::UnknownBuiltin(_))
    ));
    let mut bad = BTreeMap::new();
    bad.insert("kappa".to_string(), -1.0);
    assert!(matches!(
        builtin_surface("sphere", &bad),
        Err(SurfaceError::InvalidParameter { .. })
    ));
    assert!(matches!(
        builtin_curve("hyperbola", &params),
        Err(SurfaceError::UnknownBuiltin(_))
    ));
}

#[test]
fn pole_is_guarded_and_degenerate() {
    let sph = Sphere::new(1.0).unwrap();
    assert!(matches!(
        sph.chart_guard(0.0, 1e-9),
        Err(SurfaceError::ChartSingularity { .. })
    ));
    assert!(matches!(
        frame3d(&sph, 0.0, 0.0),
        Err(SurfaceError::DegenerateChart { .. })
    ));
    // Just outside the guard the frame itself is still fine.
    assert!(sph.chart_guard(0.0, 0.1).is_ok());
    assert!(frame3d(&sph, 0.0, 0.1).is_ok());
}

#[test]
fn saddle_is_rejected_as_non_convex() {
    let err = frame3d(&Saddle, 0.0, 0.0).unwrap_err();
    assert!(matches!(err, SurfaceError::NonConvex { .. }));
}

#[test]
fn validate_builtins() {
    assert!(validate_curve(&Circle::unit(), 128).is_ok());
    assert!(validate_curve(&Ellipse::new(2.0, 1.0).unwrap(), 128).is_ok());
    assert!(validate_surface(&Cylinder::new(1.0).unwrap(), 32).is_ok());
    assert!(validate_surface(&EllipsoidOfRevolution::new(1.0 / 9.0).unwrap(), 32).is_ok());
    assert!(validate_surface(&Saddle, 8).is_err());
}

#[test]
fn validate_rejects_concave_curve() {
    // A wavy closed curve with concave dips.
    struct Wavy;
    impl Curve2d for Wavy {
        fn eval(&self, u: f64) -> Vec2 {
            let r = 1.0 + 0.3 * (5.0 * u).cos();
            vec2(r * u.cos(), r * u.sin())
        }
        fn d1(&self, u: f64) -> Vec2 {
            let r = 1.0 + 0.3 * (5.0 * u).cos();
            let dr = -1.5 * (5.0 * u).sin();
            vec2(dr * u.cos() - r * u.sin(), dr * u.sin() + r * u.cos())
        }
        fn d2(&self, u: f64) -> Vec2 {
            let r = 1.0 + 0.3 * (5.0 * u).cos();
            let dr = -1.5 * (5.0 * u).sin();
            let ddr = -7.5 * (5.0 * u).cos();
            vec2(
                ddr * u.cos() - 2.0 * dr * u.sin() - r * u.cos(),
                ddr * u.sin() + 2.0 * dr * u.cos() - r * u.sin(),
            )
        }
        fn domain(&self) -> (f64, f64) {
            (0.0, 2.0 * PI)
        }
        fn periodic(&self) -> bool {
            true
        }
    }
    assert!(matches!(
        validate_curve(&Wavy, 256),
        Err(SurfaceError::NonConvex { .. })
    ));
}
