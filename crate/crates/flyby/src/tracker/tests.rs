use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::math::vec3;
use crate::oracle::project_surface;
use crate::surfaces::{Circle, Cylinder, EllipsoidOfRevolution, Sphere};

/// Unit circle that hides its unit-speed property, forcing the general
/// 2x2-system path through rhs2d.
struct OpaqueCircle(Circle);

impl Curve2d for OpaqueCircle {
    fn eval(&self, u: f64) -> Vec2 {
        self.0.eval(u)
    }
    fn d1(&self, u: f64) -> Vec2 {
        self.0.d1(u)
    }
    fn d2(&self, u: f64) -> Vec2 {
        self.0.d2(u)
    }
    fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }
    fn periodic(&self) -> bool {
        true
    }
    fn unit_speed(&self) -> bool {
        false
    }
}

#[test]
fn unit_disk_closed_form_equations() {
    let circle = Circle::unit();
    for (u, r, cdot) in [
        (0.3, 1.5, vec2(0.7, -0.2)),
        (2.0, 0.4, vec2(-1.0, 1.0)),
        (5.5, 3.0, vec2(0.0, 2.0)),
    ] {
        let (du, dr) = rhs2d(&circle, u, r, cdot).unwrap();
        let expected_du = (-cdot.x * u.sin() + cdot.y * u.cos()) / (1.0 + r);
        let expected_dr = cdot.x * u.cos() + cdot.y * u.sin();
        assert_relative_eq!(du, expected_du, epsilon = 1e-14);
        assert_relative_eq!(dr, expected_dr, epsilon = 1e-14);
    }
}

#[test]
fn radial_approach_changes_only_distance() {
    let circle = Circle::unit();
    let (du, dr) = rhs2d(&circle, 0.0, 1.0, vec2(-1.0, 0.0)).unwrap();
    assert_relative_eq!(du, 0.0, epsilon = 1e-15);
    assert_relative_eq!(dr, -1.0, epsilon = 1e-15);
}

#[test]
fn tangential_motion_at_unit_distance() {
    let circle = Circle::unit();
    let (du, dr) = rhs2d(&circle, 0.0, 1.0, vec2(0.0, 1.0)).unwrap();
    assert_relative_eq!(du, 0.5, epsilon = 1e-15);
    assert_relative_eq!(dr, 0.0, epsilon = 1e-15);
}

#[test]
fn inside_body_rejected() {
    let circle = Circle::unit();
    assert!(matches!(
        rhs2d(&circle, 0.0, 0.0, vec2(1.0, 0.0)),
        Err(TrackError::InsideBody { .. })
    ));
}

proptest! {
    // The general 2x2-system route and the closed-form unit-speed route are
    // two algebraic paths to the same derivative; on the unit circle they
    // must agree to near machine precision.
    #[test]
    fn unit_speed_reduction(
        u in 0.0..(2.0 * PI),
        r in 0.05f64..5.0,
        cx in -2.0f64..2.0,
        cy in -2.0f64..2.0,
    ) {
        let closed = Circle::unit();
        let general = OpaqueCircle(closed);
        let cdot = vec2(cx, cy);
        let (du_a, dr_a) = rhs2d(&closed, u, r, cdot).unwrap();
        let (du_b, dr_b) = rhs2d(&general, u, r, cdot).unwrap();
        prop_assert!((du_a - du_b).abs() <= 1e-12 * (1.0 + du_a.abs()));
        prop_assert!((dr_a - dr_b).abs() <= 1e-12 * (1.0 + dr_a.abs()));
    }
}

#[test]
fn cylinder_rhs_closed_form() {
    // For sigma(u,v) = (cos v, sin v, u)/kappa and cdot = (1, 0, a):
    // du = a, dv = -kappa sin v / (1 + kappa r), dr = cos v.
    for (kappa, a, v, r) in [
        (1.0, 1.0, FRAC_PI_2, 1.0),
        (0.5, 2.0, 1.1, 0.3),
        (2.0, 0.25, 2.7, 4.0),
    ] {
        let cyl = Cylinder::new(kappa).unwrap();
        let (du, dv, dr) = rhs3d(&cyl, 0.7, v, r, vec3(1.0, 0.0, a)).unwrap();
        assert_relative_eq!(du, a, epsilon = 1e-12);
        assert_relative_eq!(dv, -kappa * v.sin() / (1.0 + kappa * r), epsilon = 1e-12);
        assert_relative_eq!(dr, v.cos(), epsilon = 1e-12);
    }
}

#[test]
fn ellipsoid_rhs_matches_displayed_equations() {
    // Hand-coded equations of motion for the ellipsoid of revolution,
    // derived by explicitly inverting Sigma and (I - rW).
    let kappa: f64 = 1.0 / 9.0;
    let ell = EllipsoidOfRevolution::new(kappa).unwrap();
    let cases: [(f64, f64, f64, Vec3); 3] = [
        (0.0, FRAC_PI_2, 1.0, vec3(0.0, 1.0, 1.0)),
        (1.2, 0.8, 0.5, vec3(0.3, -0.7, 0.2)),
        (4.0, 2.2, 3.0, vec3(-1.0, 0.0, 1.0)),
    ];
    for (u, v, r, cdot) in cases {
        let q1 = (1.0 + (kappa - 1.0) * v.cos() * v.cos()).sqrt();
        let expected_du =
            q1 / ((r + q1) * v.sin()) * (-cdot.x * u.sin() + cdot.y * u.cos());
        let expected_dv = q1 * kappa / (r * kappa + q1 * q1 * q1)
            * (cdot.x * u.cos() * v.cos() + cdot.y * u.sin() * v.cos()
                - cdot.z * v.sin() / kappa.sqrt());
        let expected_dr = (cdot.x * u.cos() * v.sin()
            + cdot.y * u.sin() * v.sin()
            + cdot.z * kappa.sqrt() * v.cos())
            / q1;
        let (du, dv, dr) = rhs3d(&ell, u, v, r, cdot).unwrap();
        assert_relative_eq!(du, expected_du, epsilon = 1e-11);
        assert_relative_eq!(dv, expected_dv, epsilon = 1e-11);
        assert_relative_eq!(dr, expected_dr, epsilon = 1e-11);
    }
}

#[test]
fn static_observer_is_stationary() {
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let (du, dv, dr) = rhs3d(&ell, 0.4, 1.0, 2.0, Vec3::ZERO).unwrap();
    assert_eq!((du, dv, dr), (0.0, 0.0, 0.0));
}

#[test]
fn initialize_sphere_radial() {
    let sphere = Sphere::new(1.0).unwrap();
    let state = initialize3d(&sphere, vec3(0.0, 0.0, 3.0), 240).unwrap();
    assert_relative_eq!(state.r, 2.0, epsilon = 1e-9);
    let p = sphere.eval(state.u, state.v);
    assert!((p - vec3(0.0, 0.0, 1.0)).norm() < 1e-7);
    assert!(state.residual <= INIT_RESIDUAL_TOL);
}

#[test]
fn initialize_ellipsoid_example() {
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let state = initialize3d(&ell, vec3(2.0, 0.0, 0.0), 240).unwrap();
    assert_relative_eq!(state.r, 1.0, epsilon = 1e-9);
    assert_relative_eq!(state.v, FRAC_PI_2, epsilon = 1e-7);
    assert!(state.u.abs() < 1e-7 || (state.u - 2.0 * PI).abs() < 1e-7);
}

#[test]
fn initialize_cylinder_example() {
    let cyl = Cylinder::new(1.0).unwrap();
    let state = initialize3d(&cyl, vec3(0.0, 2.0, 0.0), 240).unwrap();
    assert_relative_eq!(state.r, 1.0, epsilon = 1e-9);
    assert_relative_eq!(state.v, FRAC_PI_2, epsilon = 1e-9);
    assert!(state.u.abs() < 1e-9);
}

#[test]
fn initialize_rejects_interior_points() {
    let sphere = Sphere::new(1.0).unwrap();
    assert!(matches!(
        initialize3d(&sphere, vec3(0.1, 0.0, 0.0), 120),
        Err(TrackError::NotInOmega(_))
    ));
    let circle = Circle::unit();
    assert!(matches!(
        initialize2d(&circle, vec2(0.2, 0.1), 360),
        Err(TrackError::NotInOmega(_))
    ));
}

fn cylinder_scene() -> (Cylinder, Line3, TrackerState3) {
    let cyl = Cylinder::new(1.0).unwrap();
    let traj = Line3 {
        start: vec3(0.0, 2.0, 0.0),
        velocity: vec3(1.0, 0.0, 1.0),
    };
    let init = TrackerState3 {
        t: 0.0,
        u: 0.0,
        v: FRAC_PI_2,
        r: 1.0,
        residual: 0.0,
    };
    (cyl, traj, init)
}

#[test]
fn cylinder_tracks_closed_form_solution() {
    let (cyl, traj, init) = cylinder_scene();
    let cfg = IntegratorConfig::default();
    let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
    let run = integrate3d(&cyl, &traj, init, &cfg, &times).unwrap();
    assert_eq!(run.states.len(), times.len());
    for state in &run.states {
        let t = state.t;
        let ell = 2.0f64;
        let r_exact = (ell * ell + t * t).sqrt() - 1.0;
        let u_exact = t;
        let v_exact = (t / (ell * ell + t * t).sqrt()).acos();
        assert!((state.r - r_exact).abs() <= 1e-7, "t = {t}: r error {}", (state.r - r_exact).abs());
        assert!((state.u - u_exact).abs() <= 1e-7);
        assert!((state.v - v_exact).abs() <= 1e-7);
    }
    let last = run.states.last().unwrap();
    assert_relative_eq!(last.r, 104.0f64.sqrt() - 1.0, epsilon = 1e-7);
    assert!(run.report.reinit_events.is_empty());
    assert!(run.report.max_residual <= 1e-7);
}

#[test]
fn zero_length_integration_returns_init() {
    let (cyl, traj, init) = cylinder_scene();
    let cfg = IntegratorConfig::default();
    let run = integrate3d(&cyl, &traj, init, &cfg, &[0.0]).unwrap();
    assert_eq!(run.states.len(), 1);
    assert_eq!(run.states[0].u, init.u);
    assert_eq!(run.states[0].r, init.r);
    assert_eq!(run.report.steps_accepted, 0);

    let run_empty = integrate3d(&cyl, &traj, init, &cfg, &[]).unwrap();
    assert!(run_empty.states.is_empty());
}

#[test]
fn ellipsoid_distance_matches_oracle() {
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let traj = Line3 {
        start: vec3(2.0, 0.0, 0.0),
        velocity: vec3(0.0, 1.0, 1.0),
    };
    let init = TrackerState3 {
        t: 0.0,
        u: 0.0,
        v: FRAC_PI_2,
        r: 1.0,
        residual: 0.0,
    };
    let cfg = IntegratorConfig::default();
    let times: Vec<f64> = (1..=6).map(|i| i as f64).collect();
    let run = integrate3d(&ell, &traj, init, &cfg, &times).unwrap();
    for state in &run.states {
        let oracle = project_surface(&ell, traj.position(state.t), 360).unwrap();
        assert!(
            (state.r - oracle.distance).abs() <= 1e-6,
            "t = {}: ode r = {}, oracle r = {}",
            state.t,
            state.r,
            oracle.distance
        );
    }
}

#[test]
fn tolerance_monotonicity_against_closed_form() {
    // Error against the closed form, measured as the envelope over the whole
    // run (a single output time aliases the sign-alternating part of the
    // global error and is not monotone in the tolerance).
    let (cyl, traj, init) = cylinder_scene();
    let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
    let mut errors = Vec::new();
    let mut tol = 1e-5;
    for _ in 0..5 {
        let cfg = IntegratorConfig {
            abs_tol: tol,
            rel_tol: tol,
            // Loose solver tolerances drift the reconstruction; keep the
            // residual monitor out of the way of this comparison.
            residual_tolerance: 1e-2,
            ..IntegratorConfig::default()
        };
        let run = integrate3d(&cyl, &traj, init, &cfg, &times).unwrap();
        let err = run
            .states
            .iter()
            .map(|s| (s.r - ((4.0 + s.t * s.t).sqrt() - 1.0)).abs())
            .fold(0.0f64, f64::max);
        errors.push(err);
        tol /= 2.0;
    }
    for pair in errors.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "halving tolerances increased the error: {errors:?}"
        );
    }
}

#[test]
fn smooth_dependence_on_initial_conditions() {
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let traj = Line3 {
        start: vec3(2.0, 0.0, 0.0),
        velocity: vec3(0.0, 1.0, 1.0),
    };
    let cfg = IntegratorConfig {
        // The perturbed starts violate the reconstruction identity by
        // design; give the residual check room and keep recovery off.
        residual_tolerance: 1e-2,
        reinit_on_breach: false,
        ..IntegratorConfig::default()
    };
    let base = TrackerState3 {
        t: 0.0,
        u: 0.0,
        v: FRAC_PI_2,
        r: 1.0,
        residual: 0.0,
    };
    let solve_at_one = |delta: f64| -> Vec3 {
        let init = TrackerState3 {
            u: base.u + delta,
            v: base.v + delta,
            r: base.r + delta,
            residual: delta * 2.0,
            ..base
        };
        let run = integrate3d(&ell, &traj, init, &cfg, &[1.0]).unwrap();
        let s = &run.states[0];
        vec3(s.u, s.v, s.r)
    };
    let reference = solve_at_one(0.0);
    let d1 = (solve_at_one(1e-6) - reference).norm();
    let d2 = (solve_at_one(5e-7) - reference).norm();
    // First-order response: the change is O(delta) and halving delta about
    // halves it.
    assert!(d1 <= 1e-4, "perturbation response too large: {d1}");
    let ratio = d1 / d2;
    assert!((1.2..=3.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn collision_course_aborts() {
    let circle = Circle::unit();
    let traj = Line2 {
        start: vec2(3.0, 0.0),
        velocity: vec2(-1.0, 0.0),
    };
    let init = initialize2d(&circle, vec2(3.0, 0.0), 360).unwrap();
    let cfg = IntegratorConfig {
        reinit_on_breach: false,
        ..IntegratorConfig::default()
    };
    // The observer hits the body at t = 2.
    let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.05).collect();
    let err = integrate2d(&circle, &traj, init, &cfg, &times).unwrap_err();
    assert!(
        matches!(
            err,
            TrackError::InsideBody { .. }
                | TrackError::StiffnessAbort { .. }
                | TrackError::TrackingDiverged { .. }
                | TrackError::Oracle(_)
        ),
        "unexpected error {err:?}"
    );
}

#[test]
fn bad_initial_residual_rejected() {
    let (cyl, traj, mut init) = cylinder_scene();
    init.residual = 1.0;
    let cfg = IntegratorConfig::default();
    assert!(matches!(
        integrate3d(&cyl, &traj, init, &cfg, &[1.0]),
        Err(TrackError::BadInitialState { .. })
    ));
}

#[test]
fn non_monotone_grid_rejected() {
    let (cyl, traj, init) = cylinder_scene();
    let cfg = IntegratorConfig::default();
    assert!(matches!(
        integrate3d(&cyl, &traj, init, &cfg, &[1.0, 0.5, 2.0]),
        Err(TrackError::BadOutputGrid)
    ));
}

#[test]
fn trajectory_domain_enforced() {
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let ts: Vec<f64> = (0..=10).map(|i| i as f64 * 0.2).collect();
    let pts: Vec<Vec3> = ts.iter().map(|&t| vec3(2.0, t, t)).collect();
    let traj = SampledTrajectory3::new(&ts, &pts).unwrap();
    let init = TrackerState3 {
        t: 0.0,
        u: 0.0,
        v: FRAC_PI_2,
        r: 1.0,
        residual: 0.0,
    };
    let cfg = IntegratorConfig::default();
    assert!(matches!(
        integrate3d(&ell, &traj, init, &cfg, &[5.0]),
        Err(TrackError::TrajectoryDomain { .. })
    ));
}

#[test]
fn spline_trajectory_tracks_like_analytic() {
    // Sample the straight-line observer path of the cylinder scene, respline
    // it, and check the tracked distance still matches the closed form. The
    // spline interpolates a linear path exactly, so errors stay at solver
    // level.
    let (cyl, line, init) = cylinder_scene();
    let ts: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    let pts: Vec<Vec3> = ts.iter().map(|&t| line.position(t)).collect();
    let spline = SampledTrajectory3::new(&ts, &pts).unwrap();
    let cfg = IntegratorConfig::default();
    let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
    let run = integrate3d(&cyl, &spline, init, &cfg, &times).unwrap();
    for state in &run.states {
        let r_exact = (4.0 + state.t * state.t).sqrt() - 1.0;
        assert!((state.r - r_exact).abs() <= 1e-6);
    }
}

#[test]
fn backward_integration_from_positive_time() {
    let (cyl, traj, _) = cylinder_scene();
    let start = initialize3d(&cyl, traj.position(10.0), 360).unwrap();
    let init = TrackerState3 {
        t: 10.0,
        ..start
    };
    let cfg = IntegratorConfig::default();
    let times: Vec<f64> = (0..=20).map(|i| 10.0 - i as f64).collect();
    let run = integrate3d(&cyl, &traj, init, &cfg, &times).unwrap();
    for state in &run.states {
        let r_exact = (4.0 + state.t * state.t).sqrt() - 1.0;
        assert!((state.r - r_exact).abs() <= 1e-7, "t = {}", state.t);
    }
}

#[test]
fn residual_breach_recovers_through_oracle() {
    // A deliberately mis-initialized state within the (loosened) residual
    // tolerance: the reconstruction error persists along the flow until the
    // first accepted step trips the (tightened) residual check, which must
    // re-project and continue.
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let traj = Line3 {
        start: vec3(2.0, 0.0, 0.0),
        velocity: vec3(0.0, 1.0, 1.0),
    };
    let bad_init = TrackerState3 {
        t: 0.0,
        u: 0.0,
        v: FRAC_PI_2,
        r: 1.001,
        residual: 1e-3,
    };
    let cfg = IntegratorConfig {
        residual_tolerance: 1e-3,
        reinit_on_breach: true,
        oracle_grid_density: 240,
        ..IntegratorConfig::default()
    };
    let run = integrate3d(&ell, &traj, bad_init, &cfg, &[2.0]).unwrap();
    assert!(
        !run.report.reinit_events.is_empty(),
        "expected at least one re-initialization"
    );
    // After recovery the distance agrees with the oracle again.
    let oracle = project_surface(&ell, traj.position(2.0), 240).unwrap();
    assert!((run.states[0].r - oracle.distance).abs() <= 1e-6);
}

#[test]
fn residual_breach_without_recovery_aborts() {
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let traj = Line3 {
        start: vec3(2.0, 0.0, 0.0),
        velocity: vec3(0.0, 1.0, 1.0),
    };
    let bad_init = TrackerState3 {
        t: 0.0,
        u: 0.0,
        v: FRAC_PI_2,
        r: 1.001,
        residual: 1e-3,
    };
    let cfg = IntegratorConfig {
        residual_tolerance: 1e-3,
        reinit_on_breach: false,
        ..IntegratorConfig::default()
    };
    assert!(matches!(
        integrate3d(&ell, &traj, bad_init, &cfg, &[2.0]),
        Err(TrackError::TrackingDiverged { .. })
    ));
}

#[test]
fn projection_velocity_matches_finite_difference() {
    let ell = EllipsoidOfRevolution::new(1.0 / 9.0).unwrap();
    let traj = Line3 {
        start: vec3(2.0, 0.0, 0.0),
        velocity: vec3(0.0, 1.0, 1.0),
    };
    let init = TrackerState3 {
        t: 0.0,
        u: 0.0,
        v: FRAC_PI_2,
        r: 1.0,
        residual: 0.0,
    };
    let cfg = IntegratorConfig::default();
    let h = 1e-5;
    let run = integrate3d(&ell, &traj, init, &cfg, &[1.0 - h, 1.0, 1.0 + h]).unwrap();
    let p = |s: &TrackerState3| ell.eval(s.u, s.v);
    let fd = (p(&run.states[2]) - p(&run.states[0])) / (2.0 * h);
    let s = &run.states[1];
    let (du, dv, _) = rhs3d(&ell, s.u, s.v, s.r, traj.velocity(s.t)).unwrap();
    let pv = projection_velocity(&ell, s.u, s.v, du, dv);
    assert!((fd - pv).norm() <= 1e-6, "fd = {fd:?}, pv = {pv:?}");
}
