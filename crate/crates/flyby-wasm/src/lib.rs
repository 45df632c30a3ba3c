//! Browser demo bindings: run tracking scenes, query projections and build
//! the counterexample experiments from a static page. Every export takes and
//! returns JSON strings so the page needs no generated TypeScript glue.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use flyby::math::vec2;
use flyby::scenes::{build_body, run_track, Body, BodySpec, SceneConfig, TrackOutput};
use flyby::shapiro::{
    build_shapiro, difference_quotient, difference_quotient_sweep, flyby_experiment, limit_arc_speed,
    limit_radius, Piece,
};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[derive(Serialize)]
struct TrackColumns {
    t: Vec<f64>,
    u: Vec<f64>,
    v: Option<Vec<f64>>,
    r: Vec<f64>,
    residual: Vec<f64>,
    meta: serde_json::Value,
}

fn columns(output: &TrackOutput) -> TrackColumns {
    TrackColumns {
        t: output.rows.iter().map(|r| r.t).collect(),
        u: output.rows.iter().map(|r| r.u).collect(),
        v: if output.meta.dimension == 3 {
            Some(output.rows.iter().map(|r| r.v.unwrap_or(f64::NAN)).collect())
        } else {
            None
        },
        r: output.rows.iter().map(|r| r.r).collect(),
        residual: output.rows.iter().map(|r| r.residual).collect(),
        meta: serde_json::to_value(&output.meta).unwrap_or(serde_json::Value::Null),
    }
}

/// Run a tracking scene (same JSON schema as the CLI) and return the output
/// as columnar JSON for plotting.
#[wasm_bindgen]
pub fn track_scene(config_json: &str) -> Result<String, JsValue> {
    to_js(track_scene_impl(config_json))
}

fn track_scene_impl(config_json: &str) -> Result<String, String> {
    let config = SceneConfig::from_json(config_json).map_err(err)?;
    let output = run_track(&config).map_err(err)?;
    serde_json::to_string(&columns(&output)).map_err(err)
}

#[derive(Serialize)]
struct Projection2Json {
    nearest: [f64; 2],
    distance: f64,
    theta: [f64; 2],
}

/// Project a point onto a 2D body (disk, ellipse or the counterexample set).
#[wasm_bindgen]
pub fn project_point2(body_json: &str, x: f64, y: f64) -> Result<String, JsValue> {
    to_js(project_point2_impl(body_json, x, y))
}

fn project_point2_impl(body_json: &str, x: f64, y: f64) -> Result<String, String> {
    let spec: BodySpec = serde_json::from_str(body_json).map_err(err)?;
    let body = build_body(&spec).map_err(err)?;
    let p = vec2(x, y);
    let (nearest, distance) = match &body {
        Body::Curve(curve) => {
            let proj = flyby::oracle::project_curve(curve.as_ref(), p, 720).map_err(err)?;
            (proj.nearest, proj.distance)
        }
        Body::Piecewise(set) => {
            let proj = set.boundary.project(p);
            (proj.nearest, proj.distance)
        }
        Body::Surface(_) => return Err("need a 2D body".to_string()),
    };
    let theta = (p - nearest) / distance;
    serde_json::to_string(&Projection2Json {
        nearest: [nearest.x, nearest.y],
        distance,
        theta: [theta.x, theta.y],
    })
    .map_err(err)
}

/// Polyline outline of a 2D body for canvas drawing.
#[wasm_bindgen]
pub fn body_outline2(body_json: &str, samples: usize) -> Result<String, JsValue> {
    to_js(body_outline2_impl(body_json, samples))
}

fn body_outline2_impl(body_json: &str, samples: usize) -> Result<String, String> {
    let spec: BodySpec = serde_json::from_str(body_json).map_err(err)?;
    let body = build_body(&spec).map_err(err)?;
    let n = samples.clamp(16, 100_000);
    let points: Vec<[f64; 2]> = match &body {
        Body::Curve(curve) => {
            let (lo, hi) = curve.domain();
            let mut pts: Vec<[f64; 2]> = (0..n)
                .map(|i| {
                    let u = lo + (hi - lo) * i as f64 / n as f64;
                    let p = curve.eval(u);
                    [p.x, p.y]
                })
                .collect();
            if curve.periodic() {
                let first = pts[0];
                pts.push(first);
            } else {
                let p = curve.eval(hi);
                pts.push([p.x, p.y]);
            }
            pts
        }
        Body::Piecewise(set) => outline_pieces(set.boundary.pieces(), n),
        Body::Surface(_) => return Err("need a 2D body".to_string()),
    };
    serde_json::to_string(&points).map_err(err)
}

fn outline_pieces(pieces: &[Piece], n: usize) -> Vec<[f64; 2]> {
    let total: f64 = pieces.iter().map(|p| p.len()).sum();
    let mut out = Vec::new();
    for piece in pieces {
        let count = ((piece.len() / total * n as f64).ceil() as usize).max(2);
        for k in 0..count {
            let p = piece.point_at(piece.len() * k as f64 / count as f64);
            out.push([p.x, p.y]);
        }
    }
    if let Some(first) = out.first().copied() {
        out.push(first);
    }
    out
}

#[derive(Serialize)]
struct ShapiroEventJson {
    n: usize,
    t_n: f64,
    s_n: f64,
    p_n: Option<f64>,
    q_n: f64,
    r_n: f64,
}

#[derive(Serialize)]
struct ShapiroRecordJson {
    t: f64,
    speed: f64,
    kind: &'static str,
    q: f64,
}

#[derive(Serialize)]
struct ShapiroSweepPointJson {
    n: usize,
    t_n: f64,
    q_at_t: f64,
    s_n: f64,
    q_at_s: f64,
}

#[derive(Serialize)]
struct ShapiroDemoJson {
    boundary: Vec<[f64; 2]>,
    anchors: Vec<[f64; 2]>,
    events: Vec<ShapiroEventJson>,
    records: Vec<ShapiroRecordJson>,
    sweep_points: Vec<ShapiroSweepPointJson>,
    tail_t_mean: f64,
    tail_s_mean: f64,
    gap: f64,
    certified_divergent: bool,
    radius_limit: f64,
    arc_speed_limit: f64,
}

/// Build the counterexample set, run the flyby and the difference-quotient
/// sweep, and return everything a plot needs.
#[wasm_bindgen]
pub fn shapiro_demo(lambda: f64, c: f64, arcs: usize, t_max: f64) -> Result<String, JsValue> {
    to_js(shapiro_demo_impl(lambda, c, arcs, t_max))
}

fn shapiro_demo_impl(lambda: f64, c: f64, arcs: usize, t_max: f64) -> Result<String, String> {
    let set = build_shapiro(lambda, c, arcs).map_err(err)?;
    let dt = set.alpha(arcs + 1) / 100.0;
    let fly = flyby_experiment(&set, t_max, dt).map_err(err)?;
    let sweep = difference_quotient_sweep(&set, &fly.events).map_err(err)?;

    let arc_pieces: std::collections::BTreeSet<usize> =
        set.corners.iter().map(|c| c.piece).collect();
    let chain_end = 2 * set.arcs + 1;
    // Decimate the sample records for plotting (log-t staircase).
    let stride = (fly.records.len() / 1500).max(1);
    let records: Vec<ShapiroRecordJson> = fly
        .records
        .iter()
        .step_by(stride)
        .filter(|r| r.speed_within_piece)
        .map(|r| ShapiroRecordJson {
            t: r.t,
            speed: r.speed,
            kind: if arc_pieces.contains(&r.piece) {
                "arc"
            } else if r.piece < chain_end {
                "segment"
            } else {
                "circle"
            },
            q: difference_quotient(&set, r.t),
        })
        .collect();

    let demo = ShapiroDemoJson {
        boundary: outline_pieces(set.boundary.pieces(), 2000),
        anchors: set.anchors.iter().map(|a| [a.x, a.y]).collect(),
        events: fly
            .events
            .iter()
            .map(|e| ShapiroEventJson {
                n: e.n,
                t_n: e.t_n,
                s_n: e.s_n,
                p_n: e.p_n,
                q_n: e.q_n,
                r_n: set.corner(e.n).map(|c| c.radius).unwrap_or(f64::NAN),
            })
            .collect(),
        records,
        sweep_points: sweep
            .points
            .iter()
            .map(|p| ShapiroSweepPointJson {
                n: p.n,
                t_n: p.t_n,
                q_at_t: p.q_at_t,
                s_n: p.s_n,
                q_at_s: p.q_at_s,
            })
            .collect(),
        tail_t_mean: sweep.tail_t.mean,
        tail_s_mean: sweep.tail_s.mean,
        gap: sweep.gap,
        certified_divergent: sweep.certified_divergent,
        radius_limit: limit_radius(lambda),
        arc_speed_limit: limit_arc_speed(lambda),
    };
    serde_json::to_string(&demo).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn track_scene_returns_columns() {
        let json = track_scene_impl(
            r#"{
                "body": {"kind": "cylinder", "params": {"kappa": 1.0}},
                "trajectory": {"kind": "line", "start": [0, 2, 0], "velocity": [1, 0, 1]},
                "initial": {"u": 0.0, "v": 1.5707963267948966, "r": 1.0},
                "time": {"start": 0.0, "end": 10.0, "samples": 21}
            }"#,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["t"].as_array().unwrap().len(), 21);
        let r_last = v["r"].as_array().unwrap()[20].as_f64().unwrap();
        assert!((r_last - (104.0f64.sqrt() - 1.0)).abs() <= 1e-6);
        assert_eq!(v["meta"]["dimension"], 3);
    }

    #[test]
    fn project_point2_on_disk() {
        let json = project_point2_impl(r#"{"kind": "disk"}"#, 2.0, 0.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!((v["distance"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
        assert!((v["nearest"][0].as_f64().unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn shapiro_demo_reports_divergence() {
        let json = shapiro_demo_impl(0.5, std::f64::consts::FRAC_PI_2, 12, 1.2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["certified_divergent"], true);
        let gap = v["gap"].as_f64().unwrap();
        assert!(gap > 0.04 && gap < 0.05);
        assert!(v["boundary"].as_array().unwrap().len() > 100);
        assert!(!v["records"].as_array().unwrap().is_empty());
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(track_scene_impl("{").is_err());
        assert!(project_point2_impl(r#"{"kind": "sphere"}"#, 2.0, 0.0).is_err());
    }

    #[test]
    fn outline_is_closed() {
        let json = body_outline2_impl(r#"{"kind": "ellipse", "params": {"a": 2.0, "b": 1.0}}"#, 64)
            .unwrap();
        let pts: Vec<[f64; 2]> = serde_json::from_str(&json).unwrap();
        assert_eq!(pts.first(), pts.last());
    }
}
