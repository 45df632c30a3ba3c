//! A convex plane body with C^{1,1} boundary on which the one-sided
//! derivative of the metric projection fails to exist, plus the experiments
//! that exhibit the failure numerically.
//!
//! Construction: anchor points `A_n = exp(i alpha_n)` on the unit circle with
//! `alpha_n = C lambda^n` accumulating at the point 1. The convex hull of the
//! chords `A_n A_{n+1}` has corners; each corner at `A_n` is shaved by a
//! circular arc tangent to both adjacent chords, touching the outgoing chord
//! at its midpoint `T_n` and the incoming chord at the point `S_n` with
//! `|A_n S_n| = |T_n A_n|`. Equal tangent lengths make the tangent circle
//! exact, and the arc radii converge to `2 lambda / (1 + lambda)`.
//!
//! All piece data (tangency points, arc centers, radii) come from closed-form
//! angle arithmetic: the midline angle of the chord `A_n A_{n+1}` is
//! `mu_n = (alpha_n + alpha_{n+1}) / 2`, its half-angle is
//! `delta_n = (alpha_n - alpha_{n+1}) / 2`, the chord midpoint is
//! `T_n = cos(delta_n) e^{i mu_n}`, and the arc center sits radially at
//! `(cos(delta_n) - r_n) e^{i mu_n}`. Computing directions analytically keeps
//! the C^1 gluing checks meaningful at piece lengths far below the rounding
//! noise of coordinate differences.
//!
//! The flyby experiment drives the observer `c(t) = 2 exp(i t / 2)` along the
//! radius-2 circle, locates the times `t_n` (projection passes `T_n`) and
//! `s_n` (projection passes `S_n`) by bisection on the projection's piece
//! index, measures the projection speed plateaus, and accumulates the
//! difference quotients `|Pi(t) - Pi(0)| / t` along both event subsequences.
//! Their tails settle at different values, certifying that the one-sided
//! derivative at the accumulation point does not exist.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::math::{vec2, Vec2};
use crate::oracle::{OracleError, Projectable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapiroError {
    #[error("invalid parameter {name} = {value}: {why}")]
    BadParameter {
        name: &'static str,
        value: f64,
        why: &'static str,
    },
    #[error("tangency solve failure at corner {n}: |S - O| deviates from the radius by {deviation:.3e}")]
    TangencyFailure { n: usize, deviation: f64 },
    #[error("sample step dt = {dt:.3e} too coarse to resolve the deepest arc (need <= {required:.3e})")]
    InsufficientResolution { dt: f64, required: f64 },
    #[error("experiment produced only {got} usable events, need at least {need}")]
    InsufficientEvents { got: usize, need: usize },
}

/// One boundary piece. Segments carry their unit direction and length
/// explicitly (not derived from endpoint differences) so that tangents stay
/// exact for pieces much shorter than coordinate rounding allows.
#[derive(Debug, Clone, Copy)]
pub enum Piece {
    Segment {
        start: Vec2,
        /// Unit direction of traversal.
        dir: Vec2,
        len: f64,
    },
    Arc {
        center: Vec2,
        radius: f64,
        /// Angle of the traversal start point about the center.
        start_angle: f64,
        /// Signed swept angle; negative sweeps run clockwise.
        sweep: f64,
    },
}

impl Piece {
    pub fn len(&self) -> f64 {
        match self {
            Piece::Segment { len, .. } => *len,
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0.0
    }

    pub fn start_point(&self) -> Vec2 {
        match self {
            Piece::Segment { start, .. } => *start,
            Piece::Arc {
                center,
                radius,
                start_angle,
                ..
            } => *center + Vec2::from_angle(*start_angle) * *radius,
        }
    }

    pub fn end_point(&self) -> Vec2 {
        match self {
            Piece::Segment { start, dir, len } => *start + *dir * *len,
            Piece::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => *center + Vec2::from_angle(start_angle + sweep) * *radius,
        }
    }

    /// Point at arc-length coordinate `s` from the traversal start.
    pub fn point_at(&self, s: f64) -> Vec2 {
        match self {
            Piece::Segment { start, dir, .. } => *start + *dir * s,
            Piece::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let theta = start_angle + sweep.signum() * s / radius;
                *center + Vec2::from_angle(theta) * *radius
            }
        }
    }

    /// Unit tangent (traversal direction) at arc-length coordinate `s`.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        match self {
            Piece::Segment { dir, .. } => *dir,
            Piece::Arc {
                radius,
                start_angle,
                sweep,
                ..
            } => {
                let theta = start_angle + sweep.signum() * s / radius;
                Vec2::from_angle(theta).rot90() * sweep.signum()
            }
        }
    }

    /// Exact nearest point on this piece: foot of perpendicular with endpoint
    /// clamping for segments, angle clamping for arcs. Returns (point,
    /// squared distance, arc-length coordinate).
    fn project(&self, x: Vec2) -> (Vec2, f64, f64) {
        match self {
            Piece::Segment { start, dir, len } => {
                let s = (x - *start).dot(*dir).clamp(0.0, *len);
                let p = *start + *dir * s;
                (p, (x - p).norm_sq(), s)
            }
            Piece::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let d = x - *center;
                if d.norm_sq() < 1e-30 {
                    let p = self.start_point();
                    return (p, (x - p).norm_sq(), 0.0);
                }
                let phi = d.angle();
                // Angle from the start, measured along the traversal.
                let along = ((phi - *start_angle) * sweep.signum()).rem_euclid(TAU);
                if along <= sweep.abs() {
                    let p = *center + d * (*radius / d.norm());
                    (p, (x - p).norm_sq(), along * *radius)
                } else {
                    let a = self.start_point();
                    let b = self.end_point();
                    let da = (x - a).norm_sq();
                    let db = (x - b).norm_sq();
                    if da <= db {
                        (a, da, 0.0)
                    } else {
                        (b, db, self.len())
                    }
                }
            }
        }
    }
}

/// Exact projection onto a piecewise boundary.
#[derive(Debug, Clone, Copy)]
pub struct PiecewiseProjection {
    pub nearest: Vec2,
    pub distance: f64,
    /// Index of the winning piece (ties go to the lower index).
    pub piece: usize,
    /// Cumulative arc-length coordinate of the nearest point.
    pub arc_coord: f64,
}

/// An ordered list of segments and circular arcs forming a closed convex
/// boundary, with its cumulative arc-length table.
#[derive(Debug, Clone)]
pub struct PiecewiseBoundary {
    pieces: Vec<Piece>,
    cum_len: Vec<f64>,
}

impl PiecewiseBoundary {
    pub fn from_pieces(pieces: Vec<Piece>) -> PiecewiseBoundary {
        let mut cum_len = Vec::with_capacity(pieces.len() + 1);
        let mut acc = 0.0;
        cum_len.push(0.0);
        for p in &pieces {
            acc += p.len();
            cum_len.push(acc);
        }
        PiecewiseBoundary { pieces, cum_len }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn total_len(&self) -> f64 {
        *self.cum_len.last().unwrap_or(&0.0)
    }

    /// Cumulative arc length at the start of piece `i`.
    pub fn cum_len(&self, i: usize) -> f64 {
        self.cum_len[i]
    }

    /// Exact nearest point over all pieces; ties break toward the lower
    /// piece index.
    pub fn project(&self, x: Vec2) -> PiecewiseProjection {
        let mut best = PiecewiseProjection {
            nearest: Vec2::ZERO,
            distance: f64::INFINITY,
            piece: 0,
            arc_coord: 0.0,
        };
        let mut best_d2 = f64::INFINITY;
        for (i, piece) in self.pieces.iter().enumerate() {
            if piece.is_empty() {
                continue;
            }
            let (p, d2, s) = piece.project(x);
            if d2 < best_d2 {
                best_d2 = d2;
                best = PiecewiseProjection {
                    nearest: p,
                    distance: d2.sqrt(),
                    piece: i,
                    arc_coord: self.cum_len[i] + s,
                };
            }
        }
        best
    }

    /// Per-junction (position gap, tangent angle gap in radians). Junction
    /// `i` joins piece `i` to piece `i + 1` (cyclically).
    pub fn junction_report(&self) -> Vec<(f64, f64)> {
        let n = self.pieces.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = &self.pieces[i];
            let b = &self.pieces[(i + 1) % n];
            let gap = (a.end_point() - b.start_point()).norm();
            let ta = a.tangent_at(a.len());
            let tb = b.tangent_at(0.0);
            let angle = ta.cross(tb).atan2(ta.dot(tb)).abs();
            out.push((gap, angle));
        }
        out
    }

    /// Convexity via monotone turning: every arc sweeps the same way and
    /// every junction turns the same way (or not at all).
    pub fn is_convex(&self) -> bool {
        let mut sign = 0.0f64;
        let mut check = |turn: f64| -> bool {
            if turn.abs() <= 1e-12 {
                return true;
            }
            if sign == 0.0 {
                sign = turn.signum();
            }
            turn.signum() == sign
        };
        for piece in &self.pieces {
            if let Piece::Arc { sweep, .. } = piece {
                if !check(*sweep) {
                    return false;
                }
            }
        }
        let n = self.pieces.len();
        for i in 0..n {
            let ta = self.pieces[i].tangent_at(self.pieces[i].len());
            let tb = self.pieces[(i + 1) % n].tangent_at(0.0);
            let turn = ta.cross(tb).atan2(ta.dot(tb));
            if !check(turn) {
                return false;
            }
        }
        true
    }
}

impl Projectable for PiecewiseBoundary {
    type Point = Vec2;
    fn project(&self, x: Vec2) -> Result<(Vec2, f64), OracleError> {
        let p = PiecewiseBoundary::project(self, x);
        Ok((p.nearest, p.distance))
    }
}

/// Geometry of one shaved corner.
#[derive(Debug, Clone, Copy)]
pub struct CornerArc {
    /// Corner index n (the arc replaces the corner at `A_n`).
    pub n: usize,
    pub radius: f64,
    /// Tangency point on the chord `A_n A_{n+1}` (its midpoint).
    pub t_point: Vec2,
    /// Tangency point on the chord `A_{n-1} A_n`.
    pub s_point: Vec2,
    /// Index of the arc piece in the boundary's piece list.
    pub piece: usize,
}

/// The constructed counterexample body.
#[derive(Debug, Clone)]
pub struct ShapiroSet {
    pub lambda: f64,
    pub c: f64,
    /// Number of corner arcs (corners `A_2 .. A_{arcs+1}` are shaved).
    pub arcs: usize,
    pub boundary: PiecewiseBoundary,
    /// Anchor points `A_1 .. A_{arcs+2}`.
    pub anchors: Vec<Vec2>,
    pub corners: Vec<CornerArc>,
}

/// Limit of the corner-arc radii.
pub fn limit_radius(lambda: f64) -> f64 {
    2.0 * lambda / (1.0 + lambda)
}

/// Limit of the projection speed on the corner arcs during the flyby.
pub fn limit_arc_speed(lambda: f64) -> f64 {
    2.0 * lambda / (1.0 + 3.0 * lambda)
}

impl ShapiroSet {
    pub fn alpha(&self, n: usize) -> f64 {
        self.c * self.lambda.powi(n as i32)
    }

    /// Observer path: unit-speed motion along the radius-2 circle.
    pub fn observer(&self, t: f64) -> Vec2 {
        Vec2::from_angle(t / 2.0) * 2.0
    }

    /// The projection of the observer at t = 0 is the accumulation point
    /// (1, 0) exactly.
    pub fn projection_at_zero(&self) -> Vec2 {
        vec2(1.0, 0.0)
    }

    pub fn corner(&self, n: usize) -> Option<&CornerArc> {
        self.corners.iter().find(|c| c.n == n)
    }
}

/// Build the counterexample: `arcs` corner arcs at `A_2 .. A_{arcs+1}`,
/// closed by a segment to the accumulation point 1 and the lower unit-circle
/// arc back to `A_1`. Pieces are ordered by decreasing boundary angle
/// starting at `A_1`. The corner at `A_1` itself is intentionally left
/// unsmoothed; every generated junction is C^1.
pub fn build_shapiro(lambda: f64, c: f64, arcs: usize) -> Result<ShapiroSet, ShapiroError> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(ShapiroError::BadParameter {
            name: "lambda",
            value: lambda,
            why: "must lie strictly between 0 and 1",
        });
    }
    if !(c > 0.0 && c * lambda <= PI) {
        return Err(ShapiroError::BadParameter {
            name: "c",
            value: c,
            why: "must be positive with c * lambda <= pi",
        });
    }
    if arcs < 3 {
        return Err(ShapiroError::BadParameter {
            name: "arcs",
            value: arcs as f64,
            why: "need at least 3 corner arcs",
        });
    }

    let alpha = |n: usize| c * lambda.powi(n as i32);
    // Half-angle of the chord A_n A_{n+1}, in closed form (no cancellation).
    let delta = |n: usize| c * lambda.powi(n as i32) * (1.0 - lambda) / 2.0;
    // Midline angle of the chord A_n A_{n+1}.
    let mu = |n: usize| c * lambda.powi(n as i32) * (1.0 + lambda) / 2.0;

    let n_max = arcs + 1;
    let anchors: Vec<Vec2> = (1..=arcs + 2).map(|n| Vec2::from_angle(alpha(n))).collect();

    let mut pieces = Vec::with_capacity(2 * arcs + 2);
    let mut corners = Vec::with_capacity(arcs);

    let seg_dir = |n: usize| Vec2::from_angle(mu(n) - PI / 2.0);
    // Segment from A_1 to S_2 along the chord A_1 A_2.
    pieces.push(Piece::Segment {
        start: anchors[0],
        dir: seg_dir(1),
        len: 2.0 * delta(1).sin() - delta(2).sin(),
    });

    for n in 2..=n_max {
        // Corner at A_n: tangent length is half the outgoing chord.
        let ell = delta(n).sin();
        let beta = mu(n - 1) - mu(n);
        let radius = ell / (beta / 2.0).tan();
        let t_point = Vec2::from_angle(mu(n)) * delta(n).cos();
        let s_point = anchors[n - 1] + Vec2::from_angle(mu(n - 1) + PI / 2.0) * ell;
        let center = Vec2::from_angle(mu(n)) * (delta(n).cos() - radius);

        // Tangency cross-check: the S-side tangency must sit at the same
        // radius as the T-side one.
        let deviation = ((s_point - center).norm() - radius).abs();
        if deviation > 1e-10 * (1.0 + radius) {
            return Err(ShapiroError::TangencyFailure { n, deviation });
        }

        pieces.push(Piece::Arc {
            center,
            radius,
            start_angle: mu(n - 1),
            sweep: mu(n) - mu(n - 1),
        });
        corners.push(CornerArc {
            n,
            radius,
            t_point,
            s_point,
            piece: pieces.len() - 1,
        });

        if n < n_max {
            // Straight run from T_n to S_{n+1} on the chord A_n A_{n+1}.
            pieces.push(Piece::Segment {
                start: t_point,
                dir: seg_dir(n),
                len: delta(n).sin() - delta(n + 1).sin(),
            });
        } else {
            // Truncation: finish the last chord to A_{n_max + 1} (keeping the
            // tangency at T_{n_max} exact) and let the unit circle carry the
            // boundary the rest of the way to the accumulation point. The
            // only corner this leaves is at A_{n_max + 1}, far below every
            // generated tangency.
            pieces.push(Piece::Segment {
                start: t_point,
                dir: seg_dir(n),
                len: delta(n).sin(),
            });
        }
    }

    // Unit-circle arc from A_{n_max + 1} down to the accumulation point 1.
    pieces.push(Piece::Arc {
        center: Vec2::ZERO,
        radius: 1.0,
        start_angle: alpha(n_max + 1),
        sweep: -alpha(n_max + 1),
    });

    // Unit-circle arc through the lower half-plane from 1 back to A_1; the
    // two circle pieces join smoothly at 1.
    pieces.push(Piece::Arc {
        center: Vec2::ZERO,
        radius: 1.0,
        start_angle: TAU,
        sweep: alpha(1) - TAU,
    });

    Ok(ShapiroSet {
        lambda,
        c,
        arcs,
        boundary: PiecewiseBoundary::from_pieces(pieces),
        anchors,
        corners,
    })
}

/// One flyby sample.
#[derive(Debug, Clone, Copy)]
pub struct FlybyRecord {
    pub t: f64,
    pub projection: Vec2,
    /// Piece index of the projection.
    pub piece: usize,
    /// Cumulative arc-length coordinate of the projection.
    pub arc_coord: f64,
    /// Projection speed |Pi'| finite-differenced over the following sample
    /// gap; meaningful when `speed_within_piece` is set.
    pub speed: f64,
    /// Both ends of the finite-difference gap lie on the same piece.
    pub speed_within_piece: bool,
}

/// Event times of one shaved corner: the projection passes `T_n` at `t_n`
/// and `S_n` at `s_n` (with `t_n < s_n < t_{n-1}`).
#[derive(Debug, Clone, Copy)]
pub struct EventTimes {
    pub n: usize,
    pub t_n: f64,
    pub s_n: f64,
    /// (t_{n-1} - s_n) / t_{n-1}; present when the previous corner's event
    /// was detected too.
    pub p_n: Option<f64>,
    /// (s_n - t_n) / s_n.
    pub q_n: f64,
}

#[derive(Debug, Clone)]
pub struct FlybyResult {
    pub records: Vec<FlybyRecord>,
    pub events: Vec<EventTimes>,
}

/// Run the flyby: sample the projection of `c(t) = 2 exp(i t / 2)` on a
/// geometric time grid from `dt` to `t_max`, finite-difference the
/// projection speed, and resolve the piece-transition times by bisection.
///
/// `dt` must resolve the deepest generated arc: at most `alpha_{n_max} / 100`
/// for the deepest shaved corner `n_max`. The grid is geometric (fixed ratio
/// between consecutive samples), which gives uniform per-octave resolution
/// across the whole event cascade; a uniform grid of step `dt` would need
/// astronomically many samples to cover the same range.
pub fn flyby_experiment(
    set: &ShapiroSet,
    t_max: f64,
    dt: f64,
) -> Result<FlybyResult, ShapiroError> {
    let n_max = set.arcs + 1;
    let required = set.alpha(n_max) / 100.0;
    if dt > required {
        return Err(ShapiroError::InsufficientResolution { dt, required });
    }
    if t_max <= dt {
        return Err(ShapiroError::BadParameter {
            name: "t_max",
            value: t_max,
            why: "must exceed the sample step",
        });
    }

    // Geometric sample grid.
    const RATIO: f64 = 1.002;
    let mut times = Vec::new();
    let mut t = dt;
    while t < t_max {
        times.push(t);
        t *= RATIO;
    }
    times.push(t_max);

    let project = |t: f64| set.boundary.project(set.observer(t));

    let samples: Vec<(f64, PiecewiseProjection)> =
        times.iter().map(|&t| (t, project(t))).collect();

    let mut records = Vec::with_capacity(samples.len());
    for i in 0..samples.len() {
        let (t, p) = samples[i];
        let (speed, within) = if i + 1 < samples.len() {
            let (t2, p2) = samples[i + 1];
            (
                (p2.nearest - p.nearest).norm() / (t2 - t),
                p2.piece == p.piece,
            )
        } else {
            (0.0, false)
        };
        records.push(FlybyRecord {
            t,
            projection: p.nearest,
            piece: p.piece,
            arc_coord: p.arc_coord,
            speed,
            speed_within_piece: within,
        });
    }

    // Transition times by bisection on the projection's piece index. The
    // projection moves to strictly lower piece indices as t grows, so each
    // bracket [a, b] with differing indices contains the exit time of piece
    // id(a); splitting there and recursing resolves cascades of several
    // transitions inside one sample gap.
    let mut transitions: Vec<(f64, usize, usize)> = Vec::new();
    let mut stack: Vec<(f64, usize, f64, usize)> = Vec::new();
    for w in samples.windows(2) {
        let (ta, pa) = (w[0].0, w[0].1.piece);
        let (tb, pb) = (w[1].0, w[1].1.piece);
        if pa != pb {
            stack.push((ta, pa, tb, pb));
        }
    }
    while let Some((ta, pa, tb, pb)) = stack.pop() {
        let mut lo = ta;
        let mut hi = tb;
        for _ in 0..80 {
            if (hi - lo) <= 1e-14 * hi {
                break;
            }
            let mid = (lo + hi) / 2.0;
            if project(mid).piece == pa {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let after = project(hi).piece;
        transitions.push((hi, pa, after));
        if after != pb {
            stack.push((hi, after, tb, pb));
        }
    }
    transitions.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Map transitions to corner events: entering the arc of corner n from
    // the segment below it is t_n; leaving it upward is s_n.
    let mut t_times = std::collections::BTreeMap::new();
    let mut s_times = std::collections::BTreeMap::new();
    for corner in &set.corners {
        for &(tau, from, to) in &transitions {
            if to == corner.piece && from == corner.piece + 1 {
                t_times.insert(corner.n, tau);
            }
            if from == corner.piece && to + 1 == corner.piece {
                s_times.insert(corner.n, tau);
            }
        }
    }

    let mut events = Vec::new();
    for (&n, &t_n) in &t_times {
        let Some(&s_n) = s_times.get(&n) else {
            continue;
        };
        let p_n = t_times.get(&(n - 1)).map(|&t_prev| (t_prev - s_n) / t_prev);
        events.push(EventTimes {
            n,
            t_n,
            s_n,
            p_n,
            q_n: (s_n - t_n) / s_n,
        });
    }
    events.sort_by_key(|e| e.n);

    Ok(FlybyResult { records, events })
}

/// Difference quotient `|Pi(c(t)) - Pi(0)| / t` at a given time.
pub fn difference_quotient(set: &ShapiroSet, t: f64) -> f64 {
    let p = set.boundary.project(set.observer(t));
    (p.nearest - set.projection_at_zero()).norm() / t
}

/// Mean and spread of the tail of a sequence.
#[derive(Debug, Clone, Copy)]
pub struct TailStats {
    pub mean: f64,
    pub spread: f64,
    pub count: usize,
}

fn tail_stats(values: &[f64], count: usize) -> TailStats {
    let tail = &values[values.len().saturating_sub(count)..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().map(|v| (v - mean).abs()).fold(0.0f64, f64::max);
    TailStats {
        mean,
        spread,
        count: tail.len(),
    }
}

/// Difference quotients evaluated at one corner's events.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub n: usize,
    pub t_n: f64,
    pub q_at_t: f64,
    pub s_n: f64,
    pub q_at_s: f64,
}

/// Result of [`difference_quotient_sweep`]: the two accumulation estimates.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub tail_t: TailStats,
    pub tail_s: TailStats,
    /// |tail_t.mean - tail_s.mean|.
    pub gap: f64,
    /// The two tails differ by more than three times their internal spread:
    /// the difference quotient has (at least) two distinct accumulation
    /// points, so the one-sided derivative at t = 0 cannot exist.
    pub certified_divergent: bool,
}

/// Evaluate the difference quotient along the `t_n` and `s_n` subsequences
/// and compare their tails.
pub fn difference_quotient_sweep(
    set: &ShapiroSet,
    events: &[EventTimes],
) -> Result<SweepResult, ShapiroError> {
    const TAIL: usize = 6;
    if events.len() < 4 {
        return Err(ShapiroError::InsufficientEvents {
            got: events.len(),
            need: 4,
        });
    }
    let mut points: Vec<SweepPoint> = events
        .iter()
        .map(|e| SweepPoint {
            n: e.n,
            t_n: e.t_n,
            q_at_t: difference_quotient(set, e.t_n),
            s_n: e.s_n,
            q_at_s: difference_quotient(set, e.s_n),
        })
        .collect();
    points.sort_by_key(|p| p.n);
    // Tails are the deepest corners (largest n, smallest times).
    let q_t: Vec<f64> = points.iter().map(|p| p.q_at_t).collect();
    let q_s: Vec<f64> = points.iter().map(|p| p.q_at_s).collect();
    let tail_t = tail_stats(&q_t, TAIL);
    let tail_s = tail_stats(&q_s, TAIL);
    let gap = (tail_t.mean - tail_s.mean).abs();
    let certified = gap > 3.0 * tail_t.spread.max(tail_s.spread);
    Ok(SweepResult {
        points,
        tail_t,
        tail_s,
        gap,
        certified_divergent: certified,
    })
}

/// A full circle as a single-arc piecewise boundary; the control case on
/// which the difference quotient converges.
pub fn circle_boundary(radius: f64) -> PiecewiseBoundary {
    PiecewiseBoundary::from_pieces(vec![Piece::Arc {
        center: Vec2::ZERO,
        radius,
        start_angle: TAU,
        sweep: -TAU,
    }])
}

/// Axis-aligned square `[-h, h]^2` as four segments (clockwise, matching the
/// counterexample's piece ordering).
pub fn square_boundary(h: f64) -> PiecewiseBoundary {
    let corners = [vec2(h, h), vec2(h, -h), vec2(-h, -h), vec2(-h, h)];
    let mut pieces = Vec::with_capacity(4);
    for i in 0..4 {
        let a = corners[i];
        let b = corners[(i + 1) % 4];
        let d = b - a;
        let len = d.norm();
        pieces.push(Piece::Segment {
            start: a,
            dir: d / len,
            len,
        });
    }
    PiecewiseBoundary::from_pieces(pieces)
}
