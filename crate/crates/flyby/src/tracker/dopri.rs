//! Embedded Dormand-Prince 5(4) integrator with PI step-size control and
//! fourth-order dense output, over fixed-size `[f64; N]` states.
//!
//! This is a classic explicit solver: 7 stages, FSAL, the usual error
//! estimate from the difference of the 5th and 4th order solutions, and the
//! standard five-coefficient interpolation polynomial for output between
//! accepted steps. Integration may run forward or backward in time.

// Butcher A matrix (lower triangle).
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// Stage nodes.
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

// 5th-order weights (row 7 of A, FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

// Error coefficients: b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// Dense-output coefficients.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

#[derive(Debug, Clone)]
pub struct StepControl {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Steps below `min_step_fraction * |span|` abort as a stiffness or
    /// singularity signal.
    pub min_step_fraction: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
            min_step_fraction: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError<E> {
    /// The step size underflowed; integration cannot continue.
    StepSizeUnderflow { t: f64 },
    /// The step budget ran out.
    MaxStepsExceeded { t: f64 },
    /// The right-hand side reported a failure.
    Rhs(E),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// One accepted step, exposing the dense interpolant over `[t_old, t_new]`.
pub struct DenseStep<'a, const N: usize> {
    pub t_old: f64,
    pub t_new: f64,
    cont: &'a [[f64; N]; 5],
}

impl<const N: usize> DenseStep<'_, N> {
    /// Evaluate the 4th-order interpolant at `t` inside the step.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t_new - self.t_old;
        let s = if h == 0.0 { 0.0 } else { (t - self.t_old) / h };
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.cont[0][i]
                + s * (self.cont[1][i]
                    + s1 * (self.cont[2][i]
                        + s * (self.cont[3][i] + s1 * self.cont[4][i])));
        }
        y
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, parts: &[(f64, [f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coeff, k) in parts {
        if *coeff == 0.0 {
            continue;
        }
        for (o, ki) in out.iter_mut().zip(k) {
            *o += h * coeff * ki;
        }
    }
    out
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t_end`, invoking `on_step`
/// after every accepted step. The callback may inspect the dense interpolant
/// and may rewrite the state (used for parameter wrapping and for residual
/// re-initialization); returning `Err` aborts the run.
pub fn solve<const N: usize, E>(
    mut rhs: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    control: &StepControl,
    mut on_step: impl FnMut(&DenseStep<'_, N>, &mut [f64; N]) -> Result<(), E>,
) -> Result<(SolveStats, [f64; N]), SolveError<E>> {
    let mut stats = SolveStats::default();
    if t0 == t_end {
        return Ok((stats, y0));
    }
    let span = (t_end - t0).abs();
    let posneg = (t_end - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut k0 = rhs(t, &y).map_err(SolveError::Rhs)?;
    stats.rhs_evals += 1;

    let mut h = initial_step(&mut rhs, t, &y, &k0, posneg, control, &mut stats)
        .map_err(SolveError::Rhs)?;
    let mut facold: f64 = 1e-4;
    let mut cont = [[0.0; N]; 5];

    loop {
        if stats.accepted + stats.rejected >= control.max_steps {
            return Err(SolveError::MaxStepsExceeded { t });
        }
        if h.abs() < control.min_step_fraction * span {
            return Err(SolveError::StepSizeUnderflow { t });
        }
        let mut last = false;
        if (t + h - t_end) * posneg >= 0.0 {
            h = t_end - t;
            last = true;
        }

        // Stages 2..7.
        let mut k = [[0.0; N]; 7];
        k[0] = k0;
        for j in 0..6 {
            let mut parts = Vec::with_capacity(j + 1);
            for (l, a) in A[j].iter().enumerate().take(j + 1) {
                parts.push((*a, k[l]));
            }
            let yj = axpy(&y, h, &parts);
            k[j + 1] = rhs(t + C[j] * h, &yj).map_err(SolveError::Rhs)?;
            stats.rhs_evals += 1;
        }
        let y_new = axpy(&y, h, &[(B[0], k[0]), (B[2], k[2]), (B[3], k[3]), (B[4], k[4]), (B[5], k[5])]);
        // k[6] was computed at (t + h, y_new) since row 7 of A equals B.
        let k_new = k[6];

        // Error norm.
        let mut err = 0.0;
        for i in 0..N {
            let sk = control.abs_tol + control.rel_tol * y[i].abs().max(y_new[i].abs());
            let mut e = 0.0;
            for (j, ej) in E.iter().enumerate() {
                e += ej * k[j][i];
            }
            let ratio = h * e / sk;
            err += ratio * ratio;
        }
        err = (err / N as f64).sqrt();

        let fac11 = err.powf(0.2 - BETA * 0.75);
        let fac = (fac11 / facold.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let h_new = h / fac;

        if err <= 1.0 {
            facold = err.max(1e-4);
            stats.accepted += 1;

            // Dense-output coefficients for this step.
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h * k_new[i] - bspl;
                let mut dsum = 0.0;
                for (j, dj) in D.iter().enumerate() {
                    dsum += dj * k[j][i];
                }
                cont[4][i] = h * dsum;
            }

            let t_new = t + h;
            let mut y_next = y_new;
            let step = DenseStep {
                t_old: t,
                t_new,
                cont: &cont,
            };
            on_step(&step, &mut y_next).map_err(SolveError::Rhs)?;

            t = t_new;
            if y_next != y_new {
                // State rewritten by the callback: refresh the derivative.
                k0 = rhs(t, &y_next).map_err(SolveError::Rhs)?;
                stats.rhs_evals += 1;
            } else {
                k0 = k_new;
            }
            y = y_next;
            if last {
                return Ok((stats, y));
            }
            h = posneg * h_new.abs().min(control.max_step);
        } else {
            stats.rejected += 1;
            h = posneg * (h.abs() / (fac11 / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN)).min(control.max_step);
        }
    }
}

/// Standard starting-step heuristic (scaled norms of y and f, one Euler
/// probe of the second derivative).
fn initial_step<const N: usize, E>(
    rhs: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    k0: &[f64; N],
    posneg: f64,
    control: &StepControl,
    stats: &mut SolveStats,
) -> Result<f64, E> {
    let sk = |yi: f64| control.abs_tol + control.rel_tol * yi.abs();
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        d0 += (y[i] / sk(y[i])).powi(2);
        d1 += (k0[i] / sk(y[i])).powi(2);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(control.max_step) * posneg;

    let y1 = axpy(y, h0, &[(1.0, *k0)]);
    let k1 = rhs(t + h0, &y1)?;
    stats.rhs_evals += 1;
    let mut d2 = 0.0;
    for i in 0..N {
        d2 += ((k1[i] - k0[i]) / sk(y[i])).powi(2);
    }
    d2 = (d2 / N as f64).sqrt() / h0.abs();

    let max_d = d1.max(d2);
    let h1 = if max_d <= 1e-15 {
        (h0.abs() * 1e-3).max(1e-6)
    } else {
        (0.01 / max_d).powf(0.2)
    };
    Ok(posneg * h1.min(100.0 * h0.abs()).min(control.max_step))
}
