//! Implicit product-integration trapezoidal solver for
//! `D^{α_k} x_k = (A x + f(t) + n(x))_k`, `x(0) = x0`, on a uniform grid with
//! full memory.
//!
//! Per component the scheme reads
//!
//! ```text
//! x_n = x_0 + h^α/Γ(α+2) [ ã_n g_0 + Σ_{j=1}^{n-1} a_{n-j} g_j + g_n ]
//! ```
//!
//! and the implicit stage in `x_n` is solved by damped Newton with a
//! fixed-point fallback.

pub mod diagnostics;
pub mod weights;

pub use diagnostics::{
    decay_diagnostic, simulate_nonlinear_basin, BasinResult, DecayDiagnostic,
};
pub use weights::PiWeights;

use crate::model::{ForcingKind, MultiOrderSystem};
use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use thiserror::Error;
use weights::dot;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error("forcing break of component {component} at t = {t_break} is not a multiple of the step {step}")]
    MisalignedForcingBreak { component: usize, t_break: f64, step: f64 },
    #[error("Newton iteration diverged at t = {t} (residual {residual:e})")]
    NewtonDivergence { t: f64, residual: f64 },
    #[error("implicit stage matrix is singular at t = {t}; reduce the step")]
    StepTooLarge { t: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("diagnostic window [{lo}, {hi}] not inside the trajectory range (0, {t_end}]")]
    WindowOutOfRange { lo: f64, hi: f64, t_end: f64 },
    #[error("basin precondition failed: {0}")]
    BasinPrecondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub step: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl SolverConfig {
    pub fn new(step: f64, t_end: f64) -> Self {
        Self {
            step,
            t_end,
            newton_tol: 1e-12,
            newton_max_iter: 50,
        }
    }

    /// Number of steps `N` with `N * step = t_end`.
    pub fn steps(&self) -> Result<usize, SolverError> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(SolverError::BadConfig(format!("step must be positive, got {}", self.step)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SolverError::BadConfig(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(SolverError::BadConfig("Newton tolerance and iteration cap must be positive".into()));
        }
        let n = (self.t_end / self.step).round();
        if (n * self.step - self.t_end).abs() > 1e-9 * self.t_end.max(self.step) {
            return Err(SolverError::BadConfig(format!(
                "t_end = {} is not a whole number of steps of {}",
                self.t_end, self.step
            )));
        }
        Ok(n as usize)
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.step
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<[f64; 3]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn norm(&self, i: usize) -> f64 {
        let x = self.x[i];
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Index of the grid point nearest to `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let step = if self.t.len() > 1 { self.t[1] } else { 1.0 };
        ((t / step).round().max(0.0) as usize).min(self.t.len() - 1)
    }

    /// Max of ‖x‖ over grid points in `[lo, hi]`.
    pub fn max_norm_on(&self, lo: f64, hi: f64) -> f64 {
        (0..self.len())
            .filter(|&i| self.t[i] >= lo && self.t[i] <= hi)
            .map(|i| self.norm(i))
            .fold(0.0, f64::max)
    }
}

fn check_forcing_alignment(sys: &MultiOrderSystem, step: f64) -> Result<(), SolverError> {
    let Some(f) = &sys.forcing else {
        return Ok(());
    };
    for (k, c) in f.components.iter().enumerate() {
        if let ForcingKind::PiecewisePower { t_break, .. } = c {
            let m = (t_break / step).round();
            if (m * step - t_break).abs() > 1e-9 * step.max(t_break.abs()) {
                return Err(SolverError::MisalignedForcingBreak {
                    component: k + 1,
                    t_break: *t_break,
                    step,
                });
            }
        }
    }
    Ok(())
}

/// Forcing evaluated on the grid; a break that coincides with a grid point
/// takes the after-break branch there.
fn forcing_at(sys: &MultiOrderSystem, t: f64, step: f64) -> [f64; 3] {
    let Some(f) = &sys.forcing else {
        return [0.0; 3];
    };
    let mut out = [0.0; 3];
    for (k, c) in f.components.iter().enumerate() {
        out[k] = match c {
            ForcingKind::PiecewisePower {
                t_break,
                before,
                exponent,
            } => {
                if t >= t_break - 1e-9 * step {
                    t.powf(*exponent)
                } else {
                    *before
                }
            }
            other => other.value(t),
        };
    }
    out
}

fn rhs(sys: &MultiOrderSystem, x: &[f64; 3], f: &[f64; 3]) -> [f64; 3] {
    let ax = sys.matrix.mul_vec(x);
    let mut g = [ax[0] + f[0], ax[1] + f[1], ax[2] + f[2]];
    if let Some(n) = &sys.nonlinearity {
        let nx = n.eval(x);
        for k in 0..3 {
            g[k] += nx[k];
        }
    }
    g
}

fn inf_norm(v: &[f64; 3]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

struct Stage<'a> {
    sys: &'a MultiOrderSystem,
    w0: [f64; 3],
    a: Matrix3<f64>,
    /// `(I − W A)^{-1}`, used directly when there is no nonlinearity.
    linear_inverse: Option<Matrix3<f64>>,
    tol: f64,
    max_iter: usize,
}

impl Stage<'_> {
    /// Solves `x = c + W (A x + f + n(x))`.
    fn solve(&self, c: [f64; 3], f: [f64; 3], guess: [f64; 3], t: f64) -> Result<[f64; 3], SolverError> {
        let w = self.w0;
        if let Some(inv) = &self.linear_inverse {
            let b = Vector3::new(c[0] + w[0] * f[0], c[1] + w[1] * f[1], c[2] + w[2] * f[2]);
            let x = inv * b;
            return Ok([x[0], x[1], x[2]]);
        }
        let residual = |x: &[f64; 3]| -> [f64; 3] {
            let g = rhs(self.sys, x, &f);
            [
                x[0] - c[0] - w[0] * g[0],
                x[1] - c[1] - w[1] * g[1],
                x[2] - c[2] - w[2] * g[2],
            ]
        };
        let converged = |x: &[f64; 3], r: &[f64; 3]| inf_norm(r) <= self.tol * (1.0 + inf_norm(x));
        let nl = self.sys.nonlinearity.as_ref().expect("nonlinear stage");

        let mut x = guess;
        let mut r = residual(&x);
        let mut newton_ok = true;
        for _ in 0..self.max_iter {
            if converged(&x, &r) {
                return Ok(x);
            }
            let jn = nl.jacobian(&x);
            let mut jac = Matrix3::identity();
            for i in 0..3 {
                for j in 0..3 {
                    jac[(i, j)] -= w[i] * (self.a[(i, j)] + jn[i][j]);
                }
            }
            let Some(dx) = jac.lu().solve(&Vector3::new(-r[0], -r[1], -r[2])) else {
                newton_ok = false;
                break;
            };
            let rn = inf_norm(&r);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = [x[0] + lambda * dx[0], x[1] + lambda * dx[1], x[2] + lambda * dx[2]];
                let rt = residual(&trial);
                if inf_norm(&rt) < rn || converged(&trial, &rt) {
                    x = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                newton_ok = false;
                break;
            }
        }
        if newton_ok && converged(&x, &r) {
            return Ok(x);
        }

        // Fixed-point fallback: contracts when the step is small.
        let mut y = guess;
        for _ in 0..self.max_iter {
            let g = rhs(self.sys, &y, &f);
            let next = [c[0] + w[0] * g[0], c[1] + w[1] * g[1], c[2] + w[2] * g[2]];
            if next.iter().any(|v| !v.is_finite()) {
                break;
            }
            y = next;
            let ry = residual(&y);
            if converged(&y, &ry) {
                return Ok(y);
            }
        }
        let res = inf_norm(&r);
        if !res.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFiniteState { t });
        }
        Err(SolverError::NewtonDivergence { t, residual: res })
    }
}

/// Integrates `sys` on `[0, cfg.t_end]`. `x[0]` is `sys.x0` exactly.
pub fn integrate(sys: &MultiOrderSystem, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    let n_max = cfg.steps()?;
    check_forcing_alignment(sys, cfg.step)?;
    let alpha = sys.order.alpha;
    let weights: Vec<PiWeights> = alpha.iter().map(|&al| PiWeights::new(al, cfg.step, n_max)).collect();
    // Reversed kernel: ar[k][i] = a_{n_max − i}, so the history of step n is a
    // contiguous slice.
    let ar: Vec<Vec<f64>> = weights.iter().map(|w| w.a.iter().rev().copied().collect()).collect();
    let w0 = [weights[0].scale, weights[1].scale, weights[2].scale];

    let a = Matrix3::from_fn(|i, j| sys.matrix.entries[i][j]);
    let has_nl = sys.nonlinearity.as_ref().is_some_and(|n| !n.is_empty());
    let linear_inverse = if has_nl {
        None
    } else {
        let m = Matrix3::from_fn(|i, j| if i == j { 1.0 } else { 0.0 } - w0[i] * a[(i, j)]);
        match m.try_inverse() {
            Some(inv) if inv.iter().all(|v| v.is_finite()) => Some(inv),
            _ => return Err(SolverError::StepTooLarge { t: cfg.time(1.min(n_max)) }),
        }
    };
    let stage = Stage {
        sys,
        w0,
        a,
        linear_inverse,
        tol: cfg.newton_tol,
        max_iter: cfg.newton_max_iter,
    };

    let mut t = Vec::with_capacity(n_max + 1);
    let mut x = Vec::with_capacity(n_max + 1);
    // g per component, g[k][j] = g_k(t_j, x_j)
    let mut g: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n_max + 1));

    let x0 = sys.x0;
    t.push(0.0);
    x.push(x0);
    let g0 = rhs(sys, &x0, &forcing_at(sys, 0.0, cfg.step));
    for k in 0..3 {
        g[k].push(g0[k]);
    }

    for n in 1..=n_max {
        let tn = cfg.time(n);
        let mut c = [0.0; 3];
        for k in 0..3 {
            let hist = dot(&ar[k][n_max + 1 - n..n_max], &g[k][1..n]);
            c[k] = x0[k] + w0[k] * (weights[k].a_start[n] * g[k][0] + hist);
        }
        let fn_ = forcing_at(sys, tn, cfg.step);
        let xn = stage.solve(c, fn_, x[n - 1], tn)?;
        if xn.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFiniteState { t: tn });
        }
        let gn = rhs(sys, &xn, &fn_);
        for k in 0..3 {
            g[k].push(gn[k]);
        }
        t.push(tn);
        x.push(xn);
    }
    Ok(Trajectory { t, x })
}
