//! Decay-rate diagnostics on simulated trajectories.

use super::{integrate, SolverConfig, SolverError, Trajectory};
use crate::criteria::{assess, Overall};
use crate::charfn::GeneralCharFn;
use crate::model::MultiOrderSystem;
use crate::oracle::count_rhp_zeros;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayDiagnostic {
    pub nu: f64,
    pub window: (f64, f64),
    /// `(t, t^ν ‖x(t)‖)` for the grid points inside the window.
    pub series: Vec<(f64, f64)>,
    pub sup: f64,
    /// Sup over the third quarter of the log-time window.
    pub sup_third_quarter: f64,
    /// Sup over the last quarter.
    pub sup_last_quarter: f64,
    pub plateau: bool,
}

/// Sup of `t^ν ‖x(t)‖` over `window`, with a boundedness flag: the last
/// quarter of the log-time window must stay within (0.5, 2) times the third.
pub fn decay_diagnostic(
    traj: &Trajectory,
    nu: f64,
    window: (f64, f64),
) -> Result<DecayDiagnostic, SolverError> {
    let (lo, hi) = window;
    let t_end = traj.t.last().copied().unwrap_or(0.0);
    if !(lo > 0.0 && hi > lo && hi <= t_end * (1.0 + 1e-12)) || nu < 0.0 || !nu.is_finite() {
        return Err(SolverError::WindowOutOfRange { lo, hi, t_end });
    }
    let series: Vec<(f64, f64)> = (0..traj.len())
        .filter(|&i| traj.t[i] >= lo && traj.t[i] <= hi)
        .map(|i| (traj.t[i], traj.t[i].powf(nu) * traj.norm(i)))
        .collect();
    let ln_lo = lo.ln();
    let span = hi.ln() - ln_lo;
    let edge = |q: f64| (ln_lo + q * span).exp();
    let sup_on = |a: f64, b: f64| {
        series
            .iter()
            .filter(|(t, _)| *t >= a && *t <= b)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    };
    let sup = series.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let q3 = sup_on(edge(0.5), edge(0.75));
    let q4 = sup_on(edge(0.75), hi);
    let plateau = q3 > 0.0 && q4 > 0.5 * q3 && q4 < 2.0 * q3;
    Ok(DecayDiagnostic {
        nu,
        window,
        series,
        sup,
        sup_third_quarter: q3,
        sup_last_quarter: q4,
        plateau,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasinResult {
    pub radius: f64,
    pub x0: [f64; 3],
    /// Diagnostic with `ν = min α`, or the solver error that stopped the run.
    pub outcome: Result<DecayDiagnostic, SolverError>,
    /// `‖x(t_end)‖ <= ‖x0‖`.
    pub decayed: bool,
}

/// Integrates from `radius · x0/‖x0‖` for each radius (in parallel) and
/// records the decay diagnostic. The linear part must be certified stable,
/// by a criterion or by the winding oracle.
pub fn simulate_nonlinear_basin(
    sys: &MultiOrderSystem,
    cfg: &SolverConfig,
    radii: &[f64],
    window: (f64, f64),
) -> Result<Vec<BasinResult>, SolverError> {
    let linear = sys.homogeneous();
    let certified = match assess(&linear) {
        Ok(r) if r.overall == Overall::Stable => true,
        _ => {
            let q = GeneralCharFn::build(&linear.order, &linear.matrix);
            matches!(count_rhp_zeros(&q, None), Ok(w) if w.zero_count == 0)
        }
    };
    if !certified {
        return Err(SolverError::BasinPrecondition(
            "the linear part is not certified stable".into(),
        ));
    }
    let n0 = (sys.x0.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let dir = if n0 > 0.0 {
        sys.x0.map(|v| v / n0)
    } else {
        [1.0 / 3f64.sqrt(); 3]
    };
    let nu = sys.order.min();
    Ok(radii
        .par_iter()
        .map(|&radius| {
            let mut s = sys.clone();
            s.x0 = dir.map(|v| v * radius);
            let run = integrate(&s, cfg);
            let decayed = match &run {
                Ok(tr) => tr.norm(tr.len() - 1) <= radius,
                Err(_) => false,
            };
            let outcome = run.and_then(|tr| decay_diagnostic(&tr, nu, window));
            BasinResult {
                radius,
                x0: s.x0,
                outcome,
                decayed,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(t: &[f64], norms: &[f64]) -> Trajectory {
        Trajectory {
            t: t.to_vec(),
            x: norms.iter().map(|&n| [n, 0.0, 0.0]).collect(),
        }
    }

    #[test]
    fn power_law_plateaus() {
        let t: Vec<f64> = (0..=1000).map(|i| i as f64).collect();
        let n: Vec<f64> = t.iter().map(|&t| if t == 0.0 { 1.0 } else { 3.0 * t.powf(-0.3) }).collect();
        let d = decay_diagnostic(&toy(&t, &n), 0.3, (100.0, 1000.0)).unwrap();
        assert!(d.plateau);
        assert!((d.sup - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_solution_has_zero_sup() {
        let t: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        let d = decay_diagnostic(&toy(&t, &vec![0.0; 101]), 0.3, (10.0, 100.0)).unwrap();
        assert_eq!(d.sup, 0.0);
    }

    #[test]
    fn growth_does_not_plateau() {
        let t: Vec<f64> = (0..=1000).map(|i| i as f64).collect();
        let n: Vec<f64> = t.iter().map(|&t| (0.01 * t).exp()).collect();
        assert!(!decay_diagnostic(&toy(&t, &n), 0.0, (100.0, 1000.0)).unwrap().plateau);
    }

    #[test]
    fn window_checked() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        assert!(decay_diagnostic(&toy(&t, &[1.0; 11]), 0.3, (1.0, 20.0)).is_err());
        assert!(decay_diagnostic(&toy(&t, &[1.0; 11]), 0.3, (0.0, 5.0)).is_err());
    }
}
