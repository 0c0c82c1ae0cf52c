//! The pipeline behind the `fracstab` binary: config in, report and CSV/SVG
//! artifacts out.
//!
//! Exit statuses: 0 when a verdict was produced (including Inconclusive), 1
//! for usage or configuration errors, 2 when criteria contradict each other
//! or disagree with the oracle (a `diagnostic.json` dump is written).

pub mod output;
pub mod svg;

use crate::charfn::GeneralCharFn;
use crate::classifier::ClassificationReport;
use crate::config::{ConfigError, SystemFile};
use crate::criteria::{assess_with_oracle, CriteriaError, OracleOutcome, StabilityReport};
use crate::model::MultiOrderSystem;
use crate::oracle::{
    count_rhp_zeros, default_omega_max, scan_imaginary_axis, trace_contour, ContourSpec,
    OracleError, Segment,
};
use crate::solver::{decay_diagnostic, integrate, simulate_nonlinear_basin, SolverConfig, SolverError};
use output::write_atomic;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const THREADS_ENV: &str = "FRACSTAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Verdict = 0,
    Usage = 1,
    Contradiction = 2,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// A single entry of the system to vary in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// `a<i><j>`, 1-based.
    Entry(usize, usize),
    /// `alpha<i>`, 1-based.
    Alpha(usize),
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("unknown sweep parameter {s:?}; use a<i><j> or alpha<i>"));
        let digit = |c: char| c.to_digit(10).filter(|d| (1..=3).contains(d)).map(|d| d as usize);
        if let Some(rest) = s.strip_prefix("alpha") {
            let mut it = rest.chars();
            return match (it.next().and_then(digit), it.next()) {
                (Some(i), None) => Ok(SweepParam::Alpha(i)),
                _ => Err(bad()),
            };
        }
        if let Some(rest) = s.strip_prefix('a') {
            let mut it = rest.chars();
            return match (it.next().and_then(digit), it.next().and_then(digit), it.next()) {
                (Some(i), Some(j), None) => Ok(SweepParam::Entry(i, j)),
                _ => Err(bad()),
            };
        }
        Err(bad())
    }

    pub fn apply(&self, sys: &MultiOrderSystem, value: f64) -> MultiOrderSystem {
        let mut s = sys.clone();
        match *self {
            SweepParam::Entry(i, j) => s.matrix.entries[i - 1][j - 1] = value,
            SweepParam::Alpha(i) => s.order.alpha[i - 1] = value,
        }
        s
    }

    pub fn label(&self) -> String {
        match self {
            SweepParam::Entry(i, j) => format!("a{i}{j}"),
            SweepParam::Alpha(i) => format!("alpha{i}"),
        }
    }
}

/// `lo:hi:n` (n evenly spaced points, endpoints included) or a
/// comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad number {x:?} in grid {s:?}")))
    };
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad point count in grid {s:?}")))?;
            Ok(match n {
                0 => Vec::new(),
                1 => vec![lo],
                _ => (0..n)
                    .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                    .collect(),
            })
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(CliError::Usage(format!("grid {s:?} must be lo:hi:n or a list"))),
    }
}

/// `nu=<v>,window=<lo>:<hi>`; either key may be omitted.
pub fn parse_diag(s: &str) -> Result<(Option<f64>, Option<(f64, f64)>), CliError> {
    let mut nu = None;
    let mut window = None;
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("bad --diag item {part:?}")))?;
        match k.trim() {
            "nu" => {
                nu = Some(v.trim().parse().map_err(|_| CliError::Usage(format!("bad nu {v:?}")))?)
            }
            "window" => window = Some(parse_window(v)?),
            other => return Err(CliError::Usage(format!("unknown --diag key {other:?}"))),
        }
    }
    Ok((nu, window))
}

pub fn parse_window(s: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("window {s:?} must be lo:hi")))?;
    let p = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad window bound {x:?}")))
    };
    Ok((p(lo)?, p(hi)?))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub x0: Option<[f64; 3]>,
    pub nu: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub epsilon: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Classify,
    PrintCharFn,
    Analyze,
    Oracle { dump_contour: bool },
    Simulate { stride: usize, svg: bool },
    Basin { radii: Vec<f64> },
    Sweep { param: SweepParam, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub input: PathBuf,
    pub output_dir: PathBuf,
    pub overrides: Overrides,
}

/// Caps the global worker pool at `FRACSTAB_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // A pool built earlier in the same process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn save(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    write_atomic(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    error: String,
    report: &'a StabilityReport,
}

fn dump_diagnostic(dir: &Path, err: &CriteriaError) -> Result<PathBuf, CliError> {
    let path = dir.join("diagnostic.json");
    let body = serde_json::to_string_pretty(&Diagnostic {
        error: err.to_string(),
        report: err.report(),
    })
    .expect("report serialises");
    save(&path, body.as_bytes())?;
    Ok(path)
}

fn contour_spec(q: &GeneralCharFn, o: &Overrides) -> Result<Option<ContourSpec>, CliError> {
    if o.epsilon.is_none() && o.radius.is_none() {
        return Ok(None);
    }
    let mut spec = match ContourSpec::auto(q) {
        Ok(s) => s,
        Err(_) => ContourSpec::new(1e-2, 1e2),
    };
    if let Some(e) = o.epsilon {
        spec.epsilon = e;
    }
    if let Some(r) = o.radius {
        spec.radius = r;
    }
    if !(spec.epsilon > 0.0 && spec.radius > spec.epsilon) {
        return Err(CliError::Usage(format!(
            "need 0 < epsilon < radius, got {} and {}",
            spec.epsilon, spec.radius
        )));
    }
    Ok(Some(spec))
}

/// Runs one command, writing the human-readable report to `out`.
pub fn run(m: &RunManifest, out: &mut dyn Write) -> Result<Exit, CliError> {
    configure_threads()?;
    let file = SystemFile::load(&m.input)?;
    let mut sys = file.system()?;
    if let Some(x0) = m.overrides.x0 {
        sys.x0 = x0;
        sys = sys.validate().map_err(ConfigError::from)?;
    }
    let mut text = String::new();
    let exit = match &m.command {
        Command::Classify => {
            let _ = write!(text, "{}", ClassificationReport::new(&sys.order, &sys.matrix));
            Exit::Verdict
        }
        Command::PrintCharFn => {
            print_charfn(&sys, &mut text);
            Exit::Verdict
        }
        Command::Analyze => analyze(&sys, m, &mut text)?,
        Command::Oracle { dump_contour } => oracle(&sys, m, *dump_contour, &mut text)?,
        Command::Simulate { stride, svg } => simulate(&sys, &file, m, *stride, *svg, &mut text)?,
        Command::Basin { radii } => basin(&sys, &file, m, radii, &mut text)?,
        Command::Sweep { param, values } => sweep(&sys, m, *param, values, &mut text)?,
    };
    out.write_all(text.as_bytes()).map_err(|source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    })?;
    Ok(exit)
}

fn print_charfn(sys: &MultiOrderSystem, text: &mut String) {
    let q = GeneralCharFn::build(&sys.order, &sys.matrix);
    let _ = writeln!(text, "Q(s) = {q}");
    let _ = writeln!(text, "det A = {}", q.det_a());
    match q.to_simple() {
        Ok(s) => {
            let _ = writeln!(text, "simple form: {}", s.render());
            let _ = writeln!(
                text,
                "beta = ({}, {}, {}, {}), a = {}, b = {}, c = {}, d = {}",
                s.beta[0], s.beta[1], s.beta[2], s.beta[3], s.a, s.b, s.c, s.d
            );
            match s.rho_set() {
                Ok(r) => {
                    let _ = writeln!(text, "rho = {:?}", r.rho);
                    let _ = writeln!(text, "rho_tilde = {:?}", r.rho_tilde);
                }
                Err(e) => {
                    let _ = writeln!(text, "rho: {e}");
                }
            }
        }
        Err(e) => {
            let _ = writeln!(text, "simple form: {e}");
        }
    }
}

fn analyze(sys: &MultiOrderSystem, m: &RunManifest, text: &mut String) -> Result<Exit, CliError> {
    let q = GeneralCharFn::build(&sys.order, &sys.matrix);
    let spec = contour_spec(&q, &m.overrides)?;
    match assess_with_oracle(sys, spec) {
        Ok(report) => {
            let _ = write!(text, "{report}");
            Ok(Exit::Verdict)
        }
        Err(e) => {
            let _ = write!(text, "{}", e.report());
            let path = dump_diagnostic(&m.output_dir, &e)?;
            let _ = writeln!(text, "error: {e}");
            let _ = writeln!(text, "diagnostic written to {}", path.display());
            Ok(Exit::Contradiction)
        }
    }
}

fn oracle(sys: &MultiOrderSystem, m: &RunManifest, dump: bool, text: &mut String) -> Result<Exit, CliError> {
    let q = GeneralCharFn::build(&sys.order, &sys.matrix);
    let spec = contour_spec(&q, &m.overrides)?;
    let _ = writeln!(text, "Q(s) = {q}");
    let result = count_rhp_zeros(&q, spec);
    match &result {
        Ok(w) => {
            let _ = writeln!(text, "oracle: Z = {} right-half-plane zeros", w.zero_count);
            let _ = writeln!(
                text,
                "contour: epsilon = {:e}, radius = {:e}, samples = {}, residual = {:.3e}",
                w.contour.epsilon,
                w.contour.radius,
                w.samples,
                w.residual()
            );
            for (seg, turn) in Segment::ALL.iter().zip(w.segment_turning) {
                let _ = writeln!(text, "  {} turning = {:+.6} rad", seg.label(), turn);
            }
            let _ = writeln!(text, "  min |Q| on contour = {:e}", w.min_abs_on_contour);
        }
        Err(OracleError::InvalidContour(msg)) => return Err(CliError::Usage(msg.clone())),
        Err(e) => {
            let _ = writeln!(text, "oracle: {e}");
        }
    }
    if q.constant().abs() > q.zero_tol() {
        let roots = scan_imaginary_axis(&q, default_omega_max(&q));
        if roots.is_empty() {
            let _ = writeln!(text, "axis scan: h2 has no positive root");
        }
        for r in roots {
            let _ = writeln!(
                text,
                "axis scan: h2 root omega = {:.12e}, h1 = {:.6e} ({})",
                r.omega,
                r.h1,
                if r.is_stable_side() { "positive" } else { "nonpositive" }
            );
        }
    }
    if dump {
        let spec = match (spec, &result) {
            (Some(s), _) => s,
            (None, Ok(w)) => w.contour,
            (None, Err(_)) => ContourSpec::auto(&q)?,
        };
        let samples = trace_contour(&q, &spec)?;
        let path = m.output_dir.join("contour.csv");
        save(&path, output::contour_csv(&samples).as_bytes())?;
        let _ = writeln!(text, "contour written to {} ({} samples)", path.display(), samples.len());
    }
    Ok(Exit::Verdict)
}

fn solver_config(file: &SystemFile, o: &Overrides) -> SolverConfig {
    let mut cfg = file.solver_config();
    if let Some(s) = o.step {
        cfg.step = s;
    }
    if let Some(t) = o.t_end {
        cfg.t_end = t;
    }
    cfg
}

fn simulate(
    sys: &MultiOrderSystem,
    file: &SystemFile,
    m: &RunManifest,
    stride: usize,
    svg: bool,
    text: &mut String,
) -> Result<Exit, CliError> {
    let cfg = solver_config(file, &m.overrides);
    let traj = integrate(sys, &cfg)?;
    let path = m.output_dir.join("trajectory.csv");
    save(&path, output::trajectory_csv(&traj, stride).as_bytes())?;
    let last = traj.len() - 1;
    let _ = writeln!(
        text,
        "simulated {} grid points (step {}, t_end {}) -> {}",
        traj.len(),
        cfg.step,
        cfg.t_end,
        path.display()
    );
    let _ = writeln!(text, "x(t_end) = {:?}, |x(t_end)| = {:e}", traj.x[last], traj.norm(last));

    let nu = m.overrides.nu.or(file.diagnostics.nu);
    let window = m.overrides.window.or(file.diagnostics.window);
    let diag = match nu {
        Some(nu) => {
            let window = window.unwrap_or((cfg.t_end / 10.0, cfg.t_end));
            let d = decay_diagnostic(&traj, nu, window)?;
            let dpath = m.output_dir.join("decay.csv");
            save(&dpath, output::decay_csv(&d).as_bytes())?;
            let _ = writeln!(
                text,
                "decay: sup t^{nu} |x| on [{}, {}] = {:e}, plateau = {} -> {}",
                window.0,
                window.1,
                d.sup,
                d.plateau,
                dpath.display()
            );
            Some(d)
        }
        None => None,
    };
    if svg {
        let series: Vec<svg::Series> = (0..3)
            .map(|k| svg::Series {
                label: ["x1", "x2", "x3"][k],
                points: traj.t.iter().zip(&traj.x).map(|(t, x)| (*t, x[k])).collect(),
            })
            .collect();
        let p = m.output_dir.join("trajectory.svg");
        save(&p, svg::log_x_plot("trajectory", "x_k(t)", &series).as_bytes())?;
        let _ = writeln!(text, "plot written to {}", p.display());
        if let Some(d) = &diag {
            let label = format!("t^{} |x|", d.nu);
            let p = m.output_dir.join("decay.svg");
            let body = svg::log_x_plot(
                "scaled norm",
                &label,
                &[svg::Series {
                    label: &label,
                    points: d.series.clone(),
                }],
            );
            save(&p, body.as_bytes())?;
            let _ = writeln!(text, "plot written to {}", p.display());
        }
    }
    Ok(Exit::Verdict)
}

fn basin(
    sys: &MultiOrderSystem,
    file: &SystemFile,
    m: &RunManifest,
    radii: &[f64],
    text: &mut String,
) -> Result<Exit, CliError> {
    let radii: Vec<f64> = if radii.is_empty() {
        file.basin.as_ref().map(|b| b.radii.clone()).unwrap_or_default()
    } else {
        radii.to_vec()
    };
    if radii.is_empty() {
        return Err(CliError::Usage("no radii given (use --radii or [basin] radii)".into()));
    }
    let cfg = solver_config(file, &m.overrides);
    let window = m
        .overrides
        .window
        .or(file.diagnostics.window)
        .unwrap_or((cfg.t_end / 10.0, cfg.t_end));
    let results = simulate_nonlinear_basin(sys, &cfg, &radii, window)?;
    let mut csv = String::from("radius,decayed,plateau,sup,error\n");
    let _ = writeln!(text, "nu = {} (min alpha), window [{}, {}]", sys.order.min(), window.0, window.1);
    for r in &results {
        match &r.outcome {
            Ok(d) => {
                let _ = writeln!(
                    text,
                    "radius {:e}: decayed = {}, plateau = {}, sup = {:e}",
                    r.radius, r.decayed, d.plateau, d.sup
                );
                let _ = writeln!(csv, "{},{},{},{},", r.radius, r.decayed, d.plateau, d.sup);
            }
            Err(e) => {
                let _ = writeln!(text, "radius {:e}: {e}", r.radius);
                let _ = writeln!(csv, "{},false,false,,{}", r.radius, e.to_string().replace(',', ";"));
            }
        }
    }
    let path = m.output_dir.join("basin.csv");
    save(&path, csv.as_bytes())?;
    let _ = writeln!(text, "table written to {}", path.display());
    Ok(Exit::Verdict)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub verdict: String,
    pub fired: String,
    pub oracle: String,
}

/// Evaluates the criteria and the oracle along a one-parameter family.
/// Errors carry the value at which they occurred.
pub fn sweep_rows(
    sys: &MultiOrderSystem,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<(SweepRow, Option<CriteriaError>)>, CliError> {
    values
        .par_iter()
        .map(|&v| {
            let s = param
                .apply(sys, v)
                .validate()
                .map_err(|e| CliError::Usage(format!("{} = {v}: {e}", param.label())))?;
            Ok(match assess_with_oracle(&s, None) {
                Ok(r) => {
                    let oracle = match r.oracle.as_ref().map(|o| &o.outcome) {
                        Some(OracleOutcome::Count(w)) => w.zero_count.to_string(),
                        Some(OracleOutcome::Error(OracleError::ZeroAtOrigin)) => "origin".into(),
                        Some(OracleOutcome::Error(OracleError::ZeroOnAxis { .. })) => "axis".into(),
                        _ => "inconclusive".into(),
                    };
                    let fired = if r.fired.is_empty() { "none".into() } else { r.fired_label() };
                    (
                        SweepRow {
                            value: v,
                            verdict: r.overall.to_string(),
                            fired,
                            oracle,
                        },
                        None,
                    )
                }
                Err(e) => {
                    let verdict = match e {
                        CriteriaError::InternalContradiction { .. } => "Contradiction",
                        CriteriaError::CriterionOracleMismatch { .. } => "OracleMismatch",
                    };
                    let fired = e.report().fired_label();
                    (
                        SweepRow {
                            value: v,
                            verdict: verdict.into(),
                            fired,
                            oracle: e.report().oracle_zero_count().map_or("?".into(), |z| z.to_string()),
                        },
                        Some(e),
                    )
                }
            })
        })
        .collect()
}

/// Indices `i` where the entry at `i` differs from the one at `i + 1`.
pub fn changes<T: PartialEq>(xs: &[T]) -> Vec<usize> {
    xs.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i)
        .collect()
}

fn sweep(
    sys: &MultiOrderSystem,
    m: &RunManifest,
    param: SweepParam,
    values: &[f64],
    text: &mut String,
) -> Result<Exit, CliError> {
    let rows = sweep_rows(sys, param, values)?;
    let mut csv = String::from("value,overall_verdict,fired_criterion,oracle_Z\n");
    for (r, _) in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.value, r.verdict, r.fired, r.oracle);
    }
    let path = m.output_dir.join("sweep.csv");
    save(&path, csv.as_bytes())?;
    let _ = writeln!(text, "sweep over {} ({} values) -> {}", param.label(), rows.len(), path.display());

    let verdicts: Vec<&str> = rows.iter().map(|(r, _)| r.verdict.as_str()).collect();
    match changes(&verdicts).as_slice() {
        [i] => {
            let (a, b) = (&rows[*i].0, &rows[*i + 1].0);
            let _ = writeln!(
                text,
                "criteria boundary: verdict changes once, {} ({}) at {} = {} -> {} at {} = {}",
                a.verdict,
                a.fired,
                param.label(),
                a.value,
                b.verdict,
                param.label(),
                b.value
            );
        }
        [] => {
            let _ = writeln!(text, "criteria boundary: none (verdict constant)");
        }
        many => {
            let _ = writeln!(text, "criteria boundary: verdict changes {} times, not monotone", many.len());
        }
    }
    let zs: Vec<&str> = rows.iter().map(|(r, _)| r.oracle.as_str()).collect();
    if let [i] = changes(&zs).as_slice() {
        let _ = writeln!(
            text,
            "oracle boundary: Z changes once, {} at {} = {} -> {} at {} = {}",
            rows[*i].0.oracle,
            param.label(),
            rows[*i].0.value,
            rows[*i + 1].0.oracle,
            param.label(),
            rows[*i + 1].0.value
        );
    }
    if let Some((_, Some(e))) = rows.iter().find(|(_, e)| e.is_some()) {
        let p = dump_diagnostic(&m.output_dir, e)?;
        let _ = writeln!(text, "error: {e}");
        let _ = writeln!(text, "diagnostic written to {}", p.display());
        return Ok(Exit::Contradiction);
    }
    Ok(Exit::Verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_param_parsing() {
        assert_eq!(SweepParam::parse("a13").unwrap(), SweepParam::Entry(1, 3));
        assert_eq!(SweepParam::parse("alpha2").unwrap(), SweepParam::Alpha(2));
        for bad in ["a4", "a1", "alpha", "alpha12", "b11", "a123"] {
            assert!(SweepParam::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        assert!(parse_grid("").unwrap().is_empty());
        assert!(parse_grid("0:1:0").unwrap().is_empty());
        assert!(parse_grid("0:x:3").is_err());
    }

    #[test]
    fn diag_parsing() {
        assert_eq!(
            parse_diag("nu=0.3,window=100:1000").unwrap(),
            (Some(0.3), Some((100.0, 1000.0)))
        );
        assert_eq!(parse_diag("nu=0").unwrap(), (Some(0.0), None));
        assert!(parse_diag("mu=1").is_err());
    }

    #[test]
    fn change_points() {
        assert_eq!(changes(&["S", "S", "I", "I"]), vec![1]);
        assert!(changes::<&str>(&[]).is_empty());
    }
}
