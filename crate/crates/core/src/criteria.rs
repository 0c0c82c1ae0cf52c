//! Algebraic stability and instability criteria and their aggregation.
//!
//! Each check reports whether its structural preconditions hold
//! (`applicable`) and, if so, what it concludes. For the threshold lemmas the
//! d-inequality is part of the conclusion: an applicable check whose
//! inequality fails yields [`Verdict::NoConclusion`].

use crate::charfn::{
    CharFnError, GeneralCharFn, RhoSet, Sign, SimpleCharFn, BETA4_TWO_TOL,
    EXPONENT_MERGE_TOL,
};
use crate::model::MultiOrderSystem;
use crate::oracle::{
    count_rhp_zeros, default_omega_max, scan_imaginary_axis, AxisRoot, ContourSpec, OracleError,
    WindingResult,
};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CriterionId {
    Thm2a,
    Thm2b,
    Thm4,
    Lem7,
    Lem8,
    Lem9a,
    Lem9b,
    Lem10i,
    Lem10ii,
    Lem10iii,
}

impl CriterionId {
    pub const ALL: [CriterionId; 10] = [
        CriterionId::Thm2a,
        CriterionId::Thm2b,
        CriterionId::Thm4,
        CriterionId::Lem7,
        CriterionId::Lem8,
        CriterionId::Lem9a,
        CriterionId::Lem9b,
        CriterionId::Lem10i,
        CriterionId::Lem10ii,
        CriterionId::Lem10iii,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CriterionId::Thm2a => "Thm2a",
            CriterionId::Thm2b => "Thm2b",
            CriterionId::Thm4 => "Thm4",
            CriterionId::Lem7 => "Lem7",
            CriterionId::Lem8 => "Lem8",
            CriterionId::Lem9a => "Lem9a",
            CriterionId::Lem9b => "Lem9b",
            CriterionId::Lem10i => "Lem10i",
            CriterionId::Lem10ii => "Lem10ii",
            CriterionId::Lem10iii => "Lem10iii",
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Unstable,
    /// det A = 0: a zero at the origin.
    NotAsymptoticallyStable,
    NoConclusion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Overall {
    Stable,
    Unstable,
    NotAsymptoticallyStable,
    Inconclusive,
}

impl fmt::Display for Overall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Overall::Stable => "Stable",
            Overall::Unstable => "Unstable",
            Overall::NotAsymptoticallyStable => "NotAsymptoticallyStable",
            Overall::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: CriterionId,
    pub applicable: bool,
    pub verdict: Verdict,
    /// Named values that entered the decision, e.g. `("threshold", -0.048)`.
    pub witness: Vec<(String, f64)>,
    /// Short reason when not applicable.
    pub note: Option<String>,
}

impl CriterionResult {
    fn not_applicable(id: CriterionId, note: impl Into<String>) -> Self {
        Self {
            id,
            applicable: false,
            verdict: Verdict::NoConclusion,
            witness: Vec::new(),
            note: Some(note.into()),
        }
    }

    fn applicable(id: CriterionId, verdict: Verdict, witness: Vec<(&str, f64)>) -> Self {
        Self {
            id,
            applicable: true,
            verdict,
            witness: witness.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            note: None,
        }
    }

    pub fn witness(&self, key: &str) -> Option<f64> {
        self.witness.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn fired(&self) -> bool {
        self.applicable && self.verdict != Verdict::NoConclusion
    }
}

fn le(x: f64, y: f64) -> bool {
    x <= y + EXPONENT_MERGE_TOL
}

fn lt(x: f64, y: f64) -> bool {
    x < y - EXPONENT_MERGE_TOL
}

/// Theorem-2 checks on the merged general form. Returns `[Thm2a, Thm2b]`.
pub fn check_thm2(q: &GeneralCharFn) -> [CriterionResult; 2] {
    let det = q.det_a();
    let beta4 = q.leading_exponent();
    let det_sign = crate::charfn::sign_of(det, q.zero_tol());

    let a = match det_sign {
        Sign::Positive => {
            CriterionResult::applicable(CriterionId::Thm2a, Verdict::Unstable, vec![("det_a", det)])
        }
        Sign::Zero => CriterionResult::applicable(
            CriterionId::Thm2a,
            Verdict::NotAsymptoticallyStable,
            vec![("det_a", det)],
        ),
        Sign::Negative => CriterionResult::not_applicable(CriterionId::Thm2a, "det A < 0"),
    };

    let id = CriterionId::Thm2b;
    let b = if det_sign != Sign::Negative {
        CriterionResult::not_applicable(id, "needs det A < 0")
    } else if beta4 < 2.0 - BETA4_TWO_TOL {
        CriterionResult::not_applicable(id, "needs beta4 >= 2")
    } else {
        let middle = q.middle_terms();
        let cs: Vec<f64> = middle.iter().map(|t| -t.coeff).collect();
        let min = cs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = cs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if cs.len() < 2 {
            CriterionResult::not_applicable(id, "fewer than two middle terms, so max c > min c fails")
        } else if min < 0.0 {
            CriterionResult::not_applicable(id, "a middle coefficient c_k is negative")
        } else if max <= min {
            CriterionResult::not_applicable(id, "all c_k equal")
        } else if !middle.iter().all(|t| t.exponent > 0.0 && t.exponent < 2.0) {
            CriterionResult::not_applicable(id, "a middle exponent lies outside (0, 2)")
        } else {
            CriterionResult::applicable(
                id,
                Verdict::Unstable,
                vec![("det_a", det), ("beta4", beta4), ("c_min", min), ("c_max", max)],
            )
        }
    };
    [a, b]
}

pub fn check_thm4(q: &SimpleCharFn) -> CriterionResult {
    let id = CriterionId::Thm4;
    let [b1, b2, b3, b4] = q.beta;
    if q.sign(q.d) != Sign::Negative {
        return CriterionResult::not_applicable(id, "needs d < 0");
    }
    if [q.a, q.b, q.c].iter().any(|&x| q.sign(x) == Sign::Positive) {
        return CriterionResult::not_applicable(id, "needs a, b, c <= 0");
    }
    if !(le(b1, 1.0) && le(b2, 1.0) && le(b3, 1.0)) {
        return CriterionResult::not_applicable(id, "needs beta1, beta2, beta3 <= 1");
    }
    if !lt(b4 - b3, 1.0) {
        return CriterionResult::not_applicable(id, "needs beta4 - beta3 < 1");
    }
    let g1 = (b1 + b3 - b4).abs();
    let g2 = (b2 + b3 - b4).abs();
    if !(le(g1, 1.0) && le(g2, 1.0)) {
        return CriterionResult::not_applicable(id, "needs |beta_i + beta3 - beta4| <= 1");
    }
    CriterionResult::applicable(
        id,
        Verdict::Stable,
        vec![("d", q.d), ("beta4_minus_beta3", b4 - b3), ("gap13", g1), ("gap23", g2)],
    )
}

/// Exponents of the slots with a nonzero coefficient, in ascending order.
/// Absent slots carry placeholder exponents and do not take part in the
/// strict ordering conditions.
fn present_exponents(q: &SimpleCharFn) -> Vec<f64> {
    let mut e: Vec<f64> = q
        .slots()
        .iter()
        .filter(|(c, _)| q.sign(*c) != Sign::Zero)
        .map(|(_, e)| *e)
        .collect();
    e.reverse();
    e
}

fn strictly_increasing(e: &[f64]) -> bool {
    e.windows(2).all(|w| lt(w[0], w[1]))
}

pub fn check_lem7(q: &SimpleCharFn) -> CriterionResult {
    let id = CriterionId::Lem7;
    let b4 = q.beta[3];
    let mut chain = present_exponents(q);
    chain.push(b4);
    if !(q.beta[0] > 0.0 && strictly_increasing(&chain) && lt(b4, 2.0)) {
        return CriterionResult::not_applicable(id, "needs 0 < beta1 < beta2 < beta3 < beta4 < 2");
    }
    if [q.a, q.b, q.c].iter().any(|&x| q.sign(x) == Sign::Positive) {
        return CriterionResult::not_applicable(id, "needs a, b, c <= 0");
    }
    if q.sign(q.d) != Sign::Negative {
        return CriterionResult::not_applicable(id, "needs d < 0");
    }
    CriterionResult::applicable(id, Verdict::Stable, vec![("d", q.d), ("beta4", b4)])
}

/// The β4 < 2 gate shared by the threshold lemmas. Errors exactly at β4 = 2
/// where the ρ quantities are undefined.
fn rho_below_two(q: &SimpleCharFn) -> Result<Option<RhoSet>, CharFnError> {
    let b4 = q.beta[3];
    if (b4 - 2.0).abs() <= BETA4_TWO_TOL {
        return Err(CharFnError::Beta4EqualsTwo);
    }
    if b4 > 2.0 {
        return Ok(None);
    }
    q.rho_set().map(Some)
}

/// Single-term threshold `−k ρ (k ρ̃)^{β/(β4−β)}`.
fn single_threshold(k: f64, rho: f64, rho_tilde: f64, beta: f64, beta4: f64) -> f64 {
    -k * rho * (k * rho_tilde).powf(beta / (beta4 - beta))
}

/// Returns `[Lem8, Lem9a, Lem9b]`.
pub fn check_lem8_9(q: &SimpleCharFn) -> Result<[CriterionResult; 3], CharFnError> {
    let ids = [CriterionId::Lem8, CriterionId::Lem9a, CriterionId::Lem9b];
    let Some(rho) = rho_below_two(q)? else {
        return Ok(ids.map(|id| CriterionResult::not_applicable(id, "needs beta4 < 2")));
    };
    let b4 = q.beta[3];
    let signs = [q.sign(q.a), q.sign(q.b), q.sign(q.c)];
    // (id, index of the positive slot in (a, b, c), slot coefficient, rho index)
    let spec = [
        (CriterionId::Lem8, 2usize, q.c, 0usize),
        (CriterionId::Lem9a, 0, q.a, 2),
        (CriterionId::Lem9b, 1, q.b, 1),
    ];
    Ok(spec.map(|(id, pos, k, ri)| {
        let others_zero = (0..3).filter(|&i| i != pos).all(|i| signs[i] == Sign::Zero);
        if !others_zero || signs[pos] != Sign::Positive {
            let names = ["a", "b", "c"];
            let others: Vec<&str> = (0..3).filter(|&i| i != pos).map(|i| names[i]).collect();
            return CriterionResult::not_applicable(
                id,
                format!("needs {} = {} = 0 and {} > 0", others[0], others[1], names[pos]),
            );
        }
        let beta = q.beta[ri];
        let threshold = single_threshold(k, rho.rho[ri], rho.rho_tilde[ri], beta, b4);
        let verdict = if q.d < threshold {
            Verdict::Stable
        } else {
            Verdict::NoConclusion
        };
        CriterionResult::applicable(id, verdict, vec![("threshold", threshold), ("d", q.d)])
    }))
}

/// Returns `[Lem10i, Lem10ii, Lem10iii]`.
pub fn check_lem10(q: &SimpleCharFn) -> Result<[CriterionResult; 3], CharFnError> {
    let ids = [CriterionId::Lem10i, CriterionId::Lem10ii, CriterionId::Lem10iii];
    let Some(rho) = rho_below_two(q)? else {
        return Ok(ids.map(|id| CriterionResult::not_applicable(id, "needs beta4 < 2")));
    };
    if !strictly_increasing(&present_exponents(q)) {
        return Ok(ids.map(|id| CriterionResult::not_applicable(id, "needs beta1 < beta2 < beta3")));
    }
    let b4 = q.beta[3];
    let signs = [q.sign(q.a), q.sign(q.b), q.sign(q.c)];
    // Slot index i in (a, b, c) maps to β index 2 − i.
    let coeff = [q.a, q.b, q.c];
    let spec = [
        (CriterionId::Lem10i, 0usize, [1usize, 2usize]),
        (CriterionId::Lem10ii, 1, [0, 2]),
        (CriterionId::Lem10iii, 2, [0, 1]),
    ];
    Ok(spec.map(|(id, zero, [hi, lo])| {
        let names = ["a", "b", "c"];
        if signs[zero] != Sign::Zero || signs[hi] != Sign::Positive || signs[lo] != Sign::Positive {
            return CriterionResult::not_applicable(
                id,
                format!("needs {} = 0 and {}, {} > 0", names[zero], names[hi], names[lo]),
            );
        }
        let (bi_hi, bi_lo) = (2 - hi, 2 - lo);
        let (k_hi, k_lo) = (coeff[hi], coeff[lo]);
        let k = k_hi * rho.rho_tilde[bi_hi] + k_lo * rho.rho_tilde[bi_lo];
        if k <= 1.0 {
            let mut r = CriterionResult::not_applicable(id, "needs 1 < K");
            r.witness.push(("K".into(), k));
            return r;
        }
        let denom = b4 - q.beta[bi_hi];
        let threshold = -k_hi * k.powf(q.beta[bi_hi] / denom) * rho.rho[bi_hi]
            - k_lo * k.powf(q.beta[bi_lo] / denom) * rho.rho[bi_lo];
        let verdict = if q.d <= threshold {
            Verdict::Stable
        } else {
            Verdict::NoConclusion
        };
        CriterionResult::applicable(id, verdict, vec![("K", k), ("threshold", threshold), ("d", q.d)])
    }))
}

/// Runs every check that applies to the given forms. The simple-form checks
/// are skipped (reported not applicable) when `simple` is `None`.
pub fn evaluate(general: &GeneralCharFn, simple: Option<&SimpleCharFn>) -> Vec<CriterionResult> {
    let mut out: Vec<CriterionResult> = check_thm2(general).into();
    let Some(q) = simple else {
        for id in &CriterionId::ALL[2..] {
            out.push(CriterionResult::not_applicable(*id, "not reducible to the quadrinomial form"));
        }
        return out;
    };
    out.push(check_thm4(q));
    out.push(check_lem7(q));
    let undefined = |ids: [CriterionId; 3]| {
        ids.map(|id| CriterionResult::not_applicable(id, "rho undefined at beta4 = 2"))
    };
    out.extend(check_lem8_9(q).unwrap_or_else(|_| {
        undefined([CriterionId::Lem8, CriterionId::Lem9a, CriterionId::Lem9b])
    }));
    out.extend(check_lem10(q).unwrap_or_else(|_| {
        undefined([CriterionId::Lem10i, CriterionId::Lem10ii, CriterionId::Lem10iii])
    }));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OracleOutcome {
    Count(WindingResult),
    Error(OracleError),
}

impl OracleOutcome {
    pub fn zero_count(&self) -> Option<u32> {
        match self {
            OracleOutcome::Count(w) => Some(w.zero_count),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub outcome: OracleOutcome,
    /// h2 roots on the positive imaginary axis with h1 there.
    pub axis_roots: Vec<AxisRoot>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub general: GeneralCharFn,
    pub simple: Option<SimpleCharFn>,
    pub results: Vec<CriterionResult>,
    pub overall: Overall,
    pub fired: Vec<CriterionId>,
    pub oracle: Option<OracleCheck>,
}

impl StabilityReport {
    pub fn oracle_zero_count(&self) -> Option<u32> {
        self.oracle.as_ref().and_then(|o| o.outcome.zero_count())
    }

    pub fn result(&self, id: CriterionId) -> &CriterionResult {
        self.results
            .iter()
            .find(|r| r.id == id)
            .expect("every criterion is evaluated")
    }

    /// Fired criteria joined with `+`, or empty.
    pub fn fired_label(&self) -> String {
        self.fired
            .iter()
            .map(|c| c.name())
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Q(s) = {}", self.general)?;
        match &self.simple {
            Some(q) => writeln!(
                f,
                "simple form: beta = ({}, {}, {}, {}), a = {}, b = {}, c = {}, d = {}",
                q.beta[0], q.beta[1], q.beta[2], q.beta[3], q.a, q.b, q.c, q.d
            )?,
            None => writeln!(f, "simple form: not reducible")?,
        }
        for r in &self.results {
            let status = if !r.applicable {
                "not applicable".to_string()
            } else {
                format!("applicable -> {:?}", r.verdict)
            };
            write!(f, "  {:<9} {}", r.id.name(), status)?;
            for (k, v) in &r.witness {
                write!(f, "  {k} = {v:.10e}")?;
            }
            if let Some(n) = &r.note {
                write!(f, "  ({n})")?;
            }
            writeln!(f)?;
        }
        if self.fired.is_empty() {
            writeln!(f, "overall: {} (no criterion fired)", self.overall)?;
        } else {
            writeln!(f, "overall: {} by {}", self.overall, self.fired_label())?;
        }
        if let Some(o) = &self.oracle {
            match &o.outcome {
                OracleOutcome::Count(w) => writeln!(
                    f,
                    "oracle: Z = {} right-half-plane zeros (winding, residual {:.2e}, eps = {:.3e}, R = {:.3e})",
                    w.zero_count,
                    w.residual(),
                    w.contour.epsilon,
                    w.contour.radius
                )?,
                OracleOutcome::Error(e) => writeln!(f, "oracle: {e}")?,
            }
            for r in &o.axis_roots {
                writeln!(
                    f,
                    "  axis: h2 root omega = {:.12e}, h1 = {:.6e} ({})",
                    r.omega,
                    r.h1,
                    if r.is_stable_side() { "h1 > 0" } else { "h1 <= 0" }
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("internal contradiction: {fired_stable:?} yield Stable while {fired_unstable:?} do not")]
    InternalContradiction {
        fired_stable: Vec<CriterionId>,
        fired_unstable: Vec<CriterionId>,
        report: Box<StabilityReport>,
    },
    #[error("criterion/oracle mismatch: {detail}")]
    CriterionOracleMismatch {
        detail: String,
        report: Box<StabilityReport>,
    },
}

impl CriteriaError {
    pub fn report(&self) -> &StabilityReport {
        match self {
            CriteriaError::InternalContradiction { report, .. } => report,
            CriteriaError::CriterionOracleMismatch { report, .. } => report,
        }
    }
}

/// Aggregates criterion results for already-built forms, without the oracle.
pub fn assess_forms(
    general: GeneralCharFn,
    simple: Option<SimpleCharFn>,
) -> Result<StabilityReport, CriteriaError> {
    let results = evaluate(&general, simple.as_ref());
    let by = |v: Verdict| -> Vec<CriterionId> {
        results
            .iter()
            .filter(|r| r.applicable && r.verdict == v)
            .map(|r| r.id)
            .collect()
    };
    let stable = by(Verdict::Stable);
    let unstable = by(Verdict::Unstable);
    let nas = by(Verdict::NotAsymptoticallyStable);

    let mut report = StabilityReport {
        general,
        simple,
        results,
        overall: Overall::Inconclusive,
        fired: Vec::new(),
        oracle: None,
    };
    let not_stable: Vec<CriterionId> = unstable.iter().chain(&nas).copied().collect();
    if !stable.is_empty() && !not_stable.is_empty() {
        return Err(CriteriaError::InternalContradiction {
            fired_stable: stable,
            fired_unstable: not_stable,
            report: Box::new(report),
        });
    }
    (report.overall, report.fired) = if !unstable.is_empty() {
        (Overall::Unstable, unstable)
    } else if !nas.is_empty() {
        (Overall::NotAsymptoticallyStable, nas)
    } else if !stable.is_empty() {
        (Overall::Stable, stable)
    } else {
        (Overall::Inconclusive, Vec::new())
    };
    Ok(report)
}

/// Builds Q for the homogeneous linear part of `sys` and aggregates.
pub fn assess(sys: &MultiOrderSystem) -> Result<StabilityReport, CriteriaError> {
    let general = GeneralCharFn::build(&sys.order, &sys.matrix);
    let simple = general.to_simple().ok();
    assess_forms(general, simple)
}

/// Cross-checks an aggregated report against the winding oracle and the axis
/// scan. Disagreement between a fired criterion and the oracle is an error.
pub fn attach_oracle(
    mut report: StabilityReport,
    spec: Option<ContourSpec>,
) -> Result<StabilityReport, CriteriaError> {
    let q = &report.general;
    let axis_roots = if q.constant().abs() > q.zero_tol() {
        scan_imaginary_axis(q, default_omega_max(q))
    } else {
        Vec::new()
    };
    let outcome = match count_rhp_zeros(q, spec) {
        Ok(w) => OracleOutcome::Count(w),
        Err(e) => OracleOutcome::Error(e),
    };

    let mismatch = match (report.overall, &outcome) {
        (Overall::Stable, OracleOutcome::Count(w)) if w.zero_count != 0 => Some(format!(
            "{} claims Stable but the oracle counts {} right-half-plane zeros",
            report.fired_label(),
            w.zero_count
        )),
        (Overall::Stable, OracleOutcome::Error(e @ OracleError::ZeroOnAxis { .. })) => Some(format!(
            "{} claims Stable but {e}",
            report.fired_label()
        )),
        (Overall::Stable, OracleOutcome::Error(OracleError::ZeroAtOrigin)) => Some(format!(
            "{} claims Stable but Q(0) = 0",
            report.fired_label()
        )),
        (Overall::Unstable, OracleOutcome::Count(w)) if w.zero_count == 0 => Some(format!(
            "{} claims Unstable but the oracle counts no right-half-plane zero",
            report.fired_label()
        )),
        (Overall::Unstable, OracleOutcome::Count(w))
            if report.fired.contains(&CriterionId::Thm2b) && w.zero_count != 2 =>
        {
            Some(format!(
                "Thm2b instances have exactly two right-half-plane zeros, oracle counts {}",
                w.zero_count
            ))
        }
        _ => None,
    };
    report.oracle = Some(OracleCheck {
        outcome,
        axis_roots,
    });
    match mismatch {
        Some(detail) => Err(CriteriaError::CriterionOracleMismatch {
            detail,
            report: Box::new(report),
        }),
        None => Ok(report),
    }
}

pub fn assess_with_oracle(
    sys: &MultiOrderSystem,
    spec: Option<ContourSpec>,
) -> Result<StabilityReport, CriteriaError> {
    attach_oracle(assess(sys)?, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::Term;

    fn example3() -> MultiOrderSystem {
        MultiOrderSystem::linear(
            [0.4, 0.3, 0.5],
            [[-3.0, 0.0, 1.5], [-0.5, 0.0, 0.5], [6.0, -1.0, -3.0]],
            [1.0, 1.0, 1.0],
        )
    }

    fn ex13_q(d: f64) -> SimpleCharFn {
        SimpleCharFn::new([0.5, 0.5, 0.5, 1.2], 0.0, 0.0, 0.2, d).unwrap()
    }

    fn gq(terms: &[(f64, f64)]) -> GeneralCharFn {
        GeneralCharFn::from_terms(terms.iter().map(|&(e, c)| Term::new(e, c)).collect()).unwrap()
    }

    #[test]
    fn example3_fires_thm4_and_lem7() {
        let r = assess_with_oracle(&example3(), None).unwrap();
        assert_eq!(r.overall, Overall::Stable);
        assert_eq!(r.fired, vec![CriterionId::Thm4, CriterionId::Lem7]);
        assert_eq!(r.oracle_zero_count(), Some(0));
    }

    #[test]
    fn lem8_threshold_example13() {
        let [l8, l9a, l9b] = check_lem8_9(&ex13_q(-0.1)).unwrap();
        assert_eq!(l8.verdict, Verdict::Stable);
        let t = l8.witness("threshold").unwrap();
        assert!((t - -0.048_028_216_864_946_64).abs() < 1e-14);
        assert!(!l9a.applicable && !l9b.applicable);

        let [l8, ..] = check_lem8_9(&ex13_q(-0.04)).unwrap();
        assert!(l8.applicable);
        assert_eq!(l8.verdict, Verdict::NoConclusion);
    }

    #[test]
    fn lem9a_example() {
        let q = SimpleCharFn::new([0.9, 0.9, 0.9, 1.3], 0.5, 0.0, 0.0, -10.0).unwrap();
        let [_, l9a, _] = check_lem8_9(&q).unwrap();
        assert_eq!(l9a.verdict, Verdict::Stable);
        assert!((l9a.witness("threshold").unwrap() - -0.087_428_527_125_490_96).abs() < 1e-13);
    }

    #[test]
    fn lem10i_example() {
        let q = SimpleCharFn::new([0.3, 0.5, 0.5, 1.1], 0.0, 2.0, 2.0, -7.0).unwrap();
        let [l10, ii, iii] = check_lem10(&q).unwrap();
        assert_eq!(l10.verdict, Verdict::Stable);
        assert!((l10.witness("K").unwrap() - 2.351_141_009_169_892_5).abs() < 1e-13);
        assert!((l10.witness("threshold").unwrap() - -6.293_102_465_734_947).abs() < 1e-11);
        assert!(!ii.applicable && !iii.applicable);
    }

    #[test]
    fn lem10_gate_and_all_positive() {
        let q = SimpleCharFn::new([0.3, 0.5, 0.5, 1.1], 0.0, 0.3, 0.3, -7.0).unwrap();
        let [l10, ..] = check_lem10(&q).unwrap();
        assert!(!l10.applicable);
        assert!(l10.witness("K").unwrap() < 1.0);

        let q = SimpleCharFn::new([0.3, 0.5, 0.7, 1.1], 1.0, 1.0, 1.0, -7.0).unwrap();
        assert!(check_lem10(&q).unwrap().iter().all(|r| !r.applicable));
    }

    #[test]
    fn thm4_gates() {
        let base = SimpleCharFn::new([0.4, 0.7, 0.8, 1.2], -3.0, -3.0, -0.5, -0.75).unwrap();
        assert_eq!(check_thm4(&base).verdict, Verdict::Stable);
        let mut pos = base;
        pos.a = 0.1;
        assert!(!check_thm4(&pos).applicable);
        let gap = SimpleCharFn::new([0.2, 0.3, 0.4, 1.9], -1.0, -1.0, -1.0, -1.0).unwrap();
        assert!(!check_thm4(&gap).applicable);
    }

    #[test]
    fn lem7_gates() {
        let tie = SimpleCharFn::new([0.4, 0.7, 0.7, 1.2], -3.0, -3.0, -0.5, -0.75).unwrap();
        assert!(!check_lem7(&tie).applicable);
        let d0 = SimpleCharFn::new([0.4, 0.7, 0.8, 1.2], -3.0, -3.0, -0.5, 0.0).unwrap();
        assert!(!check_lem7(&d0).applicable);
    }

    #[test]
    fn thm2_cases() {
        let [a, b] = check_thm2(&gq(&[(1.2, 1.0), (0.0, -1.0)]));
        assert_eq!(a.verdict, Verdict::Unstable);
        assert!(!b.applicable);

        let q = gq(&[(2.1, 1.0), (0.9, -0.5), (0.5, -0.1), (0.0, 0.2)]);
        let [a, b] = check_thm2(&q);
        assert!(!a.applicable);
        assert_eq!(b.verdict, Verdict::Unstable);
        let r = attach_oracle(assess_forms(q, None).unwrap(), None).unwrap();
        assert_eq!(r.oracle_zero_count(), Some(2));

        let [_, b] = check_thm2(&gq(&[(1.2, 1.0), (0.0, 1.0)]));
        assert!(!b.applicable);
    }

    #[test]
    fn zero_matrix_not_asymptotically_stable() {
        let sys = MultiOrderSystem::linear([0.5, 0.6, 0.7], [[0.0; 3]; 3], [1.0; 3]);
        let r = assess_with_oracle(&sys, None).unwrap();
        assert_eq!(r.overall, Overall::NotAsymptoticallyStable);
        assert_eq!(r.fired, vec![CriterionId::Thm2a]);
        assert!(matches!(
            r.oracle.unwrap().outcome,
            OracleOutcome::Error(OracleError::ZeroAtOrigin)
        ));
    }

    #[test]
    fn oracle_mismatch_is_reported() {
        // A report forged to claim stability for s^1.2 − 1.
        let q = gq(&[(1.2, 1.0), (0.0, -1.0)]);
        let forged = StabilityReport {
            general: q,
            simple: None,
            results: Vec::new(),
            overall: Overall::Stable,
            fired: vec![CriterionId::Lem7],
            oracle: None,
        };
        assert!(matches!(
            attach_oracle(forged, None),
            Err(CriteriaError::CriterionOracleMismatch { .. })
        ));
    }

    #[test]
    fn lem8_scale_covariance() {
        let (b1, b4) = (0.5, 1.2);
        for &lambda in &[0.3, 2.0, 7.5] {
            for &d in &[-0.1, -0.05, -0.047, -0.02] {
                let q = ex13_q(d);
                let scaled = SimpleCharFn::new(
                    q.beta,
                    0.0,
                    0.0,
                    f64::powf(lambda, b4 - b1) * q.c,
                    f64::powf(lambda, b4) * d,
                )
                .unwrap();
                let [x, ..] = check_lem8_9(&q).unwrap();
                let [y, ..] = check_lem8_9(&scaled).unwrap();
                assert_eq!(x.verdict, y.verdict, "lambda {lambda} d {d}");
            }
        }
    }

    #[test]
    fn non_reducible_runs_thm2_only() {
        let sys = MultiOrderSystem::linear(
            [0.3, 0.5, 0.9],
            [[-1.0, 0.2, 0.3], [0.4, -2.0, 0.1], [0.2, 0.3, -1.5]],
            [1.0; 3],
        );
        let r = assess(&sys).unwrap();
        assert!(r.simple.is_none());
        assert_eq!(r.overall, Overall::Inconclusive);
        assert!(r.results[2..].iter().all(|x| !x.applicable));
    }
}
