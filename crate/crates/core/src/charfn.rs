//! The fractional characteristic function
//!
//! ```text
//! Q(s) = det(diag(s^α1, s^α2, s^α3) − A)
//!      = s^{α1+α2+α3} − a11 s^{α2+α3} − a22 s^{α1+α3} − a33 s^{α1+α2}
//!        + m1 s^{α1} + m2 s^{α2} + m3 s^{α3} − det A
//! ```
//!
//! where `m_k` is the principal 2x2 minor of `A` that omits row/column `k`.
//! [`GeneralCharFn`] holds the merged term list; [`SimpleCharFn`] is the
//! quadrinomial form `s^β4 − a s^β3 − b s^β2 − c s^β1 − d` that the stability
//! criteria work on. All complex powers use the principal branch,
//! `arg s ∈ (−π, π]`.

use crate::model::{MultiOrder, SystemMatrix};
use crate::numeric::{compensated_sum, principal_pow};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use thiserror::Error;

/// Two exponents closer than this are the same power of `s`.
pub const EXPONENT_MERGE_TOL: f64 = 1e-12;

/// |β4 − 2| below this counts as β4 = 2.
pub const BETA4_TWO_TOL: f64 = 1e-12;

/// Coefficient drop tolerance for a general form built from `A`.
pub fn drop_tolerance(matrix: &SystemMatrix) -> f64 {
    let n = matrix.norm();
    1e-12 * (1.0 + n * n)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CharFnError {
    #[error("characteristic function has {middle_terms} middle terms; at most 3 are reducible")]
    NotReducible { middle_terms: usize },
    #[error("rho quantities undefined for beta4 = 2")]
    Beta4EqualsTwo,
    #[error("invalid term list: {0}")]
    InvalidTerms(String),
    #[error("invalid quadrinomial exponents {0:?}: need 0 < b1 <= b2 <= b3 < b4")]
    InvalidExponents([f64; 4]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub exponent: f64,
    pub coeff: f64,
}

impl Term {
    pub fn new(exponent: f64, coeff: f64) -> Self {
        Self { exponent, coeff }
    }
}

/// Sign class of a coefficient relative to a zero tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

pub fn sign_of(x: f64, tol: f64) -> Sign {
    if x.abs() <= tol {
        Sign::Zero
    } else if x > 0.0 {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

/// A finite sum `Σ coeff · s^exponent` with nonnegative exponents.
pub trait CharFunction {
    fn terms(&self) -> Vec<Term>;

    fn eval(&self, s: Complex64) -> Complex64 {
        let parts: Vec<Complex64> = self
            .terms()
            .iter()
            .map(|t| t.coeff * principal_pow(s, t.exponent))
            .collect();
        Complex64::new(
            compensated_sum(parts.iter().map(|z| z.re)),
            compensated_sum(parts.iter().map(|z| z.im)),
        )
    }

    /// Re Q(iω).
    fn h1(&self, omega: f64) -> f64 {
        compensated_sum(
            self.terms()
                .iter()
                .map(|t| t.coeff * omega.powf(t.exponent) * (t.exponent * FRAC_PI_2).cos()),
        )
    }

    /// Im Q(iω).
    fn h2(&self, omega: f64) -> f64 {
        compensated_sum(
            self.terms()
                .iter()
                .filter(|t| t.exponent != 0.0)
                .map(|t| t.coeff * omega.powf(t.exponent) * (t.exponent * FRAC_PI_2).sin()),
        )
    }

    /// Largest single-term magnitude |coeff|·|s|^exponent at radius `r`.
    fn term_scale(&self, r: f64) -> f64 {
        self.terms()
            .iter()
            .map(|t| t.coeff.abs() * r.powf(t.exponent))
            .fold(0.0, f64::max)
    }

    fn coeff_abs_sum(&self) -> f64 {
        self.terms().iter().map(|t| t.coeff.abs()).sum()
    }
}

/// Merged term list of Q, exponents strictly decreasing, leading coefficient 1,
/// constant term (exponent 0) always present.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralCharFn {
    terms: Vec<Term>,
    zero_tol: f64,
}

impl GeneralCharFn {
    pub fn build(order: &MultiOrder, matrix: &SystemMatrix) -> Self {
        let [a1, a2, a3] = order.alpha;
        let raw = [
            Term::new(a1 + a2 + a3, 1.0),
            Term::new(a2 + a3, -matrix.a(1, 1)),
            Term::new(a1 + a3, -matrix.a(2, 2)),
            Term::new(a1 + a2, -matrix.a(3, 3)),
            Term::new(a1, matrix.principal_minor(0)),
            Term::new(a2, matrix.principal_minor(1)),
            Term::new(a3, matrix.principal_minor(2)),
            Term::new(0.0, -matrix.det()),
        ];
        Self::merged(raw.to_vec(), drop_tolerance(matrix))
    }

    /// Builds a general form from an explicit term list. The highest exponent
    /// must be positive with coefficient exactly 1; a zero constant term is
    /// added if none is given.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self, CharFnError> {
        if terms.is_empty() {
            return Err(CharFnError::InvalidTerms("empty".into()));
        }
        if terms
            .iter()
            .any(|t| !t.exponent.is_finite() || !t.coeff.is_finite() || t.exponent < 0.0)
        {
            return Err(CharFnError::InvalidTerms(
                "exponents must be finite and >= 0, coefficients finite".into(),
            ));
        }
        let mut terms = terms;
        terms.sort_by(|x, y| y.exponent.total_cmp(&x.exponent));
        let lead = terms[0];
        let tied = terms
            .iter()
            .skip(1)
            .any(|t| (t.exponent - lead.exponent).abs() <= EXPONENT_MERGE_TOL);
        if lead.exponent <= 0.0 || lead.coeff != 1.0 || tied {
            return Err(CharFnError::InvalidTerms(
                "leading term must be a unique positive power with coefficient 1".into(),
            ));
        }
        if !terms.iter().any(|t| t.exponent == 0.0) {
            terms.push(Term::new(0.0, 0.0));
        }
        let scale = terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max);
        Ok(Self::merged(terms, 1e-12 * (1.0 + scale)))
    }

    fn merged(mut raw: Vec<Term>, zero_tol: f64) -> Self {
        raw.sort_by(|x, y| y.exponent.total_cmp(&x.exponent));
        let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
        for t in raw {
            match groups.last_mut() {
                Some((e, coeffs)) if (*e - t.exponent).abs() <= EXPONENT_MERGE_TOL => {
                    coeffs.push(t.coeff)
                }
                _ => groups.push((t.exponent, vec![t.coeff])),
            }
        }
        let last = groups.len() - 1;
        let terms = groups
            .into_iter()
            .enumerate()
            .filter_map(|(i, (e, coeffs))| {
                let c = compensated_sum(coeffs);
                let keep = i == 0 || i == last || c.abs() > zero_tol;
                // the constant group is exactly exponent 0
                let e = if i == last && e.abs() <= EXPONENT_MERGE_TOL { 0.0 } else { e };
                keep.then_some(Term::new(e, c))
            })
            .collect();
        Self { terms, zero_tol }
    }

    pub fn term_list(&self) -> &[Term] {
        &self.terms
    }

    pub fn leading_exponent(&self) -> f64 {
        self.terms[0].exponent
    }

    /// Q(0) = −det A.
    pub fn constant(&self) -> f64 {
        self.terms[self.terms.len() - 1].coeff
    }

    pub fn det_a(&self) -> f64 {
        -self.constant()
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    /// Terms with exponent strictly between 0 and the leading exponent,
    /// in decreasing exponent order.
    pub fn middle_terms(&self) -> &[Term] {
        &self.terms[1..self.terms.len() - 1]
    }

    /// Reduce to the quadrinomial form. Present middle terms fill the β slots
    /// by ascending exponent; empty slots get a zero coefficient and repeat
    /// the nearest present exponent (β4/2 when there is none).
    pub fn to_simple(&self) -> Result<SimpleCharFn, CharFnError> {
        let middle = self.middle_terms();
        if middle.len() > 3 {
            return Err(CharFnError::NotReducible {
                middle_terms: middle.len(),
            });
        }
        let beta4 = self.leading_exponent();
        let asc: Vec<Term> = middle.iter().rev().copied().collect();
        let mut beta = [0.0; 3];
        let mut coeff = [0.0; 3]; // slot k holds the Q coefficient of s^{β_{k+1}}
        for k in 0..3 {
            match asc.get(k) {
                Some(t) => {
                    beta[k] = t.exponent;
                    coeff[k] = t.coeff;
                }
                None => {
                    beta[k] = asc.last().map_or(beta4 / 2.0, |t| t.exponent);
                }
            }
        }
        Ok(SimpleCharFn {
            beta: [beta[0], beta[1], beta[2], beta4],
            a: 0.0 - coeff[2],
            b: 0.0 - coeff[1],
            c: 0.0 - coeff[0],
            d: 0.0 - self.constant(),
            zero_tol: self.zero_tol,
        })
    }

    /// Human-readable `s^1.2 + 3 s^0.8 + ... + 0.75`.
    pub fn render(&self) -> String {
        render_terms(&self.terms)
    }
}

impl CharFunction for GeneralCharFn {
    fn terms(&self) -> Vec<Term> {
        self.terms.clone()
    }
}

impl fmt::Display for GeneralCharFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub(crate) fn fmt_num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let s = format!("{:.12}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn render_terms(terms: &[Term]) -> String {
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let mag = t.coeff.abs();
        let sign = if t.coeff < 0.0 { "-" } else { "+" };
        if i == 0 {
            if t.coeff < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if t.exponent == 0.0 {
            out.push_str(&fmt_num(mag));
        } else if mag == 1.0 {
            out.push_str(&format!("s^{}", fmt_num(t.exponent)));
        } else {
            out.push_str(&format!("{} s^{}", fmt_num(mag), fmt_num(t.exponent)));
        }
    }
    out
}

/// `Q(s) = s^β4 − a s^β3 − b s^β2 − c s^β1 − d` with `0 < β1 <= β2 <= β3 < β4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimpleCharFn {
    pub beta: [f64; 4],
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    zero_tol: f64,
}

impl SimpleCharFn {
    pub fn new(beta: [f64; 4], a: f64, b: f64, c: f64, d: f64) -> Result<Self, CharFnError> {
        let ok = beta.iter().all(|b| b.is_finite())
            && 0.0 < beta[0]
            && beta[0] <= beta[1]
            && beta[1] <= beta[2]
            && beta[2] < beta[3];
        if !ok {
            return Err(CharFnError::InvalidExponents(beta));
        }
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(CharFnError::InvalidTerms("non-finite coefficient".into()));
        }
        let scale = [a, b, c, d].iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(Self {
            beta,
            a,
            b,
            c,
            d,
            zero_tol: 1e-12 * (1.0 + scale),
        })
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    pub fn sign(&self, x: f64) -> Sign {
        sign_of(x, self.zero_tol)
    }

    /// `(a, b, c)` paired with their exponents `(β3, β2, β1)`.
    pub fn slots(&self) -> [(f64, f64); 3] {
        [
            (self.a, self.beta[2]),
            (self.b, self.beta[1]),
            (self.c, self.beta[0]),
        ]
    }

    /// Back to a general term list; zero-coefficient slots are omitted.
    pub fn to_general(&self) -> GeneralCharFn {
        let mut terms = vec![Term::new(self.beta[3], 1.0)];
        for (coeff, exponent) in self.slots() {
            if self.sign(coeff) != Sign::Zero {
                terms.push(Term::new(exponent, -coeff));
            }
        }
        terms.push(Term::new(0.0, -self.d));
        GeneralCharFn {
            terms,
            zero_tol: self.zero_tol,
        }
        .sorted()
    }

    pub fn rho_set(&self) -> Result<RhoSet, CharFnError> {
        RhoSet::new(self.beta)
    }

    pub fn render(&self) -> String {
        format!(
            "s^{} - ({}) s^{} - ({}) s^{} - ({}) s^{} - ({})",
            fmt_num(self.beta[3]),
            fmt_num(self.a),
            fmt_num(self.beta[2]),
            fmt_num(self.b),
            fmt_num(self.beta[1]),
            fmt_num(self.c),
            fmt_num(self.beta[0]),
            fmt_num(self.d)
        )
    }
}

impl GeneralCharFn {
    fn sorted(mut self) -> Self {
        self.terms.sort_by(|x, y| y.exponent.total_cmp(&x.exponent));
        self
    }
}

impl CharFunction for SimpleCharFn {
    fn terms(&self) -> Vec<Term> {
        vec![
            Term::new(self.beta[3], 1.0),
            Term::new(self.beta[2], -self.a),
            Term::new(self.beta[1], -self.b),
            Term::new(self.beta[0], -self.c),
            Term::new(0.0, -self.d),
        ]
    }

    fn h1(&self, omega: f64) -> f64 {
        let [b1, b2, b3, b4] = self.beta;
        let cosw = |e: f64| omega.powf(e) * (e * FRAC_PI_2).cos();
        compensated_sum([
            cosw(b4),
            -self.a * cosw(b3),
            -self.b * cosw(b2),
            -self.c * cosw(b1),
            -self.d,
        ])
    }

    fn h2(&self, omega: f64) -> f64 {
        let [b1, b2, b3, b4] = self.beta;
        let sinw = |e: f64| omega.powf(e) * (e * FRAC_PI_2).sin();
        compensated_sum([
            sinw(b4),
            -self.a * sinw(b3),
            -self.b * sinw(b2),
            -self.c * sinw(b1),
        ])
    }
}

/// ρ_i = sin((β4−β_i)π/2) / sin(β4π/2),  ρ̃_i = sin(β_iπ/2) / sin(β4π/2).
/// Index 0 holds i = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoSet {
    pub rho: [f64; 3],
    pub rho_tilde: [f64; 3],
}

impl RhoSet {
    pub fn new(beta: [f64; 4]) -> Result<Self, CharFnError> {
        let b4 = beta[3];
        if (b4 - 2.0).abs() <= BETA4_TWO_TOL {
            return Err(CharFnError::Beta4EqualsTwo);
        }
        let s4 = (b4 * FRAC_PI_2).sin();
        let mut rho = [0.0; 3];
        let mut rho_tilde = [0.0; 3];
        for i in 0..3 {
            rho[i] = ((b4 - beta[i]) * FRAC_PI_2).sin() / s4;
            rho_tilde[i] = (beta[i] * FRAC_PI_2).sin() / s4;
        }
        Ok(Self { rho, rho_tilde })
    }
}
