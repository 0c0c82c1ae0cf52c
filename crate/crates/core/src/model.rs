//! Problem-instance types for three-dimensional multi-order Caputo systems
//!
//! ```text
//! D^{α_k} x_k(t) = Σ_j a_kj x_j(t) + f_k(t) + n_k(x(t)),   x(0) = x0
//! ```
//!
//! Everything here is a plain value type. Construction is unchecked; call
//! [`MultiOrderSystem::validate`] (or the per-type `validate`) before handing an
//! instance to the analysis or simulation layers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("order alpha_{index} = {value} is outside (0, 1]")]
    OrderOutOfRange { index: usize, value: f64 },
    #[error("non-finite value in {what}")]
    NonFiniteEntry { what: String },
    #[error("forcing table for component {component}: {reason}")]
    BadForcingTable { component: usize, reason: String },
    #[error("nonlinearity term in component {component} has total degree {degree} (< 2)")]
    BadNonlinearity { component: usize, degree: u32 },
}

/// The three derivative orders, in equation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiOrder {
    pub alpha: [f64; 3],
}

impl MultiOrder {
    pub fn new(alpha: [f64; 3]) -> Self {
        Self { alpha }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, &a) in self.alpha.iter().enumerate() {
            if !a.is_finite() {
                return Err(ModelError::NonFiniteEntry {
                    what: format!("alpha_{}", i + 1),
                });
            }
            if !(a > 0.0 && a <= 1.0) {
                return Err(ModelError::OrderOutOfRange {
                    index: i + 1,
                    value: a,
                });
            }
        }
        Ok(())
    }

    /// Indices `[j1, j2, j3]` (0-based) with `alpha[j1] <= alpha[j2] <= alpha[j3]`.
    /// Ties keep equation order.
    pub fn sorting_permutation(&self) -> [usize; 3] {
        let mut idx = [0usize, 1, 2];
        // sort_by is stable
        idx.sort_by(|&i, &j| self.alpha[i].total_cmp(&self.alpha[j]));
        idx
    }

    pub fn sorted(&self) -> [f64; 3] {
        let p = self.sorting_permutation();
        [self.alpha[p[0]], self.alpha[p[1]], self.alpha[p[2]]]
    }

    pub fn sum(&self) -> f64 {
        self.alpha[0] + self.alpha[1] + self.alpha[2]
    }

    pub fn min(&self) -> f64 {
        self.alpha.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Constant coefficient matrix, `entries[i][j]` = a_{i+1, j+1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemMatrix {
    pub entries: [[f64; 3]; 3],
}

impl SystemMatrix {
    pub fn new(entries: [[f64; 3]; 3]) -> Self {
        Self { entries }
    }

    pub fn zero() -> Self {
        Self::new([[0.0; 3]; 3])
    }

    /// 1-based accessor matching the usual a_ij notation.
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.entries[i - 1][j - 1]
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ModelError::NonFiniteEntry {
                        what: format!("a_{}{}", i + 1, j + 1),
                    });
                }
            }
        }
        Ok(())
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Principal 2x2 minor obtained by deleting row and column `k` (0-based).
    pub fn principal_minor(&self, k: usize) -> f64 {
        let (p, q) = match k {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let m = &self.entries;
        m[p][p] * m[q][q] - m[p][q] * m[q][p]
    }

    /// Simultaneous row/column relabeling: new index `i` takes old index `perm[i]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.entries[perm[i]][perm[j]];
            }
        }
        Self::new(out)
    }

    pub fn mul_vec(&self, x: &[f64; 3]) -> [f64; 3] {
        let m = &self.entries;
        [
            m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
            m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
            m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2],
        ]
    }
}

/// Forcing of a single component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingKind {
    Zero,
    Constant {
        value: f64,
    },
    /// `before` for `t < t_break`, `t^exponent` for `t >= t_break`.
    PiecewisePower {
        t_break: f64,
        before: f64,
        exponent: f64,
    },
    /// Piecewise-linear interpolation of `(t, value)` samples, held constant
    /// outside the sampled range.
    Table {
        samples: Vec<(f64, f64)>,
    },
}

impl Default for ForcingKind {
    fn default() -> Self {
        ForcingKind::Zero
    }
}

impl ForcingKind {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            ForcingKind::Zero => 0.0,
            ForcingKind::Constant { value } => *value,
            ForcingKind::PiecewisePower {
                t_break,
                before,
                exponent,
            } => {
                if t < *t_break {
                    *before
                } else {
                    t.powf(*exponent)
                }
            }
            ForcingKind::Table { samples } => table_value(samples, t),
        }
    }

    /// Algebraic decay exponent η with |f(t)| = O(t^{-η}); infinite for forcing
    /// that vanishes identically, `None` when the kind does not decay.
    pub fn decay_exponent(&self) -> Option<f64> {
        match self {
            ForcingKind::Zero => Some(f64::INFINITY),
            ForcingKind::Constant { value } if *value == 0.0 => Some(f64::INFINITY),
            ForcingKind::Constant { .. } => None,
            ForcingKind::PiecewisePower { exponent, .. } if *exponent < 0.0 => Some(-exponent),
            ForcingKind::PiecewisePower { .. } => None,
            ForcingKind::Table { samples } => match samples.last() {
                Some((_, v)) if *v == 0.0 => Some(f64::INFINITY),
                _ => None,
            },
        }
    }

    fn validate(&self, component: usize) -> Result<(), ModelError> {
        let non_finite = |what: &str| ModelError::NonFiniteEntry {
            what: format!("forcing {component} {what}"),
        };
        match self {
            ForcingKind::Zero => Ok(()),
            ForcingKind::Constant { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(non_finite("value"))
                }
            }
            ForcingKind::PiecewisePower {
                t_break,
                before,
                exponent,
            } => {
                if !(t_break.is_finite() && before.is_finite() && exponent.is_finite()) {
                    return Err(non_finite("parameter"));
                }
                if *t_break <= 0.0 && *exponent < 0.0 {
                    // t^exponent would blow up at t = 0
                    return Err(ModelError::BadForcingTable {
                        component,
                        reason: "t_break must be positive for a negative exponent".into(),
                    });
                }
                Ok(())
            }
            ForcingKind::Table { samples } => {
                if samples.is_empty() {
                    return Err(ModelError::BadForcingTable {
                        component,
                        reason: "empty table".into(),
                    });
                }
                if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err(non_finite("table sample"));
                }
                if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(ModelError::BadForcingTable {
                        component,
                        reason: "sample times must be strictly increasing".into(),
                    });
                }
                Ok(())
            }
        }
    }
}

fn table_value(samples: &[(f64, f64)], t: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    let k = samples.partition_point(|(ts, _)| *ts <= t);
    let (t0, v0) = samples[k - 1];
    let (t1, v1) = samples[k];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    pub components: [ForcingKind; 3],
}

impl ForcingSpec {
    pub fn new(components: [ForcingKind; 3]) -> Self {
        Self { components }
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        [
            self.components[0].value(t),
            self.components[1].value(t),
            self.components[2].value(t),
        ]
    }

    /// η of the whole forcing vector (the slowest-decaying component).
    pub fn decay_exponent(&self) -> Option<f64> {
        self.components
            .iter()
            .map(ForcingKind::decay_exponent)
            .try_fold(f64::INFINITY, |acc, e| e.map(|e| acc.min(e)))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (k, c) in self.components.iter().enumerate() {
            c.validate(k + 1)?;
        }
        Ok(())
    }
}

/// `coeff * x1^p1 * x2^p2 * x3^p3`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: [u32; 3],
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        self.coeff * ipow(x[0], self.powers[0]) * ipow(x[1], self.powers[1]) * ipow(x[2], self.powers[2])
    }

    pub fn partial(&self, x: &[f64; 3], var: usize) -> f64 {
        let p = self.powers[var];
        if p == 0 {
            return 0.0;
        }
        let mut prod = self.coeff * p as f64;
        for (i, &xi) in x.iter().enumerate() {
            let e = if i == var { p - 1 } else { self.powers[i] };
            prod *= ipow(xi, e);
        }
        prod
    }
}

fn ipow(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

/// Polynomial nonlinearity with every term of total degree >= 2, so that
/// n(0) = 0 and its local Lipschitz constant vanishes at the origin.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub components: [Vec<Monomial>; 3],
}

impl NonlinearitySpec {
    pub fn new(components: [Vec<Monomial>; 3]) -> Self {
        Self { components }
    }

    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, terms) in self.components.iter().enumerate() {
            out[k] = terms.iter().map(|m| m.eval(x)).sum();
        }
        out
    }

    /// `jac[k][j]` = ∂n_k/∂x_j
    pub fn jacobian(&self, x: &[f64; 3]) -> [[f64; 3]; 3] {
        let mut jac = [[0.0; 3]; 3];
        for (k, terms) in self.components.iter().enumerate() {
            for (j, cell) in jac[k].iter_mut().enumerate() {
                *cell = terms.iter().map(|m| m.partial(x, j)).sum();
            }
        }
        jac
    }

    pub fn is_empty(&self) -> bool {
        self.components.iter().all(Vec::is_empty)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (k, terms) in self.components.iter().enumerate() {
            for m in terms {
                if !m.coeff.is_finite() {
                    return Err(ModelError::NonFiniteEntry {
                        what: format!("nonlinearity {} coefficient", k + 1),
                    });
                }
                if m.degree() < 2 {
                    return Err(ModelError::BadNonlinearity {
                        component: k + 1,
                        degree: m.degree(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiOrderSystem {
    pub order: MultiOrder,
    pub matrix: SystemMatrix,
    pub forcing: Option<ForcingSpec>,
    pub nonlinearity: Option<NonlinearitySpec>,
    pub x0: [f64; 3],
}

impl MultiOrderSystem {
    /// Homogeneous linear system with the given initial state.
    pub fn linear(alpha: [f64; 3], a: [[f64; 3]; 3], x0: [f64; 3]) -> Self {
        Self {
            order: MultiOrder::new(alpha),
            matrix: SystemMatrix::new(a),
            forcing: None,
            nonlinearity: None,
            x0,
        }
    }

    pub fn with_forcing(mut self, forcing: ForcingSpec) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn with_nonlinearity(mut self, nonlinearity: NonlinearitySpec) -> Self {
        self.nonlinearity = Some(nonlinearity);
        self
    }

    /// Checks every type invariant and hands the instance back unchanged.
    pub fn validate(self) -> Result<Self, ModelError> {
        self.order.validate()?;
        self.matrix.validate()?;
        if let Some(f) = &self.forcing {
            f.validate()?;
        }
        if let Some(n) = &self.nonlinearity {
            n.validate()?;
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteEntry { what: "x0".into() });
        }
        Ok(self)
    }

    /// Same system with the forcing and nonlinearity stripped.
    pub fn homogeneous(&self) -> Self {
        Self {
            forcing: None,
            nonlinearity: None,
            ..self.clone()
        }
    }

    /// Relabel the equations: new equation `i` is old equation `perm[i]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let pick3 = |v: [f64; 3]| [v[perm[0]], v[perm[1]], v[perm[2]]];
        Self {
            order: MultiOrder::new(pick3(self.order.alpha)),
            matrix: self.matrix.permuted(perm),
            forcing: self.forcing.as_ref().map(|f| {
                ForcingSpec::new([
                    f.components[perm[0]].clone(),
                    f.components[perm[1]].clone(),
                    f.components[perm[2]].clone(),
                ])
            }),
            nonlinearity: self.nonlinearity.as_ref().map(|n| {
                let remap = |terms: &Vec<Monomial>| {
                    terms
                        .iter()
                        .map(|m| Monomial {
                            coeff: m.coeff,
                            powers: pick_u32(m.powers, perm),
                        })
                        .collect::<Vec<_>>()
                };
                NonlinearitySpec::new([
                    remap(&n.components[perm[0]]),
                    remap(&n.components[perm[1]]),
                    remap(&n.components[perm[2]]),
                ])
            }),
            x0: pick3(self.x0),
        }
    }
}

fn pick_u32(v: [u32; 3], perm: [usize; 3]) -> [u32; 3] {
    [v[perm[0]], v[perm[1]], v[perm[2]]]
}
