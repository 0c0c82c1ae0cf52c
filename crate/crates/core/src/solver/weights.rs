//! Product-integration trapezoidal weights for the Riemann-Liouville kernel.
//!
//! With `p = α + 1` and the common factor `h^α / Γ(α + 2)`:
//!
//! ```text
//! a_0 = 1
//! a_k = (k-1)^p - 2 k^p + (k+1)^p                 k >= 1
//! ã_n = (n-1)^p - n^α (n - α - 1)                  weight of g_0 at step n
//! ```
//!
//! The direct formulas cancel catastrophically for large arguments, so both
//! sequences switch to their binomial expansions in `1/k`.

/// Below this index the direct formulas are exact enough.
const SERIES_FROM: usize = 8;

/// `Γ(α + 2)` for `α` in (0, 1]; exact at integers.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Generalised binomial coefficients `C(p, m)` for `m = 0..len`.
fn binomials(p: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut c = 1.0;
    for m in 0..len {
        if m > 0 {
            c *= (p - (m as f64 - 1.0)) / m as f64;
        }
        out.push(c);
    }
    out
}

/// `Σ_{m >= 2} C(p, m) (±1)^m k^{p-m}`, summed until the terms are
/// negligible. Each power is taken directly so that `p = 2` stays exact.
fn tail(binom: &[f64], p: f64, k: f64, even_only: bool, alternating: bool) -> f64 {
    let mut sum = 0.0;
    for (m, &c) in binom.iter().enumerate().skip(2) {
        if even_only && m % 2 == 1 {
            continue;
        }
        let sign = if alternating && m % 2 == 1 { -1.0 } else { 1.0 };
        let term = sign * c * k.powf(p - m as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Weights for one order `α` on a grid with `n_max` steps.
#[derive(Debug, Clone)]
pub struct PiWeights {
    pub alpha: f64,
    /// `h^α / Γ(α + 2)`
    pub scale: f64,
    /// `a_k` for `k = 0..=n_max`.
    pub a: Vec<f64>,
    /// `ã_n` for `n = 0..=n_max` (`ã_0` is unused and set to 0).
    pub a_start: Vec<f64>,
}

impl PiWeights {
    pub fn new(alpha: f64, step: f64, n_max: usize) -> Self {
        let p = alpha + 1.0;
        let binom = binomials(p, 64);
        let a = (0..=n_max)
            .map(|k| {
                if k == 0 {
                    1.0
                } else if k < SERIES_FROM {
                    let k = k as f64;
                    (k - 1.0).powf(p) - 2.0 * k.powf(p) + (k + 1.0).powf(p)
                } else {
                    let kf = k as f64;
                    2.0 * tail(&binom, p, kf, true, false)
                }
            })
            .collect();
        let a_start = (0..=n_max)
            .map(|n| {
                if n == 0 {
                    0.0
                } else if n < SERIES_FROM {
                    let n = n as f64;
                    (n - 1.0).powf(p) - n.powf(alpha) * (n - alpha - 1.0)
                } else {
                    let nf = n as f64;
                    tail(&binom, p, nf, false, true)
                }
            })
            .collect();
        Self {
            alpha,
            scale: step.powf(alpha) / gamma(alpha + 2.0),
            a,
            a_start,
        }
    }

    /// Full weight vector `w_{n,j}`, `j = 0..=n`, including the scale factor.
    pub fn row(&self, n: usize) -> Vec<f64> {
        if n == 0 {
            return vec![0.0];
        }
        let mut w = Vec::with_capacity(n + 1);
        w.push(self.a_start[n]);
        for j in 1..n {
            w.push(self.a[n - j]);
        }
        w.push(self.a[0]);
        w.iter().map(|v| v * self.scale).collect()
    }
}

/// `Σ_i x[i] y[i]` with eight independent accumulators so the loop
/// vectorises.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [0.0f64; 8];
    let xc = x.chunks_exact(8);
    let yc = y.chunks_exact(8);
    let (xr, yr) = (xc.remainder(), yc.remainder());
    for (a, b) in xc.zip(yc) {
        for i in 0..8 {
            acc[i] += a[i] * b[i];
        }
    }
    let mut tail = 0.0;
    for (a, b) in xr.iter().zip(yr) {
        tail += a * b;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::compensated_sum;

    #[test]
    fn alpha_one_is_classical_trapezoid() {
        let h = 0.125;
        let w = PiWeights::new(1.0, h, 40);
        for n in 1..=40 {
            let row = w.row(n);
            assert_eq!(row[0], h / 2.0, "n = {n}");
            assert_eq!(row[n], h / 2.0);
            for v in &row[1..n] {
                assert_eq!(*v, h);
            }
        }
    }

    #[test]
    fn series_matches_direct_formula_where_both_are_accurate() {
        let alpha: f64 = 0.6;
        let p = alpha + 1.0;
        let w = PiWeights::new(alpha, 1.0, 30);
        for k in SERIES_FROM..30 {
            let kf = k as f64;
            let direct = (kf - 1.0).powf(p) - 2.0 * kf.powf(p) + (kf + 1.0).powf(p);
            assert!((w.a[k] - direct).abs() < 1e-12 * direct.abs(), "k = {k}");
            let direct0 = (kf - 1.0).powf(p) - kf.powf(alpha) * (kf - alpha - 1.0);
            assert!((w.a_start[k] - direct0).abs() < 1e-11 * direct0.abs(), "n = {k}");
        }
    }

    #[test]
    fn rows_integrate_constants_exactly() {
        for &alpha in &[0.1, 0.3, 0.5, 0.75, 1.0] {
            let h = 0.01;
            let w = PiWeights::new(alpha, h, 5000);
            for &n in &[1usize, 2, 7, 8, 9, 100, 4999, 5000] {
                let s = compensated_sum(w.row(n));
                let exact = (n as f64 * h).powf(alpha) / gamma(alpha + 1.0);
                assert!((s - exact).abs() <= 1e-12 * exact, "alpha {alpha} n {n}: {s} vs {exact}");
            }
        }
    }

    #[test]
    fn dot_matches_naive() {
        let x: Vec<f64> = (0..37).map(|i| (i as f64).sin()).collect();
        let y: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).cos()).collect();
        let naive: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!((dot(&x, &y) - naive).abs() < 1e-13);
    }
}
