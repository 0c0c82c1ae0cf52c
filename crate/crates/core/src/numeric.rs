//! Small numerical kernels shared across modules.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Principal argument in (-π, π].
pub fn principal_arg(s: Complex64) -> f64 {
    let theta = s.im.atan2(s.re);
    if theta <= -PI {
        PI
    } else {
        theta
    }
}

/// Principal branch power `|s|^β exp(iβ arg s)`; `0^β = 0` for β > 0 and 1 for β = 0.
pub fn principal_pow(s: Complex64, beta: f64) -> Complex64 {
    if beta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let r = s.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let mag = r.powf(beta);
    let phase = beta * principal_arg(s);
    Complex64::new(mag * phase.cos(), mag * phase.sin())
}

/// Wraps an angle difference into (-π, π].
pub fn wrap_angle(d: f64) -> f64 {
    let mut x = d % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Bisection on a bracket `[lo, hi]` whose endpoint values have opposite
/// signs. Stops when the bracket is narrower than `rel_tol * |hi|` or an exact
/// zero is hit.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    debug_assert!(flo.signum() != fhi.signum());
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_tol * hi.abs().max(lo.abs()) || mid <= lo || mid >= hi {
            return mid;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
