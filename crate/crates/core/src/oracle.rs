//! Numerical certification of where the zeros of Q lie.
//!
//! [`count_rhp_zeros`] applies the argument principle on the boundary of the
//! half annulus `{ε < |s| < R, Re s > 0}`, traversed counter-clockwise:
//!
//! ```text
//! γ2: R e^{iφ}, φ: −π/2 → π/2      (outer arc)
//! γ1: iω,       ω: R → ε            (upper axis segment)
//! γ3: ε e^{iφ}, φ: π/2 → −π/2      (inner arc)
//! γ4: −iω,      ω: ε → R            (lower axis segment)
//! ```
//!
//! Consecutive samples are refined until arg Q moves by less than π/2 between
//! them, so the accumulated turning divided by 2π is the zero count.
//! [`scan_imaginary_axis`] brackets the positive roots of h2 = Im Q(iω) and
//! reports h1 = Re Q(iω) at each.

use crate::charfn::{CharFunction, GeneralCharFn};
use crate::numeric::{bisect, log_space, principal_arg, wrap_angle};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Hard cap on contour samples across all four segments.
pub const MAX_CONTOUR_SAMPLES: usize = 1 << 20;

/// The turning residual |total/2π − Z| must not exceed this.
pub const TURNING_RESIDUAL_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum OracleError {
    #[error("Q(0) = -det A = 0: zero at the origin")]
    ZeroAtOrigin,
    #[error("Q has a zero on the imaginary axis near omega = {omega} (h1 = {h1:e})")]
    ZeroOnAxis { omega: f64, h1: f64 },
    #[error("contour sampling inconclusive: {0}")]
    SamplingInconclusive(String),
    #[error("invalid contour: {0}")]
    InvalidContour(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourSpec {
    pub epsilon: f64,
    pub radius: f64,
    pub samples_per_unit_angle: usize,
    pub samples_per_unit_log_length: usize,
}

impl ContourSpec {
    pub const DEFAULT_ANGLE_DENSITY: usize = 64;
    pub const DEFAULT_LOG_DENSITY: usize = 32;

    pub fn new(epsilon: f64, radius: f64) -> Self {
        Self {
            epsilon,
            radius,
            samples_per_unit_angle: Self::DEFAULT_ANGLE_DENSITY,
            samples_per_unit_log_length: Self::DEFAULT_LOG_DENSITY,
        }
    }

    /// ε halves from 1e-2 until |Q| on the inner arc stays above |Q(0)|/2;
    /// R doubles from a dominance estimate until |s^β4| >= 2 Σ|other terms| on
    /// the outer arc.
    pub fn auto(q: &GeneralCharFn) -> Result<Self, OracleError> {
        let q0 = q.constant().abs();
        if q0 <= q.zero_tol() {
            return Err(OracleError::ZeroAtOrigin);
        }
        // |Q(s)| >= q0 - Σ|c_k| |s|^{e_k} > 0 on the whole inner disc, so no
        // zero is cut off by the indentation.
        let mut eps = 1e-2;
        let inner_ok = |eps: f64| {
            let rest: f64 = q
                .term_list()
                .iter()
                .filter(|t| t.exponent > 0.0)
                .map(|t| t.coeff.abs() * eps.powf(t.exponent))
                .sum();
            rest <= 0.5 * q0
        };
        let mut tries = 0;
        while !inner_ok(eps) {
            eps *= 0.5;
            tries += 1;
            if tries > 1000 || eps == 0.0 {
                return Err(OracleError::InvalidContour(
                    "could not isolate the origin".into(),
                ));
            }
        }

        let beta4 = q.leading_exponent();
        let lower: Vec<_> = q.term_list()[1..]
            .iter()
            .filter(|t| t.coeff != 0.0)
            .copied()
            .collect();
        let mut radius = 1.0f64;
        if let Some(top) = lower.first() {
            let sum: f64 = lower.iter().map(|t| t.coeff.abs()).sum();
            let gap = beta4 - top.exponent;
            radius = radius.max((2.0 * sum).powf(1.0 / gap));
        }
        let dominated = |r: f64| {
            let others: f64 = lower.iter().map(|t| t.coeff.abs() * r.powf(t.exponent)).sum();
            r.powf(beta4) >= 2.0 * others
        };
        let mut tries = 0;
        while !dominated(radius) {
            radius *= 2.0;
            tries += 1;
            if tries > 2000 || !radius.is_finite() {
                return Err(OracleError::InvalidContour("no dominance radius".into()));
            }
        }
        radius = radius.max(2.0 * eps);
        Ok(Self::new(eps, radius))
    }

    fn check(&self) -> Result<(), OracleError> {
        if !(self.epsilon > 0.0 && self.radius > self.epsilon && self.radius.is_finite()) {
            return Err(OracleError::InvalidContour(format!(
                "need 0 < epsilon < radius, got {} and {}",
                self.epsilon, self.radius
            )));
        }
        if self.samples_per_unit_angle == 0 || self.samples_per_unit_log_length == 0 {
            return Err(OracleError::InvalidContour("zero sample density".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Segment {
    OuterArc,
    UpperAxis,
    InnerArc,
    LowerAxis,
}

impl Segment {
    pub const ALL: [Segment; 4] = [
        Segment::OuterArc,
        Segment::UpperAxis,
        Segment::InnerArc,
        Segment::LowerAxis,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Segment::OuterArc => "gamma2",
            Segment::UpperAxis => "gamma1",
            Segment::InnerArc => "gamma3",
            Segment::LowerAxis => "gamma4",
        }
    }

    /// Parameter range and the point `s(t)`. Endpoints land exactly on the
    /// shared corners so the pieces join without gaps.
    fn range(&self, spec: &ContourSpec) -> (f64, f64) {
        let (le, lr) = (spec.epsilon.ln(), spec.radius.ln());
        match self {
            Segment::OuterArc => (-FRAC_PI_2, FRAC_PI_2),
            Segment::UpperAxis => (lr, le),
            Segment::InnerArc => (FRAC_PI_2, -FRAC_PI_2),
            Segment::LowerAxis => (le, lr),
        }
    }

    fn point(&self, spec: &ContourSpec, t: f64, endpoint: Option<bool>) -> Complex64 {
        let arc = |r: f64| match endpoint {
            Some(_) if t > 0.0 => Complex64::new(0.0, r),
            Some(_) => Complex64::new(0.0, -r),
            None => Complex64::from_polar(r, t),
        };
        let axis = |sign: f64| {
            let w = match (endpoint, self) {
                (Some(true), Segment::UpperAxis) => spec.radius,
                (Some(false), Segment::UpperAxis) => spec.epsilon,
                (Some(true), _) => spec.epsilon,
                (Some(false), _) => spec.radius,
                (None, _) => t.exp(),
            };
            Complex64::new(0.0, sign * w)
        };
        match self {
            Segment::OuterArc => arc(spec.radius),
            Segment::InnerArc => arc(spec.epsilon),
            Segment::UpperAxis => axis(1.0),
            Segment::LowerAxis => axis(-1.0),
        }
    }

    fn initial_samples(&self, spec: &ContourSpec) -> usize {
        let (t0, t1) = self.range(spec);
        let density = match self {
            Segment::OuterArc | Segment::InnerArc => spec.samples_per_unit_angle,
            _ => spec.samples_per_unit_log_length,
        };
        ((t1 - t0).abs() * density as f64).ceil().max(8.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSample {
    pub segment: Segment,
    pub t: f64,
    pub s: Complex64,
    pub q: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindingResult {
    pub zero_count: u32,
    pub min_abs_on_contour: f64,
    /// Accumulated change of arg Q over the closed contour, in radians.
    pub total_turning: f64,
    /// Turning per segment in [`Segment::ALL`] order.
    pub segment_turning: [f64; 4],
    pub contour: ContourSpec,
    pub samples: usize,
}

impl WindingResult {
    pub fn residual(&self) -> f64 {
        (self.total_turning / (2.0 * PI) - self.zero_count as f64).abs()
    }
}

struct Sampler<'a> {
    q: &'a GeneralCharFn,
    spec: ContourSpec,
    budget: usize,
    used: usize,
}

impl Sampler<'_> {
    fn eval(&mut self, seg: Segment, t: f64, endpoint: Option<bool>) -> ContourSample {
        self.used += 1;
        let s = seg.point(&self.spec, t, endpoint);
        ContourSample {
            segment: seg,
            t,
            s,
            q: self.q.eval(s),
        }
    }

    /// Samples one segment, subdividing any step whose arg change reaches π/2.
    fn segment(&mut self, seg: Segment) -> Result<Vec<ContourSample>, OracleError> {
        let (t0, t1) = seg.range(&self.spec);
        let n = seg.initial_samples(&self.spec);
        let mut coarse = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let t = t0 + (t1 - t0) * i as f64 / n as f64;
            let endpoint = if i == 0 {
                Some(true)
            } else if i == n {
                Some(false)
            } else {
                None
            };
            let t = match endpoint {
                Some(true) => t0,
                Some(false) => t1,
                None => t,
            };
            coarse.push(self.eval(seg, t, endpoint));
        }
        let mut out = Vec::with_capacity(coarse.len());
        out.push(coarse[0]);
        for w in coarse.windows(2) {
            self.refine(seg, w[0], w[1], &mut out, 0)?;
        }
        Ok(out)
    }

    fn refine(
        &mut self,
        seg: Segment,
        lo: ContourSample,
        hi: ContourSample,
        out: &mut Vec<ContourSample>,
        depth: u32,
    ) -> Result<(), OracleError> {
        let step = wrap_angle(principal_arg(hi.q) - principal_arg(lo.q)).abs();
        if step < FRAC_PI_2 {
            out.push(hi);
            return Ok(());
        }
        if self.used >= self.budget || depth > 60 {
            return Err(OracleError::SamplingInconclusive(format!(
                "refinement cap reached on {} near |s| = {:.3e}",
                seg.label(),
                lo.s.norm()
            )));
        }
        let mid_t = 0.5 * (lo.t + hi.t);
        let mid = self.eval(seg, mid_t, None);
        if mid.q == Complex64::new(0.0, 0.0) {
            return Err(OracleError::SamplingInconclusive(format!(
                "Q vanishes on the contour at s = {}",
                mid.s
            )));
        }
        self.refine(seg, lo, mid, out, depth + 1)?;
        self.refine(seg, mid, hi, out, depth + 1)
    }
}

/// Samples Q along the whole contour (segments in traversal order).
pub fn trace_contour(q: &GeneralCharFn, spec: &ContourSpec) -> Result<Vec<ContourSample>, OracleError> {
    spec.check()?;
    let mut sampler = Sampler {
        q,
        spec: *spec,
        budget: MAX_CONTOUR_SAMPLES,
        used: 0,
    };
    let mut all = Vec::new();
    for seg in Segment::ALL {
        all.extend(sampler.segment(seg)?);
    }
    Ok(all)
}

fn turning(samples: &[ContourSample]) -> f64 {
    samples
        .windows(2)
        .map(|w| wrap_angle(principal_arg(w[1].q) - principal_arg(w[0].q)))
        .sum()
}

/// Number of zeros of Q in the open right half-plane.
///
/// Runs the axis scan first: a certified axis zero is reported as
/// [`OracleError::ZeroOnAxis`] rather than counted either way.
pub fn count_rhp_zeros(q: &GeneralCharFn, spec: Option<ContourSpec>) -> Result<WindingResult, OracleError> {
    if q.constant().abs() <= q.zero_tol() {
        return Err(OracleError::ZeroAtOrigin);
    }
    let spec = match spec {
        Some(s) => s,
        None => ContourSpec::auto(q)?,
    };
    spec.check()?;

    let tol = axis_zero_tolerance(q);
    for root in scan_range(q, spec.epsilon, spec.radius) {
        if root.h1.abs() <= tol {
            return Err(OracleError::ZeroOnAxis {
                omega: root.omega,
                h1: root.h1,
            });
        }
    }

    let mut sampler = Sampler {
        q,
        spec,
        budget: MAX_CONTOUR_SAMPLES,
        used: 0,
    };
    let mut segment_turning = [0.0; 4];
    let mut min_abs = f64::INFINITY;
    let mut samples = 0;
    for (k, seg) in Segment::ALL.iter().enumerate() {
        let pts = sampler.segment(*seg)?;
        segment_turning[k] = turning(&pts);
        min_abs = pts.iter().map(|p| p.q.norm()).fold(min_abs, f64::min);
        samples += pts.len();
    }
    let total: f64 = segment_turning.iter().sum();
    let winding = total / (2.0 * PI);
    let rounded = winding.round();
    let result = WindingResult {
        zero_count: rounded.max(0.0) as u32,
        min_abs_on_contour: min_abs,
        total_turning: total,
        segment_turning,
        contour: spec,
        samples,
    };
    if rounded < 0.0 || (winding - rounded).abs() > TURNING_RESIDUAL_TOL {
        return Err(OracleError::SamplingInconclusive(format!(
            "winding {winding:.6} is not a nonnegative integer"
        )));
    }
    Ok(result)
}

/// |h1| at an h2 root below this means a zero on the imaginary axis.
pub fn axis_zero_tolerance<Q: CharFunction + ?Sized>(q: &Q) -> f64 {
    1e-9 * q.coeff_abs_sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRoot {
    pub omega: f64,
    pub h1: f64,
}

impl AxisRoot {
    /// h1 > 0 at this h2 root: no zero of Q crosses the axis here.
    pub fn is_stable_side(&self) -> bool {
        self.h1 > 0.0
    }
}

/// Grid resolution of the h2 sign scan.
pub const SCAN_POINTS_PER_DECADE: usize = 200;

/// Every sign change of h2 on `(0, omega_max]`, refined by bisection to a
/// relative width of 1e-12, with h1 evaluated at the root.
pub fn scan_imaginary_axis<Q: CharFunction + ?Sized>(q: &Q, omega_max: f64) -> Vec<AxisRoot> {
    let Some(lo) = h2_root_lower_bound(q) else {
        return Vec::new();
    };
    if omega_max <= lo {
        return Vec::new();
    }
    scan_range(q, lo, omega_max)
}

/// An upper scan limit beyond which h2 keeps the sign of its top term.
pub fn default_omega_max<Q: CharFunction + ?Sized>(q: &Q) -> f64 {
    let terms = h2_terms(q);
    let Some(top) = terms.last() else {
        return 1.0;
    };
    let rest: f64 = terms[..terms.len() - 1].iter().map(|t| t.1.abs()).sum();
    let gap = terms
        .len()
        .checked_sub(2)
        .map_or(1.0, |i| top.0 - terms[i].0);
    let bound = if rest == 0.0 {
        1.0
    } else {
        (rest / top.1.abs()).powf(1.0 / gap)
    };
    2.0 * bound.max(1.0)
}

/// (exponent, coefficient·sin(exponent π/2)) for the terms that contribute to
/// h2, in increasing exponent order.
fn h2_terms<Q: CharFunction + ?Sized>(q: &Q) -> Vec<(f64, f64)> {
    let mut t: Vec<(f64, f64)> = q
        .terms()
        .iter()
        .filter(|t| t.exponent > 0.0)
        .map(|t| (t.exponent, t.coeff * (t.exponent * FRAC_PI_2).sin()))
        .filter(|(_, g)| g.abs() > 1e-14 * (1.0 + g.abs()))
        .collect();
    t.sort_by(|x, y| x.0.total_cmp(&y.0));
    t
}

/// Below this ω the lowest h2 term dominates, so h2 has no roots there.
fn h2_root_lower_bound<Q: CharFunction + ?Sized>(q: &Q) -> Option<f64> {
    let terms = h2_terms(q);
    if terms.len() < 2 {
        return None;
    }
    let (e1, g1) = terms[0];
    let e2 = terms[1].0;
    let rest: f64 = terms[1..].iter().map(|t| t.1.abs()).sum();
    let bound = (g1.abs() / rest).powf(1.0 / (e2 - e1)).min(1.0);
    Some((0.5 * bound).max(f64::MIN_POSITIVE))
}

/// The scan stays inside `[1e-100, 1e100]` so that every term of h2 is finite.
const SCAN_LIMITS: (f64, f64) = (1e-100, 1e100);

fn scan_range<Q: CharFunction + ?Sized>(q: &Q, lo: f64, hi: f64) -> Vec<AxisRoot> {
    let (lo, hi) = (lo.max(SCAN_LIMITS.0), hi.min(SCAN_LIMITS.1));
    if !(lo < hi) {
        return Vec::new();
    }
    let decades = (hi / lo).log10().max(0.0);
    let n = ((decades * SCAN_POINTS_PER_DECADE as f64).ceil() as usize).max(400);
    let grid = log_space(lo, hi, n);
    let vals: Vec<f64> = grid.iter().map(|&w| q.h2(w)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (v0, v1) = (vals[i], vals[i + 1]);
        let omega = if v0 == 0.0 {
            if i > 0 && vals[i - 1] == 0.0 {
                continue;
            }
            grid[i]
        } else if v1 == 0.0 {
            continue; // picked up as v0 of the next interval
        } else if v0.signum() != v1.signum() {
            bisect(|w| q.h2(w), grid[i], grid[i + 1], 1e-12)
        } else {
            continue;
        };
        roots.push(AxisRoot {
            omega,
            h1: q.h1(omega),
        });
    }
    if vals[vals.len() - 1] == 0.0 {
        let omega = grid[grid.len() - 1];
        roots.push(AxisRoot {
            omega,
            h1: q.h1(omega),
        });
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::{SimpleCharFn, Term};

    fn gq(terms: &[(f64, f64)]) -> GeneralCharFn {
        GeneralCharFn::from_terms(terms.iter().map(|&(e, c)| Term::new(e, c)).collect()).unwrap()
    }

    #[test]
    fn binomial_plus_one_has_no_rhp_zero() {
        let r = count_rhp_zeros(&gq(&[(1.2, 1.0), (0.0, 1.0)]), None).unwrap();
        assert_eq!(r.zero_count, 0);
        assert!(r.residual() <= TURNING_RESIDUAL_TOL);
    }

    #[test]
    fn binomial_minus_one_has_one() {
        let r = count_rhp_zeros(&gq(&[(1.2, 1.0), (0.0, -1.0)]), None).unwrap();
        assert_eq!(r.zero_count, 1);
    }

    #[test]
    fn thm2b_instance_has_two() {
        let q = gq(&[(2.1, 1.0), (0.9, -0.5), (0.5, -0.1), (0.0, 0.2)]);
        let r = count_rhp_zeros(&q, None).unwrap();
        assert_eq!(r.zero_count, 2);
        assert!(scan_imaginary_axis(&q, 1e3).is_empty());
    }

    #[test]
    fn small_real_zeros_stay_outside_inner_arc() {
        // Two real zeros, the smaller one near 3e-4.
        let q = gq(&[(1.2, 1.0), (0.5, -0.2), (0.0, 0.005)]);
        let r = count_rhp_zeros(&q, None).unwrap();
        assert_eq!(r.zero_count, 2);
        assert!(r.contour.epsilon < 3e-4);
    }

    #[test]
    fn zero_at_origin_rejected() {
        let q = gq(&[(1.2, 1.0), (0.5, 1.0)]);
        assert_eq!(count_rhp_zeros(&q, None), Err(OracleError::ZeroAtOrigin));
    }

    #[test]
    fn axis_zero_detected() {
        // Q(s) = s^1.5 − c s^0.5 − d tuned to vanish at s = i
        let i = Complex64::new(0.0, 1.0);
        let p15 = crate::numeric::principal_pow(i, 1.5);
        let p05 = crate::numeric::principal_pow(i, 0.5);
        let c = p15.im / p05.im;
        let d = (p15 - c * p05).re;
        let q = gq(&[(1.5, 1.0), (0.5, -c), (0.0, -d)]);
        match count_rhp_zeros(&q, None) {
            Err(OracleError::ZeroOnAxis { omega, .. }) => assert!((omega - 1.0).abs() < 1e-9),
            other => panic!("expected ZeroOnAxis, got {other:?}"),
        }
    }

    #[test]
    fn example13_axis_scan() {
        let q = SimpleCharFn::new([0.5, 0.5, 0.5, 1.2], 0.0, 0.0, 0.2, -0.1).unwrap();
        let roots = scan_imaginary_axis(&q, default_omega_max(&q));
        assert_eq!(roots.len(), 1);
        assert!((roots[0].omega - 0.065_702_790_868_722_29).abs() < 1e-12);
        // h1(ω0) = −c ρ1 ω0^{β1} − d, from mpmath
        assert!((roots[0].h1 - 0.051_971_783_135_053_36).abs() < 1e-12);
        assert!(roots[0].is_stable_side());
    }

    #[test]
    fn single_positive_h2_term_has_no_roots() {
        let q = SimpleCharFn::new([0.6, 0.6, 0.6, 1.2], 0.0, 0.0, 0.0, -1.0).unwrap();
        assert!(scan_imaginary_axis(&q, 1e6).is_empty());
    }

    #[test]
    fn axis_segments_turn_equally() {
        let q = gq(&[(1.2, 1.0), (0.8, 3.0), (0.7, 3.0), (0.4, 0.5), (0.0, 0.75)]);
        let r = count_rhp_zeros(&q, None).unwrap();
        assert_eq!(r.zero_count, 0);
        assert!((r.segment_turning[1] - r.segment_turning[3]).abs() < 1e-12);
    }

    #[test]
    fn count_is_stable_under_contour_changes() {
        let q = gq(&[(2.1, 1.0), (0.9, -0.5), (0.5, -0.1), (0.0, 0.2)]);
        let base = ContourSpec::auto(&q).unwrap();
        let variants = [
            ContourSpec { epsilon: base.epsilon / 2.0, ..base },
            ContourSpec { radius: base.radius * 2.0, ..base },
            ContourSpec {
                samples_per_unit_angle: base.samples_per_unit_angle * 2,
                samples_per_unit_log_length: base.samples_per_unit_log_length * 2,
                ..base
            },
        ];
        for v in variants {
            assert_eq!(count_rhp_zeros(&q, Some(v)).unwrap().zero_count, 2);
        }
    }

    #[test]
    fn invalid_contour_rejected() {
        let q = gq(&[(1.2, 1.0), (0.0, 1.0)]);
        assert!(matches!(
            count_rhp_zeros(&q, Some(ContourSpec::new(1.0, 0.5))),
            Err(OracleError::InvalidContour(_))
        ));
    }

    #[test]
    fn trace_is_closed() {
        let q = gq(&[(1.2, 1.0), (0.5, -0.2), (0.0, 0.1)]);
        let spec = ContourSpec::auto(&q).unwrap();
        let pts = trace_contour(&q, &spec).unwrap();
        let first = pts.first().unwrap().s;
        let last = pts.last().unwrap().s;
        assert_eq!(first, last);
    }
}
