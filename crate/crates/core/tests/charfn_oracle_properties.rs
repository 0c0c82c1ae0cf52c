use approx::assert_relative_eq;
use fracstab::charfn::{CharFunction, GeneralCharFn, SimpleCharFn};
use fracstab::model::{MultiOrder, SystemMatrix};
use fracstab::oracle::{count_rhp_zeros, default_omega_max, scan_imaginary_axis, ContourSpec, OracleError};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coeff() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), -3.0..3.0f64]
}

prop_compose! {
    fn simple_q()(b4 in 0.2..1.95f64, f in prop::array::uniform3(0.02..0.98f64),
                  a in coeff(), b in coeff(), c in coeff(), d in -3.0..3.0f64)
        -> SimpleCharFn {
        let mut f = f;
        f.sort_by(f64::total_cmp);
        SimpleCharFn::new([f[0] * b4, f[1] * b4, f[2] * b4, b4], a, b, c, d).unwrap()
    }
}

fn random_simple(rng: &mut ChaCha8Rng, d_negative: bool) -> SimpleCharFn {
    let b4 = rng.gen_range(0.2..1.95);
    let mut f: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.02..0.98));
    f.sort_by(f64::total_cmp);
    let mut c = || if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(-3.0..3.0) };
    let (a, b, cc) = (c(), c(), c());
    let d = if d_negative { -rng.gen_range(0.05..3.0) } else { rng.gen_range(-3.0..3.0) };
    SimpleCharFn::new([f[0] * b4, f[1] * b4, f[2] * b4, b4], a, b, cc, d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn conjugate_symmetry(q in simple_q(), r in 0.01..10.0f64, th in -3.1..3.1f64) {
        let s = Complex64::from_polar(r, th);
        let lhs = q.eval(s.conj());
        let rhs = q.eval(s).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + q.term_scale(r)));
    }

    #[test]
    fn h1_h2_are_the_axis_values(q in simple_q(), w in 0.001..100.0f64) {
        let z = q.eval(Complex64::new(0.0, w));
        let tol = 1e-12 * (1.0 + q.term_scale(w));
        prop_assert!((q.h1(w) - z.re).abs() <= tol);
        prop_assert!((q.h2(w) - z.im).abs() <= tol);
    }

    #[test]
    fn simple_form_round_trips(q in simple_q()) {
        let g = q.to_general();
        if g.middle_terms().len() == 3 {
            let back = g.to_simple().unwrap();
            prop_assert_eq!(back, q);
        }
        let again = g.to_simple().unwrap().to_general();
        prop_assert_eq!(again, g);
    }

    #[test]
    fn constant_term_is_minus_det(e in prop::array::uniform3(prop::array::uniform3(-3.0..3.0f64)),
                                  al in prop::array::uniform3(0.05..1.0f64)) {
        let a = SystemMatrix::new(e);
        let q = GeneralCharFn::build(&MultiOrder::new(al), &a);
        let det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
            - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
            + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);
        let n = a.norm();
        prop_assert!((q.constant() + det).abs() <= 1e-12 * (1.0 + n * n * n));
    }
}

#[test]
fn rho_identity_holds_at_every_h2_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut roots = 0;
    for _ in 0..2000 {
        let q = random_simple(&mut rng, false);
        let rho = q.rho_set().unwrap();
        for r in scan_imaginary_axis(&q, default_omega_max(&q)) {
            roots += 1;
            let w = r.omega;
            let rhs = -q.a * w.powf(q.beta[2]) * rho.rho[2]
                - q.b * w.powf(q.beta[1]) * rho.rho[1]
                - q.c * w.powf(q.beta[0]) * rho.rho[0]
                - q.d;
            let scale = q.term_scale(w).max(q.d.abs());
            assert!(
                (r.h1 - rhs).abs() <= 1e-8 * scale,
                "{q:?} at {w}: {} vs {rhs}",
                r.h1
            );
        }
    }
    assert!(roots > 500, "only {roots} roots exercised");
}

/// Zeros in the right half-plane force an h2 root with h1 < 0. The converse
/// does not hold: the curve Q(iω) can cross the negative real axis twice in
/// opposite directions with no zero enclosed.
#[test]
fn rhp_zeros_imply_a_negative_h1_axis_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut stable, mut unstable, mut converse_fails) = (0, 0, 0);
    for _ in 0..500 {
        let q = random_simple(&mut rng, true);
        let roots = scan_imaginary_axis(&q, default_omega_max(&q));
        let axis_says_stable = roots.iter().all(|r| r.is_stable_side());
        let oracle_says_stable = match count_rhp_zeros(&q.to_general(), None) {
            Ok(w) => w.zero_count == 0,
            Err(OracleError::ZeroOnAxis { .. }) => false,
            Err(e) => panic!("{q:?}: {e}"),
        };
        if axis_says_stable {
            assert!(oracle_says_stable, "{q:?}, roots {roots:?}");
        }
        match (oracle_says_stable, axis_says_stable) {
            (true, true) => stable += 1,
            (true, false) => converse_fails += 1,
            _ => unstable += 1,
        }
    }
    println!("stable {stable}, unstable {unstable}, negative h1 without zeros {converse_fails}");
    assert!(stable > 50 && unstable > 50, "{stable} / {unstable}");
}

#[test]
fn double_crossing_without_zeros() {
    let q = SimpleCharFn::new(
        [0.8408023468528903, 1.410182767485798, 1.7429193858248744, 1.8205261400892063],
        1.1746083801947869,
        0.0,
        -2.9898937956102625,
        -0.10125392331265474,
    )
    .unwrap();
    let roots = scan_imaginary_axis(&q, default_omega_max(&q));
    assert_eq!(roots.len(), 2);
    assert!(roots.iter().all(|r| r.h1 < 0.0));
    assert_eq!(count_rhp_zeros(&q.to_general(), None).unwrap().zero_count, 0);
}

#[test]
fn winding_count_is_stable_under_contour_changes() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let q = random_simple(&mut rng, true).to_general();
        let Ok(base) = count_rhp_zeros(&q, None) else {
            continue;
        };
        let spec = base.contour;
        let variants = [
            ContourSpec { epsilon: spec.epsilon / 2.0, ..spec },
            ContourSpec { radius: spec.radius * 2.0, ..spec },
            ContourSpec {
                samples_per_unit_angle: spec.samples_per_unit_angle * 2,
                samples_per_unit_log_length: spec.samples_per_unit_log_length * 2,
                ..spec
            },
        ];
        for v in variants {
            let w = count_rhp_zeros(&q, Some(v)).unwrap();
            assert_eq!(w.zero_count, base.zero_count, "{q}");
        }
        // upper and lower axis images mirror each other
        assert_relative_eq!(base.segment_turning[1], base.segment_turning[3], epsilon = 1e-9);
    }
}
