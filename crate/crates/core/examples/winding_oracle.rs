//! Count right-half-plane zeros of a few characteristic functions with the
//! argument principle, and scan the imaginary axis for roots of h2.
//!
//! cargo run --example winding_oracle

use fracstab::charfn::{GeneralCharFn, Term};
use fracstab::oracle::{count_rhp_zeros, default_omega_max, scan_imaginary_axis};

fn main() {
    let cases: [(&str, &[(f64, f64)]); 4] = [
        ("s^1.2 - 1", &[(1.2, 1.0), (0.0, -1.0)]),
        ("s^1.2 + 1", &[(1.2, 1.0), (0.0, 1.0)]),
        ("s^1.2 - 0.2 s^0.5 + 0.1", &[(1.2, 1.0), (0.5, -0.2), (0.0, 0.1)]),
        (
            "s^2.1 - 0.5 s^0.9 - 0.1 s^0.5 + 0.2",
            &[(2.1, 1.0), (0.9, -0.5), (0.5, -0.1), (0.0, 0.2)],
        ),
    ];
    for (label, terms) in cases {
        let q = GeneralCharFn::from_terms(terms.iter().map(|&(e, c)| Term::new(e, c)).collect())
            .expect("valid terms");
        let w = count_rhp_zeros(&q, None).expect("oracle");
        println!(
            "{label:<40} Z = {}  (eps {:e}, R {:e}, {} samples, residual {:.1e})",
            w.zero_count,
            w.contour.epsilon,
            w.contour.radius,
            w.samples,
            w.residual()
        );
        for r in scan_imaginary_axis(&q, default_omega_max(&q)) {
            println!("    h2 root at omega = {:.12}, h1 = {:.6}", r.omega, r.h1);
        }
    }
}
