//! Add x1 x2 to the first equation of Example 13 and test decay from a
//! ladder of initial radii.
//!
//! cargo run --release --example nonlinear_basin

use fracstab::model::{Monomial, MultiOrderSystem, NonlinearitySpec};
use fracstab::solver::{simulate_nonlinear_basin, SolverConfig};

fn main() {
    let sys = MultiOrderSystem::linear(
        [0.4, 0.3, 0.5],
        [[0.0, 1.0, -1.0], [0.2, 0.0, 0.0], [0.0, 0.5, 0.0]],
        [1.0, 1.0, 1.0],
    )
    .with_nonlinearity(NonlinearitySpec::new([
        vec![Monomial { coeff: 1.0, powers: [1, 1, 0] }],
        Vec::new(),
        Vec::new(),
    ]));
    let cfg = SolverConfig::new(0.01, 200.0);
    let radii = [0.01, 0.1, 0.5, 1.0, 2.0];
    let results = simulate_nonlinear_basin(&sys, &cfg, &radii, (20.0, 200.0)).expect("linear part is stable");
    for r in results {
        match r.outcome {
            Ok(d) => println!(
                "radius {:<5} decayed {:<5} plateau {:<5} sup t^{} |x| = {:.4e}",
                r.radius, r.decayed, d.plateau, d.nu, d.sup
            ),
            Err(e) => println!("radius {:<5} {e}", r.radius),
        }
    }
}
