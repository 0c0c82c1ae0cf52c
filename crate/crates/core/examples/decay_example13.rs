//! Forced Example 13 system: simulate to t = 1000 at step 1/200 and check
//! that t^0.3 ‖x(t)‖ stays bounded.
//!
//! cargo run --release --example decay_example13

use fracstab::model::{ForcingKind, ForcingSpec, MultiOrderSystem};
use fracstab::solver::{decay_diagnostic, integrate, SolverConfig};
use std::time::Instant;

fn main() {
    let forcing = ForcingSpec::new(std::array::from_fn(|k| ForcingKind::PiecewisePower {
        t_break: 1.0,
        before: 1.0,
        exponent: -2.0 * (k as f64 + 1.0),
    }));
    let sys = MultiOrderSystem::linear(
        [0.4, 0.3, 0.5],
        [[0.0, 1.0, -1.0], [0.2, 0.0, 0.0], [0.0, 0.5, 0.0]],
        [1.0, -2.0, 2.0],
    )
    .with_forcing(forcing);

    let start = Instant::now();
    let traj = integrate(&sys, &SolverConfig::new(0.005, 1000.0)).expect("integration");
    println!("{} grid points in {:.1?}", traj.len(), start.elapsed());

    for t in [1.0, 10.0, 100.0, 1000.0] {
        let i = traj.index_at(t);
        println!("t = {t:>6}: x = {:?}, |x| = {:.6}", traj.x[i], traj.norm(i));
    }
    let d = decay_diagnostic(&traj, 0.3, (100.0, 1000.0)).expect("diagnostic");
    println!(
        "sup t^0.3 |x| on [100, 1000] = {:.6}, third quarter {:.6}, last quarter {:.6}, plateau = {}",
        d.sup, d.sup_third_quarter, d.sup_last_quarter, d.plateau
    );
}
