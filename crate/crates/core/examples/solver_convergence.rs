//! Order of convergence of the trapezoidal product-integration scheme on
//! D^0.6 x = -x, x(0) = 1, measured against a much finer run.
//!
//! cargo run --release --example solver_convergence

use fracstab::model::MultiOrderSystem;
use fracstab::solver::{integrate, SolverConfig};

fn main() {
    let sys = MultiOrderSystem::linear([0.6; 3], [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]], [1.0; 3]);
    let t_end = 2.0;
    let fine_step = 1.0 / 2560.0;
    let reference = integrate(&sys, &SolverConfig::new(fine_step, t_end)).unwrap();
    let exact = reference.x[reference.len() - 1][0];
    println!("reference x({t_end}) = {exact:.12}");

    let mut prev: Option<f64> = None;
    for n in [10usize, 20, 40, 80, 160] {
        let h = 1.0 / n as f64;
        let tr = integrate(&sys, &SolverConfig::new(h, t_end)).unwrap();
        let err = (tr.x[tr.len() - 1][0] - exact).abs();
        let eoc = prev.map(|p| (p / err).log2());
        println!("h = 1/{n:<4} error {err:.3e}  eoc {}", eoc.map_or("-".into(), |e| format!("{e:.3}")));
        prev = Some(err);
    }
}
