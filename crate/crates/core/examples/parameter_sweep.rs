//! Vary a21 in Example 13 and locate where the verdict changes.
//!
//! cargo run --release --example parameter_sweep

use fracstab::cli::{changes, parse_grid, sweep_rows, SweepParam};
use fracstab::model::MultiOrderSystem;

fn main() {
    let sys = MultiOrderSystem::linear(
        [0.4, 0.3, 0.5],
        [[0.0, 1.0, -1.0], [0.2, 0.0, 0.0], [0.0, 0.5, 0.0]],
        [0.0; 3],
    );
    let param = SweepParam::parse("a13").unwrap();
    let values = parse_grid("-1:1:41").unwrap();
    let rows = sweep_rows(&sys, param, &values).expect("valid grid");

    println!("{:>8}  {:<26} {:<10} Z", param.label(), "verdict", "fired");
    for (r, err) in &rows {
        println!("{:>8.3}  {:<26} {:<10} {}", r.value, r.verdict, r.fired, r.oracle);
        if let Some(e) = err {
            println!("          {e}");
        }
    }
    let verdicts: Vec<&str> = rows.iter().map(|(r, _)| r.verdict.as_str()).collect();
    for i in changes(&verdicts) {
        println!(
            "verdict changes between {} and {}: {} -> {}",
            rows[i].0.value,
            rows[i + 1].0.value,
            rows[i].0.verdict,
            rows[i + 1].0.verdict
        );
    }
}
