//! Run every criterion on Example 3 and confirm the verdict with the
//! winding-number oracle.
//!
//! cargo run --example analyze_example3

use fracstab::criteria::{assess_with_oracle, Overall};
use fracstab::model::MultiOrderSystem;

fn main() {
    let sys = MultiOrderSystem::linear(
        [0.4, 0.3, 0.5],
        [[-3.0, 0.0, 1.5], [-0.5, 0.0, 0.5], [6.0, -1.0, -3.0]],
        [1.0; 3],
    );
    let report = assess_with_oracle(&sys, None).expect("criteria agree with the oracle");
    print!("{report}");
    assert_eq!(report.overall, Overall::Stable);
    assert_eq!(report.oracle_zero_count(), Some(0));
}
