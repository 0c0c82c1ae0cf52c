//! Build Q(s) for Example 3, reduce it to the four-term form and list the
//! structural cases that match the matrix.
//!
//! cargo run --example charfn_cases

use fracstab::charfn::GeneralCharFn;
use fracstab::classifier::ClassificationReport;
use fracstab::model::MultiOrderSystem;

fn main() {
    let sys = MultiOrderSystem::linear(
        [0.4, 0.3, 0.5],
        [[-3.0, 0.0, 1.5], [-0.5, 0.0, 0.5], [6.0, -1.0, -3.0]],
        [1.0; 3],
    )
    .validate()
    .expect("valid system");

    let q = GeneralCharFn::build(&sys.order, &sys.matrix);
    println!("Q(s) = {q}");
    let simple = q.to_simple().expect("reducible");
    println!("simple form: {}", simple.render());
    let rho = simple.rho_set().expect("beta4 < 2");
    println!("rho = {:?}\nrho~ = {:?}\n", rho.rho, rho.rho_tilde);

    let report = ClassificationReport::new(&sys.order, &sys.matrix);
    println!("matching cases: {:?}", report.case_ids());
    print!("{report}");
}
