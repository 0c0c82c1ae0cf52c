mod common;

use common::{case_matrix, signed};
use fracstab::classifier::{classify, extract_simple, predicted_beta, StructuralCheck, CASE_CONDITIONS};
use fracstab::model::{MultiOrder, SystemMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Orders whose sums and differences stay well apart, so no two surviving
/// exponents merge.
fn order(rng: &mut ChaCha8Rng) -> MultiOrder {
    loop {
        let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.05..1.0));
        let mut cands = vec![a[0], a[1], a[2], a[0] + a[1], a[0] + a[2], a[1] + a[2]];
        cands.sort_by(f64::total_cmp);
        if cands.windows(2).all(|w| w[1] - w[0] > 1e-3) {
            return MultiOrder::new(a);
        }
    }
}

#[test]
fn constructed_instances_report_their_case_and_beta() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (k, conds) in CASE_CONDITIONS.iter().enumerate() {
        let id = k as u8 + 1;
        for _ in 0..1000 {
            let o = order(&mut rng);
            let a = SystemMatrix::new(case_matrix(conds, &mut rng));
            let matches = classify(&o, &a);
            let m = matches
                .iter()
                .find(|m| m.case_id == id)
                .unwrap_or_else(|| panic!("case {id} not reported for {a:?}"));
            assert_eq!(m.structural, StructuralCheck::Agrees, "case {id}, {o:?}, {a:?}");
            let q = extract_simple(&o, &a).unwrap();
            let pb = predicted_beta(id, &o);
            for i in 0..3 {
                assert!((pb[i] - q.beta[i]).abs() <= 1e-12, "case {id}: {pb:?} vs {:?}", q.beta);
            }
        }
    }
}

#[test]
fn classification_is_permutation_consistent() {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let betas = |o: &MultiOrder, a: &SystemMatrix| {
        let mut v: Vec<[u64; 3]> = classify(o, a)
            .iter()
            .map(|m| {
                let mut b = m.predicted_beta;
                b.sort_by(f64::total_cmp);
                b.map(|x| (x * 1e9).round() as u64)
            })
            .collect();
        v.sort();
        v
    };
    for conds in CASE_CONDITIONS.iter() {
        for _ in 0..50 {
            let o = order(&mut rng);
            let a = SystemMatrix::new(case_matrix(conds, &mut rng));
            let base = betas(&o, &a);
            assert!(!base.is_empty());
            for p in perms {
                let po = MultiOrder::new(p.map(|i| o.alpha[i]));
                assert_eq!(betas(&po, &a.permuted(p)), base, "perm {p:?}");
            }
        }
    }
}

#[test]
fn generic_matrix_matches_no_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let o = order(&mut rng);
        let e: [[f64; 3]; 3] = std::array::from_fn(|_| std::array::from_fn(|_| signed(&mut rng, 0.3, 2.0)));
        let a = SystemMatrix::new(e);
        let minors_ok = (0..3).all(|k| a.principal_minor(k).abs() > 1e-3);
        if minors_ok {
            assert!(classify(&o, &a).is_empty());
        }
    }
}
