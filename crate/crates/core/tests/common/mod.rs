//! Random system generators shared by the integration tests.
#![allow(dead_code)]

use fracstab::classifier::{Condition, CASE_CONDITIONS};
use fracstab::model::MultiOrderSystem;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Entries on which the given case equalities hold exactly, all other
/// entries generic.
pub fn case_matrix(case: &[Condition; 3], rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let mut e = [[0.0; 3]; 3];
    for row in e.iter_mut() {
        for v in row.iter_mut() {
            *v = signed(rng, 0.1, 2.0);
        }
    }
    for c in case {
        if let Condition::DiagZero(k) = *c {
            e[k - 1][k - 1] = 0.0;
        }
    }
    for c in case {
        if let Condition::MinorZero(k) = *c {
            let (i, j) = match k {
                1 => (1, 2),
                2 => (0, 2),
                _ => (0, 1),
            };
            e[j][i] = e[i][i] * e[j][j] / e[i][j];
        }
    }
    e
}

/// Zero diagonal with some of the three 2x2 products knocked out, which
/// produces the one- and two-term shapes several criteria need.
pub fn sparse_zero_diagonal(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    loop {
        let mut e = [[0.0; 3]; 3];
        for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)] {
            e[i][j] = signed(rng, 0.05, 3.0);
        }
        for (i, j) in [(1, 0), (2, 0), (2, 1)] {
            if rng.gen_bool(0.6) {
                e[i][j] = 0.0;
            }
        }
        let det = e[0][1] * e[1][2] * e[2][0] + e[0][2] * e[1][0] * e[2][1];
        if det.abs() > 1e-3 {
            return e;
        }
    }
}

/// A reducible system with total order below 2.
pub fn reducible_system(rng: &mut ChaCha8Rng) -> MultiOrderSystem {
    let alpha: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.05..0.66));
    let a = if rng.gen_bool(0.5) {
        sparse_zero_diagonal(rng)
    } else {
        let k = rng.gen_range(0..CASE_CONDITIONS.len());
        case_matrix(&CASE_CONDITIONS[k], rng)
    };
    MultiOrderSystem::linear(alpha, a, [0.0; 3])
}
