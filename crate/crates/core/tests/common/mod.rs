//! Random model generators shared by the integration tests.
#![allow(dead_code)]

use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use robustpi_core::rational::{int, ratio};
use robustpi_core::{Norm, Rational, Rmc, Rmdp, Transition, UncertaintySet, ValueVector};

pub fn rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: i64) -> Rational {
    let den = rng.gen_range(1..=max_den);
    ratio(rng.gen_range(lo * den..=hi * den), den)
}

/// Positive integer weights normalized to one. Some entries may be zero.
pub fn distribution(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.15) {
                    0
                } else {
                    rng.gen_range(1..=12)
                }
            })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| ratio(x, total)).collect();
        }
    }
}

pub fn radius(rng: &mut ChaCha8Rng) -> Rational {
    match rng.gen_range(0..5) {
        0 => Rational::zero(),
        1 => ratio(rng.gen_range(1..=4), 1),
        _ => ratio(rng.gen_range(1..=8), rng.gen_range(4..=16)),
    }
}

pub fn norm(rng: &mut ChaCha8Rng) -> Norm {
    if rng.gen_bool(0.5) {
        Norm::L1
    } else {
        Norm::LInf
    }
}

pub fn discount(rng: &mut ChaCha8Rng) -> Rational {
    [
        ratio(0, 1),
        ratio(1, 3),
        ratio(1, 2),
        ratio(4, 5),
        ratio(9, 10),
    ][rng.gen_range(0..5)]
    .clone()
}

fn transition(rng: &mut ChaCha8Rng, n: usize) -> Transition {
    let k = rng.gen_range(1..=n.min(4));
    let mut succ: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        succ.swap(i, j);
    }
    succ.truncate(k);
    Transition::new(
        succ,
        UncertaintySet::new(distribution(rng, k), radius(rng), norm(rng)),
    )
}

/// Random model with `n` states and `m` actions; costs depend on the action.
pub fn rmdp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Rmdp {
    let cost = (0..n * m).map(|_| rational(rng, -5, 5, 6)).collect();
    let transitions = (0..n * m).map(|_| transition(rng, n)).collect();
    Rmdp {
        n_states: n,
        n_actions: m,
        cost,
        transitions,
        discount: discount(rng),
    }
}

pub fn rmc(rng: &mut ChaCha8Rng, n: usize) -> Rmc {
    rmdp(rng, n, 1).to_rmc().unwrap()
}

pub fn values(rng: &mut ChaCha8Rng, n: usize) -> ValueVector {
    ValueVector((0..n).map(|_| rational(rng, -10, 10, 8)).collect())
}

pub fn one() -> Rational {
    int(1)
}
