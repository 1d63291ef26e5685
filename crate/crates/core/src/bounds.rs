//! Iteration ceilings used as non-termination guards and as the reference
//! line in sweep output.

use num_traits::One;

use crate::error::Result;
use crate::rational::{ceil_log_below_one, int, Rational};

/// `ceil(log2 n)` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u64 {
    assert!(n >= 1);
    (64 - (n - 1).leading_zeros()) as u64
}

/// `nm * (ceil(log_gamma(1 - gamma)) + 1)`: outer RMDP iterations.
pub fn rmdp_outer_bound(n_states: usize, n_actions: usize, gamma: &Rational) -> Result<u128> {
    let l = ceil_log_below_one(gamma, &(Rational::one() - gamma))?;
    Ok(n_states as u128 * n_actions as u128 * (l as u128 + 1))
}

/// `L = ceil(log_gamma((1 - gamma) / 2n))`, the halving window.
pub fn rmc_halving_window(n_states: usize, gamma: &Rational) -> Result<u64> {
    let x = (Rational::one() - gamma) / int(2 * n_states as i64);
    ceil_log_below_one(gamma, &x)
}

/// `n^3 * ceil(log2 n + 1) * (L + 1)`: a loose ceiling on RMC iterations.
pub fn rmc_iteration_bound(n_states: usize, gamma: &Rational) -> Result<u128> {
    let n = n_states as u128;
    let log_term = ceil_log2(n_states as u64) as u128 + 1;
    Ok(n * n * n * log_term * (rmc_halving_window(n_states, gamma)? as u128 + 1))
}

/// `ceil(log_gamma(1 - gamma))`, the action-elimination window.
pub fn rmdp_elimination_window(gamma: &Rational) -> Result<u64> {
    ceil_log_below_one(gamma, &(Rational::one() - gamma))
}

/// `2 (n+2) (ceil(log2(n+2)) + 1)`: ceiling on halving events per pair.
pub fn halving_event_ceiling(n_states: usize) -> u64 {
    let w = n_states as u64 + 2;
    2 * w * (ceil_log2(w) + 1)
}
