//! Deterministic generators for the five benchmark environments. Every
//! generator returns a nominal model (radius 0) with costs equal to negated
//! rewards; [`attach_uncertainty`] turns it into a robust one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Roots;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{Norm, Rmdp, Transition, UncertaintySet};
use crate::rational::{int, pow, ratio, round_half_even, Rational};

/// Builds a transition from `(successor, probability)` pairs, merging repeats
/// and sorting by successor.
fn transition(pairs: impl IntoIterator<Item = (usize, Rational)>) -> Transition {
    let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
    for (s, p) in pairs {
        if p.is_zero() {
            continue;
        }
        *merged.entry(s).or_insert_with(Rational::zero) += p;
    }
    let (successors, nominal) = merged.into_iter().unzip();
    Transition::new(successors, UncertaintySet::point(nominal))
}

fn check_gamma(gamma: &Rational) -> Result<()> {
    if *gamma < Rational::zero() || *gamma >= Rational::one() {
        return Err(Error::InvalidArgument("discount must lie in [0,1)".into()));
    }
    Ok(())
}

/// Gridworld actions, in index order.
pub const GRID_ACTIONS: [(i64, i64); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

/// `k x k` grid, state `y*k + x`. Actions up, right, down, left move as
/// intended with probability 8/10 and slip to each perpendicular direction
/// with 1/10; leaving the grid means staying put. The goal `(k-1, k-1)` and
/// the trap `(floor((k-1)/2), k-1-floor((k-1)/2))` are absorbing.
pub fn gridworld(k: usize, gamma: &Rational) -> Result<Rmdp> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "gridworld needs k >= 2, got {k}"
        )));
    }
    check_gamma(gamma)?;
    let idx = |x: usize, y: usize| y * k + x;
    let goal = idx(k - 1, k - 1);
    let trap_x = (k - 1) / 2;
    let trap = idx(trap_x, k - 1 - trap_x);
    let step = |x: usize, y: usize, (dx, dy): (i64, i64)| -> usize {
        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
        if nx < 0 || ny < 0 || nx >= k as i64 || ny >= k as i64 {
            idx(x, y)
        } else {
            idx(nx as usize, ny as usize)
        }
    };

    let mut cost = Vec::with_capacity(k * k);
    let mut transitions = Vec::with_capacity(4 * k * k);
    for y in 0..k {
        for x in 0..k {
            let s = idx(x, y);
            let c = if s == goal {
                int(-1)
            } else if s == trap {
                int(1)
            } else {
                ratio(1, 100)
            };
            for dir in GRID_ACTIONS {
                cost.push(c.clone());
                if s == goal || s == trap {
                    transitions.push(Transition::absorbing(s));
                    continue;
                }
                let (left, right) = ((dir.1, -dir.0), (-dir.1, dir.0));
                transitions.push(transition([
                    (step(x, y, dir), ratio(8, 10)),
                    (step(x, y, left), ratio(1, 10)),
                    (step(x, y, right), ratio(1, 10)),
                ]));
            }
        }
    }
    Ok(Rmdp {
        n_states: k * k,
        n_actions: 4,
        cost,
        transitions,
        discount: gamma.clone(),
    })
}

/// Largest demand for an inventory of `n` levels.
pub fn inventory_max_demand(n: usize) -> usize {
    1.max((n - 1) / 2)
}

/// Demand distribution on `0..=d_max`: triangular weights `m - |d-m| + 1`
/// with `m = floor(d_max / 2)`, normalized. Entries may be zero.
pub fn inventory_demand(n: usize) -> Vec<Rational> {
    let d_max = inventory_max_demand(n) as i64;
    let m = d_max / 2;
    let weights: Vec<i64> = (0..=d_max)
        .map(|d| (m - (d - m).abs() + 1).max(0))
        .collect();
    let total: i64 = weights.iter().sum();
    weights.into_iter().map(|w| ratio(w, total)).collect()
}

/// Order quantities `{0, round_half_even(d_max/2), d_max}`.
pub fn inventory_orders(n: usize) -> [usize; 3] {
    let d_max = inventory_max_demand(n);
    let mid = round_half_even(&ratio(d_max as i64, 2));
    let mid: usize = mid.try_into().expect("small order quantity");
    [0, mid, d_max]
}

/// Inventory levels `0..n`. Ordering `q` raises the stock to
/// `y = min(s + q, n - 1)`; demand `d` then leaves `max(y - d, 0)`. The
/// expected profit is `E[min(y, d)] - 1/10 E[max(y - d, 0)] - 1/2 (y - s)`.
pub fn inventory(n: usize, gamma: &Rational) -> Result<Rmdp> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "inventory needs n >= 2, got {n}"
        )));
    }
    check_gamma(gamma)?;
    let demand = inventory_demand(n);
    let orders = inventory_orders(n);
    let (mut cost, mut transitions) = (Vec::new(), Vec::new());
    for s in 0..n {
        for &q in &orders {
            let y = (s + q).min(n - 1);
            let mut profit = -(ratio(1, 2) * int((y - s) as i64));
            let mut next = Vec::new();
            for (d, p) in demand.iter().enumerate() {
                let sold = y.min(d);
                let left = y - sold;
                profit += p * (int(sold as i64) - ratio(1, 10) * int(left as i64));
                next.push((left, p.clone()));
            }
            cost.push(-profit);
            transitions.push(transition(next));
        }
    }
    Ok(Rmdp {
        n_states: n,
        n_actions: 3,
        cost,
        transitions,
        discount: gamma.clone(),
    })
}

pub const MACHINE_OPERATE: usize = 0;
pub const MACHINE_REPAIR: usize = 1;
pub const MACHINE_REPLACE: usize = 2;

/// Degradation levels `0..n`, level `n-1` absorbing. Operating earns
/// `(n-1-s)/(n-1)` and degrades with probability 1/3; repairing costs 1/4
/// and improves with probability 3/4; replacing costs 1/2 and resets to 0.
pub fn machine_replacement(n: usize, gamma: &Rational) -> Result<Rmdp> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "machine replacement needs n >= 2, got {n}"
        )));
    }
    check_gamma(gamma)?;
    let (mut cost, mut transitions) = (Vec::new(), Vec::new());
    for s in 0..n {
        cost.push(-ratio((n - 1 - s) as i64, (n - 1) as i64));
        cost.push(ratio(1, 4));
        cost.push(ratio(1, 2));
        if s == n - 1 {
            transitions.extend((0..3).map(|_| Transition::absorbing(s)));
            continue;
        }
        transitions.push(transition([(s + 1, ratio(1, 3)), (s, ratio(2, 3))]));
        transitions.push(transition([
            (s.saturating_sub(1), ratio(3, 4)),
            (s, ratio(1, 4)),
        ]));
        transitions.push(transition([(0, int(1))]));
    }
    Ok(Rmdp {
        n_states: n,
        n_actions: 3,
        cost,
        transitions,
        discount: gamma.clone(),
    })
}

/// SplitMix64 (Steele, Lea and Flood). State advances by
/// `0x9E3779B97F4A7C15`; output mixes with multipliers `0xBF58476D1CE4E5B9`
/// and `0x94D049BB133111EB` and shifts 30, 27, 31.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `0..bound` by the multiply-high map `(x * bound) >> 64`.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}

pub const GARNET_ACTIONS: usize = 4;
pub const GARNET_BRANCHING: usize = 3;

/// Random model with 4 actions and 3 successors per pair. For each state,
/// then each action, the generator draws: three distinct successors with
/// `below(n)` (redrawing repeats), one weight `1 + below(1000)` per
/// successor in draw order, then the reward `below(11)`.
pub fn garnet(n: usize, seed: u64, gamma: &Rational) -> Result<Rmdp> {
    if n < GARNET_BRANCHING {
        return Err(Error::InvalidArgument(format!(
            "garnet needs n >= 3, got {n}"
        )));
    }
    check_gamma(gamma)?;
    let mut rng = SplitMix64::new(seed);
    let (mut cost, mut transitions) = (Vec::new(), Vec::new());
    for _s in 0..n {
        for _a in 0..GARNET_ACTIONS {
            let mut succ: Vec<usize> = Vec::with_capacity(GARNET_BRANCHING);
            while succ.len() < GARNET_BRANCHING {
                let t = rng.below(n as u64) as usize;
                if !succ.contains(&t) {
                    succ.push(t);
                }
            }
            let weights: Vec<i64> = (0..GARNET_BRANCHING)
                .map(|_| 1 + rng.below(1000) as i64)
                .collect();
            let total: i64 = weights.iter().sum();
            let reward = rng.below(11) as i64;
            cost.push(int(-reward));
            transitions.push(transition(
                succ.into_iter()
                    .zip(weights.into_iter().map(|w| ratio(w, total))),
            ));
        }
    }
    Ok(Rmdp {
        n_states: n,
        n_actions: GARNET_ACTIONS,
        cost,
        transitions,
        discount: gamma.clone(),
    })
}

pub const CHAIN_LEAF: usize = 0;
pub const CHAIN_PATH: usize = 1;

/// Path states `0..k`, leaves `k..2k`, sink `2k`. From path state `i`,
/// `path` advances to `i+1` (the sink after `k-1`) and `leaf` jumps to leaf
/// `i`. Rewards: 0 on the path, 1 on leaves, `gamma^-(k+1)` on the sink.
pub fn long_chain(k: usize, gamma: &Rational) -> Result<Rmdp> {
    if k < 1 {
        return Err(Error::InvalidArgument("long chain needs k >= 1".into()));
    }
    check_gamma(gamma)?;
    if gamma.is_zero() {
        return Err(Error::InvalidArgument(
            "long chain sink reward gamma^-(k+1) is undefined at gamma = 0".into(),
        ));
    }
    let n = 2 * k + 1;
    let sink = 2 * k;
    let sink_reward = pow(&gamma.recip(), k as u32 + 1);
    let (mut cost, mut transitions) = (Vec::new(), Vec::new());
    for s in 0..n {
        let c = if s < k {
            Rational::zero()
        } else if s < sink {
            int(-1)
        } else {
            -sink_reward.clone()
        };
        cost.extend([c.clone(), c]);
        if s < k {
            transitions.push(transition([(k + s, int(1))]));
            transitions.push(transition([(if s + 1 < k { s + 1 } else { sink }, int(1))]));
        } else {
            transitions.extend([Transition::absorbing(s), Transition::absorbing(s)]);
        }
    }
    Ok(Rmdp {
        n_states: n,
        n_actions: 2,
        cost,
        transitions,
        discount: gamma.clone(),
    })
}

/// Replaces every set by `(nominal, delta, norm)`.
pub fn attach_uncertainty(model: &Rmdp, delta: &Rational, norm: Norm) -> Result<Rmdp> {
    if *delta < Rational::zero() {
        return Err(Error::InvalidArgument("radius must be non-negative".into()));
    }
    let mut out = model.clone();
    for t in out.transitions.iter_mut() {
        t.set.radius = delta.clone();
        t.set.norm = norm;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BenchmarkKind {
    Gridworld,
    Inventory,
    MachineReplacement,
    Garnet,
    LongChain,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 5] = [
        BenchmarkKind::Gridworld,
        BenchmarkKind::Inventory,
        BenchmarkKind::MachineReplacement,
        BenchmarkKind::Garnet,
        BenchmarkKind::LongChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::Gridworld => "gridworld",
            BenchmarkKind::Inventory => "inventory",
            BenchmarkKind::MachineReplacement => "machine_replacement",
            BenchmarkKind::Garnet => "garnet",
            BenchmarkKind::LongChain => "long_chain",
        }
    }

    /// The generator parameter closest to a target state count: the grid
    /// side `floor(sqrt(n))`, the chain length `floor((n-1)/2)`, else `n`.
    pub fn parameter_for_size(self, n: usize) -> usize {
        match self {
            BenchmarkKind::Gridworld => n.sqrt(),
            BenchmarkKind::LongChain => n.saturating_sub(1) / 2,
            _ => n,
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchmarkKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown benchmark {s:?}")))
    }
}

/// A fully parameterized benchmark instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchmarkSpec {
    pub kind: BenchmarkKind,
    /// Generator parameter: grid side, chain length, or state count.
    pub param: usize,
    pub seed: u64,
    pub gamma: Rational,
    pub delta: Rational,
    pub norm: Norm,
}

impl BenchmarkSpec {
    pub fn build(&self) -> Result<Rmdp> {
        let g = &self.gamma;
        let nominal = match self.kind {
            BenchmarkKind::Gridworld => gridworld(self.param, g)?,
            BenchmarkKind::Inventory => inventory(self.param, g)?,
            BenchmarkKind::MachineReplacement => machine_replacement(self.param, g)?,
            BenchmarkKind::Garnet => garnet(self.param, self.seed, g)?,
            BenchmarkKind::LongChain => long_chain(self.param, g)?,
        };
        attach_uncertainty(&nominal, &self.delta, self.norm)
    }
}
