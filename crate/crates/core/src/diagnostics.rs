//! Post-hoc checks of the convergence bounds on recorded solver traces.
//!
//! Every check is phrased as `lhs <= rhs` over exact rationals. A report has
//! one line per check class and iteration, carrying the witness with the
//! smallest slack `rhs - lhs` (so a failing line shows a violating witness).

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::bounds::{
    halving_event_ceiling, rmc_halving_window, rmdp_elimination_window, rmdp_outer_bound,
};
use crate::error::{Error, Result};
use crate::model::{induce_rmc, AdversaryPolicy, Rmc, Rmdp, ValueVector};
use crate::oracles::{apply_bellman, SortedSuccessorView};
use crate::rational::{floor_log2, int, pow, Rational};
use crate::rmc_pi::RmcSolveTrace;
use crate::rmdp_pi::{q_table, ImprovementMode, RmdpSolveTrace};

/// Successor positions of every state, sorted by descending `v*` with ties by
/// ascending state id.
pub fn successor_orders(model: &Rmc, v_star: &ValueVector) -> Vec<Vec<usize>> {
    model
        .transitions
        .iter()
        .map(|t| {
            SortedSuccessorView::new(&t.local_values(v_star), &t.successors)
                .order()
                .to_vec()
        })
        .collect()
}

/// `F(s,i)`: probability an adversary puts on the first `i+1` successors of
/// `s` in the `v*` order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulativeGapTable {
    pub rows: Vec<Vec<Rational>>,
}

impl CumulativeGapTable {
    pub fn get(&self, s: usize, i: usize) -> &Rational {
        &self.rows[s][i]
    }
}

pub fn cumulative_gaps(
    model: &Rmc,
    v_star: &ValueVector,
    adversary: &AdversaryPolicy,
) -> Result<CumulativeGapTable> {
    adversary.check_feasible(model)?;
    if v_star.len() != model.n_states() {
        return Err(Error::Dimension(format!(
            "value vector has {} entries for {} states",
            v_star.len(),
            model.n_states()
        )));
    }
    let orders = successor_orders(model, v_star);
    Ok(cumulative_with_orders(&orders, adversary))
}

fn cumulative_with_orders(
    orders: &[Vec<usize>],
    adversary: &AdversaryPolicy,
) -> CumulativeGapTable {
    let rows = orders
        .iter()
        .zip(&adversary.rows)
        .map(|(order, dist)| {
            let mut acc = Rational::zero();
            order
                .iter()
                .map(|&pos| {
                    acc += &dist[pos];
                    acc.clone()
                })
                .collect()
        })
        .collect();
    CumulativeGapTable { rows }
}

/// Largest potential and every pair attaining it; `None` when the table is empty.
pub type Maximizers = Option<(Rational, Vec<(usize, usize)>)>;

/// `f(s,i) = (F*(s,i) - F(s,i)) (v*_{s_i} - v*_{s_{i+1}})` for all but the
/// last index of each state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PotentialTable {
    pub rows: Vec<Vec<Rational>>,
}

impl PotentialTable {
    /// Largest potential with every pair attaining it. `None` when no state
    /// has two successors.
    pub fn maximizers(&self) -> Maximizers {
        let max = self.rows.iter().flatten().max()?.clone();
        let pairs = self
            .rows
            .iter()
            .enumerate()
            .flat_map(|(s, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, f)| **f == max)
                    .map(move |(i, _)| (s, i))
            })
            .collect();
        Some((max, pairs))
    }
}

pub fn potentials(
    model: &Rmc,
    v_star: &ValueVector,
    optimal: &CumulativeGapTable,
    current: &CumulativeGapTable,
) -> PotentialTable {
    let orders = successor_orders(model, v_star);
    potentials_with_orders(model, v_star, &orders, optimal, current)
}

fn potentials_with_orders(
    model: &Rmc,
    v_star: &ValueVector,
    orders: &[Vec<usize>],
    optimal: &CumulativeGapTable,
    current: &CumulativeGapTable,
) -> PotentialTable {
    let rows = orders
        .iter()
        .enumerate()
        .map(|(s, order)| {
            let succ = &model.transitions[s].successors;
            (0..order.len().saturating_sub(1))
                .map(|i| {
                    let drop = &v_star[succ[order[i]]] - &v_star[succ[order[i + 1]]];
                    (optimal.get(s, i) - current.get(s, i)) * drop
                })
                .collect()
        })
        .collect();
    PotentialTable { rows }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    FDominance,
    PotentialNonNegative,
    LowerBound,
    UpperBound,
    Halving,
    HalvingEvents,
    Monotone,
    Decay,
    FixedPoint,
    AdvantageNonNegative,
    ActionElimination,
    IterationBound,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::FDominance => "f_dominance",
            Check::PotentialNonNegative => "potential_nonneg",
            Check::LowerBound => "lower_bound",
            Check::UpperBound => "upper_bound",
            Check::Halving => "halving",
            Check::HalvingEvents => "halving_events",
            Check::Monotone => "monotone",
            Check::Decay => "decay",
            Check::FixedPoint => "fixed_point",
            Check::AdvantageNonNegative => "advantage_nonneg",
            Check::ActionElimination => "action_elimination",
            Check::IterationBound => "iteration_bound",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    /// Nothing to check at this iteration.
    Vacuous,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Vacuous => "vacuous",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Witness {
    None,
    State(usize),
    /// `(state, successor index)` for chains, `(state, action)` for MDPs.
    Pair(usize, usize),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::None => f.write_str("-"),
            Witness::State(s) => write!(f, "s={s}"),
            Witness::Pair(s, i) => write!(f, "({s},{i})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckLine {
    /// Outer iteration whose inner solve this line belongs to.
    pub outer: Option<usize>,
    pub iter: usize,
    pub check: Check,
    pub status: Status,
    pub witness: Witness,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.outer {
            Some(o) => write!(f, "{o}.{}", self.iter)?,
            None => write!(f, "{}", self.iter)?,
        }
        write!(
            f,
            ", {}, {}, {}, {}, {}",
            self.check, self.status, self.witness, self.lhs, self.rhs
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| l.status == Status::Fail)
    }

    pub fn is_clean(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn count(&self, check: Check, status: Status) -> usize {
        self.lines
            .iter()
            .filter(|l| l.check == check && l.status == status)
            .count()
    }

    fn extend(&mut self, other: Report, outer: usize) {
        self.lines.extend(other.lines.into_iter().map(|mut l| {
            l.outer = Some(outer);
            l
        }));
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Tracks the instance of `lhs <= rhs` with the least slack.
struct Tightest {
    best: Option<(Rational, Witness, Rational, Rational)>,
}

impl Tightest {
    fn new() -> Self {
        Tightest { best: None }
    }

    fn observe(&mut self, witness: Witness, lhs: Rational, rhs: Rational) {
        let slack = &rhs - &lhs;
        if self.best.as_ref().is_none_or(|(b, ..)| slack < *b) {
            self.best = Some((slack, witness, lhs, rhs));
        }
    }

    fn line(self, iter: usize, check: Check) -> CheckLine {
        match self.best {
            Some((slack, witness, lhs, rhs)) => CheckLine {
                outer: None,
                iter,
                check,
                status: if slack < Rational::zero() {
                    Status::Fail
                } else {
                    Status::Pass
                },
                witness,
                lhs,
                rhs,
            },
            None => CheckLine {
                outer: None,
                iter,
                check,
                status: Status::Vacuous,
                witness: Witness::None,
                lhs: Rational::zero(),
                rhs: Rational::zero(),
            },
        }
    }
}

fn single(iter: usize, check: Check, witness: Witness, lhs: Rational, rhs: Rational) -> CheckLine {
    let mut t = Tightest::new();
    t.observe(witness, lhs, rhs);
    t.line(iter, check)
}

/// Checks a robust chain trace: F-dominance, potential non-negativity, the
/// lower and upper sandwich bounds, halving of the maximizing gap, value
/// monotonicity, geometric decay and the number of binary-scale drops per
/// pair.
pub fn verify_trace(model: &Rmc, trace: &RmcSolveTrace) -> Result<Report> {
    let n = model.n_states();
    let gamma = &model.discount;
    let v_star = trace.values();
    let orders = successor_orders(model, v_star);
    let f_star = cumulative_with_orders(&orders, trace.adversary());
    let window = rmc_halving_window(n, gamma)? as usize;
    let upper_factor = gamma * int(n as i64) / (Rational::one() - gamma);

    let mut report = Report::default();
    let mut gaps: Vec<Vec<Vec<Rational>>> = Vec::with_capacity(trace.iterations());
    let mut maximizers: Vec<Maximizers> = Vec::new();
    let initial_error = trace.iterates[0].values.distance(v_star);

    for (t, it) in trace.iterates.iter().enumerate() {
        it.adversary.check_feasible(model)?;
        let f_tau = cumulative_with_orders(&orders, &it.adversary);
        let pot = potentials_with_orders(model, v_star, &orders, &f_star, &f_tau);

        let mut dom = Tightest::new();
        for (s, (row_tau, row_star)) in f_tau.rows.iter().zip(&f_star.rows).enumerate() {
            for (i, (a, b)) in row_tau.iter().zip(row_star).enumerate() {
                dom.observe(Witness::Pair(s, i), a.clone(), b.clone());
            }
        }
        report.lines.push(dom.line(t, Check::FDominance));

        let mut nonneg = Tightest::new();
        let mut lower = Tightest::new();
        for (s, row) in pot.rows.iter().enumerate() {
            let gap = &v_star[s] - &it.values[s];
            for (i, f) in row.iter().enumerate() {
                nonneg.observe(Witness::Pair(s, i), Rational::zero(), f.clone());
                lower.observe(Witness::Pair(s, i), gamma * f, gap.clone());
            }
        }
        report
            .lines
            .push(nonneg.line(t, Check::PotentialNonNegative));
        report.lines.push(lower.line(t, Check::LowerBound));

        let error = it.values.distance(v_star);
        let best = pot.maximizers();
        let f_hat = best
            .as_ref()
            .map(|(f, _)| f.clone())
            .unwrap_or_else(Rational::zero);
        report.lines.push(single(
            t,
            Check::UpperBound,
            Witness::None,
            error.clone(),
            &upper_factor * &f_hat,
        ));

        if t > 0 {
            let prev = &trace.iterates[t - 1].values;
            let mut mono = Tightest::new();
            for s in 0..n {
                mono.observe(Witness::State(s), prev[s].clone(), it.values[s].clone());
            }
            report.lines.push(mono.line(t, Check::Monotone));
        }
        report.lines.push(single(
            t,
            Check::Decay,
            Witness::None,
            error,
            pow(gamma, t as u32) * &initial_error,
        ));

        gaps.push(
            f_star
                .rows
                .iter()
                .zip(&f_tau.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect(),
        );
        maximizers.push(best);
    }

    let last = trace.iterations() - 1;
    for (t, best) in maximizers.iter().enumerate() {
        let mut halving = Tightest::new();
        if let Some((f_hat, pairs)) = best {
            if *f_hat > Rational::zero() {
                for &(s, i) in pairs {
                    let half = &gaps[t][s][i] / int(2);
                    for later in gaps.iter().skip(t + window + 1) {
                        halving.observe(Witness::Pair(s, i), later[s][i].clone(), half.clone());
                    }
                }
            }
        }
        report.lines.push(halving.line(t, Check::Halving));
    }

    let mut events = Tightest::new();
    for s in 0..n {
        for i in 0..f_star.rows[s].len() {
            let drops = gaps
                .windows(2)
                .filter(|w| scale_dropped(&w[0][s][i], &w[1][s][i]))
                .count();
            events.observe(
                Witness::Pair(s, i),
                int(drops as i64),
                int(halving_event_ceiling(n) as i64),
            );
        }
    }
    report.lines.push(events.line(last, Check::HalvingEvents));
    Ok(report)
}

/// `after` sits on a lower binary scale than `before` (zero is below all).
fn scale_dropped(before: &Rational, after: &Rational) -> bool {
    if before.is_zero() || after >= before {
        return false;
    }
    after.is_zero() || floor_log2(after) < floor_log2(before)
}

/// Checks a robust MDP trace with the advantage `q*(s,a) - v*_s`: values are
/// non-increasing and decay geometrically, each policy's error is sandwiched
/// by its advantages, a maximum-advantage action is not replayed after the
/// elimination window, the outer count respects its ceiling and `v*` is a
/// fixed point. Every inner chain solve is checked with [`verify_trace`].
pub fn verify_rmdp_trace(model: &Rmdp, trace: &RmdpSolveTrace) -> Result<Report> {
    let (n, m) = (model.n_states, model.n_actions);
    let gamma = &model.discount;
    let v_star = trace.values();
    let q = q_table(model, v_star, ImprovementMode::PerPair)?;
    let best: Vec<Rational> = (0..n)
        .map(|s| q[s * m..(s + 1) * m].iter().min().expect("m >= 1").clone())
        .collect();
    let adv = |s: usize, a: usize| &q[s * m + a] - &best[s];
    let last = trace.outer_iterations() - 1;
    let window = rmdp_elimination_window(gamma)? as usize;
    let mut report = Report::default();

    let mut fixed = Tightest::new();
    for s in 0..n {
        fixed.observe(
            Witness::State(s),
            (&best[s] - &v_star[s]).abs(),
            Rational::zero(),
        );
    }
    report.lines.push(fixed.line(last, Check::FixedPoint));

    let mut nonneg = Tightest::new();
    for s in 0..n {
        for a in 0..m {
            nonneg.observe(Witness::Pair(s, a), Rational::zero(), adv(s, a));
        }
    }
    report
        .lines
        .push(nonneg.line(last, Check::AdvantageNonNegative));

    let initial_error = trace.iterates[0].values.distance(v_star);
    let policies: Vec<_> = trace.policies().collect();
    for (t, it) in trace.iterates.iter().enumerate() {
        if t > 0 {
            let prev = &trace.iterates[t - 1].values;
            let mut mono = Tightest::new();
            for s in 0..n {
                mono.observe(Witness::State(s), it.values[s].clone(), prev[s].clone());
            }
            report.lines.push(mono.line(t, Check::Monotone));
        }
        let error = it.values.distance(v_star);
        report.lines.push(single(
            t,
            Check::Decay,
            Witness::None,
            error.clone(),
            pow(gamma, t as u32) * &initial_error,
        ));

        let mut lower = Tightest::new();
        for s in 0..n {
            lower.observe(
                Witness::State(s),
                adv(s, it.policy[s]),
                &it.values[s] - &v_star[s],
            );
        }
        report.lines.push(lower.line(t, Check::LowerBound));

        let max_adv = (0..n).map(|s| adv(s, it.policy[s])).max().expect("n >= 1");
        let upper = &max_adv / (Rational::one() - gamma);
        report
            .lines
            .push(single(t, Check::UpperBound, Witness::None, error, upper));

        let mut elim = Tightest::new();
        if max_adv > Rational::zero() {
            for s in (0..n).filter(|&s| adv(s, it.policy[s]) == max_adv) {
                let a = it.policy[s];
                let repeats = policies
                    .iter()
                    .skip(t + window + 1)
                    .filter(|p| p[s] == a)
                    .count();
                elim.observe(Witness::Pair(s, a), int(repeats as i64), Rational::zero());
            }
        }
        report.lines.push(elim.line(t, Check::ActionElimination));

        let chain = induce_rmc(model, &it.policy)?;
        report.extend(verify_trace(&chain, &it.inner)?, t);
    }

    let bound = rmdp_outer_bound(n, m, gamma)?;
    report.lines.push(single(
        last,
        Check::IterationBound,
        Witness::None,
        int(trace.outer_iterations() as i64),
        Rational::from_integer(bound.into()),
    ));
    Ok(report)
}

/// `||T v - v||_inf` for a chain, as a report line.
pub fn fixed_point_line(model: &Rmc, values: &ValueVector, iter: usize) -> Result<CheckLine> {
    let tv = apply_bellman(model, values)?;
    Ok(single(
        iter,
        Check::FixedPoint,
        Witness::None,
        tv.distance(values),
        Rational::zero(),
    ))
}
