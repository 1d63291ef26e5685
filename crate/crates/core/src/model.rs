//! Robust MDPs, robust Markov chains, positional policies and the two
//! constructions that turn an RMDP into RMCs: fixing the agent's policy, and
//! the batch chain whose transient values are all one-step improvement
//! quantities.

use std::fmt;
use std::ops::{Deref, Index};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, pow, Rational};

/// Shape of the ball around the nominal distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Norm {
    L1,
    LInf,
    /// General `L_p` ball with integer `p >= 2`. Only the hardness gadget uses
    /// these; the solvers reject them.
    Lp(u32),
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::L1 => f.write_str("l1"),
            Norm::LInf => f.write_str("linf"),
            Norm::Lp(p) => write!(f, "lp:{p}"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "l1" => Ok(Norm::L1),
            "linf" => Ok(Norm::LInf),
            other => {
                let p = other
                    .strip_prefix("lp:")
                    .and_then(|p| p.parse::<u32>().ok())
                    .ok_or_else(|| Error::Parse(format!("unknown norm {other:?}")))?;
                Ok(Norm::Lp(p))
            }
        }
    }
}

/// `{ p in simplex : ||p - nominal||_norm <= radius }` over one successor list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UncertaintySet {
    pub nominal: Vec<Rational>,
    pub radius: Rational,
    pub norm: Norm,
}

impl UncertaintySet {
    pub fn new(nominal: Vec<Rational>, radius: Rational, norm: Norm) -> Self {
        UncertaintySet {
            nominal,
            radius,
            norm,
        }
    }

    /// Zero-radius set around `nominal`.
    pub fn point(nominal: Vec<Rational>) -> Self {
        UncertaintySet::new(nominal, Rational::zero(), Norm::L1)
    }

    pub fn len(&self) -> usize {
        self.nominal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nominal.is_empty()
    }

    /// True when the set holds exactly one distribution.
    pub fn is_singleton(&self) -> bool {
        self.radius.is_zero() || self.nominal.len() == 1
    }

    /// Exact membership: `p` is a distribution and lies in the ball. For
    /// `L_p` the test is `sum |p_i - nominal_i|^p <= radius^p`.
    pub fn contains(&self, p: &[Rational]) -> bool {
        if p.len() != self.nominal.len() {
            return false;
        }
        if p.iter().any(|x| x.is_negative()) {
            return false;
        }
        if p.iter().sum::<Rational>() != Rational::one() {
            return false;
        }
        let diffs = p.iter().zip(&self.nominal).map(|(x, y)| (x - y).abs());
        match self.norm {
            Norm::L1 => diffs.sum::<Rational>() <= self.radius,
            Norm::LInf => diffs.max().unwrap_or_else(Rational::zero) <= self.radius,
            Norm::Lp(e) => diffs.map(|d| pow(&d, e)).sum::<Rational>() <= pow(&self.radius, e),
        }
    }
}

/// Successor list of one (state, action) pair with its uncertainty set.
/// The set's vectors are indexed by position in `successors`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub successors: Vec<usize>,
    pub set: UncertaintySet,
}

impl Transition {
    pub fn new(successors: Vec<usize>, set: UncertaintySet) -> Self {
        Transition { successors, set }
    }

    /// Deterministic self-loop.
    pub fn absorbing(state: usize) -> Self {
        Transition::new(vec![state], UncertaintySet::point(vec![Rational::one()]))
    }

    /// Gathers `values` at the successor positions.
    pub fn local_values(&self, values: &[Rational]) -> Vec<Rational> {
        self.successors.iter().map(|&t| values[t].clone()).collect()
    }
}

/// Robust MDP. Costs are per (state, action); a model whose costs depend only
/// on the state simply repeats them across actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rmdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// Row-major `n_states x n_actions`.
    pub cost: Vec<Rational>,
    /// Row-major `n_states x n_actions`.
    pub transitions: Vec<Transition>,
    pub discount: Rational,
}

impl Rmdp {
    /// Builds a model whose cost depends on the state only.
    pub fn with_state_costs(
        n_actions: usize,
        state_cost: Vec<Rational>,
        transitions: Vec<Transition>,
        discount: Rational,
    ) -> Self {
        let n_states = state_cost.len();
        let cost = state_cost
            .into_iter()
            .flat_map(|c| std::iter::repeat_n(c, n_actions))
            .collect();
        Rmdp {
            n_states,
            n_actions,
            cost,
            transitions,
            discount,
        }
    }

    #[inline]
    pub fn transition(&self, s: usize, a: usize) -> &Transition {
        &self.transitions[s * self.n_actions + a]
    }

    #[inline]
    pub fn cost(&self, s: usize, a: usize) -> &Rational {
        &self.cost[s * self.n_actions + a]
    }

    pub fn norms(&self) -> impl Iterator<Item = Norm> + '_ {
        self.transitions.iter().map(|t| t.set.norm)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_rmdp(self)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    /// Fails unless every set is an `L1` or `L_inf` ball (or a point).
    pub fn ensure_solvable_norms(&self) -> Result<()> {
        ensure_solvable(self.transitions.iter())
    }

    /// Reinterprets a one-action model as a chain.
    pub fn to_rmc(&self) -> Result<Rmc> {
        if self.n_actions != 1 {
            return Err(Error::InvalidArgument(format!(
                "model has {} actions; a chain needs exactly 1",
                self.n_actions
            )));
        }
        Ok(Rmc {
            cost: self.cost.clone(),
            transitions: self.transitions.clone(),
            discount: self.discount.clone(),
        })
    }
}

pub(crate) fn ensure_solvable<'a>(transitions: impl Iterator<Item = &'a Transition>) -> Result<()> {
    for (i, t) in transitions.enumerate() {
        if let Norm::Lp(p) = t.set.norm {
            if !t.set.is_singleton() {
                return Err(Error::Unsupported(format!(
                    "entry {i} uses an L{p} ball; only l1 and linf sets can be solved"
                )));
            }
        }
    }
    Ok(())
}

/// Robust Markov chain: an RMDP with a single action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rmc {
    pub cost: Vec<Rational>,
    pub transitions: Vec<Transition>,
    pub discount: Rational,
}

impl Rmc {
    pub fn n_states(&self) -> usize {
        self.cost.len()
    }

    pub fn to_rmdp(&self) -> Rmdp {
        Rmdp {
            n_states: self.n_states(),
            n_actions: 1,
            cost: self.cost.clone(),
            transitions: self.transitions.clone(),
            discount: self.discount.clone(),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_rmdp(&self.to_rmdp())
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    pub fn ensure_solvable_norms(&self) -> Result<()> {
        ensure_solvable(self.transitions.iter())
    }

    /// The adversary policy that plays every nominal distribution.
    pub fn nominal_policy(&self) -> AdversaryPolicy {
        AdversaryPolicy::new(
            self.transitions
                .iter()
                .map(|t| t.set.nominal.clone())
                .collect(),
        )
    }
}

/// Positional agent policy: one action per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AgentPolicy(pub Vec<usize>);

impl AgentPolicy {
    pub fn uniform(n_states: usize, action: usize) -> Self {
        AgentPolicy(vec![action; n_states])
    }

    pub fn check(&self, model: &Rmdp) -> Result<()> {
        if self.0.len() != model.n_states {
            return Err(Error::Dimension(format!(
                "policy has {} entries for {} states",
                self.0.len(),
                model.n_states
            )));
        }
        if let Some((s, &a)) = self
            .0
            .iter()
            .enumerate()
            .find(|(_, &a)| a >= model.n_actions)
        {
            return Err(Error::InvalidArgument(format!(
                "action {a} at state {s} out of range (model has {} actions)",
                model.n_actions
            )));
        }
        Ok(())
    }
}

impl Deref for AgentPolicy {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

/// Positional adversary policy: one distribution per chain state, indexed by
/// successor position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdversaryPolicy {
    pub rows: Vec<Vec<Rational>>,
}

impl AdversaryPolicy {
    pub fn new(rows: Vec<Vec<Rational>>) -> Self {
        AdversaryPolicy { rows }
    }

    /// Exact feasibility of every row for the chain's uncertainty sets.
    pub fn check_feasible(&self, model: &Rmc) -> Result<()> {
        if self.rows.len() != model.n_states() {
            return Err(Error::Dimension(format!(
                "adversary policy has {} rows for {} states",
                self.rows.len(),
                model.n_states()
            )));
        }
        for (s, (row, t)) in self.rows.iter().zip(&model.transitions).enumerate() {
            if !t.set.contains(row) {
                return Err(Error::InvalidArgument(format!(
                    "adversary distribution at state {s} is outside its uncertainty set"
                )));
            }
        }
        Ok(())
    }
}

/// Exact value per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValueVector(pub Vec<Rational>);

impl ValueVector {
    pub fn zeros(n: usize) -> Self {
        ValueVector(vec![Rational::zero(); n])
    }

    /// `||self - other||_inf`.
    pub fn distance(&self, other: &ValueVector) -> Rational {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Componentwise `self <= other`.
    pub fn dominated_by(&self, other: &ValueVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl Deref for ValueVector {
    type Target = [Rational];

    fn deref(&self) -> &[Rational] {
        &self.0
    }
}

impl From<Vec<Rational>> for ValueVector {
    fn from(v: Vec<Rational>) -> Self {
        ValueVector(v)
    }
}

impl Index<usize> for ValueVector {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

/// Where a validation rule failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Location {
    Model,
    Pair { state: usize, action: usize },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Model => f.write_str("model"),
            Location::Pair { state, action } => write!(f, "(s={state}, a={action})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    NoStates,
    NoActions,
    DiscountOutOfRange(Rational),
    CostCount { expected: usize, found: usize },
    TransitionCount { expected: usize, found: usize },
    EmptySuccessors,
    SuccessorOutOfRange(usize),
    DuplicateSuccessor(usize),
    NominalLength { successors: usize, nominal: usize },
    NegativeNominal(usize),
    NominalSum(Rational),
    NegativeRadius(Rational),
    LpExponent(u32),
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::NoStates => f.write_str("model has no states"),
            Rule::NoActions => f.write_str("model has no actions"),
            Rule::DiscountOutOfRange(g) => {
                write!(
                    f,
                    "discount out of range: {} not in [0,1)",
                    format_rational(g)
                )
            }
            Rule::CostCount { expected, found } => {
                write!(f, "expected {expected} cost entries, found {found}")
            }
            Rule::TransitionCount { expected, found } => {
                write!(f, "expected {expected} transitions, found {found}")
            }
            Rule::EmptySuccessors => f.write_str("empty successor list"),
            Rule::SuccessorOutOfRange(t) => write!(f, "successor {t} out of range"),
            Rule::DuplicateSuccessor(t) => write!(f, "successor {t} listed twice"),
            Rule::NominalLength {
                successors,
                nominal,
            } => write!(
                f,
                "nominal has {nominal} entries for {successors} successors"
            ),
            Rule::NegativeNominal(i) => write!(f, "nominal entry {i} is negative"),
            Rule::NominalSum(sum) => write!(f, "nominal sum {} != 1", format_rational(sum)),
            Rule::NegativeRadius(r) => write!(f, "negative radius {}", format_rational(r)),
            Rule::LpExponent(p) => write!(f, "lp exponent {p} must be at least 2"),
        }
    }
}

/// One failed structural rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: Location,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.rule, self.location)
    }
}

/// Every structural rule the solvers rely on. Empty means well formed.
pub fn validate_rmdp(model: &Rmdp) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut model_rule = |rule| {
        out.push(Violation {
            location: Location::Model,
            rule,
        })
    };
    if model.n_states == 0 {
        model_rule(Rule::NoStates);
    }
    if model.n_actions == 0 {
        model_rule(Rule::NoActions);
    }
    if model.discount.is_negative() || model.discount >= Rational::one() {
        model_rule(Rule::DiscountOutOfRange(model.discount.clone()));
    }
    let pairs = model.n_states * model.n_actions;
    if model.cost.len() != pairs {
        model_rule(Rule::CostCount {
            expected: pairs,
            found: model.cost.len(),
        });
    }
    if model.transitions.len() != pairs {
        model_rule(Rule::TransitionCount {
            expected: pairs,
            found: model.transitions.len(),
        });
        return out;
    }

    for (idx, t) in model.transitions.iter().enumerate() {
        let location = Location::Pair {
            state: idx / model.n_actions.max(1),
            action: idx % model.n_actions.max(1),
        };
        let mut push = |rule| {
            out.push(Violation {
                location: location.clone(),
                rule,
            })
        };
        if t.successors.is_empty() {
            push(Rule::EmptySuccessors);
        }
        let mut seen = vec![false; model.n_states];
        for &succ in &t.successors {
            if succ >= model.n_states {
                push(Rule::SuccessorOutOfRange(succ));
            } else if std::mem::replace(&mut seen[succ], true) {
                push(Rule::DuplicateSuccessor(succ));
            }
        }
        if t.set.nominal.len() != t.successors.len() {
            push(Rule::NominalLength {
                successors: t.successors.len(),
                nominal: t.set.nominal.len(),
            });
        }
        for (i, p) in t.set.nominal.iter().enumerate() {
            if p.is_negative() {
                push(Rule::NegativeNominal(i));
            }
        }
        let sum: Rational = t.set.nominal.iter().sum();
        if !t.set.nominal.is_empty() && sum != Rational::one() {
            push(Rule::NominalSum(sum));
        }
        if t.set.radius.is_negative() {
            push(Rule::NegativeRadius(t.set.radius.clone()));
        }
        if let Norm::Lp(p) = t.set.norm {
            if p < 2 {
                push(Rule::LpExponent(p));
            }
        }
    }
    out
}

/// The chain obtained by fixing the agent's action in every state.
pub fn induce_rmc(model: &Rmdp, policy: &AgentPolicy) -> Result<Rmc> {
    policy.check(model)?;
    let (cost, transitions) = policy
        .iter()
        .enumerate()
        .map(|(s, &a)| (model.cost(s, a).clone(), model.transition(s, a).clone()))
        .unzip();
    Ok(Rmc {
        cost,
        transitions,
        discount: model.discount.clone(),
    })
}

/// Chain whose transient states `z(s,a)` each take one robust step out of
/// `(s,a)` into absorbing copies `x(s)` that are worth exactly `values(s)`.
///
/// State layout: `x(s) = s` for `s < n`, then `z(s,a) = n + s*m + a`. The
/// successor lists of `z(s,a)` are therefore the original lists verbatim.
#[derive(Clone, Debug)]
pub struct BatchRmc {
    pub rmc: Rmc,
    pub n_states: usize,
    pub n_actions: usize,
}

impl BatchRmc {
    pub fn absorbing_state(&self, s: usize) -> usize {
        s
    }

    pub fn pair_state(&self, s: usize, a: usize) -> usize {
        self.n_states + s * self.n_actions + a
    }
}

pub fn build_batch_rmc(model: &Rmdp, values: &ValueVector) -> Result<BatchRmc> {
    if values.len() != model.n_states {
        return Err(Error::Dimension(format!(
            "value vector has {} entries for {} states",
            values.len(),
            model.n_states
        )));
    }
    let one_minus_gamma = Rational::one() - &model.discount;
    let mut cost: Vec<Rational> = values.iter().map(|v| &one_minus_gamma * v).collect();
    let mut transitions: Vec<Transition> = (0..model.n_states).map(Transition::absorbing).collect();
    cost.extend(model.cost.iter().cloned());
    transitions.extend(model.transitions.iter().cloned());
    Ok(BatchRmc {
        rmc: Rmc {
            cost,
            transitions,
            discount: model.discount.clone(),
        },
        n_states: model.n_states,
        n_actions: model.n_actions,
    })
}
