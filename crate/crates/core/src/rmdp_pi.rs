//! Policy iteration for robust MDPs. Each agent policy is evaluated by solving
//! its induced chain with [`rmc_policy_iteration`]; the improvement step needs
//! every `c(s,a) + gamma * max_p p.v`, computed either pair by pair or by one
//! solve of the batch chain.

use num_traits::Zero;

use crate::bounds::rmdp_outer_bound;
use crate::error::{Error, Result};
use crate::model::{build_batch_rmc, induce_rmc, AdversaryPolicy, AgentPolicy, Rmdp, ValueVector};
use crate::oracles::{q_value, worst_case};
use crate::rational::Rational;
use crate::rmc_pi::{rmc_policy_iteration, RmcSolveTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ImprovementMode {
    /// One oracle call per (state, action).
    PerPair,
    /// One policy-iteration solve of the batch chain.
    BatchRmc,
}

impl std::str::FromStr for ImprovementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perpair" => Ok(ImprovementMode::PerPair),
            "batch" => Ok(ImprovementMode::BatchRmc),
            other => Err(Error::Parse(format!("unknown improvement mode {other:?}"))),
        }
    }
}

/// One evaluated agent policy.
#[derive(Clone, Debug)]
pub struct RmdpIterate {
    pub policy: AgentPolicy,
    /// The adversary's optimal response to `policy`.
    pub adversary: AdversaryPolicy,
    pub values: ValueVector,
    /// The inner solve that produced `values`.
    pub inner: RmcSolveTrace,
}

#[derive(Clone, Debug)]
pub struct RmdpSolveTrace {
    pub iterates: Vec<RmdpIterate>,
}

impl RmdpSolveTrace {
    /// Number of agent policies evaluated. Always at least one.
    pub fn outer_iterations(&self) -> usize {
        self.iterates.len()
    }

    /// Number of times the agent changed its policy.
    pub fn policy_switches(&self) -> usize {
        self.iterates.len() - 1
    }

    /// Sum of inner chain iterations spent on policy evaluation.
    pub fn inner_iterations_total(&self) -> usize {
        self.iterates.iter().map(|it| it.inner.iterations()).sum()
    }

    pub fn values(&self) -> &ValueVector {
        &self.last().values
    }

    pub fn policy(&self) -> &AgentPolicy {
        &self.last().policy
    }

    pub fn adversary(&self) -> &AdversaryPolicy {
        &self.last().adversary
    }

    pub fn policies(&self) -> impl Iterator<Item = &AgentPolicy> {
        self.iterates.iter().map(|it| &it.policy)
    }

    fn last(&self) -> &RmdpIterate {
        self.iterates
            .last()
            .expect("a trace holds at least one iterate")
    }
}

/// All `q(s,a) = c(s,a) + gamma * max_{p in P(s,a)} p.v`, row-major.
pub fn q_table(model: &Rmdp, values: &ValueVector, mode: ImprovementMode) -> Result<Vec<Rational>> {
    match mode {
        ImprovementMode::PerPair => (0..model.n_states)
            .flat_map(|s| (0..model.n_actions).map(move |a| (s, a)))
            .map(|(s, a)| q_value(model, values, s, a).map(|(q, _)| q))
            .collect(),
        ImprovementMode::BatchRmc => {
            let batch = build_batch_rmc(model, values)?;
            let trace = rmc_policy_iteration(&batch.rmc, None)?;
            if trace.iterations() > 2 {
                return Err(Error::Invariant(format!(
                    "batch chain took {} iterations; at most 2 are possible",
                    trace.iterations()
                )));
            }
            let v = trace.values();
            Ok((0..model.n_states)
                .flat_map(|s| (0..model.n_actions).map(move |a| (s, a)))
                .map(|(s, a)| v[batch.pair_state(s, a)].clone())
                .collect())
        }
    }
}

/// Greedy agent policy: keep the incumbent action when it attains the
/// minimum, otherwise take the smallest minimizing action.
pub fn improve_agent(
    model: &Rmdp,
    values: &ValueVector,
    incumbent: &AgentPolicy,
    mode: ImprovementMode,
) -> Result<AgentPolicy> {
    let q = q_table(model, values, mode)?;
    let m = model.n_actions;
    Ok(AgentPolicy(
        (0..model.n_states)
            .map(|s| {
                let row = &q[s * m..(s + 1) * m];
                let min = row.iter().min().expect("at least one action");
                if row[incumbent[s]] == *min {
                    incumbent[s]
                } else {
                    row.iter()
                        .position(|x| x == min)
                        .expect("minimum is attained")
                }
            })
            .collect(),
    ))
}

/// Evaluates an agent policy through its induced chain.
pub fn evaluate_agent(model: &Rmdp, policy: &AgentPolicy) -> Result<RmcSolveTrace> {
    rmc_policy_iteration(&induce_rmc(model, policy)?, None)
}

/// Runs policy iteration from `initial` (default: action 0 everywhere).
pub fn rmdp_policy_iteration(
    model: &Rmdp,
    initial: Option<&AgentPolicy>,
    mode: ImprovementMode,
) -> Result<RmdpSolveTrace> {
    model.ensure_valid()?;
    model.ensure_solvable_norms()?;
    let guard = rmdp_outer_bound(model.n_states, model.n_actions, &model.discount)? + 1;

    let mut policy = match initial {
        Some(sigma) => {
            sigma.check(model)?;
            sigma.clone()
        }
        None => AgentPolicy::uniform(model.n_states, 0),
    };
    let mut iterates = Vec::new();
    loop {
        let inner = evaluate_agent(model, &policy)?;
        let values = inner.values().clone();
        let next = improve_agent(model, &values, &policy, mode)?;
        let done = next == policy;
        iterates.push(RmdpIterate {
            adversary: inner.adversary().clone(),
            policy,
            values,
            inner,
        });
        if done {
            return Ok(RmdpSolveTrace { iterates });
        }
        if iterates.len() as u128 >= guard {
            return Err(Error::Invariant(format!(
                "robust MDP policy iteration exceeded {guard} iterations"
            )));
        }
        policy = next;
    }
}

/// `gamma * f(s,a) = q*(s,a) - v*_s`: how much worse `a` is than the optimal
/// action at `s`, one step ahead of `v*`.
pub fn advantage_rmdp(
    model: &Rmdp,
    v_star: &ValueVector,
    sigma_star: &AgentPolicy,
    s: usize,
    a: usize,
) -> Result<Rational> {
    let (q_a, _) = q_value(model, v_star, s, a)?;
    let (q_opt, _) = q_value(model, v_star, s, sigma_star[s])?;
    Ok(q_a - q_opt)
}

/// `f(s,a) = max_{P(s,a)} p.v* - max_{P(s,sigma*(s))} p.v*`, plus the cost
/// gap divided by `gamma` when costs depend on the action.
pub fn potential_rmdp(
    model: &Rmdp,
    v_star: &ValueVector,
    sigma_star: &AgentPolicy,
    s: usize,
    a: usize,
) -> Result<Rational> {
    let opt = sigma_star[s];
    let lookahead = |a: usize| -> Result<Rational> {
        let t = model.transition(s, a);
        let local = t.local_values(v_star);
        Ok(worst_case(t, v_star)?.objective(&local))
    };
    let f = lookahead(a)? - lookahead(opt)?;
    let cost_gap = model.cost(s, a) - model.cost(s, opt);
    if cost_gap.is_zero() {
        return Ok(f);
    }
    if model.discount.is_zero() {
        return Err(Error::InvalidArgument(
            "potential with action-dependent costs is undefined at zero discount".into(),
        ));
    }
    Ok(f + cost_gap / &model.discount)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Norm, Transition, UncertaintySet};
    use crate::oracles::apply_bellman_rmdp;
    use crate::rational::{int, ratio};

    /// State 0 picks between a cheap step to a costly sink (a0) and a costly
    /// step to a free sink (a1).
    fn choice() -> Rmdp {
        let to = |s: usize| Transition::new(vec![s], UncertaintySet::point(vec![int(1)]));
        Rmdp {
            n_states: 3,
            n_actions: 2,
            cost: vec![int(0), int(1), int(2), int(2), int(0), int(0)],
            transitions: vec![to(1), to(2), to(1), to(1), to(2), to(2)],
            discount: ratio(1, 2),
        }
    }

    #[test]
    fn finds_the_cheaper_branch() {
        let m = choice();
        for mode in [ImprovementMode::PerPair, ImprovementMode::BatchRmc] {
            let trace = rmdp_policy_iteration(&m, None, mode).unwrap();
            assert_eq!(trace.policy().0, vec![1, 0, 0]);
            assert_eq!(trace.values().0, vec![int(1), int(4), int(0)]);
            assert_eq!(trace.outer_iterations(), 2);
            assert_eq!(
                apply_bellman_rmdp(&m, trace.values()).unwrap(),
                *trace.values()
            );
        }
    }

    #[test]
    fn potentials() {
        let m = choice();
        let trace = rmdp_policy_iteration(&m, None, ImprovementMode::PerPair).unwrap();
        let (v, sigma) = (trace.values(), trace.policy());
        assert_eq!(potential_rmdp(&m, v, sigma, 0, 1).unwrap(), int(0));
        // q(0,0) = 0 + 4/2 = 2 against q(0,1) = 1
        assert_eq!(advantage_rmdp(&m, v, sigma, 0, 0).unwrap(), int(1));
        assert_eq!(potential_rmdp(&m, v, sigma, 0, 0).unwrap(), int(2));
        assert_eq!(potential_rmdp(&m, v, sigma, 1, 1).unwrap(), int(0));
    }

    #[test]
    fn single_action_reduces_to_chain() {
        let m = Rmdp::with_state_costs(
            1,
            vec![int(0), int(1), int(0)],
            vec![
                Transition::new(
                    vec![1, 2],
                    UncertaintySet::new(vec![ratio(1, 2), ratio(1, 2)], ratio(1, 2), Norm::L1),
                ),
                Transition::absorbing(1),
                Transition::absorbing(2),
            ],
            ratio(1, 2),
        );
        let trace = rmdp_policy_iteration(&m, None, ImprovementMode::BatchRmc).unwrap();
        let chain = rmc_policy_iteration(&m.to_rmc().unwrap(), None).unwrap();
        assert_eq!(trace.outer_iterations(), 1);
        assert_eq!(trace.values(), chain.values());
        assert_eq!(trace.inner_iterations_total(), chain.iterations());
    }

    #[test]
    fn rejects_bad_initial_policy() {
        assert!(rmdp_policy_iteration(
            &choice(),
            Some(&AgentPolicy(vec![2, 0, 0])),
            ImprovementMode::PerPair
        )
        .is_err());
    }
}
