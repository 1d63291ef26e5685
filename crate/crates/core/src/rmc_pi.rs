//! Policy iteration for robust Markov chains: evaluate the adversary's
//! current policy exactly, let every state re-optimize against the resulting
//! values, stop when the policy repeats.

use crate::bounds::rmc_iteration_bound;
use crate::error::{Error, Result};
use crate::linalg::policy_value;
use crate::model::{AdversaryPolicy, Rmc, ValueVector};
use crate::oracles::worst_case;

/// One evaluated adversary policy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RmcIterate {
    pub adversary: AdversaryPolicy,
    pub values: ValueVector,
}

#[derive(Clone, Debug)]
pub struct RmcSolveTrace {
    /// `(tau^t, v^t)` for every evaluation, in order. The last one is optimal.
    pub iterates: Vec<RmcIterate>,
}

impl RmcSolveTrace {
    /// Number of policy evaluations performed.
    pub fn iterations(&self) -> usize {
        self.iterates.len()
    }

    pub fn values(&self) -> &ValueVector {
        &self.last().values
    }

    pub fn adversary(&self) -> &AdversaryPolicy {
        &self.last().adversary
    }

    fn last(&self) -> &RmcIterate {
        self.iterates
            .last()
            .expect("a trace holds at least one iterate")
    }
}

/// The greedy response of every state to `values`.
pub fn improve_adversary(model: &Rmc, values: &ValueVector) -> Result<AdversaryPolicy> {
    model
        .transitions
        .iter()
        .map(|t| worst_case(t, values).map(|d| d.probs))
        .collect::<Result<Vec<_>>>()
        .map(AdversaryPolicy::new)
}

/// Runs policy iteration from `initial` (default: every state plays its
/// nominal distribution).
pub fn rmc_policy_iteration(
    model: &Rmc,
    initial: Option<&AdversaryPolicy>,
) -> Result<RmcSolveTrace> {
    model.ensure_valid()?;
    model.ensure_solvable_norms()?;
    let guard = rmc_iteration_bound(model.n_states(), &model.discount)? * 2 + 2;

    let mut adversary = match initial {
        Some(tau) => {
            tau.check_feasible(model)?;
            tau.clone()
        }
        None => model.nominal_policy(),
    };
    let mut iterates = Vec::new();
    loop {
        let values = policy_value(model, &adversary)?;
        let next = improve_adversary(model, &values)?;
        let done = next == adversary;
        iterates.push(RmcIterate { adversary, values });
        if done {
            return Ok(RmcSolveTrace { iterates });
        }
        if iterates.len() as u128 >= guard {
            return Err(Error::Invariant(format!(
                "robust chain policy iteration exceeded {guard} iterations"
            )));
        }
        adversary = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Norm, Transition, UncertaintySet};
    use crate::oracles::apply_bellman;
    use crate::rational::{int, ratio};

    fn three_state(norm: Norm) -> Rmc {
        Rmc {
            cost: vec![int(0), int(1), int(0)],
            transitions: vec![
                Transition::new(
                    vec![1, 2],
                    UncertaintySet::new(vec![ratio(1, 2), ratio(1, 2)], ratio(1, 2), norm),
                ),
                Transition::absorbing(1),
                Transition::absorbing(2),
            ],
            discount: ratio(1, 2),
        }
    }

    #[test]
    fn worked_three_state_example() {
        let rmc = three_state(Norm::L1);
        let trace = rmc_policy_iteration(&rmc, None).unwrap();
        assert_eq!(trace.values().0, vec![ratio(3, 4), int(2), int(0)]);
        assert_eq!(trace.iterations(), 2);
        assert_eq!(
            apply_bellman(&rmc, trace.values()).unwrap(),
            *trace.values()
        );
    }

    #[test]
    fn zero_radius_needs_one_evaluation() {
        let mut rmc = three_state(Norm::LInf);
        rmc.transitions[0].set.radius = int(0);
        let trace = rmc_policy_iteration(&rmc, None).unwrap();
        assert!(trace.iterations() <= 2);
        assert_eq!(trace.values().0, vec![ratio(1, 2), int(2), int(0)]);
    }

    #[test]
    fn self_loop_value() {
        let rmc = Rmc {
            cost: vec![int(3)],
            transitions: vec![Transition::new(
                vec![0],
                UncertaintySet::new(vec![int(1)], int(5), Norm::L1),
            )],
            discount: ratio(2, 3),
        };
        let trace = rmc_policy_iteration(&rmc, None).unwrap();
        assert_eq!(trace.values().0, vec![int(9)]);
        assert_eq!(trace.iterations(), 1);
    }

    #[test]
    fn rejects_infeasible_start_and_lp() {
        let rmc = three_state(Norm::L1);
        let bad = AdversaryPolicy::new(vec![vec![int(1), int(0)], vec![int(1)], vec![int(1)]]);
        assert!(rmc_policy_iteration(&rmc, Some(&bad)).is_err());
        assert!(matches!(
            rmc_policy_iteration(&three_state(Norm::Lp(2)), None),
            Err(Error::Unsupported(_))
        ));
    }
}
