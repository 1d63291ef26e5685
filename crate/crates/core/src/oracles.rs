//! The adversary's inner problem `max { p.v : p in P }` over `L1` and `L_inf`
//! balls intersected with the simplex, an independent enumeration oracle for
//! testing, and the robust Bellman operators built on top of them.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{Norm, Rmc, Rmdp, Transition, UncertaintySet, ValueVector};
use crate::rational::{format_rational, int, Rational};

/// Successor positions sorted by descending value, ties by ascending state id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortedSuccessorView {
    order: Vec<usize>,
}

impl SortedSuccessorView {
    /// `values[i]` and `ids[i]` describe successor position `i`.
    pub fn new(values: &[Rational], ids: &[usize]) -> Self {
        debug_assert_eq!(values.len(), ids.len());
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[b].cmp(&values[a]).then(ids[a].cmp(&ids[b])));
        SortedSuccessorView { order }
    }

    /// Positions in sorted order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Role a coordinate plays in a greedy oracle output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoordinateTag {
    /// Took mass: `min(nominal + delta/2, 1)` for `L1`, `min(nominal + delta, 1)` for `L_inf`.
    Receiver,
    /// Kept its nominal mass (`L1` only).
    NotChanged,
    /// Gave exactly `delta` (`L_inf` only).
    Donor,
    /// Drained to zero.
    Zeroed,
    /// The single partially processed coordinate.
    Incomplete,
}

impl fmt::Display for CoordinateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CoordinateTag::Receiver => "receiver",
            CoordinateTag::NotChanged => "not-changed",
            CoordinateTag::Donor => "donor",
            CoordinateTag::Zeroed => "zeroed",
            CoordinateTag::Incomplete => "incomplete",
        };
        f.write_str(name)
    }
}

/// Maximizing distribution with one tag per successor position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredDistribution {
    pub probs: Vec<Rational>,
    pub tags: Vec<CoordinateTag>,
    /// The sort order the oracle used.
    pub order: SortedSuccessorView,
}

impl StructuredDistribution {
    pub fn objective(&self, values: &[Rational]) -> Rational {
        dot(&self.probs, values)
    }
}

pub fn dot(p: &[Rational], v: &[Rational]) -> Rational {
    p.iter()
        .zip(v)
        .filter(|(a, _)| !a.is_zero())
        .map(|(a, b)| a * b)
        .sum()
}

fn check_inputs(nominal: &[Rational], values: &[Rational], radius: &Rational) -> Result<()> {
    if nominal.len() != values.len() {
        return Err(Error::Dimension(format!(
            "nominal has {} entries, values has {}",
            nominal.len(),
            values.len()
        )));
    }
    if nominal.is_empty() {
        return Err(Error::Dimension("empty successor list".into()));
    }
    if radius.is_negative() {
        return Err(Error::InvalidArgument(format!(
            "negative radius {}",
            format_rational(radius)
        )));
    }
    Ok(())
}

fn positions(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// `L1` oracle; ties broken by successor position.
pub fn l1_worst_case(
    nominal: &[Rational],
    values: &[Rational],
    radius: &Rational,
) -> Result<StructuredDistribution> {
    l1_worst_case_with_ids(nominal, values, radius, &positions(nominal.len()))
}

/// `L1` oracle: drain the lowest-valued successors into the highest one until
/// half the budget is spent.
pub fn l1_worst_case_with_ids(
    nominal: &[Rational],
    values: &[Rational],
    radius: &Rational,
    ids: &[usize],
) -> Result<StructuredDistribution> {
    check_inputs(nominal, values, radius)?;
    let view = SortedSuccessorView::new(values, ids);
    let order = view.order();
    let mut p = nominal.to_vec();
    let mut tags = vec![CoordinateTag::NotChanged; p.len()];
    let top = order[0];
    tags[top] = CoordinateTag::Receiver;

    let mut budget = radius.clone();
    let mut hi = order.len() - 1;
    while budget.is_positive() && hi > 0 {
        let pos = order[hi];
        let half = &budget / int(2);
        let d = if p[pos] < half { p[pos].clone() } else { half };
        p[pos] -= &d;
        p[top] += &d;
        budget -= &d * int(2);
        tags[pos] = if p[pos].is_zero() {
            CoordinateTag::Zeroed
        } else {
            CoordinateTag::Incomplete
        };
        hi -= 1;
    }
    Ok(StructuredDistribution {
        probs: p,
        tags,
        order: view,
    })
}

/// `L_inf` oracle; ties broken by successor position.
pub fn linf_worst_case(
    nominal: &[Rational],
    values: &[Rational],
    radius: &Rational,
) -> Result<StructuredDistribution> {
    linf_worst_case_with_ids(nominal, values, radius, &positions(nominal.len()))
}

/// `L_inf` oracle: two pointers move mass from the bottom of the order to the
/// top, each coordinate giving or taking at most `radius`.
pub fn linf_worst_case_with_ids(
    nominal: &[Rational],
    values: &[Rational],
    radius: &Rational,
    ids: &[usize],
) -> Result<StructuredDistribution> {
    check_inputs(nominal, values, radius)?;
    let view = SortedSuccessorView::new(values, ids);
    let order = view.order();
    let mut p = nominal.to_vec();
    let one = Rational::one();

    let (mut hi, mut lo) = (0usize, order.len() - 1);
    let (mut b_hi, mut b_lo) = (radius.clone(), radius.clone());
    while hi < lo {
        let (h, l) = (order[hi], order[lo]);
        let d_hi = (&one - &p[h]).min(b_hi.clone());
        let d_lo = p[l].clone().min(b_lo.clone());
        let t = d_hi.min(d_lo);
        p[h] += &t;
        p[l] -= &t;
        b_hi -= &t;
        b_lo -= &t;
        if b_hi.is_zero() || p[h] == one {
            hi += 1;
            b_hi = radius.clone();
        } else {
            lo -= 1;
            b_lo = radius.clone();
        }
    }

    let meet = hi;
    let tags = (0..order.len())
        .map(|rank| {
            let pos = order[rank];
            let (q, base) = (&p[pos], &nominal[pos]);
            let receiver = (base + radius).min(one.clone());
            if rank < meet {
                CoordinateTag::Receiver
            } else if rank > meet {
                if q.is_zero() {
                    CoordinateTag::Zeroed
                } else {
                    CoordinateTag::Donor
                }
            } else if *q == receiver {
                CoordinateTag::Receiver
            } else if *q == base - radius && !q.is_zero() {
                CoordinateTag::Donor
            } else if q.is_zero() && base <= radius {
                CoordinateTag::Zeroed
            } else {
                CoordinateTag::Incomplete
            }
        })
        .collect::<Vec<_>>();
    // tags are indexed by rank above; scatter them back to positions
    let mut by_pos = vec![CoordinateTag::NotChanged; order.len()];
    for (rank, tag) in tags.into_iter().enumerate() {
        by_pos[order[rank]] = tag;
    }
    Ok(StructuredDistribution {
        probs: p,
        tags: by_pos,
        order: view,
    })
}

/// Dispatches on the set's norm. Points return the nominal distribution.
pub fn worst_case_for_set(
    set: &UncertaintySet,
    values: &[Rational],
    ids: &[usize],
) -> Result<StructuredDistribution> {
    match set.norm {
        Norm::L1 => l1_worst_case_with_ids(&set.nominal, values, &set.radius, ids),
        Norm::LInf => linf_worst_case_with_ids(&set.nominal, values, &set.radius, ids),
        Norm::Lp(_) if set.is_singleton() => {
            l1_worst_case_with_ids(&set.nominal, values, &Rational::zero(), ids)
        }
        Norm::Lp(p) => Err(Error::Unsupported(format!(
            "no inner solver for L{p} balls"
        ))),
    }
}

/// Worst case for one transition against a global value vector.
pub fn worst_case(transition: &Transition, values: &[Rational]) -> Result<StructuredDistribution> {
    let local = transition.local_values(values);
    worst_case_for_set(&transition.set, &local, &transition.successors)
}

/// Checks the structural characterization of a greedy output. Returns a
/// description of the first mismatch.
pub fn check_structure(
    nominal: &[Rational],
    radius: &Rational,
    norm: Norm,
    dist: &StructuredDistribution,
) -> std::result::Result<(), String> {
    let count = |tag| dist.tags.iter().filter(|&&t| t == tag).count();
    if count(CoordinateTag::Incomplete) > 1 {
        return Err("more than one incomplete coordinate".into());
    }
    let one = Rational::one();
    match norm {
        Norm::L1 => {
            if count(CoordinateTag::Receiver) != 1 {
                return Err("L1 output needs exactly one receiver".into());
            }
            let half = radius / int(2);
            let zeroed_mass: Rational = (0..nominal.len())
                .filter(|&i| dist.tags[i] == CoordinateTag::Zeroed)
                .map(|i| nominal[i].clone())
                .sum();
            for (i, (q, base)) in dist.probs.iter().zip(nominal).enumerate() {
                let ok = match dist.tags[i] {
                    CoordinateTag::Receiver => *q == (base + &half).min(one.clone()),
                    CoordinateTag::NotChanged => q == base,
                    CoordinateTag::Zeroed => q.is_zero(),
                    CoordinateTag::Incomplete => *q == base - &half + &zeroed_mass,
                    CoordinateTag::Donor => false,
                };
                if !ok {
                    return Err(format!(
                        "coordinate {i} tagged {} has mass {}",
                        dist.tags[i],
                        format_rational(q)
                    ));
                }
            }
        }
        Norm::LInf => {
            for (i, (q, base)) in dist.probs.iter().zip(nominal).enumerate() {
                let ok = match dist.tags[i] {
                    CoordinateTag::Receiver => *q == (base + radius).min(one.clone()),
                    CoordinateTag::Donor => *q == base - radius,
                    CoordinateTag::Zeroed => q.is_zero() && base <= radius,
                    CoordinateTag::Incomplete => base - radius < *q && *q < base + radius,
                    CoordinateTag::NotChanged => false,
                };
                if !ok {
                    return Err(format!(
                        "coordinate {i} tagged {} has mass {}",
                        dist.tags[i],
                        format_rational(q)
                    ));
                }
            }
        }
        Norm::Lp(_) => return Err("no structural characterization for Lp".into()),
    }
    Ok(())
}

/// Largest dimension the enumeration oracle accepts.
pub const BRUTE_FORCE_MAX_DIM: usize = 6;

/// Exact maximum of `p.v` over the ball-simplex intersection, by evaluating
/// every candidate vertex. Independent of the greedy oracles.
pub fn brute_force_worst_case(
    nominal: &[Rational],
    values: &[Rational],
    radius: &Rational,
    norm: Norm,
) -> Result<Rational> {
    check_inputs(nominal, values, radius)?;
    let d = nominal.len();
    if d > BRUTE_FORCE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "enumeration oracle supports dimension <= {BRUTE_FORCE_MAX_DIM}, got {d}"
        )));
    }
    let set = UncertaintySet::new(nominal.to_vec(), radius.clone(), norm);
    let mut best = dot(nominal, values);
    let mut consider = |p: &[Rational]| {
        if set.contains(p) {
            let obj = dot(p, values);
            if obj > best {
                best = obj;
            }
        }
    };

    let candidates = |i: usize| -> Vec<Rational> {
        let mut c = vec![Rational::zero(), Rational::one()];
        match norm {
            Norm::LInf => {
                c.push(&nominal[i] - radius);
                c.push(&nominal[i] + radius);
            }
            _ => c.push(nominal[i].clone()),
        }
        c
    };

    // One free coordinate, the others on a bound.
    for free in 0..d {
        let fixed: Vec<usize> = (0..d).filter(|&i| i != free).collect();
        for_each_assignment(&fixed, &candidates, &mut |assign| {
            let mut p = vec![Rational::zero(); d];
            for (&i, v) in fixed.iter().zip(assign) {
                p[i] = v.clone();
            }
            let rest: Rational = assign.iter().sum();
            p[free] = Rational::one() - rest;
            consider(&p);
        });
    }

    // L1: two free coordinates on a face sum s_i(p_i - q_i) = remaining budget.
    if matches!(norm, Norm::L1) {
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let fixed: Vec<usize> = (0..d).filter(|&k| k != i && k != j).collect();
                for_each_assignment(&fixed, &candidates, &mut |assign| {
                    let mut p = vec![Rational::zero(); d];
                    let mut used = Rational::zero();
                    for (&k, v) in fixed.iter().zip(assign) {
                        used += (v - &nominal[k]).abs();
                        p[k] = v.clone();
                    }
                    let mass = Rational::one() - assign.iter().sum::<Rational>();
                    // p_i increases, p_j decreases: (p_i - q_i) - (p_j - q_j) = radius - used
                    let diff = radius - &used + &nominal[i] - &nominal[j];
                    p[i] = (&mass + &diff) / int(2);
                    p[j] = &mass - &p[i];
                    consider(&p);
                });
            }
        }
    }
    Ok(best)
}

fn for_each_assignment(
    coords: &[usize],
    candidates: &dyn Fn(usize) -> Vec<Rational>,
    visit: &mut dyn FnMut(&[Rational]),
) {
    let options: Vec<Vec<Rational>> = coords.iter().map(|&i| candidates(i)).collect();
    let mut pick = vec![0usize; coords.len()];
    let mut current: Vec<Rational> = options.iter().map(|o| o[0].clone()).collect();
    loop {
        visit(&current);
        let mut k = 0;
        loop {
            if k == pick.len() {
                return;
            }
            pick[k] += 1;
            if pick[k] < options[k].len() {
                current[k] = options[k][pick[k]].clone();
                break;
            }
            pick[k] = 0;
            current[k] = options[k][0].clone();
            k += 1;
        }
    }
}

/// `(Tv)_s = c_s + gamma * max_{p in P(s)} p.v`.
pub fn apply_bellman(model: &Rmc, values: &ValueVector) -> Result<ValueVector> {
    if values.len() != model.n_states() {
        return Err(Error::Dimension(format!(
            "value vector has {} entries for {} states",
            values.len(),
            model.n_states()
        )));
    }
    model
        .transitions
        .iter()
        .zip(&model.cost)
        .map(|(t, c)| {
            let local = t.local_values(values);
            let dist = worst_case_for_set(&t.set, &local, &t.successors)?;
            Ok(c + &model.discount * dist.objective(&local))
        })
        .collect::<Result<Vec<_>>>()
        .map(ValueVector)
}

/// `c(s,a) + gamma * max_{p in P(s,a)} p.v` with the maximizer.
pub fn q_value(
    model: &Rmdp,
    values: &[Rational],
    s: usize,
    a: usize,
) -> Result<(Rational, StructuredDistribution)> {
    let t = model.transition(s, a);
    let local = t.local_values(values);
    let dist = worst_case_for_set(&t.set, &local, &t.successors)?;
    let q = model.cost(s, a) + &model.discount * dist.objective(&local);
    Ok((q, dist))
}

/// `(Tv)_s = min_a [c(s,a) + gamma * max_{p in P(s,a)} p.v]`.
pub fn apply_bellman_rmdp(model: &Rmdp, values: &ValueVector) -> Result<ValueVector> {
    if values.len() != model.n_states {
        return Err(Error::Dimension(format!(
            "value vector has {} entries for {} states",
            values.len(),
            model.n_states
        )));
    }
    (0..model.n_states)
        .map(|s| {
            let mut best: Option<Rational> = None;
            for a in 0..model.n_actions {
                let (q, _) = q_value(model, values, s, a)?;
                if best.as_ref().is_none_or(|b| q < *b) {
                    best = Some(q);
                }
            }
            best.ok_or_else(|| Error::InvalidArgument("model has no actions".into()))
        })
        .collect::<Result<Vec<_>>>()
        .map(ValueVector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    #[test]
    fn zero_radius_returns_nominal() {
        let q = vec![r(1, 3), r(2, 3)];
        let v = vec![int(5), int(7)];
        assert_eq!(l1_worst_case(&q, &v, &int(0)).unwrap().probs, q);
        assert_eq!(linf_worst_case(&q, &v, &int(0)).unwrap().probs, q);
    }

    #[test]
    fn l1_examples() {
        let d = l1_worst_case(&[r(1, 2), r(1, 2)], &[int(1), int(0)], &r(1, 2)).unwrap();
        assert_eq!(d.probs, vec![r(3, 4), r(1, 4)]);
        assert_eq!(
            d.tags,
            vec![CoordinateTag::Receiver, CoordinateTag::Incomplete]
        );

        let d = l1_worst_case(&[r(1, 5), r(4, 5)], &[int(1), int(0)], &int(1)).unwrap();
        assert_eq!(d.probs, vec![r(7, 10), r(3, 10)]);
    }

    #[test]
    fn l1_budget_exceeding_mass_saturates_receiver() {
        let d = l1_worst_case(
            &[r(1, 2), r(1, 4), r(1, 4)],
            &[int(3), int(2), int(1)],
            &int(2),
        )
        .unwrap();
        assert_eq!(d.probs, vec![int(1), int(0), int(0)]);
        check_structure(&[r(1, 2), r(1, 4), r(1, 4)], &int(2), Norm::L1, &d).unwrap();
    }

    #[test]
    fn linf_examples() {
        let q = vec![r(1, 3), r(1, 3), r(1, 3)];
        let d = linf_worst_case(&q, &[int(2), int(1), int(0)], &r(1, 4)).unwrap();
        assert_eq!(d.probs, vec![r(7, 12), r(1, 3), r(1, 12)]);
        check_structure(&q, &r(1, 4), Norm::LInf, &d).unwrap();

        // whole simplex: all mass on the best successor when it can reach 1
        let d = linf_worst_case(&q, &[int(0), int(5), int(1)], &int(1)).unwrap();
        assert_eq!(d.probs, vec![int(0), int(1), int(0)]);
    }

    #[test]
    fn constant_values_keep_the_objective() {
        let q = vec![r(1, 6), r(1, 2), r(1, 3)];
        let v = vec![int(4); 3];
        for norm in [Norm::L1, Norm::LInf] {
            let d = worst_case_for_set(
                &UncertaintySet::new(q.clone(), r(1, 3), norm),
                &v,
                &[0, 1, 2],
            )
            .unwrap();
            assert_eq!(d.objective(&v), int(4));
            assert_eq!(
                brute_force_worst_case(&q, &v, &r(1, 3), norm).unwrap(),
                int(4)
            );
        }
    }

    #[test]
    fn ties_follow_state_ids() {
        let q = vec![r(1, 2), r(1, 2)];
        let v = vec![int(1), int(1)];
        let d = l1_worst_case_with_ids(&q, &v, &r(1, 2), &[9, 3]).unwrap();
        assert_eq!(d.order.order(), &[1, 0]);
        assert_eq!(d.probs, vec![r(1, 4), r(3, 4)]);
    }

    #[test]
    fn brute_force_matches_worked_examples() {
        let bf = |q: &[Rational], v: &[Rational], rad: Rational, n| {
            brute_force_worst_case(q, v, &rad, n).unwrap()
        };
        assert_eq!(
            bf(&[r(1, 2), r(1, 2)], &[int(1), int(0)], r(1, 2), Norm::L1),
            r(3, 4)
        );
        assert_eq!(
            bf(&[r(1, 5), r(4, 5)], &[int(1), int(0)], int(1), Norm::L1),
            r(7, 10)
        );
        assert_eq!(
            bf(
                &[r(1, 3), r(1, 3), r(1, 3)],
                &[int(2), int(1), int(0)],
                r(1, 4),
                Norm::LInf
            ),
            r(7, 6) + r(1, 3)
        );
        let seven = vec![r(1, 7); 7];
        assert!(brute_force_worst_case(&seven, &seven, &int(0), Norm::L1).is_err());
    }

    #[test]
    fn lp_sets_are_rejected_unless_points() {
        let set = UncertaintySet::new(vec![r(1, 2), r(1, 2)], r(1, 4), Norm::Lp(2));
        assert!(matches!(
            worst_case_for_set(&set, &[int(1), int(0)], &[0, 1]),
            Err(Error::Unsupported(_))
        ));
        let point = UncertaintySet::new(vec![r(1, 2), r(1, 2)], int(0), Norm::Lp(2));
        assert_eq!(
            worst_case_for_set(&point, &[int(1), int(0)], &[0, 1])
                .unwrap()
                .probs,
            point.nominal
        );
    }

    #[test]
    fn bellman_basics() {
        let rmc = Rmc {
            cost: vec![int(1), int(0), int(2)],
            transitions: vec![
                Transition::absorbing(0),
                Transition::new(
                    vec![0, 2],
                    UncertaintySet::new(vec![r(1, 2), r(1, 2)], r(1, 2), Norm::L1),
                ),
                Transition::new(
                    vec![1, 2],
                    UncertaintySet::new(vec![r(1, 3), r(2, 3)], r(1, 5), Norm::LInf),
                ),
            ],
            discount: r(1, 2),
        };
        let zero = ValueVector::zeros(3);
        assert_eq!(apply_bellman(&rmc, &zero).unwrap().0, rmc.cost);

        let v = ValueVector(vec![int(2), int(5), int(-1)]);
        let tv = apply_bellman(&rmc, &v).unwrap();
        assert_eq!(tv[0], int(2));
        let t2v = apply_bellman(&rmc, &tv).unwrap();
        assert!(t2v.distance(&tv) <= &rmc.discount * tv.distance(&v));
    }

    fn instance(max_dim: usize) -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>, Rational)> {
        (1..=max_dim).prop_flat_map(|d| {
            (
                prop::collection::vec(0i64..=6, d),
                prop::collection::vec(-4i64..=4, d),
                0i64..=12,
                1i64..=8,
            )
                .prop_filter("need positive mass", |(w, _, _, _)| {
                    w.iter().sum::<i64>() > 0
                })
                .prop_map(|(w, v, rn, rd)| {
                    let total: i64 = w.iter().sum();
                    (
                        w.iter().map(|&x| ratio(x, total)).collect(),
                        v.into_iter().map(int).collect(),
                        ratio(rn, rd),
                    )
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn l1_matches_enumeration((q, v, rad) in instance(5)) {
            let d = l1_worst_case(&q, &v, &rad).unwrap();
            let set = UncertaintySet::new(q.clone(), rad.clone(), Norm::L1);
            prop_assert!(set.contains(&d.probs));
            prop_assert_eq!(d.objective(&v), brute_force_worst_case(&q, &v, &rad, Norm::L1).unwrap());
            prop_assert_eq!(check_structure(&q, &rad, Norm::L1, &d), Ok(()));
        }

        #[test]
        fn linf_matches_enumeration((q, v, rad) in instance(5)) {
            let d = linf_worst_case(&q, &v, &rad).unwrap();
            let set = UncertaintySet::new(q.clone(), rad.clone(), Norm::LInf);
            prop_assert!(set.contains(&d.probs));
            prop_assert_eq!(d.objective(&v), brute_force_worst_case(&q, &v, &rad, Norm::LInf).unwrap());
            prop_assert_eq!(check_structure(&q, &rad, Norm::LInf, &d), Ok(()));
        }

        #[test]
        fn permuting_ties_keeps_objective((q, v, rad) in instance(5), seed in 0usize..120) {
            let n = q.len();
            let mut ids: Vec<usize> = (0..n).collect();
            // a deterministic permutation of the ids
            for i in (1..n).rev() {
                ids.swap(i, seed % (i + 1));
            }
            for norm in [Norm::L1, Norm::LInf] {
                let set = UncertaintySet::new(q.clone(), rad.clone(), norm);
                let a = worst_case_for_set(&set, &v, &(0..n).collect::<Vec<_>>()).unwrap();
                let b = worst_case_for_set(&set, &v, &ids).unwrap();
                prop_assert_eq!(a.objective(&v), b.objective(&v));
            }
        }
    }
}
