//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use robustpi_core::bounds::rmdp_outer_bound;
use robustpi_core::oracles::apply_bellman_rmdp;
use robustpi_core::oracles::{
    brute_force_worst_case, check_structure, l1_worst_case, linf_worst_case, q_value,
};
use robustpi_core::rational::{int, pow, ratio};
use robustpi_core::reduction::{decide_power_sum, greedy_power_decomposition, Interval};
use robustpi_core::{
    build_batch_rmc, build_root_sum_gadget, rmc_policy_iteration, rmdp_policy_iteration,
    verify_rmdp_trace, BenchmarkKind, BenchmarkSpec, Decision, ImprovementMode, Norm, Rational,
    Report, RmcSolveTrace, Rmdp, RmdpSolveTrace, ValueVector,
};

type Body<'a> = Box<dyn FnOnce() -> (Vec<String>, String) + 'a>;

struct Outcome {
    id: usize,
    name: &'static str,
    failures: Vec<String>,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

impl Outcome {
    fn print(&self) {
        let status = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {}: {status} {} ({}; {:.1}s of {}s)",
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        );
        for f in self.failures.iter().take(5) {
            println!("    {f}");
        }
        if self.failures.len() > 5 {
            println!("    ... {} more", self.failures.len() - 5);
        }
    }
}

fn run(
    id: usize,
    name: &'static str,
    budget_secs: u64,
    body: impl FnOnce() -> (Vec<String>, String),
) -> Outcome {
    let start = Instant::now();
    let (failures, detail) = body();
    Outcome {
        id,
        name,
        failures,
        detail,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_secs),
    }
}

/// Benchmark sizes up to 64 states per kind.
fn sizes(kind: BenchmarkKind) -> Vec<usize> {
    match kind {
        BenchmarkKind::Gridworld => vec![2, 3, 4, 6, 8],
        BenchmarkKind::LongChain => vec![2, 4, 8, 16, 31],
        _ => vec![4, 8, 16, 32, 64],
    }
}

struct Solved {
    label: String,
    spec: BenchmarkSpec,
    model: Rmdp,
    per_pair: RmdpSolveTrace,
}

fn solve_grid() -> Vec<Solved> {
    let mut specs = Vec::new();
    for kind in BenchmarkKind::ALL {
        for param in sizes(kind) {
            for norm in [Norm::L1, Norm::LInf] {
                for gamma in [ratio(1, 2), ratio(9, 10)] {
                    for delta in [ratio(0, 1), ratio(1, 20)] {
                        specs.push(BenchmarkSpec {
                            kind,
                            param,
                            seed: 1,
                            gamma: gamma.clone(),
                            delta,
                            norm,
                        });
                    }
                }
            }
        }
    }
    specs
        .into_par_iter()
        .map(|spec| {
            let model = spec.build().expect("benchmark builds");
            let per_pair =
                rmdp_policy_iteration(&model, None, ImprovementMode::PerPair).expect("solve");
            let label = format!(
                "{} param={} {} gamma={} delta={}",
                spec.kind, spec.param, spec.norm, spec.gamma, spec.delta
            );
            Solved {
                label,
                spec,
                model,
                per_pair,
            }
        })
        .collect()
}

fn sup_distance(a: &ValueVector, b: &ValueVector) -> Rational {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Checks direction and `|v^t - v*| <= gamma^t |v^0 - v*|` on one value sequence.
fn check_sequence(
    values: &[&ValueVector],
    gamma: &Rational,
    increasing: bool,
    label: &str,
    out: &mut Vec<String>,
) {
    let v_star = values[values.len() - 1];
    let initial = sup_distance(values[0], v_star);
    for t in 0..values.len() {
        if t > 0 {
            let ok = values[t - 1].iter().zip(values[t].iter()).all(|(a, b)| {
                if increasing {
                    a <= b
                } else {
                    a >= b
                }
            });
            if !ok {
                out.push(format!("{label}: not monotone at t={t}"));
            }
        }
        if sup_distance(values[t], v_star) > pow(gamma, t as u32) * &initial {
            out.push(format!("{label}: decay violated at t={t}"));
        }
    }
}

fn check_inner(trace: &RmcSolveTrace, gamma: &Rational, label: &str, out: &mut Vec<String>) {
    let seq: Vec<&ValueVector> = trace.iterates.iter().map(|i| &i.values).collect();
    check_sequence(&seq, gamma, true, label, out);
}

fn criterion_1(grid: &[Solved]) -> (Vec<String>, String) {
    let failures: Vec<String> = grid
        .par_iter()
        .filter_map(|s| {
            let v = s.per_pair.values();
            match apply_bellman_rmdp(&s.model, v) {
                Ok(tv) if tv == *v => None,
                Ok(_) => Some(format!("{}: Tv != v", s.label)),
                Err(e) => Some(format!("{}: {e}", s.label)),
            }
        })
        .collect();
    (failures, format!("{} instances", grid.len()))
}

fn criterion_2() -> (Vec<String>, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let per_norm = 200;
    for norm in [Norm::L1, Norm::LInf] {
        for k in 0..per_norm {
            let d = rng.gen_range(1..=5);
            let nominal = common::distribution(&mut rng, d);
            let values: Vec<Rational> = (0..d)
                .map(|_| common::rational(&mut rng, -10, 10, 8))
                .collect();
            let radius = common::radius(&mut rng);
            let greedy = match norm {
                Norm::L1 => l1_worst_case(&nominal, &values, &radius),
                _ => linf_worst_case(&nominal, &values, &radius),
            }
            .expect("greedy oracle");
            let brute = brute_force_worst_case(&nominal, &values, &radius, norm)
                .expect("enumeration oracle");
            if greedy.objective(&values) != brute {
                failures.push(format!(
                    "{norm} #{k}: greedy {} vs enumeration {brute}",
                    greedy.objective(&values)
                ));
            }
            if let Err(e) = check_structure(&nominal, &radius, norm, &greedy) {
                failures.push(format!("{norm} #{k}: {e}"));
            }
        }
    }
    (failures, format!("{} instances per norm", per_norm))
}

fn criterion_3(grid: &[Solved]) -> (Vec<String>, String) {
    let failures: Vec<String> = grid
        .par_iter()
        .flat_map_iter(|s| {
            let mut out = Vec::new();
            let gamma = &s.spec.gamma;
            let outer: Vec<&ValueVector> = s.per_pair.iterates.iter().map(|i| &i.values).collect();
            check_sequence(&outer, gamma, false, &s.label, &mut out);
            for (o, it) in s.per_pair.iterates.iter().enumerate() {
                check_inner(
                    &it.inner,
                    gamma,
                    &format!("{} inner {o}", s.label),
                    &mut out,
                );
            }
            out
        })
        .collect();
    let traces: usize = grid.iter().map(|s| 1 + s.per_pair.iterates.len()).sum();
    (failures, format!("{traces} traces"))
}

fn criterion_4(grid: &[Solved]) -> (Vec<String>, String) {
    let reports: Vec<(String, Report)> = grid
        .par_iter()
        .map(|s| {
            (
                s.label.clone(),
                verify_rmdp_trace(&s.model, &s.per_pair).expect("diagnostics"),
            )
        })
        .collect();
    let mut failures = Vec::new();
    let mut lines = 0;
    for (label, report) in &reports {
        lines += report.lines.len();
        for line in report.failures() {
            failures.push(format!("{label}: {line}"));
        }
    }
    (failures, format!("{lines} diagnostic lines"))
}

fn criterion_5(grid: &[Solved]) -> (Vec<String>, String) {
    let failures: Vec<String> = grid
        .par_iter()
        .flat_map_iter(|s| {
            let mut out = Vec::new();
            let bound = rmdp_outer_bound(s.model.n_states, s.model.n_actions, &s.spec.gamma)
                .expect("bound");
            if s.per_pair.outer_iterations() as u128 > bound {
                out.push(format!(
                    "{}: {} outer iterations > {bound}",
                    s.label,
                    s.per_pair.outer_iterations()
                ));
            }
            let batch = rmdp_policy_iteration(&s.model, None, ImprovementMode::BatchRmc)
                .expect("batch solve");
            if !batch.policies().eq(s.per_pair.policies()) {
                out.push(format!(
                    "{}: policy sequences differ between modes",
                    s.label
                ));
            }
            out
        })
        .collect();
    (failures, format!("{} instances, both modes", grid.len()))
}

fn criterion_6() -> (Vec<String>, String) {
    let ks = [4usize, 8, 16, 32];
    let results: Vec<(usize, usize)> = ks
        .par_iter()
        .map(|&k| {
            let spec = BenchmarkSpec {
                kind: BenchmarkKind::LongChain,
                param: k,
                seed: 0,
                gamma: ratio(1, 2),
                delta: Rational::zero(),
                norm: Norm::L1,
            };
            let model = spec.build().expect("long chain builds");
            let trace =
                rmdp_policy_iteration(&model, None, ImprovementMode::PerPair).expect("solve");
            (k, trace.outer_iterations())
        })
        .collect();
    let failures = results
        .iter()
        .filter(|(k, outer)| *outer < *k || *outer > k + 2)
        .map(|(k, outer)| format!("k={k}: {outer} outer iterations"))
        .collect();
    let counts: Vec<String> = results.iter().map(|(k, o)| format!("k={k}:{o}")).collect();
    (failures, counts.join(" "))
}

fn criterion_7(grid: &[Solved]) -> (Vec<String>, String) {
    let mut failures = Vec::new();
    let mut worst = 0;
    let mut count = 0;
    for s in grid.iter().filter(|s| {
        s.spec.kind != BenchmarkKind::LongChain
            && s.spec.gamma == ratio(1, 2)
            && s.spec.delta == ratio(1, 20)
    }) {
        count += 1;
        let outer = s.per_pair.outer_iterations();
        worst = worst.max(outer);
        let bound =
            rmdp_outer_bound(s.model.n_states, s.model.n_actions, &s.spec.gamma).expect("bound");
        if outer > 30 {
            failures.push(format!("{}: {outer} outer iterations > 30", s.label));
        }
        if outer as u128 >= bound {
            failures.push(format!(
                "{}: {outer} outer iterations not below bound {bound}",
                s.label
            ));
        }
    }
    (
        failures,
        format!("{count} instances, max {worst} outer iterations"),
    )
}

fn criterion_8() -> (Vec<String>, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut pairs = 0;
    for k in 0..10 {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(1..=3);
        let model = common::rmdp(&mut rng, n, m);
        let values = common::values(&mut rng, n);
        let batch = build_batch_rmc(&model, &values).expect("batch chain");
        let trace = rmc_policy_iteration(&batch.rmc, None).expect("batch solve");
        let v = trace.values();
        for s in 0..n {
            for a in 0..m {
                pairs += 1;
                let (q, _) = q_value(&model, &values, s, a).expect("oracle");
                if v[batch.pair_state(s, a)] != q {
                    failures.push(format!(
                        "model {k} pair ({s},{a}): {} vs {q}",
                        v[batch.pair_state(s, a)]
                    ));
                }
            }
        }
    }
    (failures, format!("10 models, {pairs} pairs"))
}

fn criterion_9() -> (Vec<String>, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = Vec::new();
    let mut long = [0usize; 3];
    let mut longest = [0usize; 3];
    for (j, p) in [2u32, 3, 5].into_iter().enumerate() {
        for _ in 0..1000 {
            let n = BigUint::from(rng.gen_range(1u64..=1_000_000));
            let d = greedy_power_decomposition(&n, p).expect("decomposition");
            if d.power_sum() != n {
                failures.push(format!("p={p} n={n}: power sum {}", d.power_sum()));
            }
            longest[j] = longest[j].max(d.len());
            if d.len() > 10 {
                long[j] += 1;
            }
        }
    }
    for (j, p) in [2, 3, 5].into_iter().enumerate() {
        if long[j] > 0 {
            failures.push(format!(
                "p={p}: {} of 1000 decompositions exceed 10 terms (max {})",
                long[j], longest[j]
            ));
        }
    }

    let gamma = ratio(1, 2);
    let precision = 48;
    let mut compared = 0;
    for k in 0..50 {
        let p = if k % 2 == 0 { 2 } else { 3 };
        let len = rng.gen_range(1..=4);
        let a: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=100)).collect();
        let approx: f64 = a
            .iter()
            .map(|&x| (x as f64).powf((p - 1) as f64 / p as f64))
            .sum();
        let alpha = BigInt::from(approx.floor() as i64 + rng.gen_range(0..=1));
        let gadget = build_root_sum_gadget(&a, &alpha, p, &gamma).expect("gadget");
        let via_gadget = gadget.decide(precision).expect("gadget decision");
        let direct = decide_power_sum(&a, &alpha, p - 1, p, precision).expect("direct decision");
        if via_gadget == Decision::Inconclusive || direct == Decision::Inconclusive {
            continue;
        }
        compared += 1;
        if via_gadget != direct {
            failures.push(format!(
                "a={a:?} alpha={alpha} p={p}: gadget {via_gadget}, direct {direct}"
            ));
        }
    }

    let worked = build_root_sum_gadget(&[1], &BigInt::from(1), 2, &gamma).expect("worked gadget");
    let eighth = ratio(1, 8);
    if worked.lambda != eighth {
        failures.push(format!("worked instance: lambda = {}", worked.lambda));
    }
    match worked.closed_form_value(64) {
        Ok(v) if v == Interval::point(eighth.clone()) => {}
        Ok(v) => failures.push(format!("worked instance: v(s0) = {v}")),
        Err(e) => failures.push(format!("worked instance: {e}")),
    }
    if worked.decide(64).ok() != Some(Decision::True) || int(8) * &worked.lambda != int(1) {
        failures.push("worked instance: decision is not true".into());
    }

    let detail = format!(
        "max terms p=2:{} p=3:{} p=5:{}; {compared}/50 gadget comparisons decided",
        longest[0], longest[1], longest[2]
    );
    (failures, detail)
}

fn main() -> ExitCode {
    if let Ok(t) = std::env::var("ROBUSTPI_THREADS") {
        if let Ok(t) = t.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global();
        }
    }
    let mut outcomes = Vec::new();
    let start = Instant::now();
    let grid = solve_grid();
    let solve_time = start.elapsed();
    let mut c1 = run(1, "fixed-point exactness", 300, || criterion_1(&grid));
    // The shared solves belong to the fixed-point criterion.
    c1.elapsed += solve_time;
    c1.print();
    outcomes.push(c1);
    let rest: [(usize, &'static str, u64, Body<'_>); 8] = [
        (2, "oracle equivalence", 60, Box::new(criterion_2)),
        (
            3,
            "monotonicity and decay",
            120,
            Box::new(|| criterion_3(&grid)),
        ),
        (4, "diagnostic suite", 300, Box::new(|| criterion_4(&grid))),
        (
            5,
            "outer iteration bound and mode agreement",
            120,
            Box::new(|| criterion_5(&grid)),
        ),
        (6, "long chain linear iterations", 60, Box::new(criterion_6)),
        (
            7,
            "low iteration counts at gamma = 1/2",
            600,
            Box::new(|| criterion_7(&grid)),
        ),
        (8, "batch construction", 60, Box::new(criterion_8)),
        (9, "reduction suite", 120, Box::new(criterion_9)),
    ];
    for (id, name, budget, body) in rest {
        let outcome = run(id, name, budget, body);
        outcome.print();
        outcomes.push(outcome);
    }
    let failed: Vec<usize> = outcomes
        .iter()
        .filter(|o| !o.failures.is_empty())
        .map(|o| o.id)
        .collect();
    let slow: Vec<usize> = outcomes
        .iter()
        .filter(|o| o.elapsed > o.budget)
        .map(|o| o.id)
        .collect();
    if !slow.is_empty() {
        println!("over runtime target: {slow:?}");
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
