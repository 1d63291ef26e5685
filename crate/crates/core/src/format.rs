//! JSON model files.
//!
//! ```text
//! { "states": 2, "actions": 1, "discount": "1/2", "cost": ["0/1", "1/1"],
//!   "transitions": [ { "state": 0, "action": 0, "successors": [1],
//!                      "nominal": ["1/1"], "radius": "0/1", "norm": "l1" }, ... ] }
//! ```
//!
//! `cost[s]` is the cost of `(s, 0)`. A transition may carry its own `cost`
//! when it differs from the state's. Serialization is canonical: transitions in
//! row-major `(state, action)` order, overrides only where needed, rationals in
//! lowest terms, so `serialize(parse(serialize(m)))` reproduces the bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Norm, Rmc, Rmdp, Transition, UncertaintySet};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    states: usize,
    actions: usize,
    discount: String,
    cost: Vec<String>,
    transitions: Vec<TransitionEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    state: usize,
    action: usize,
    successors: Vec<usize>,
    nominal: Vec<String>,
    radius: String,
    norm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<String>,
}

fn parse_all(texts: &[String]) -> Result<Vec<Rational>> {
    texts.iter().map(|t| parse_rational(t)).collect()
}

fn format_all(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<Rmdp> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let (n, m) = (file.states, file.actions);
    if file.cost.len() != n {
        return Err(Error::Parse(format!(
            "{} costs for {n} states",
            file.cost.len()
        )));
    }
    let state_cost = parse_all(&file.cost)?;
    let mut slots: Vec<Option<(Rational, Transition)>> = vec![None; n * m];
    for entry in file.transitions {
        if entry.state >= n || entry.action >= m {
            return Err(Error::Parse(format!(
                "transition ({}, {}) is outside {n} states x {m} actions",
                entry.state, entry.action
            )));
        }
        let slot = &mut slots[entry.state * m + entry.action];
        if slot.is_some() {
            return Err(Error::Parse(format!(
                "duplicate transition ({}, {})",
                entry.state, entry.action
            )));
        }
        let cost = match &entry.cost {
            Some(c) => parse_rational(c)?,
            None => state_cost[entry.state].clone(),
        };
        let set = UncertaintySet::new(
            parse_all(&entry.nominal)?,
            parse_rational(&entry.radius)?,
            entry.norm.parse::<Norm>()?,
        );
        *slot = Some((cost, Transition::new(entry.successors, set)));
    }
    let mut cost = Vec::with_capacity(n * m);
    let mut transitions = Vec::with_capacity(n * m);
    for (i, slot) in slots.into_iter().enumerate() {
        let (c, t) = slot.ok_or_else(|| {
            Error::Parse(format!(
                "missing transition ({}, {})",
                i / m.max(1),
                i % m.max(1)
            ))
        })?;
        cost.push(c);
        transitions.push(t);
    }
    let model = Rmdp {
        n_states: n,
        n_actions: m,
        cost,
        transitions,
        discount: parse_rational(&file.discount)?,
    };
    model.ensure_valid()?;
    Ok(model)
}

/// Canonical pretty-printed JSON, newline-terminated.
pub fn model_to_json(model: &Rmdp) -> String {
    let m = model.n_actions;
    let state_cost: Vec<Rational> = (0..model.n_states)
        .map(|s| model.cost(s, 0).clone())
        .collect();
    let transitions = model
        .transitions
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (s, a) = (i / m, i % m);
            let c = model.cost(s, a);
            TransitionEntry {
                state: s,
                action: a,
                successors: t.successors.clone(),
                nominal: format_all(&t.set.nominal),
                radius: format_rational(&t.set.radius),
                norm: t.set.norm.to_string(),
                cost: (*c != state_cost[s]).then(|| format_rational(c)),
            }
        })
        .collect();
    let file = ModelFile {
        states: model.n_states,
        actions: m,
        discount: format_rational(&model.discount),
        cost: format_all(&state_cost),
        transitions,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
    text.push('\n');
    text
}

pub fn chain_to_json(model: &Rmc) -> String {
    model_to_json(&model.to_rmdp())
}

pub fn read_model(path: &Path) -> Result<Rmdp> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}

pub fn write_model(path: &Path, model: &Rmdp) -> std::io::Result<()> {
    fs::write(path, model_to_json(model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{attach_uncertainty, gridworld, inventory};
    use crate::rational::{int, ratio};

    #[test]
    fn round_trip_is_byte_identical() {
        for model in [
            attach_uncertainty(
                &gridworld(3, &ratio(9, 10)).unwrap(),
                &ratio(1, 20),
                Norm::LInf,
            )
            .unwrap(),
            attach_uncertainty(
                &inventory(6, &ratio(1, 2)).unwrap(),
                &ratio(1, 20),
                Norm::L1,
            )
            .unwrap(),
        ] {
            let text = model_to_json(&model);
            let parsed = parse_model(&text).unwrap();
            assert_eq!(parsed, model);
            assert_eq!(model_to_json(&parsed), text);
        }
    }

    #[test]
    fn cost_overrides_only_where_needed() {
        let model = inventory(4, &ratio(1, 2)).unwrap();
        let text = model_to_json(&model);
        let overrides = text.matches("\"cost\": \"").count();
        let needed = (0..model.n_states)
            .flat_map(|s| (0..model.n_actions).map(move |a| (s, a)))
            .filter(|&(s, a)| model.cost(s, a) != model.cost(s, 0))
            .count();
        assert_eq!(overrides, needed);
    }

    #[test]
    fn accepts_bare_integers_and_any_order() {
        let text = r#"{"states": 2, "actions": 1, "discount": "2/4", "cost": ["0", "1"],
            "transitions": [
              {"state": 1, "action": 0, "successors": [1], "nominal": ["1"], "radius": "0", "norm": "linf"},
              {"state": 0, "action": 0, "successors": [0, 1], "nominal": ["1/2", "1/2"], "radius": "1/4", "norm": "l1"}
            ]}"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.discount, ratio(1, 2));
        assert_eq!(m.transition(0, 0).set.radius, ratio(1, 4));
        assert_eq!(*m.cost(1, 0), int(1));
    }

    #[test]
    fn rejects_malformed_files() {
        let base = |t: &str| {
            format!(
                r#"{{"states": 1, "actions": 1, "discount": "1/2", "cost": ["0/1"], "transitions": [{t}]}}"#
            )
        };
        let ok = r#"{"state": 0, "action": 0, "successors": [0], "nominal": ["1/1"], "radius": "0/1", "norm": "l1"}"#;
        assert!(parse_model(&base(ok)).is_ok());
        assert!(matches!(parse_model(&base("")), Err(Error::Parse(_))));
        assert!(matches!(
            parse_model(&base(&format!("{ok}, {ok}"))),
            Err(Error::Parse(_))
        ));
        let bad_sum = ok.replace("\"1/1\"", "\"1/2\"");
        assert!(matches!(
            parse_model(&base(&bad_sum)),
            Err(Error::InvalidModel(_))
        ));
        let bad_norm = ok.replace("l1", "l7");
        assert!(parse_model(&base(&bad_norm)).is_err());
        assert!(parse_model("{").is_err());
        assert!(parse_model(&base(ok).replace("\"states\"", "\"extra\": 1, \"states\"")).is_err());
    }
}
