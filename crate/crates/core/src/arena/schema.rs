//! JSON arena documents.
//!
//! ```json
//! { "states": ["s0"],
//!   "players": {"min": {"s0": ["a"]}, "max": {"s0": ["b"]}},
//!   "weights": {"s0|a|b": "3/2"},
//!   "transitions": {"s0|a|b": {"s0": "1/1"}} }
//! ```

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{Arena, ArenaBuilder};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArenaDoc {
    states: Vec<String>,
    players: PlayersDoc,
    weights: IndexMap<String, String>,
    transitions: IndexMap<String, IndexMap<String, String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlayersDoc {
    min: IndexMap<String, Vec<String>>,
    max: IndexMap<String, Vec<String>>,
}

fn split_triple(key: &str) -> Result<(&str, &str, &str)> {
    let mut it = key.split('|');
    match (it.next(), it.next(), it.next(), it.next()) {
        (Some(s), Some(a), Some(b), None) => Ok((s, a, b)),
        _ => Err(Error::Semantic(format!("key {key:?} is not of the form \"s|a|b\""))),
    }
}

fn parse_prob(key: &str, text: &str) -> Result<Rational> {
    parse_rational(text).map_err(|_| Error::Semantic(format!("malformed rational {text:?} in {key}")))
}

pub fn parse_arena(text: &str) -> Result<Arena> {
    let doc: ArenaDoc = serde_json::from_str(text).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            Error::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        } else {
            Error::Semantic(e.to_string())
        }
    })?;
    let mut b = ArenaBuilder::new();
    for s in &doc.states {
        b.add_state(s)?;
    }
    for (side, map) in [("min", &doc.players.min), ("max", &doc.players.max)] {
        for s in map.keys() {
            if b.state_index(s).is_none() {
                return Err(Error::Semantic(format!("unknown state id {s:?} in players.{side}")));
            }
        }
    }
    for (i, s) in doc.states.iter().enumerate() {
        let min = doc.players.min.get(s).cloned().unwrap_or_default();
        let max = doc.players.max.get(s).cloned().unwrap_or_default();
        b.set_actions(i, min, max)?;
    }
    for key in doc.transitions.keys() {
        if !doc.weights.contains_key(key) {
            return Err(Error::Semantic(format!("missing weight for {key}")));
        }
    }
    for (key, w) in &doc.weights {
        let (s, a, bb) = split_triple(key)?;
        let weight = parse_prob(key, w)?;
        let dist = doc
            .transitions
            .get(key)
            .ok_or_else(|| Error::Semantic(format!("missing transition for {key}")))?;
        let succ = dist
            .iter()
            .map(|(t, p)| Ok((t.as_str(), parse_prob(key, p)?)))
            .collect::<Result<Vec<_>>>()?;
        b.set(s, a, bb, weight, &succ)
            .map_err(|e| Error::Semantic(format!("{key}: {}", strip(&e))))?;
    }
    b.build()
}

fn strip(e: &Error) -> String {
    match e {
        Error::Semantic(m) => m.clone(),
        other => other.to_string(),
    }
}

/// Canonical document: states and actions in arena order, rationals as
/// `"num/den"`. Output is deterministic.
pub fn serialize_arena(arena: &Arena) -> String {
    let mut doc = ArenaDoc {
        states: arena.states.clone(),
        players: PlayersDoc {
            min: IndexMap::new(),
            max: IndexMap::new(),
        },
        weights: IndexMap::new(),
        transitions: IndexMap::new(),
    };
    for (s, name) in arena.states.iter().enumerate() {
        doc.players.min.insert(name.clone(), arena.min_actions[s].clone());
        doc.players.max.insert(name.clone(), arena.max_actions[s].clone());
        for (a, b, m) in arena.moves(s) {
            let key = format!("{}|{}|{}", name, arena.min_actions[s][a], arena.max_actions[s][b]);
            doc.weights.insert(key.clone(), format_rational(&m.weight));
            let dist = m
                .successors
                .iter()
                .map(|(t, p)| (arena.states[*t].clone(), format_rational(p)))
                .collect();
            doc.transitions.insert(key, dist);
        }
    }
    serde_json::to_string_pretty(&doc).expect("arena document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::fig1_arena;

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_arena("{\n  \"states\": [\"s\",\n").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert!(line >= 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_state_in_transition() {
        let text = r#"{"states":["s"],"players":{"min":{"s":["a"]},"max":{"s":["b"]}},
            "weights":{"s|a|b":"0"},"transitions":{"s|a|b":{"t":"1"}}}"#;
        let err = parse_arena(text).unwrap_err();
        assert!(err.to_string().contains("unknown state id \"t\""), "{err}");
        assert!(err.to_string().contains("s|a|b"), "{err}");
    }

    #[test]
    fn missing_weight() {
        let text = r#"{"states":["s"],"players":{"min":{"s":["a"]},"max":{"s":["b"]}},
            "weights":{},"transitions":{"s|a|b":{"s":"1"}}}"#;
        let err = parse_arena(text).unwrap_err();
        assert!(err.to_string().contains("missing weight for s|a|b"), "{err}");
    }

    #[test]
    fn weight_on_unavailable_action() {
        let text = r#"{"states":["s"],"players":{"min":{"s":["a"]},"max":{"s":["b"]}},
            "weights":{"s|a|b":"0","s|z|b":"1"},"transitions":{"s|a|b":{"s":"1"},"s|z|b":{"s":"1"}}}"#;
        let err = parse_arena(text).unwrap_err();
        assert!(err.to_string().contains("s|z|b"), "{err}");
    }

    #[test]
    fn fig1_round_trip() {
        let a = fig1_arena();
        let text = serialize_arena(&a);
        assert_eq!(parse_arena(&text).unwrap(), a);
        assert_eq!(serialize_arena(&parse_arena(&text).unwrap()), text);
    }
}
