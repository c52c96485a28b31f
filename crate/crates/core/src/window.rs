//! Window past-discounted games as liminf games on a history product.
//!
//! Product states pair a state of the original arena with the last (at
//! most `ell`) action triples played. The product weight of a move is the
//! past-discounted sum over that remembered window followed by the move
//! itself, so the liminf of product weights is the window payoff.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::arena::{Arena, ArenaBuilder, PlayerCount};
use crate::error::{Error, Result};
use crate::liminf::{solve_liminf_det_tb_with, solve_liminf_mdp};
use crate::par::Exec;
use crate::rational::{check_discount, Rational};
use crate::report::{ValueReport, ValueVector};

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// `(state, min action, max action)` by index.
pub type Triple = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HistoryState {
    pub base: usize,
    /// Oldest first; empty for the initial memory.
    pub memory: Vec<Triple>,
}

#[derive(Debug, Clone)]
pub struct ProductArena {
    pub arena: Arena,
    pub history: Vec<HistoryState>,
    pub gamma: Rational,
    pub ell: u64,
}

impl ProductArena {
    pub fn num_states(&self) -> usize {
        self.history.len()
    }

    /// Product state `(s, q₀)`; it always has the index of `s`.
    pub fn initial(&self, s: usize) -> usize {
        s
    }

    /// `{product state: {"base": s, "memory": [[s, a, b], ...]}}` with
    /// names from `base`.
    pub fn mapping_json(&self, base: &Arena) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .history
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let memory: Vec<serde_json::Value> = h
                    .memory
                    .iter()
                    .map(|&(s, a, b)| {
                        serde_json::json!([base.state_name(s), base.min_actions(s)[a], base.max_actions(s)[b]])
                    })
                    .collect();
                (
                    self.arena.state_name(i).to_string(),
                    serde_json::json!({ "base": base.state_name(h.base), "memory": memory }),
                )
            })
            .collect();
        serde_json::Value::Object(map)
    }
}

/// Reachable part of the history product, explored breadth-first from
/// every `(s, q₀)`. Fails instead of truncating when more than `cap`
/// product states are reachable.
pub fn window_product(arena: &Arena, gamma: &Rational, ell: u64, cap: usize) -> Result<ProductArena> {
    check_discount("gamma", gamma)?;
    let n = arena.num_states();
    if cap < n {
        return Err(Error::Budget(format!("state cap {cap} is below the {n} original states")));
    }
    let mut history: Vec<HistoryState> = (0..n).map(|s| HistoryState { base: s, memory: Vec::new() }).collect();
    let mut index: HashMap<HistoryState, usize> = history.iter().cloned().enumerate().map(|(i, h)| (h, i)).collect();
    // per product state, per move: (weight, successors)
    let mut moves: Vec<Vec<(Rational, Vec<(usize, Rational)>)>> = Vec::new();
    let mut queue: VecDeque<usize> = (0..n).collect();
    while let Some(i) = queue.pop_front() {
        let h = history[i].clone();
        let window: Vec<&Rational> = h.memory.iter().map(|&(s, a, b)| &arena.mv(s, a, b).weight).collect();
        let mut out = Vec::new();
        for (a, b, m) in arena.moves(h.base) {
            let weight = window.iter().fold(Rational::from_integer(0.into()), |acc, w| acc * gamma + *w) * gamma + &m.weight;
            let mut memory = h.memory.clone();
            if ell > 0 {
                memory.push((h.base, a, b));
                if memory.len() as u64 > ell {
                    memory.remove(0);
                }
            }
            let mut succ = Vec::with_capacity(m.successors.len());
            for (t, p) in &m.successors {
                let key = HistoryState { base: *t, memory: memory.clone() };
                let j = match index.get(&key) {
                    Some(&j) => j,
                    None => {
                        if history.len() >= cap {
                            return Err(Error::Budget(format!(
                                "window product exceeds {cap} states (ell = {ell})"
                            )));
                        }
                        let j = history.len();
                        history.push(key.clone());
                        index.insert(key, j);
                        queue.push_back(j);
                        j
                    }
                };
                succ.push((j, p.clone()));
            }
            out.push((weight, succ));
        }
        if moves.len() <= i {
            moves.resize(i + 1, Vec::new());
        }
        moves[i] = out;
    }

    let mut taken: std::collections::HashSet<String> = arena.states().iter().cloned().collect();
    let mut counter: HashMap<usize, usize> = HashMap::new();
    let mut b = ArenaBuilder::new();
    for (i, h) in history.iter().enumerate() {
        let name = if i < n {
            arena.state_name(i).to_string()
        } else {
            loop {
                let c = counter.entry(h.base).or_insert(0);
                *c += 1;
                let cand = format!("{}@{}", arena.state_name(h.base), c);
                if taken.insert(cand.clone()) {
                    break cand;
                }
            }
        };
        b.add_state(&name)?;
    }
    for (i, h) in history.iter().enumerate() {
        b.set_actions(i, arena.min_actions(h.base).to_vec(), arena.max_actions(h.base).to_vec())?;
        for ((a, bb, _), (w, succ)) in arena.moves(h.base).zip(&moves[i]) {
            b.set_move(i, a, bb, w.clone(), succ.clone())?;
        }
    }
    Ok(ProductArena {
        arena: b.build()?,
        history,
        gamma: gamma.clone(),
        ell,
    })
}

#[derive(Debug, Clone)]
pub struct WindowOptions {
    pub state_cap: usize,
    pub exec: Exec,
}

impl Default for WindowOptions {
    fn default() -> Self {
        WindowOptions {
            state_cap: DEFAULT_STATE_CAP,
            exec: Exec::default(),
        }
    }
}

/// Window-game values on the original states, with the product and its
/// liminf solution. Optimal strategies are positional on the product,
/// which makes them finite-memory on the original arena.
#[derive(Debug, Clone)]
pub struct WindowSolution {
    pub values: ValueVector,
    pub product: ProductArena,
    pub product_report: ValueReport,
}

impl WindowSolution {
    pub fn to_json(&self, base: &Arena) -> serde_json::Value {
        let mut doc = self.product_report.to_json(&self.product.arena);
        let values: serde_json::Map<String, serde_json::Value> = (0..base.num_states())
            .map(|s| {
                let v = &doc["values"][self.product.arena.state_name(self.product.initial(s))];
                (base.state_name(s).to_string(), v.clone())
            })
            .collect();
        doc["values"] = serde_json::Value::Object(values);
        doc["product_states"] = serde_json::json!(self.product.num_states());
        doc["ell"] = serde_json::json!(self.product.ell);
        doc
    }
}

pub fn solve_window(arena: &Arena, gamma: &Rational, ell: u64, opts: &WindowOptions) -> Result<WindowSolution> {
    check_discount("gamma", gamma)?;
    let class = arena.classify();
    let deterministic_tb = class.deterministic && class.turn_based;
    if !deterministic_tb && class.players != PlayerCount::One {
        return Err(Error::UnsupportedClass(format!(
            "window games on {} arenas are out of scope: liminf solving is only available for deterministic turn-based and one-player stochastic arenas",
            class.describe()
        )));
    }
    let product = window_product(arena, gamma, ell, opts.state_cap)?;
    let mut product_report = if deterministic_tb {
        solve_liminf_det_tb_with(&product.arena, opts.exec)?
    } else {
        solve_liminf_mdp(&product.arena)?
    };
    product_report.gamma = Some(gamma.clone());
    let n = arena.num_states();
    let values = match &product_report.values {
        ValueVector::Exact(v) => ValueVector::Exact((0..n).map(|s| v[product.initial(s)].clone()).collect()),
        ValueVector::Approx(v) => ValueVector::Approx((0..n).map(|s| v[product.initial(s)]).collect()),
    };
    Ok(WindowSolution {
        values,
        product,
        product_report,
    })
}
