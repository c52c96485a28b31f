//! Stochastic game arenas: states, per-state action sets, weights and
//! probabilistic transitions on `(state, min action, max action)` triples.
//!
//! Weights and probabilities are exact rationals. Float copies are cached on
//! each [`Move`] for the iterative solvers.

mod chain;
mod schema;
mod strategy;

use std::collections::HashMap;

use num::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, Rational};

pub use chain::{induced_chain, simulate, FinitePlay, MarkovChain, Step};
pub use schema::{parse_arena, serialize_arena};
pub use strategy::StationaryStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    Min,
    Max,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Min => Player::Max,
            Player::Max => Player::Min,
        }
    }
}

/// Outcome of one action pair: the weight paid by Min to Max and the
/// successor distribution (sorted by state index, zero entries dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub weight: Rational,
    pub successors: Vec<(usize, Rational)>,
    pub weight_f64: f64,
    pub successors_f64: Vec<(usize, f64)>,
}

impl Move {
    fn new(weight: Rational, mut successors: Vec<(usize, Rational)>) -> Move {
        successors.retain(|(_, p)| !p.is_zero());
        successors.sort_by_key(|(s, _)| *s);
        let weight_f64 = to_f64(&weight);
        let successors_f64 = successors.iter().map(|(s, p)| (*s, to_f64(p))).collect();
        Move {
            weight,
            successors,
            weight_f64,
            successors_f64,
        }
    }

    pub fn is_point(&self) -> bool {
        self.successors.len() == 1
    }

    /// The unique successor of a point distribution.
    pub fn target(&self) -> Option<usize> {
        if self.is_point() {
            Some(self.successors[0].0)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arena {
    states: Vec<String>,
    index: HashMap<String, usize>,
    min_actions: Vec<Vec<String>>,
    max_actions: Vec<Vec<String>>,
    /// Row-major per state: `moves[s][a * |A_Max(s)| + b]`.
    moves: Vec<Vec<Move>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlayerCount {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArenaClass {
    pub turn_based: bool,
    pub deterministic: bool,
    pub players: PlayerCount,
}

impl ArenaClass {
    pub fn describe(&self) -> String {
        format!(
            "{}{}{}",
            match self.players {
                PlayerCount::One => "one-player ",
                PlayerCount::Two => "two-player ",
            },
            if self.deterministic { "deterministic " } else { "stochastic " },
            if self.turn_based { "turn-based" } else { "concurrent" }
        )
    }
}

impl Arena {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn min_actions(&self, s: usize) -> &[String] {
        &self.min_actions[s]
    }

    pub fn max_actions(&self, s: usize) -> &[String] {
        &self.max_actions[s]
    }

    pub fn actions(&self, player: Player, s: usize) -> &[String] {
        match player {
            Player::Min => &self.min_actions[s],
            Player::Max => &self.max_actions[s],
        }
    }

    pub fn mv(&self, s: usize, a: usize, b: usize) -> &Move {
        &self.moves[s][a * self.max_actions[s].len() + b]
    }

    /// All `(a, b, move)` triples at `s` in lexicographic action order.
    pub fn moves(&self, s: usize) -> impl Iterator<Item = (usize, usize, &Move)> + '_ {
        let nb = self.max_actions[s].len();
        self.moves[s]
            .iter()
            .enumerate()
            .map(move |(i, m)| (i / nb, i % nb, m))
    }

    /// The player with a real choice at `s`, if exactly one has it.
    /// States where neither player chooses report `None`.
    pub fn controller(&self, s: usize) -> Option<Player> {
        match (self.min_actions[s].len() > 1, self.max_actions[s].len() > 1) {
            (true, false) => Some(Player::Min),
            (false, true) => Some(Player::Max),
            _ => None,
        }
    }

    /// The only player with choices anywhere in a one-player arena
    /// (`None` when nobody ever chooses).
    pub fn sole_controller(&self) -> Option<Player> {
        let min = (0..self.num_states()).any(|s| self.min_actions[s].len() > 1);
        let max = (0..self.num_states()).any(|s| self.max_actions[s].len() > 1);
        match (min, max) {
            (true, false) => Some(Player::Min),
            (false, true) => Some(Player::Max),
            _ => None,
        }
    }

    pub fn classify(&self) -> ArenaClass {
        let n = self.num_states();
        let turn_based = (0..n).all(|s| self.min_actions[s].len() == 1 || self.max_actions[s].len() == 1);
        let deterministic = self.moves.iter().flatten().all(Move::is_point);
        let min_single = (0..n).all(|s| self.min_actions[s].len() == 1);
        let max_single = (0..n).all(|s| self.max_actions[s].len() == 1);
        ArenaClass {
            turn_based,
            deterministic,
            players: if min_single || max_single {
                PlayerCount::One
            } else {
                PlayerCount::Two
            },
        }
    }

    pub fn max_abs_weight(&self) -> Rational {
        self.moves
            .iter()
            .flatten()
            .map(|m| m.weight.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Same arena with every weight replaced by `f(weight)`.
    pub fn map_weights(&self, f: impl Fn(&Rational) -> Rational) -> Arena {
        let mut out = self.clone();
        for m in out.moves.iter_mut().flatten() {
            *m = Move::new(f(&m.weight), m.successors.clone());
        }
        out
    }

    pub fn scale_weights(&self, c: &Rational) -> Arena {
        self.map_weights(|w| w * c)
    }

    /// One-player arena obtained by fixing `strategy` for its owner: the
    /// owner keeps a single action `"*"` whose weight and successor
    /// distribution are the strategy-weighted averages.
    pub fn fix_strategy(&self, strategy: &StationaryStrategy) -> Result<Arena> {
        strategy.validate(self)?;
        let mut b = ArenaBuilder::new();
        for name in &self.states {
            b.add_state(name)?;
        }
        for s in 0..self.num_states() {
            let (mins, maxs): (Vec<String>, Vec<String>) = match strategy.owner() {
                Player::Min => (vec!["*".into()], self.max_actions[s].clone()),
                Player::Max => (self.min_actions[s].clone(), vec!["*".into()]),
            };
            b.set_actions(s, mins, maxs)?;
            let dist = strategy.distribution(s);
            let other = match strategy.owner() {
                Player::Min => self.max_actions[s].len(),
                Player::Max => self.min_actions[s].len(),
            };
            for o in 0..other {
                let mut weight = Rational::zero();
                let mut succ: Vec<Rational> = vec![Rational::zero(); self.num_states()];
                for (k, p) in dist.iter().enumerate() {
                    if p.is_zero() {
                        continue;
                    }
                    let m = match strategy.owner() {
                        Player::Min => self.mv(s, k, o),
                        Player::Max => self.mv(s, o, k),
                    };
                    weight += p * &m.weight;
                    for (t, q) in &m.successors {
                        succ[*t] += p * q;
                    }
                }
                let succ: Vec<(usize, Rational)> = succ.into_iter().enumerate().filter(|(_, q)| !q.is_zero()).collect();
                match strategy.owner() {
                    Player::Min => b.set_move(s, 0, o, weight, succ)?,
                    Player::Max => b.set_move(s, o, 0, weight, succ)?,
                }
            }
        }
        b.build()
    }
}

/// Incremental construction with full validation in [`ArenaBuilder::build`].
#[derive(Debug, Default)]
pub struct ArenaBuilder {
    states: Vec<String>,
    index: HashMap<String, usize>,
    min_actions: Vec<Vec<String>>,
    max_actions: Vec<Vec<String>>,
    moves: Vec<Vec<Option<(Rational, Vec<(usize, Rational)>)>>>,
}

fn check_id(kind: &str, id: &str) -> Result<()> {
    if id.is_empty() || id.contains('|') {
        return Err(Error::Semantic(format!(
            "{kind} id {id:?} must be nonempty and must not contain '|'"
        )));
    }
    Ok(())
}

impl ArenaBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_state(&mut self, name: &str) -> Result<usize> {
        check_id("state", name)?;
        if self.index.contains_key(name) {
            return Err(Error::Semantic(format!("duplicate state id {name:?}")));
        }
        let i = self.states.len();
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.min_actions.push(Vec::new());
        self.max_actions.push(Vec::new());
        self.moves.push(Vec::new());
        Ok(i)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn set_actions(&mut self, s: usize, min: Vec<String>, max: Vec<String>) -> Result<()> {
        let name = &self.states[s];
        for (kind, list) in [("Min", &min), ("Max", &max)] {
            if list.is_empty() {
                return Err(Error::Semantic(format!("state {name:?} has no {kind} actions")));
            }
            for (i, a) in list.iter().enumerate() {
                check_id("action", a)?;
                if list[..i].contains(a) {
                    return Err(Error::Semantic(format!("duplicate {kind} action {a:?} at state {name:?}")));
                }
            }
        }
        self.moves[s] = vec![None; min.len() * max.len()];
        self.min_actions[s] = min;
        self.max_actions[s] = max;
        Ok(())
    }

    pub fn set_move(
        &mut self,
        s: usize,
        a: usize,
        b: usize,
        weight: Rational,
        successors: Vec<(usize, Rational)>,
    ) -> Result<()> {
        let nb = self.max_actions[s].len();
        if a >= self.min_actions[s].len() || b >= nb {
            return Err(Error::Semantic(format!("action index out of range at state {:?}", self.states[s])));
        }
        self.moves[s][a * nb + b] = Some((weight, successors));
        Ok(())
    }

    /// Name-based variant of [`ArenaBuilder::set_move`].
    pub fn set(
        &mut self,
        s: &str,
        a: &str,
        b: &str,
        weight: Rational,
        successors: &[(&str, Rational)],
    ) -> Result<()> {
        let si = self.lookup(s)?;
        let ai = self.min_actions[si]
            .iter()
            .position(|x| x == a)
            .ok_or_else(|| Error::Semantic(format!("unknown Min action {a:?} at state {s:?}")))?;
        let bi = self.max_actions[si]
            .iter()
            .position(|x| x == b)
            .ok_or_else(|| Error::Semantic(format!("unknown Max action {b:?} at state {s:?}")))?;
        let succ = successors
            .iter()
            .map(|(t, p)| Ok((self.lookup(t)?, p.clone())))
            .collect::<Result<Vec<_>>>()?;
        self.set_move(si, ai, bi, weight, succ)
    }

    fn lookup(&self, name: &str) -> Result<usize> {
        self.state_index(name)
            .ok_or_else(|| Error::Semantic(format!("unknown state id {name:?}")))
    }

    pub fn build(self) -> Result<Arena> {
        if self.states.is_empty() {
            return Err(Error::Semantic("arena has no states".into()));
        }
        let mut moves = Vec::with_capacity(self.states.len());
        for (s, row) in self.moves.into_iter().enumerate() {
            let name = &self.states[s];
            if self.min_actions[s].is_empty() || self.max_actions[s].is_empty() {
                return Err(Error::Semantic(format!("state {name:?} has no actions")));
            }
            let nb = self.max_actions[s].len();
            let mut out = Vec::with_capacity(row.len());
            for (i, m) in row.into_iter().enumerate() {
                let triple = format!("{}|{}|{}", name, self.min_actions[s][i / nb], self.max_actions[s][i % nb]);
                let (w, succ) = m.ok_or_else(|| Error::Semantic(format!("missing weight/transition for {triple}")))?;
                let mut total = Rational::zero();
                let mut seen = vec![false; self.states.len()];
                for (t, p) in &succ {
                    if *t >= self.states.len() {
                        return Err(Error::Semantic(format!("unknown successor in {triple}")));
                    }
                    if seen[*t] {
                        return Err(Error::Semantic(format!("duplicate successor {:?} in {triple}", self.states[*t])));
                    }
                    seen[*t] = true;
                    if p.is_negative() {
                        return Err(Error::Semantic(format!(
                            "negative probability {} in {triple}",
                            format_rational(p)
                        )));
                    }
                    total += p;
                }
                if !total.is_one() {
                    return Err(Error::Semantic(format!(
                        "distribution sums to {} (not 1) for {triple}",
                        display_sum(&total)
                    )));
                }
                out.push(Move::new(w, succ));
            }
            moves.push(out);
        }
        Ok(Arena {
            states: self.states,
            index: self.index,
            min_actions: self.min_actions,
            max_actions: self.max_actions,
            moves,
        })
    }
}

fn display_sum(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// The one-player deterministic arena of the unbounded-memory example:
/// `s0 -a/4-> s1`, `s1 -a/-2-> s0`, `s1 -b/-1-> s1`, Min controls.
pub fn fig1_arena() -> Arena {
    parse_arena(FIG1_JSON).expect("bundled arena is valid")
}

pub const FIG1_JSON: &str = include_str!("../../data/fig1.json");
