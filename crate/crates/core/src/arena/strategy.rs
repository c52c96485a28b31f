use indexmap::IndexMap;
use num::{One, Signed, Zero};

use super::{Arena, Player};
use crate::error::{Error, Result};
use crate::rational::{approximate, format_rational, parse_rational, Rational};

/// History-independent mixed strategy: one distribution per state over
/// that state's actions for `owner`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryStrategy {
    owner: Player,
    choice: Vec<Vec<Rational>>,
}

impl StationaryStrategy {
    pub fn new(owner: Player, choice: Vec<Vec<Rational>>) -> Self {
        StationaryStrategy { owner, choice }
    }

    /// Pure strategy picking action index `picks[s]` at every state.
    pub fn positional(arena: &Arena, owner: Player, picks: &[usize]) -> Self {
        let choice = picks
            .iter()
            .enumerate()
            .map(|(s, &k)| {
                let mut d = vec![Rational::zero(); arena.actions(owner, s).len()];
                d[k] = Rational::one();
                d
            })
            .collect();
        StationaryStrategy { owner, choice }
    }

    pub fn uniform(arena: &Arena, owner: Player) -> Self {
        let choice = (0..arena.num_states())
            .map(|s| {
                let n = arena.actions(owner, s).len();
                vec![Rational::new(1.into(), (n as i64).into()); n]
            })
            .collect();
        StationaryStrategy { owner, choice }
    }

    /// Turns float probabilities into exact distributions: tiny negatives
    /// are clipped, values snapped to nearby simple fractions, and the
    /// largest entry absorbs the rounding so each row sums to exactly 1.
    pub fn from_f64(owner: Player, rows: &[Vec<f64>]) -> Self {
        let choice = rows
            .iter()
            .map(|row| {
                let mut d: Vec<Rational> = row
                    .iter()
                    .map(|&p| if p <= 1e-12 { Rational::zero() } else { approximate(p) })
                    .collect();
                let big = row
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, p)| if *p > row[best] { i } else { best });
                let rest: Rational = d.iter().enumerate().filter(|(i, _)| *i != big).map(|(_, p)| p.clone()).sum();
                d[big] = Rational::one() - rest;
                if d[big].is_negative() {
                    d = vec![Rational::zero(); row.len()];
                    d[big] = Rational::one();
                }
                d
            })
            .collect();
        StationaryStrategy { owner, choice }
    }

    pub fn owner(&self) -> Player {
        self.owner
    }

    pub fn distribution(&self, s: usize) -> &[Rational] {
        &self.choice[s]
    }

    pub fn set(&mut self, s: usize, dist: Vec<Rational>) {
        self.choice[s] = dist;
    }

    pub fn is_positional(&self) -> bool {
        self.choice
            .iter()
            .all(|d| d.iter().filter(|p| !p.is_zero()).count() == 1 && d.iter().any(|p| p.is_one()))
    }

    /// The chosen action index at `s` for a point distribution.
    pub fn pick(&self, s: usize) -> Option<usize> {
        let d = &self.choice[s];
        let i = d.iter().position(|p| !p.is_zero())?;
        d[i].is_one().then_some(i)
    }

    pub fn validate(&self, arena: &Arena) -> Result<()> {
        if self.choice.len() != arena.num_states() {
            return Err(Error::StrategyMismatch(format!(
                "strategy covers {} states, arena has {}",
                self.choice.len(),
                arena.num_states()
            )));
        }
        for (s, d) in self.choice.iter().enumerate() {
            let name = arena.state_name(s);
            if d.len() != arena.actions(self.owner, s).len() {
                return Err(Error::StrategyMismatch(format!("wrong number of actions at state {name:?}")));
            }
            if d.iter().any(|p| p.is_negative()) {
                return Err(Error::StrategyMismatch(format!("negative probability at state {name:?}")));
            }
            let total: Rational = d.iter().sum();
            if !total.is_one() {
                return Err(Error::StrategyMismatch(format!(
                    "probabilities at state {name:?} sum to {}",
                    format_rational(&total)
                )));
            }
        }
        Ok(())
    }

    /// `{state: {action: "num/den"}}`, zero entries omitted.
    pub fn to_json(&self, arena: &Arena) -> serde_json::Value {
        let mut out = serde_json::Map::new();
        for (s, d) in self.choice.iter().enumerate() {
            let mut row = serde_json::Map::new();
            for (k, p) in d.iter().enumerate() {
                if !p.is_zero() {
                    row.insert(arena.actions(self.owner, s)[k].clone(), format_rational(p).into());
                }
            }
            out.insert(arena.state_name(s).to_string(), row.into());
        }
        out.into()
    }

    /// Inverse of [`StationaryStrategy::to_json`]. States missing from the
    /// document default to the uniform distribution.
    pub fn from_json(arena: &Arena, owner: Player, text: &str) -> Result<Self> {
        let doc: IndexMap<String, IndexMap<String, String>> = serde_json::from_str(text).map_err(|e| Error::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut out = StationaryStrategy::uniform(arena, owner);
        for (state, row) in &doc {
            let s = arena
                .state_index(state)
                .ok_or_else(|| Error::StrategyMismatch(format!("unknown state {state:?}")))?;
            let mut d = vec![Rational::zero(); arena.actions(owner, s).len()];
            for (action, p) in row {
                let k = arena
                    .actions(owner, s)
                    .iter()
                    .position(|x| x == action)
                    .ok_or_else(|| Error::StrategyMismatch(format!("action {action:?} unavailable at {state:?}")))?;
                d[k] = parse_rational(p)?;
            }
            out.choice[s] = d;
        }
        out.validate(arena)?;
        Ok(out)
    }
}
